#include "gfra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "gfra/framing.hpp"

namespace gfra {

MatrixXcd dft_unitary(int N) {
  MatrixXcd F(N, N);
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n) {
      const double ang = -2.0 * M_PI * m * n / N;
      F(m, n) = s * cd(std::cos(ang), std::sin(ang));
    }
  return F;
}

namespace {

// std::map keeps node addresses stable across inserts from other threads
const MatrixXcd& dft_cached(int N) {
  static std::mutex mu;
  static std::map<int, MatrixXcd> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, dft_unitary(N)).first;
  return it->second;
}

}  // namespace

VectorXcd steering_vector(int N, double phi) {
  VectorXcd a(N);
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n) {
    const double ang = -2.0 * M_PI * n * phi;
    a[n] = s * cd(std::cos(ang), std::sin(ang));
  }
  return a;
}

ChannelRealization sample_activity(const SystemConfig& cfg, Rng& rng) {
  if (cfg.Ka > cfg.K) throw InvalidConfig("Ka exceeds K");
  ChannelRealization ch;
  ch.activity.assign(cfg.K, 0);
  // partial Fisher-Yates over [1..K]
  std::vector<int> idx(cfg.K);
  for (int i = 0; i < cfg.K; ++i) idx[i] = i + 1;
  for (int i = 0; i < cfg.Ka; ++i) {
    const int j = i + rng.uniform_int(0, cfg.K - 1 - i);
    std::swap(idx[i], idx[j]);
  }
  ch.active_set.assign(idx.begin(), idx.begin() + cfg.Ka);
  std::sort(ch.active_set.begin(), ch.active_set.end());
  for (int k : ch.active_set) ch.activity[k - 1] = 1;
  return ch;
}

void gen_channel(const SystemConfig& cfg, ChannelRealization& ch, Rng& rng) {
  if (cfg.P_min < 1 || cfg.P_max_paths < cfg.P_min) throw InvalidConfig("empty multipath range");
  if (cfg.d_min_km <= 0.0) throw InvalidConfig("nonpositive distance");
  const int N = cfg.N, K = cfg.K;
  ch.G = MatrixXcd::Zero(N, K);
  ch.distances_km = VectorXd::Zero(K);
  ch.rho = VectorXd::Zero(K);
  const double half_delta = 0.5 * cfg.angular_spread_deg;  // table value is the full spread
  for (int k : ch.active_set) {
    const int c = k - 1;
    const double d = rng.uniform(cfg.d_min_km, cfg.d_max_km);
    ch.distances_km[c] = d;
    const double ptx = cfg.atpc_enabled ? atpc_power_mw(d, cfg) : cfg.pmax_mw();
    ch.rho[c] = std::sqrt(ptx / cfg.pathloss_linear(d));
    const int paths = rng.uniform_int(cfg.P_min, cfg.P_max_paths);
    const double psi0 = rng.uniform(-90.0, 90.0);
    VectorXcd g = VectorXcd::Zero(N);
    for (int p = 0; p < paths; ++p) {
      const double psi = rng.uniform(psi0 - half_delta, psi0 + half_delta);
      const double phi = 0.5 * std::sin(psi * M_PI / 180.0);
      g += rng.cnormal(1.0) * steering_vector(N, phi);
    }
    ch.G.col(c) = ch.rho[c] * g;
  }
  ch.H = dft_cached(N) * ch.G;
}

AngularObservation synthesize_observation(const SystemConfig& cfg, const ChannelRealization& ch,
                                          const MatrixXcd& X, Rng& rng) {
  if (X.rows() != cfg.K || ch.G.rows() != cfg.N)
    throw InvalidConfig("dimension mismatch in synthesize_observation");
  AngularObservation obs;
  obs.L = static_cast<int>(X.cols());
  obs.noise_var = cfg.noise_var();
  MatrixXcd R = ch.G * X;
  if (obs.noise_var > 0.0) {
    for (int l = 0; l < obs.L; ++l)
      for (int n = 0; n < cfg.N; ++n) R(n, l) += rng.cnormal(obs.noise_var);
  }
  obs.Y = dft_cached(cfg.N) * R;
  return obs;
}

}  // namespace gfra

#include "gfra/bigamp.hpp"

#include <cmath>

#include "gfra/pilot_amp.hpp"

namespace gfra {

namespace {
constexpr double kNoiseFloor = 1e-13;
constexpr double kExpClamp = 700.0;

inline ArrayXXd floored(const ArrayXXd& a, double f = kVarFloor) { return a.max(f); }
}  // namespace

SpikeSlabPrior SpikeSlabPrior::uniform(int rows, int cols, double gamma0, double tau0) {
  SpikeSlabPrior p;
  p.gamma = ArrayXXd::Constant(rows, cols, gamma0);
  p.mu = ArrayXXcd::Zero(rows, cols);
  p.tau = ArrayXXd::Constant(rows, cols, tau0);
  return p;
}

PosteriorZ posterior_z(cd y, cd p_hat, double v_p, double noise_var) {
  const double s2 = std::max(noise_var, kNoiseFloor);
  const double vp = std::max(v_p, kVarFloor);
  const double den = s2 + vp;
  return {(y * vp + s2 * p_hat) / den, s2 * vp / den};
}

PosteriorH posterior_h(cd q_hat, double v_q, double gamma, cd mu, double tau) {
  const double vq = std::max(v_q, kVarFloor);
  const double t = std::max(tau, kVarFloor);
  PosteriorH out;
  out.v_d = t * vq / (t + vq);
  out.d_hat = (mu * vq + t * q_hat) / (t + vq);
  double L = std::log(vq / (t + vq)) + std::norm(q_hat) / vq - std::norm(q_hat - mu) / (t + vq);
  L = std::clamp(L, -kExpClamp, kExpClamp);
  out.pi = gamma / (gamma + (1.0 - gamma) * std::exp(-L));
  out.h_hat = out.pi * out.d_hat;
  out.v_h = std::max(out.pi * (std::norm(out.d_hat) + out.v_d) - std::norm(out.h_hat), 0.0);
  return out;
}

PosteriorX posterior_x(cd r_hat, double v_r, const VectorXcd& constellation) {
  const double vr = std::max(v_r, kVarFloor);
  const int m = static_cast<int>(constellation.size());
  double emax = -1e300;
  std::vector<double> e(m);
  for (int i = 0; i < m; ++i) {
    const cd s = constellation[i];
    e[i] = (2.0 * std::real(std::conj(r_hat) * s) - std::norm(s)) / vr;
    emax = std::max(emax, e[i]);
  }
  double wsum = 0.0, x2 = 0.0;
  cd xs(0.0, 0.0);
  for (int i = 0; i < m; ++i) {
    const double w = std::exp(e[i] - emax);
    wsum += w;
    xs += w * constellation[i];
    x2 += w * std::norm(constellation[i]);
  }
  PosteriorX out;
  out.x_hat = xs / wsum;
  out.v_x = std::max(x2 / wsum - std::norm(out.x_hat), 0.0);
  return out;
}

void em_update(AmpState& st, const MatrixXcd& Y) {
  const int n = static_cast<int>(Y.rows());
  const int l = static_cast<int>(Y.cols());
  // noise variance (Algorithm line as printed)
  const double s2 = std::max(st.noise_var, kNoiseFloor);
  const ArrayXXd vp = st.p_var.max(kVarFloor);
  const ArrayXXd res2 = (Y - st.p_hat).cwiseAbs2().array();
  const double s2_new =
      ((res2 / (1.0 + vp / s2)) + s2 * vp / (s2 + vp)).sum() / static_cast<double>(n * l);
  st.noise_var = std::max(s2_new, kNoiseFloor);

  // per-device aggregation over the antenna axis
  const int ka = static_cast<int>(st.pi.cols());
  for (int k = 0; k < ka; ++k) {
    const double den = std::max(st.pi.col(k).sum(), kVarFloor);
    const cd mu_new = (st.pi.col(k) * st.d_mean.col(k).array()).sum() / den;
    const ArrayXd dev = (st.d_mean.col(k).array() - st.prior.mu.col(k)).abs2() + st.d_var.col(k);
    const double tau_new = (st.pi.col(k) * dev).sum() / den;
    const double gamma_new =
        std::clamp(st.pi.col(k).mean(), 1e-6, 1.0 - 1e-6);
    st.prior.mu.col(k).setConstant(mu_new);
    st.prior.tau.col(k).setConstant(std::max(tau_new, kVarFloor));
    st.prior.gamma.col(k).setConstant(gamma_new);
  }
}

BigAmpResult run_bigamp(const MatrixXcd& Y, int ka, AmpState st, const BigAmpOptions& opt) {
  if (ka < 1) throw InvalidConfig("run_bigamp requires ka >= 1");
  const int n = static_cast<int>(Y.rows());
  const int l = static_cast<int>(Y.cols());
  if (st.h_mean.rows() != n || st.h_mean.cols() != ka || st.x_mean.rows() != ka ||
      st.x_mean.cols() != l)
    throw InvalidConfig("run_bigamp: init state dimensions inconsistent");
  if (opt.constellation.size() == 0) throw InvalidConfig("run_bigamp: empty constellation");

  if (st.g_mean.size() == 0) st.g_mean = MatrixXcd::Zero(n, l);
  if (st.g_var.size() == 0) st.g_var = ArrayXXd::Zero(n, l);
  st.p_hat = MatrixXcd::Zero(n, l);

  BigAmpResult out;
  double beta = opt.damping;
  double prev_res = std::numeric_limits<double>::infinity();
  MatrixXcd p_prev;

  for (int u = 1; u <= opt.max_iter; ++u) {
    st.iter = u;
    const ArrayXXd ah2 = st.h_mean.cwiseAbs2().array();
    const ArrayXXd ax2 = st.x_mean.cwiseAbs2().array();

    // plug-in estimate and Onsager correction
    const ArrayXXd vbar_p =
        (ah2.matrix() * st.x_var.matrix()).array() + (st.h_var.matrix() * ax2.matrix()).array();
    const MatrixXcd pbar = st.h_mean * st.x_mean;
    st.p_var = floored(vbar_p + (st.h_var.matrix() * st.x_var.matrix()).array());
    st.p_hat = pbar - st.g_mean.cwiseProduct(vbar_p.matrix());

    const double res = (Y - pbar).squaredNorm();
    out.residual_trace.push_back(res);
    if (opt.truth_h) {
      const double nh = opt.truth_h->squaredNorm();
      out.nmse_trace.push_back((st.h_mean - *opt.truth_h).squaredNorm() / std::max(nh, 1e-300));
    }
    // adaptive damping: halve on residual increase
    if (res > prev_res)
      beta = std::max(opt.min_damping, 0.5 * beta);
    else
      beta = std::min(opt.damping, 1.1 * beta);
    prev_res = res;

    // AWGN posterior of the noiseless signal
    const double s2 = std::max(st.noise_var, kNoiseFloor);
    const ArrayXXd den_z = s2 + st.p_var;
    const ArrayXXd vz = s2 * st.p_var / den_z;
    const MatrixXcd zhat =
        ((Y.array() * st.p_var) + s2 * st.p_hat.array()).matrix().cwiseQuotient(den_z.matrix());

    // scaled residual (damped)
    const ArrayXXd vg_raw = ((1.0 - vz / st.p_var) / st.p_var).max(0.0);
    const MatrixXcd g_raw = (zhat - st.p_hat).cwiseQuotient(st.p_var.matrix());
    st.g_mean = beta * g_raw + (1.0 - beta) * st.g_mean;
    st.g_var = beta * vg_raw + (1.0 - beta) * st.g_var;

    // channel pseudo-observation q = h + CN(0, v_q)
    const ArrayXXd vq = 1.0 / (st.g_var.matrix() * ax2.matrix().transpose()).array().max(kVarFloor);
    const MatrixXcd qhat =
        st.h_mean.cwiseProduct(
            (1.0 - vq * (st.g_var.matrix() * st.x_var.matrix().transpose()).array()).matrix()) +
        vq.matrix().cwiseProduct(st.g_mean * st.x_mean.adjoint());

    // signal pseudo-observation r = x + CN(0, v_r)
    const ArrayXXd vr =
        1.0 / (ah2.matrix().transpose() * st.g_var.matrix()).array().max(kVarFloor);
    const MatrixXcd rhat =
        st.x_mean.cwiseProduct(
            (1.0 - vr * (st.h_var.matrix().transpose() * st.g_var.matrix()).array()).matrix()) +
        vr.matrix().cwiseProduct(st.h_mean.adjoint() * st.g_mean);

    // spike-and-slab posterior of h (element-wise, vectorized)
    const ArrayXXd tau = st.prior.tau.max(kVarFloor);
    const ArrayXXd vq_f = vq.max(kVarFloor);
    const ArrayXXd den_d = tau + vq_f;
    st.d_var = tau * vq_f / den_d;
    st.d_mean = ((st.prior.mu * vq_f) + tau * qhat.array()).matrix().cwiseQuotient(den_d.matrix());
    ArrayXXd Lex = (vq_f / den_d).log() + qhat.cwiseAbs2().array() / vq_f -
                   (qhat.array() - st.prior.mu).abs2() / den_d;
    Lex = Lex.min(kExpClamp).max(-kExpClamp);
    st.pi = st.prior.gamma / (st.prior.gamma + (1.0 - st.prior.gamma) * (-Lex).exp());
    const MatrixXcd h_raw = st.pi.matrix().cwiseProduct(st.d_mean);
    const ArrayXXd vh_raw =
        (st.pi * (st.d_mean.cwiseAbs2().array() + st.d_var) - h_raw.cwiseAbs2().array()).max(0.0);

    // constellation posterior of x (log-sum-exp over the M points)
    const int m = static_cast<int>(opt.constellation.size());
    ArrayXXd emax = ArrayXXd::Constant(ka, l, -1e300);
    std::vector<ArrayXXd> ex(m);
    for (int i = 0; i < m; ++i) {
      const cd s = opt.constellation[i];
      ex[i] = (2.0 * (rhat.conjugate().array() * s).real() - std::norm(s)) / vr;
      emax = emax.max(ex[i]);
    }
    ArrayXXd wsum = ArrayXXd::Zero(ka, l);
    ArrayXXcd xs = ArrayXXcd::Zero(ka, l);
    ArrayXXd x2s = ArrayXXd::Zero(ka, l);
    for (int i = 0; i < m; ++i) {
      const ArrayXXd w = (ex[i] - emax).exp();
      wsum += w;
      xs += w.cast<cd>() * opt.constellation[i];
      x2s += w * std::norm(opt.constellation[i]);
    }
    const MatrixXcd x_raw = (xs / wsum.cast<cd>()).matrix();
    const ArrayXXd vx_raw = (x2s / wsum - x_raw.cwiseAbs2().array()).max(0.0);

    // EM refresh of hyper-parameters (uses this iteration's caches)
    em_update(st, Y);

    // damped state update
    st.h_mean = beta * h_raw + (1.0 - beta) * st.h_mean;
    st.h_var = floored(beta * vh_raw + (1.0 - beta) * st.h_var);
    st.x_mean = beta * x_raw + (1.0 - beta) * st.x_mean;
    st.x_var = floored(beta * vx_raw + (1.0 - beta) * st.x_var);

    if (!st.h_mean.allFinite() || !st.x_mean.allFinite() || !st.p_hat.allFinite())
      throw NumericalError("BiG-AMP state diverged to non-finite values at iteration " +
                           std::to_string(u));

    out.iters = u;
    if (u >= 2) {
      const double num = (st.p_hat - p_prev).squaredNorm();
      const double den = std::max(st.p_hat.squaredNorm(), 1e-300);
      if (num / den <= opt.eps) {
        out.converged = true;
        p_prev = st.p_hat;
        break;
      }
    }
    p_prev = st.p_hat;
  }

  out.H_act = st.h_mean;
  out.X_act = st.x_mean;
  out.state = std::move(st);
  return out;
}

AmpState random_init(const MatrixXcd& Y, int ka, const VectorXcd& constellation, Rng& rng) {
  const int n = static_cast<int>(Y.rows());
  const int l = static_cast<int>(Y.cols());
  const double vh = Y.squaredNorm() / std::max(1.0, static_cast<double>(n) * l * ka);
  AmpState st;
  st.h_mean = MatrixXcd::Zero(n, ka);
  for (int k = 0; k < ka; ++k)
    for (int i = 0; i < n; ++i) st.h_mean(i, k) = rng.cnormal(vh);
  st.h_var = ArrayXXd::Constant(n, ka, vh);
  st.x_mean = MatrixXcd::Zero(ka, l);
  const int m = static_cast<int>(constellation.size());
  for (int k = 0; k < ka; ++k)
    for (int j = 0; j < l; ++j) st.x_mean(k, j) = constellation[rng.uniform_int(0, m - 1)];
  st.x_var = ArrayXXd::Constant(ka, l, 1.0);
  const double gamma0 = 0.1;
  st.prior = SpikeSlabPrior::uniform(n, ka, gamma0, vh / gamma0);
  st.noise_var = Y.squaredNorm() / (static_cast<double>(n) * l * 101.0);
  return st;
}

RiInitResult ri_init(const MatrixXcd& Y, const SystemConfig& cfg, const MatrixXcd& Xr, int ka) {
  if (ka < 1) throw InvalidConfig("ri_init requires ka >= 1");
  const int lp = static_cast<int>(Xr.cols());
  if (lp < 1 || Y.cols() < lp) throw InvalidConfig("ri_init: reference block too long");
  const int n = static_cast<int>(Y.rows());
  const int krem = static_cast<int>(Xr.rows());

  PilotAmpOptions popt;
  popt.max_iter = cfg.pilot_amp_iters > 0 ? cfg.pilot_amp_iters : cfg.U;
  popt.damping = cfg.pilot_amp_damping;
  popt.theta_add = cfg.theta_add;
  popt.eps = cfg.eps_amp;
  popt.gamma0 = std::min(0.9, static_cast<double>(ka) / std::max(1, krem));
  // the common pilot column is identical across devices and carries no
  // device discrimination; feeding a constant column to AMP only hurts
  PilotAmpResult pr = joint_add_ce(Y.middleCols(1, lp - 1), Xr.rightCols(lp - 1), popt);

  // the ka most probable devices
  std::vector<int> idx(krem);
  for (int i = 0; i < krem; ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + std::min(ka, krem), idx.end(),
                    [&](int a, int b) { return pr.support[a] > pr.support[b]; });
  RiInitResult out;
  out.selected.assign(idx.begin(), idx.begin() + std::min(ka, krem));
  std::sort(out.selected.begin(), out.selected.end());

  AmpState st;
  st.h_mean = MatrixXcd::Zero(n, ka);
  st.h_var = ArrayXXd::Constant(n, ka, kVarFloor);
  st.prior.gamma = ArrayXXd::Constant(n, ka, 0.5);
  st.prior.mu = ArrayXXcd::Zero(n, ka);
  st.prior.tau = ArrayXXd::Constant(n, ka, 1.0);
  for (int j = 0; j < static_cast<int>(out.selected.size()); ++j) {
    const int k = out.selected[j];
    st.h_mean.col(j) = pr.H.col(k);
    st.h_var.col(j) = pr.h_var.col(k).max(1e-6);
    st.prior.gamma.col(j) = pr.prior.gamma.col(k);
    st.prior.mu.col(j) = pr.prior.mu.col(k);
    st.prior.tau.col(j) = pr.prior.tau.col(k);
  }
  const int ld = static_cast<int>(Y.cols()) - lp;
  st.x_mean = MatrixXcd::Zero(ka, static_cast<int>(Y.cols()));
  for (int j = 0; j < static_cast<int>(out.selected.size()); ++j)
    st.x_mean.row(j).head(lp) = Xr.row(out.selected[j]);
  if (ld > 0) {
    MatrixXcd h_sel(n, out.selected.size());
    for (int j = 0; j < static_cast<int>(out.selected.size()); ++j) h_sel.col(j) = st.h_mean.col(j);
    const MatrixXcd xd = ls_data_detect(Y.rightCols(ld), h_sel);
    for (int j = 0; j < static_cast<int>(out.selected.size()); ++j)
      st.x_mean.row(j).tail(ld) = xd.row(j);
  }
  st.x_var = ArrayXXd::Constant(ka, static_cast<int>(Y.cols()), 0.5);
  st.x_var.leftCols(lp) = 1e-2;
  st.noise_var = pr.noise_var;
  out.state = std::move(st);
  return out;
}

}  // namespace gfra

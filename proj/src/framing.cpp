#include "gfra/framing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gfra {

BitVec crc_encode(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> poly) {
  if (poly.empty() || poly.front() != 1) throw InvalidConfig("CRC poly must start with 1");
  if (msg.empty()) throw InvalidConfig("CRC over empty message");
  const size_t deg = poly.size() - 1;
  BitVec work(msg.begin(), msg.end());
  work.insert(work.end(), deg, 0);
  for (size_t i = 0; i < msg.size(); ++i) {
    if (!work[i]) continue;
    for (size_t j = 0; j < poly.size(); ++j) work[i + j] ^= poly[j];
  }
  return BitVec(work.end() - deg, work.end());
}

bool crc_check(std::span<const std::uint8_t> field, std::span<const std::uint8_t> crc,
               std::span<const std::uint8_t> poly) {
  BitVec r = crc_encode(field, poly);
  if (r.size() != crc.size()) return false;
  return std::equal(r.begin(), r.end(), crc.begin());
}

VectorXcd psk_constellation(int M) {
  if (M < 2 || (M & (M - 1)) != 0) throw InvalidConfig("PSK order must be a power of two");
  VectorXcd s(M);
  for (int b = 0; b < M; ++b) {
    const int gray = b ^ (b >> 1);
    const double ang = 2.0 * M_PI * gray / M;
    s[b] = cd(std::cos(ang), std::sin(ang));
  }
  return s;
}

cd pilot_symbol() { return cd(1.0, 0.0); }

BitVec id_bits(int device_k, int bi) {
  BitVec out(bi, 0);
  for (int i = 0; i < bi; ++i) out[bi - 1 - i] = (device_k >> i) & 1;
  return out;
}

int bits_to_uint(std::span<const std::uint8_t> bits) {
  int v = 0;
  for (auto b : bits) v = (v << 1) | (b & 1);
  return v;
}

PacketLayout packet_layout(const SystemConfig& cfg, DeviceMode dm) {
  PacketLayout lay;
  lay.has_mode_bit = cfg.mode == Mode::kCoexistNonOrthogonal;
  const int off = lay.has_mode_bit ? 1 : 0;
  const int bd = cfg.payload_bits(dm);
  const bool sourced_layout =
      dm == DeviceMode::kSourced && cfg.mode != Mode::kUnsourced;
  if (sourced_layout) {
    const int bi = cfg.bi();
    for (int i = 0; i < bi; ++i) lay.idx_id.push_back(off + i);
    for (int i = 0; i < cfg.Bc; ++i) lay.idx_crc.push_back(off + bi + i);
    for (int i = 0; i < bd; ++i) lay.idx_data.push_back(off + bi + cfg.Bc + i);
  } else {
    for (int i = 0; i < bd; ++i) lay.idx_data.push_back(off + i);
    for (int i = 0; i < cfg.Bc; ++i) lay.idx_crc.push_back(off + bd + i);
  }
  lay.B = cfg.bits_per_packet(dm);
  return lay;
}

BitVec build_packet(int device_k, std::span<const std::uint8_t> payload, const SystemConfig& cfg,
                    DeviceMode dm) {
  const BitVec poly = cfg.effective_crc_poly();
  const bool sourced_layout =
      dm == DeviceMode::kSourced && cfg.mode != Mode::kUnsourced;
  if (sourced_layout && (device_k < 1 || device_k > cfg.K))
    throw InvalidConfig("device index out of range");
  if (static_cast<int>(payload.size()) != cfg.payload_bits(dm))
    throw InvalidConfig("payload length mismatch");

  BitVec pkt;
  if (cfg.mode == Mode::kCoexistNonOrthogonal)
    pkt.push_back(dm == DeviceMode::kSourced ? 1 : 0);
  if (sourced_layout) {
    BitVec id = id_bits(device_k, cfg.bi());
    BitVec crc = crc_encode(id, poly);
    pkt.insert(pkt.end(), id.begin(), id.end());
    pkt.insert(pkt.end(), crc.begin(), crc.end());
    pkt.insert(pkt.end(), payload.begin(), payload.end());
  } else {
    BitVec crc = crc_encode(payload, poly);
    pkt.insert(pkt.end(), payload.begin(), payload.end());
    pkt.insert(pkt.end(), crc.begin(), crc.end());
  }
  return pkt;
}

VectorXcd modulate(std::span<const std::uint8_t> bits, const SystemConfig& cfg) {
  const VectorXcd s = psk_constellation(cfg.M);
  const int bps = cfg.bits_per_symbol();
  const int nsym = (static_cast<int>(bits.size()) + bps - 1) / bps;
  VectorXcd x(nsym + 1);
  x[0] = pilot_symbol();
  for (int i = 0; i < nsym; ++i) {
    int b = 0;
    for (int j = 0; j < bps; ++j) {
      const int idx = i * bps + j;
      const int bit = idx < static_cast<int>(bits.size()) ? bits[idx] : 0;  // zero-pad tail
      b = (b << 1) | bit;
    }
    x[i + 1] = s[b];
  }
  return x;
}

BitVec demodulate(const VectorXcd& symbols, int n_bits, int M) {
  const VectorXcd s = psk_constellation(M);
  const int bps = static_cast<int>(std::log2(M));
  BitVec out;
  out.reserve(symbols.size() * bps);
  for (int i = 0; i < symbols.size(); ++i) {
    int best = 0;
    double bestd = std::norm(symbols[i] - s[0]);
    for (int m = 1; m < M; ++m) {
      const double d = std::norm(symbols[i] - s[m]);
      if (d < bestd - 1e-15) {  // strict improvement; ties keep lowest index
        bestd = d;
        best = m;
      }
    }
    for (int j = bps - 1; j >= 0; --j) out.push_back((best >> j) & 1);
  }
  if (static_cast<int>(out.size()) < n_bits) throw InvalidConfig("too few symbols to demodulate");
  out.resize(n_bits);  // strip pad bits
  return out;
}

double atpc_power_mw(double d_km, const SystemConfig& cfg) {
  if (d_km <= 0.0) throw InvalidConfig("nonpositive distance");
  return cfg.pmax_mw() * std::pow(d_km / cfg.d_max_km, cfg.atpc_alpha);
}

FrameSet build_frames(const SystemConfig& cfg, const std::vector<int>& active_set, Rng& rng) {
  FrameSet fs;
  fs.L = cfg.frame_len();
  fs.Lr = cfg.ref_len();
  fs.layout = packet_layout(cfg, DeviceMode::kSourced);
  fs.bits.assign(cfg.K, {});
  fs.dev_mode.assign(cfg.K, DeviceMode::kSourced);
  fs.X = MatrixXcd::Zero(cfg.K, fs.L);
  for (int k = 1; k <= cfg.K; ++k) {
    if (cfg.mode == Mode::kCoexistNonOrthogonal && k > cfg.K / 2)
      fs.dev_mode[k - 1] = DeviceMode::kUnsourced;
    if (cfg.mode == Mode::kUnsourced) fs.dev_mode[k - 1] = DeviceMode::kUnsourced;
  }
  for (int k : active_set) {
    const DeviceMode dm = fs.dev_mode[k - 1];
    BitVec payload(cfg.payload_bits(dm));
    for (auto& b : payload) b = rng.uniform() < 0.5 ? 0 : 1;
    BitVec pkt = build_packet(k, payload, cfg, dm);
    fs.bits[k - 1] = pkt;
    VectorXcd row = modulate(pkt, cfg);
    if (row.size() != fs.L)
      throw NumericalError("frame length mismatch in build_frames");
    fs.X.row(k - 1) = row.transpose();
  }
  return fs;
}

MatrixXcd reference_matrix(const SystemConfig& cfg) {
  const int lr = cfg.ref_known_len();
  const BitVec poly = cfg.effective_crc_poly();
  MatrixXcd xr(cfg.K, lr);
  for (int k = 1; k <= cfg.K; ++k) {
    BitVec id = id_bits(k, cfg.bi());
    BitVec crc = crc_encode(id, poly);
    BitVec ref(id);
    ref.insert(ref.end(), crc.begin(), crc.end());
    VectorXcd row = modulate(ref, cfg);
    xr.row(k - 1) = row.head(lr).transpose();
  }
  return xr;
}

}  // namespace gfra

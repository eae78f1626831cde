#include "gfra/config.hpp"

#include <cmath>

namespace gfra {

Mode mode_from_string(const std::string& s) {
  if (s == "sourced") return Mode::kSourced;
  if (s == "unsourced") return Mode::kUnsourced;
  if (s == "coexist_orthogonal") return Mode::kCoexistOrthogonal;
  if (s == "coexist_nonorthogonal") return Mode::kCoexistNonOrthogonal;
  throw InvalidConfig("unknown mode: " + s);
}

std::string mode_to_string(Mode m) {
  switch (m) {
    case Mode::kSourced: return "sourced";
    case Mode::kUnsourced: return "unsourced";
    case Mode::kCoexistOrthogonal: return "coexist_orthogonal";
    case Mode::kCoexistNonOrthogonal: return "coexist_nonorthogonal";
  }
  return "?";
}

BitVec default_crc_poly(int bc) {
  switch (bc) {
    case 4:  // x^4+x^3+x^2+x+1
      return {1, 1, 1, 1, 1};
    case 8:  // x^8+x^7+x^6+x^4+x^2+1
      return {1, 1, 1, 0, 1, 0, 1, 0, 1};
    case 16:  // x^16+x^15+x^2+1
      return {1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1};
    default:
      throw InvalidConfig("no default CRC polynomial for Bc=" + std::to_string(bc) +
                          "; set crc_poly explicitly");
  }
}

BitVec SystemConfig::effective_crc_poly() const {
  return crc_poly.empty() ? default_crc_poly(Bc) : crc_poly;
}

void SystemConfig::validate() const {
  if (K < 1) throw InvalidConfig("K must be >= 1");
  if (Ka < 0 || Ka > K) throw InvalidConfig("require 0 <= Ka <= K");
  if (N < 1) throw InvalidConfig("N must be >= 1");
  if (M < 2 || (M & (M - 1)) != 0) throw InvalidConfig("M must be a power of two >= 2");
  if (Bd < 1) throw InvalidConfig("Bd must be >= 1");
  if (Bc < 1) throw InvalidConfig("Bc must be >= 1");
  const BitVec poly = effective_crc_poly();
  if (static_cast<int>(poly.size()) != Bc + 1 || poly.front() != 1)
    throw InvalidConfig("crc_poly must have degree exactly Bc with leading coefficient 1");
  if (P_min < 1 || P_max_paths < P_min) throw InvalidConfig("empty multipath count range");
  if (d_min_km <= 0.0 || d_max_km < d_min_km) throw InvalidConfig("bad distance range");
  if (J < 1) throw InvalidConfig("J must be >= 1");
  if (U < 1) throw InvalidConfig("U must be >= 1");
  if (eps_amp <= 0.0) throw InvalidConfig("eps_amp must be > 0");
  if (eps_sic <= 0.0) throw InvalidConfig("eps_sic must be > 0");
  if (Nsc < 1) throw InvalidConfig("Nsc must be >= 1");
  if (Nb < 1) throw InvalidConfig("Nb must be >= 1");
  if (scs_hz <= 0.0) throw InvalidConfig("scs_hz must be > 0");
}

int SystemConfig::bits_per_symbol() const { return static_cast<int>(std::log2(M)); }

int SystemConfig::bi() const { return std::max(1, static_cast<int>(std::ceil(std::log2(K)))); }

int SystemConfig::payload_bits(DeviceMode dm) const {
  if (mode == Mode::kCoexistNonOrthogonal && dm == DeviceMode::kUnsourced) return Bd + bi();
  return Bd;
}

int SystemConfig::bits_per_packet(DeviceMode dm) const {
  switch (mode) {
    case Mode::kSourced: return bi() + Bc + Bd;
    case Mode::kUnsourced: return Bd + Bc;
    case Mode::kCoexistOrthogonal:
      return dm == DeviceMode::kSourced ? bi() + Bc + Bd : Bd + Bc;
    case Mode::kCoexistNonOrthogonal:
      // one mode bit; unsourced payload widened by Bi so both types match
      return 1 + bi() + Bc + Bd;
  }
  return 0;
}

int SystemConfig::bits_per_packet() const {
  return bits_per_packet(DeviceMode::kSourced);
}

int SystemConfig::frame_len() const {
  const int b = bits_per_packet();
  return (b + bits_per_symbol() - 1) / bits_per_symbol() + 1;
}

int SystemConfig::ref_len() const {
  const int rb = bi() + Bc;
  return (rb + bits_per_symbol() - 1) / bits_per_symbol() + 1;
}

int SystemConfig::ref_known_len() const {
  return (bi() + Bc) / bits_per_symbol() + 1;
}

double SystemConfig::pmax_mw() const { return std::pow(10.0, pmax_dbm / 10.0); }

double SystemConfig::pathloss_linear(double d_km) const {
  return std::pow(10.0, (pathloss_a + pathloss_b * std::log10(d_km)) / 10.0);
}

double SystemConfig::mean_rho2() const {
  // rho^2(d) = Ptx(d) / PL(d) with PL(d) = 10^(a/10) d^(b/10).
  // With ATPC, Ptx(d) = Pmax (d/dmax)^alpha. Average over d ~ U(dmin, dmax).
  const double c = pmax_mw() * std::pow(10.0, -pathloss_a / 10.0);
  const double expo = (atpc_enabled ? atpc_alpha : 0.0) - pathloss_b / 10.0;
  const double scale = atpc_enabled ? std::pow(d_max_km, -atpc_alpha) : 1.0;
  const double lo = d_min_km, hi = d_max_km;
  if (hi == lo) return c * scale * std::pow(lo, expo);
  double integral;
  if (std::abs(expo + 1.0) < 1e-12)
    integral = std::log(hi / lo);
  else
    integral = (std::pow(hi, expo + 1.0) - std::pow(lo, expo + 1.0)) / (expo + 1.0);
  return c * scale * integral / (hi - lo);
}

double SystemConfig::mean_rx_elem_power() const {
  const double mean_paths = 0.5 * (P_min + P_max_paths);
  return mean_rho2() * mean_paths / static_cast<double>(N);
}

double SystemConfig::noise_var() const {
  if (snr_db) return mean_rx_elem_power() / std::pow(10.0, *snr_db / 10.0);
  // per-subcarrier thermal noise: PSD (dBm/Hz) over one subcarrier spacing
  return std::pow(10.0, (noise_psd_dbm_hz + 10.0 * std::log10(scs_hz)) / 10.0);
}

}  // namespace gfra

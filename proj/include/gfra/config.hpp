#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gfra/types.hpp"

namespace gfra {

enum class Mode {
  kSourced,
  kUnsourced,
  kCoexistOrthogonal,
  kCoexistNonOrthogonal,
};

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

// Per-device access mode inside a coexistence frame.
enum class DeviceMode : std::uint8_t { kSourced = 1, kUnsourced = 0 };

// Scenario and algorithm parameters for one simulated link.
// Powers are in dBm, distances in km, angles in degrees.
struct SystemConfig {
  // population / array
  int K = 500;
  int Ka = 50;
  int N = 512;

  // packet
  int Bd = 100;
  int Bc = 8;
  BitVec crc_poly;  // generator coefficients, high degree first; empty -> default for Bc
  int M = 2;        // PSK order

  // propagation
  int P_min = 31;
  int P_max_paths = 61;
  double angular_spread_deg = 10.0;  // full spread 2*Delta
  double pmax_dbm = 35.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 400e6;
  double scs_hz = 15e3;
  double d_min_km = 0.1;
  double d_max_km = 1.0;
  double pathloss_a = 128.1;
  double pathloss_b = 37.6;

  // detection
  int J = 3;    // SIC iterations
  int U = 500;  // BiG-AMP iterations
  double eps_amp = 1e-5;
  double eps_sic = 1e-5;
  Mode mode = Mode::kSourced;

  // URLLC extensions
  int Nsc = 1;
  int Nb = 1;
  bool atpc_enabled = false;
  double atpc_alpha = 3.76;  // default pathloss_b / 10

  std::uint64_t seed = 0;

  // --- implementation knobs (defaults follow the module decisions) ---
  // When set, overrides the PSD-derived noise variance so that the mean
  // per-device per-antenna received SNR equals snr_db.
  std::optional<double> snr_db;
  double theta_add = 0.5;        // activity threshold on antenna-averaged support
  double pilot_amp_damping = 0.7;
  double bigamp_damping = 0.5;
  int pilot_amp_iters = 0;       // 0 -> use U
  double rank_guard_ratio = 1.5; // low-confidence flag threshold
  bool sic_reestimate_rank = true;

  void validate() const;

  // ---- derived quantities ----
  int bi() const;                       // ID bits: ceil(log2 K) (sourced contexts)
  int bits_per_packet() const;          // B, including mode bit in non-orth. coexistence
  int bits_per_packet(DeviceMode) const;
  int frame_len() const;                // L = ceil(B/log2 M) + 1
  int ref_len() const;                  // Lr = ceil((Bi+Bc)/log2 M) + 1
  // Columns of the frame that are fully determined by the RI: the pilot plus
  // the whole symbols covering ID+CRC bits. Equals ref_len() whenever
  // log2(M) divides Bi+Bc (always for BPSK).
  int ref_known_len() const;
  int bits_per_symbol() const;
  BitVec effective_crc_poly() const;    // crc_poly or the default for Bc in {4,8,16}
  double pmax_mw() const;
  double noise_var() const;             // per-element complex noise variance (linear mW)
  double mean_rx_elem_power() const;    // E[rho^2] * E[P] / N, analytic over d ~ U
  double mean_rho2() const;             // E over the distance distribution
  double pathloss_linear(double d_km) const;

  // payload bits carried by a device of the given mode (coexistence widens the
  // unsourced payload by Bi so both packet types share one frame length)
  int payload_bits(DeviceMode) const;
};

BitVec default_crc_poly(int bc);

}  // namespace gfra

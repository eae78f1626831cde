#pragma once

#include <span>

#include "gfra/config.hpp"
#include "gfra/rng.hpp"
#include "gfra/types.hpp"

namespace gfra {

// ---- CRC (binary long division, MSB first) ----

// Remainder of (msg || 0^deg) divided by poly; length = deg(poly).
BitVec crc_encode(std::span<const std::uint8_t> msg, std::span<const std::uint8_t> poly);

// True iff (field || crc) divides by poly with zero remainder.
bool crc_check(std::span<const std::uint8_t> field, std::span<const std::uint8_t> crc,
               std::span<const std::uint8_t> poly);

// ---- M-PSK with Gray mapping ----
// Symbol for a bit group b (MSB first) is exp(j*2*pi*gray(b)/M); the scalar
// pilot x_p is the point for symbol index 0, i.e. 1+0j.

VectorXcd psk_constellation(int M);
cd pilot_symbol();

// ID helpers: device indices are 1-based; ID 0 is reserved invalid.
BitVec id_bits(int device_k, int bi);
int bits_to_uint(std::span<const std::uint8_t> bits);

// Packet assembly per access mode. Payload length must equal
// cfg.payload_bits(dm). The sourced layout is [ID; CRC(ID); payload], the
// unsourced layout [payload; CRC(payload)]; non-orthogonal coexistence
// prepends the one-bit mode indicator (1 = sourced).
BitVec build_packet(int device_k, std::span<const std::uint8_t> payload, const SystemConfig& cfg,
                    DeviceMode dm = DeviceMode::kSourced);

// Gray-mapped M-PSK with the pilot prepended; tail bits zero-padded when the
// packet length is not a multiple of log2(M).
VectorXcd modulate(std::span<const std::uint8_t> bits, const SystemConfig& cfg);

// Hard minimum-distance decisions over data symbols (pilot excluded by the
// caller); returns exactly n_bits bits, padding stripped. Ties break to the
// lowest constellation index.
BitVec demodulate(const VectorXcd& symbols, int n_bits, int M);

// ATPC transmit power in linear mW: Pmax * (d/dmax)^alpha.
double atpc_power_mw(double d_km, const SystemConfig& cfg);

// Index sets over a packet of the given mode.
struct PacketLayout {
  std::vector<int> idx_id;
  std::vector<int> idx_crc;
  std::vector<int> idx_data;
  int B = 0;
  bool has_mode_bit = false;
};
PacketLayout packet_layout(const SystemConfig& cfg, DeviceMode dm = DeviceMode::kSourced);

// One frame's worth of per-device packets and modulated symbols.
struct FrameSet {
  BitMat bits;                        // K rows of B bits, empty rows for inactive
  MatrixXcd X;                        // K x L, zero rows for inactive devices
  PacketLayout layout;                // sourced-layout index sets
  std::vector<DeviceMode> dev_mode;   // per device (coexistence)
  cd x_p = pilot_symbol();
  int L = 0;
  int Lr = 0;
};

// Builds packets with random payloads for all active devices and modulates
// them. In non-orthogonal coexistence, devices 1..K/2 are sourced and the
// rest unsourced.
FrameSet build_frames(const SystemConfig& cfg, const std::vector<int>& active_set, Rng& rng);

// The deterministic RI prefix (pilot + modulated ID/CRC bits) for every
// device, stacked in rows: K x Lr. Known a priori at the receiver and used
// both as the coherent baseline's pilot matrix and for RI-aided init.
MatrixXcd reference_matrix(const SystemConfig& cfg);

}  // namespace gfra

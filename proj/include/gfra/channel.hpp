#pragma once

#include "gfra/config.hpp"
#include "gfra/rng.hpp"
#include "gfra/types.hpp"

namespace gfra {

// One channel/activity realization for a frame.
struct ChannelRealization {
  std::vector<std::uint8_t> activity;  // length K, 0/1
  std::vector<int> active_set;         // 1-based device indices
  MatrixXcd G;                         // N x K spatial channel, zero columns for inactive
  MatrixXcd H;                         // N x K angular channel, H = A_R * G
  VectorXd distances_km;               // length K
  VectorXd rho;                        // large-scale amplitude gains
};

struct AngularObservation {
  MatrixXcd Y;  // N x L
  double noise_var = 0.0;
  int L = 0;
};

// Unitary N-point DFT; the angular transform for a half-wavelength ULA.
MatrixXcd dft_unitary(int N);

// Steering vector a_R(phi) = [1, e^{-j2pi phi}, ...]/sqrt(N), phi = sin(psi)/2.
VectorXcd steering_vector(int N, double phi);

// Uniformly random Ka-subset of [K]; deterministic given the generator state.
ChannelRealization sample_activity(const SystemConfig& cfg, Rng& rng);

// Fills G, H, distances, rho for the active devices (one-ring model).
void gen_channel(const SystemConfig& cfg, ChannelRealization& ch, Rng& rng);

// Y = A_R (G X + W); noise variance from the config (per subcarrier).
AngularObservation synthesize_observation(const SystemConfig& cfg, const ChannelRealization& ch,
                                          const MatrixXcd& X, Rng& rng);

}  // namespace gfra

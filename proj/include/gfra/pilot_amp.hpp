#pragma once

#include <optional>

#include "gfra/bigamp.hpp"
#include "gfra/channel.hpp"
#include "gfra/config.hpp"
#include "gfra/detection.hpp"
#include "gfra/framing.hpp"
#include "gfra/types.hpp"

namespace gfra {

struct PilotAmpOptions {
  int max_iter = 200;
  double eps = 1e-5;
  double damping = 0.7;
  double theta_add = 0.5;     // activity threshold on antenna-averaged support
  double gamma0 = 0.1;        // initial sparsity ratio
  std::optional<double> noise_var_init;  // default: power heuristic from Yp
};

struct PilotAmpResult {
  std::vector<int> active;  // 0-based column indices with activity posterior > theta
  MatrixXcd H;              // N x K posterior means
  ArrayXXd h_var;           // N x K posterior variances
  ArrayXXd pi;              // N x K posterior support probabilities
  VectorXd support;         // device activity posterior (antenna-aggregated LLR)
  VectorXd mean_pi;         // antenna-averaged per-element support, for reference
  SpikeSlabPrior prior;     // EM-learned hyper-parameters
  double noise_var = 0.0;
  int iters = 0;
  bool converged = false;
};

// Joint activity detection and channel estimation over a known signal block:
// Yp = H Xp + W with Xp known for all K devices. GAMP with the spike-and-slab
// denoiser and EM hyper-parameter refinement.
PilotAmpResult joint_add_ce(const MatrixXcd& Yp, const MatrixXcd& Xp, const PilotAmpOptions& opt);

// Least-squares data detection X_d = pinv(H_act) Y_d, with a ridge fallback
// when cond(H_act) exceeds 1e10. An empty H_act yields an empty result.
MatrixXcd ls_data_detect(const MatrixXcd& Yd, const MatrixXcd& H_act);

// Two-phase coherent baseline: ADD+CE over the known reference block, LS data
// detection, demodulation, device-indexed bookkeeping compatible with the
// sourced acceptance rules.
DetectionOutcome coherent_detect(const AngularObservation& obs, const SystemConfig& cfg);

}  // namespace gfra

#pragma once

#include <optional>

#include "gfra/config.hpp"
#include "gfra/rng.hpp"
#include "gfra/types.hpp"

namespace gfra {

// Element-wise spike-and-slab prior: (1-gamma) delta(h) + gamma CN(h; mu, tau).
struct SpikeSlabPrior {
  ArrayXXd gamma;
  ArrayXXcd mu;
  ArrayXXd tau;

  static SpikeSlabPrior uniform(int rows, int cols, double gamma0, double tau0);
};

// ---- scalar posterior kernels ----

struct PosteriorZ {
  cd z_hat;
  double v_z;
};
// AWGN posterior of z given pseudo-prior CN(p_hat, v_p) and observation
// y = z + noise: v_z = s2*v_p/(s2+v_p), z_hat = (y*v_p + s2*p_hat)/(s2+v_p).
PosteriorZ posterior_z(cd y, cd p_hat, double v_p, double noise_var);

struct PosteriorH {
  cd h_hat;
  double v_h;
  double pi;   // posterior support probability
  cd d_hat;    // slab-component mean
  double v_d;  // slab-component variance
};
// Spike-and-slab posterior under the pseudo-observation q = h + CN(0, v_q).
PosteriorH posterior_h(cd q_hat, double v_q, double gamma, cd mu, double tau);

struct PosteriorX {
  cd x_hat;
  double v_x;
};
// Discrete posterior over an equiprobable constellation under
// r = x + CN(0, v_r); weights exp((2 Re(r* s) - |s|^2)/v_r), log-sum-exp
// shifted.
PosteriorX posterior_x(cd r_hat, double v_r, const VectorXcd& constellation);

// ---- bilinear GAMP state and driver ----

// Marginal means/variances carried across iterations. h is N x Ka, x is
// Ka x L, the residual quantities are N x L.
struct AmpState {
  MatrixXcd h_mean;
  ArrayXXd h_var;
  MatrixXcd x_mean;
  ArrayXXd x_var;
  MatrixXcd g_mean;  // scaled residual, starts at zero
  ArrayXXd g_var;
  MatrixXcd p_hat;   // Onsager-corrected plug-in estimate
  ArrayXXd p_var;
  SpikeSlabPrior prior;  // N x Ka
  double noise_var = 0.0;
  int iter = 0;

  // posterior caches consumed by the EM step
  ArrayXXd pi;
  MatrixXcd d_mean;
  ArrayXXd d_var;
};

// M-step: noise variance from the current residual statistics, (mu, tau)
// as support-weighted per-device averages over the antenna axis, gamma as the
// per-device mean support probability (clipped to [1e-6, 1-1e-6]).
void em_update(AmpState& st, const MatrixXcd& Y);

struct BigAmpOptions {
  int max_iter = 100;
  double eps = 1e-5;
  double damping = 0.5;
  double min_damping = 0.05;
  VectorXcd constellation;
  const MatrixXcd* truth_h = nullptr;  // optional, enables NMSE trace
};

struct BigAmpResult {
  MatrixXcd H_act;  // N x Ka
  MatrixXcd X_act;  // Ka x L
  std::vector<double> residual_trace;
  std::vector<double> nmse_trace;
  int iters = 0;
  bool converged = false;
  AmpState state;
};

// Algorithm: iterate plug-in estimate / Onsager correction / AWGN posterior /
// residual / channel and signal pseudo-observations / spike-slab and
// constellation posteriors, with EM refreshes of the hyper-parameters each
// iteration, until the relative change of p_hat drops below eps or max_iter.
// Throws NumericalError if the state stops being finite.
BigAmpResult run_bigamp(const MatrixXcd& Y, int ka, AmpState init, const BigAmpOptions& opt);

// Random initialization scaled to the measured signal power: h entries drawn
// i.i.d. CN(0, |Y|_F^2/(N L ka)), x entries drawn from the constellation.
AmpState random_init(const MatrixXcd& Y, int ka, const VectorXcd& constellation, Rng& rng);

struct RiInitResult {
  AmpState state;
  std::vector<int> selected;  // row indices into Xr (0-based)
};

// RI-aided initialization: detect the ka most probable devices from the
// known reference block (first Xr.cols() columns of Y), LS-estimate the
// remaining symbols, and pack estimates plus learned hyper-parameters.
RiInitResult ri_init(const MatrixXcd& Y, const SystemConfig& cfg, const MatrixXcd& Xr, int ka);

}  // namespace gfra

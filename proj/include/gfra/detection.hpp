#pragma once

#include "gfra/config.hpp"
#include "gfra/types.hpp"

namespace gfra {

struct SicIterDiag {
  double residual_energy = 0.0;  // ||Ytilde^j||_F^2 entering the iteration
  int accepted_count = 0;        // cumulative accepted after the iteration
  int ka_remaining = 0;          // Ka_hat^j = Ka_hat - |A^{j-1}|
  int model_order = 0;           // factorization rank actually used
  int bigamp_iters = 0;
  bool bigamp_converged = false;
};

// Result of one frame's detection. Sourced entries are device-indexed
// (1-based ids in active_set, rows/columns k-1 of the matrices); unsourced
// entries are pseudo-indexed in order of acceptance.
struct DetectionOutcome {
  Mode mode = Mode::kSourced;

  std::vector<int> active_set;  // sourced: accepted device ids, sorted
  MatrixXcd H_est;              // N x K, zero columns for undetected devices
  MatrixXcd X_est;              // K x L
  BitMat bits_est;              // K rows; empty rows for undetected devices

  std::vector<BitVec> messages;  // unsourced: accepted payloads, order-free
  MatrixXcd H_ura;               // N x n_acc pseudo-indexed estimates
  MatrixXcd X_ura;               // n_acc x L
  BitMat bits_ura;

  std::vector<std::uint8_t> mode_flags;  // decoded mode bit per acceptance event
  std::vector<SicIterDiag> per_iter;
  int duplicate_conflicts = 0;
  int rank_estimate = 0;
  bool rank_low_confidence = false;
};

}  // namespace gfra

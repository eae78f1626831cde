#pragma once

#include <optional>

#include "gfra/bigamp.hpp"
#include "gfra/channel.hpp"
#include "gfra/config.hpp"
#include "gfra/detection.hpp"
#include "gfra/framing.hpp"
#include "gfra/types.hpp"

namespace gfra {

// Phase ambiguity elimination: Sigma = diag(x_p ./ X_act[:,1]); rows whose
// pilot estimate is (near) zero are flagged uncorrectable and left untouched.
// Returns one flag per row; the product H_act X_act is preserved.
std::vector<bool> phase_correct(MatrixXcd& H_act, MatrixXcd& X_act, cd x_p);

// Accumulates accepted rows during the SIC loop.
struct SicState {
  // sourced, device-indexed
  std::vector<int> active_set;  // 1-based ids, kept sorted
  MatrixXcd H;                  // N x K
  MatrixXcd X;                  // K x L
  BitMat B;                     // K rows
  VectorXd energy;              // accepted channel energy per device (conflict rule)
  // unsourced, pseudo-indexed in acceptance order
  std::vector<BitVec> messages;
  MatrixXcd H_ura;  // N x n
  MatrixXcd X_ura;  // n x L
  BitMat B_ura;
  std::vector<std::uint8_t> mode_flags;
  int duplicate_conflicts = 0;

  int accepted() const { return static_cast<int>(active_set.size() + messages.size()); }
};

// Sourced acceptance: decode the ID field, accept iff 1 <= id <= K and the
// ID CRC passes; duplicates resolved toward the larger channel energy.
void resolve_sourced(const BitMat& b_rows, const MatrixXcd& H_act, const MatrixXcd& X_act,
                     const std::vector<bool>& valid, const SystemConfig& cfg, SicState& st);

// Unsourced acceptance: accept rows whose payload CRC passes; duplicate
// payloads are deduplicated toward the larger channel energy.
void accept_unsourced(const BitMat& b_rows, const MatrixXcd& H_act, const MatrixXcd& X_act,
                      const std::vector<bool>& valid, const SystemConfig& cfg, SicState& st);

// SIC-based semi-blind detection. known_reference, when provided, enables the
// RI-aided initialization (sourced mode); otherwise random initialization
// scaled to the measured signal power is used. rng drives random init only.
DetectionOutcome semi_blind_detect(const AngularObservation& obs, const SystemConfig& cfg,
                                   Rng& rng,
                                   const std::optional<MatrixXcd>& known_reference = std::nullopt);

// Non-orthogonal coexistence: shared JCSE/phase correction/demodulation, then
// a per-row branch on the decoded mode bit.
DetectionOutcome coexist_detect(const AngularObservation& obs, const SystemConfig& cfg, Rng& rng);

}  // namespace gfra

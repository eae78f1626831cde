#pragma once

#include <span>

#include "gfra/config.hpp"
#include "gfra/detection.hpp"
#include "gfra/framing.hpp"
#include "gfra/types.hpp"

namespace gfra {

// One subcarrier's share of a multi-carrier packet. The first sub-block
// carries [ID; CRC(ID); sub-payload]; the rest carry [CRC(sub-payload);
// sub-payload checked by it]. Each sub-block gets the scalar pilot when
// modulated.
struct SubBlock {
  BitVec bits;
  bool carries_id = false;
  int payload_len = 0;  // before zero padding
};

// Uniform split of the payload over cfg.Nsc subcarriers (zero-pad last).
std::vector<SubBlock> split_multicarrier(int device_k, std::span<const std::uint8_t> payload,
                                         const SystemConfig& cfg);

// Inverse of split_multicarrier given correctly detected sub-blocks.
BitVec reassemble_multicarrier(const std::vector<SubBlock>& blocks, const SystemConfig& cfg);

enum class AlignMethod { kGreedy, kKMeans };

struct AlignResult {
  // perm[s][j] = anchor column matched to column j of subcarrier s
  std::vector<std::vector<int>> perm;
  bool low_confidence = false;
};

// Matches each non-anchor subcarrier's channel columns to the anchor's by
// greedy maximum similarity over 95%-energy angular supports (Jaccard), or by
// k-means clustering of the support vectors.
AlignResult align_subcarriers(const std::vector<MatrixXcd>& h_per_subcarrier,
                              AlignMethod method = AlignMethod::kGreedy);

// 95%-energy support of a channel column (bin indices, sorted).
std::vector<int> energy_support(const VectorXcd& col, double fraction = 0.95);

// Union of per-sub-band detections with CRC-passing entries only; devices are
// deduplicated by ID (sourced) or payload (unsourced). Conflicting payloads
// for one ID resolve by majority vote, then larger channel energy.
DetectionOutcome concurrent_combine(const std::vector<DetectionOutcome>& outcomes,
                                    const SystemConfig& cfg);

}  // namespace gfra

#pragma once

#include <optional>

#include "gfra/types.hpp"

namespace gfra {

struct RankSelection {
  int k_hat = 0;          // estimated number of active devices
  double max_ratio = 0.0; // peak value of the singular-value ratio sequence
  bool low_confidence = false;
};

// Estimates the number of active devices as the argmax over k of
// sigma_k / sigma_{k+1} of the descending singular values of Y. Singular
// values below 1e-12 * sigma_1 are clamped before forming ratios; ties break
// to the smallest index. A peak below guard_ratio sets low_confidence.
// Throws NumericalError on an all-zero observation.
RankSelection estimate_num_active(const MatrixXcd& Y, std::optional<int> cap = std::nullopt,
                                  double guard_ratio = 1.5);

}  // namespace gfra

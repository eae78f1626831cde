#include "gfra/rank_select.hpp"

#include <Eigen/SVD>

namespace gfra {

RankSelection estimate_num_active(const MatrixXcd& Y, std::optional<int> cap,
                                  double guard_ratio) {
  if (Y.rows() < 2 || Y.cols() < 2) throw InvalidConfig("rank selection needs N >= 2, L >= 2");
  Eigen::BDCSVD<MatrixXcd> svd(Y);
  const VectorXd& sv = svd.singularValues();
  const int kmax = static_cast<int>(sv.size());
  const double s1 = sv[0];
  if (!(s1 > 0.0)) throw NumericalError("rank selection on an all-zero observation");
  const double floor_sv = 1e-12 * s1;

  RankSelection sel;
  int limit = kmax - 1;
  if (cap) limit = std::min(limit, std::max(1, *cap));
  sel.k_hat = 1;
  sel.max_ratio = 0.0;
  for (int k = 1; k <= limit; ++k) {
    const double num = std::max(sv[k - 1], floor_sv);
    const double den = std::max(sv[k], floor_sv);
    const double ratio = num / den;
    if (ratio > sel.max_ratio) {  // strict: ties keep the smallest index
      sel.max_ratio = ratio;
      sel.k_hat = k;
    }
  }
  sel.low_confidence = sel.max_ratio < guard_ratio;
  return sel;
}

}  // namespace gfra

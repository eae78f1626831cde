#include "gfra/codebook.hpp"

#include <algorithm>
#include <cmath>

namespace gfra {

MatrixXcd build_codebook(int b_bits, int len, Rng& rng) {
  if (b_bits < 1 || b_bits > 14)
    throw InvalidConfig("codebook size 2^" + std::to_string(b_bits) + " is out of bounds");
  if (len < 1) throw InvalidConfig("codeword length must be >= 1");
  const int rows = 1 << b_bits;
  MatrixXcd c(rows, len);
  for (int r = 0; r < rows; ++r) {
    for (int l = 0; l < len; ++l) c(r, l) = rng.cnormal(1.0);
    c.row(r) *= std::sqrt(static_cast<double>(len)) / c.row(r).norm();
  }
  return c;
}

std::vector<int> codeword_detect(const MatrixXcd& Y, const MatrixXcd& C, int ka,
                                 PilotAmpOptions opt) {
  const int rows = static_cast<int>(C.rows());
  if (ka >= rows) throw InvalidConfig("codeword_detect: ka must be < codebook size");
  if (ka <= 0) return {};
  opt.gamma0 = std::min(0.5, static_cast<double>(ka) / rows);
  const PilotAmpResult r = joint_add_ce(Y, C, opt);
  std::vector<int> idx(rows);
  for (int i = 0; i < rows; ++i) idx[i] = i;
  std::partial_sort(idx.begin(), idx.begin() + ka, idx.end(),
                    [&](int a, int b) { return r.support[a] > r.support[b]; });
  std::vector<int> out(idx.begin(), idx.begin() + ka);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gfra

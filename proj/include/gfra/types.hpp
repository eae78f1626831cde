#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gfra {

using cd = std::complex<double>;
using Eigen::ArrayXd;
using Eigen::ArrayXXcd;
using Eigen::ArrayXXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Packed bit rows, MSB-first within each logical field.
using BitVec = std::vector<std::uint8_t>;
using BitMat = std::vector<BitVec>;

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kVarFloor = 1e-12;

}  // namespace gfra

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nhym {

using Real = double;
using Complex = std::complex<Real>;

/// Largest bundle rank handled by the pointwise matrix kernels. Node matrices
/// are stack-allocated up to this size.
inline constexpr int kMaxRank = 4;

/// r x r matrix at a single grid node.
using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxRank, kMaxRank>;
using RVec = Eigen::Matrix<Real, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRank, 1>;

/// Channel-by-node storage shared by all grid fields: one column per node,
/// one row per scalar channel (r*r matrix entries, column-major).
using ChannelData = Eigen::MatrixXcd;

inline constexpr Real kPi = 3.141592653589793238462643383279502884;
inline const Complex kI{0.0, 1.0};

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad geometry, shape mismatch or out-of-range index.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition failed (non-self-adjoint input, gap collapse,
/// NHYM certificate rejected, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Integration produced non-finite fields.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace nhym

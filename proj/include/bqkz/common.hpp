#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bqkz {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Error taxonomy shared by every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DivergentSeries : public Error {
 public:
  using Error::Error;
};
class PoleHit : public Error {
 public:
  using Error::Error;
};
class CutoffOverflow : public Error {
 public:
  using Error::Error;
};
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class IllConditioned : public Error {
 public:
  using Error::Error;
};
class ResidualTooLarge : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Global spectral data. p = e^eta, q = e^tau.
struct SpectralParams {
  cd eta{0.3, 0.2};
  cd tau{-1.0, 0.3};
  cd xi_plus{-0.7, 0.2};
  cd xi_minus{-0.9, -0.1};

  cd p() const { return std::exp(eta); }
  cd q() const { return std::exp(tau); }
};

struct ToleranceProfile {
  double rel_tol = 1e-9;
  double pole_guard = 1e-6;
  double generic_guard = 1e-8;
  double qpoch_stop = 8 * kEps;
  int generic_orders = 12;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// |p^{2m} - 1| > generic_guard for m = 1..generic_orders.
bool is_generic(const SpectralParams& params, const ToleranceProfile& prof = {});

// |a - b| / (|a| + |b| + 1)
double rel_residual(cd a, cd b);
// Same formula with max-abs entry norms.
double rel_residual(const CMat& a, const CMat& b);
double rel_residual(const CVec& a, const CVec& b);

double max_abs(const CMat& m);

// 1 / sinh(z), throwing PoleHit when |sinh z| < guard.
cd inv_sinh(cd z, double guard, const char* what);

inline cd sh(cd z) { return std::sinh(z); }

}  // namespace bqkz

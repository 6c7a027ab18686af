#include "bqkz/common.hpp"

#include <cmath>
#include <sstream>

namespace bqkz {

void ToleranceProfile::validate() const {
  if (!(rel_tol > kEps)) throw ConfigError("rel_tol must exceed machine epsilon");
  if (!(pole_guard > 0)) throw ConfigError("pole_guard must be positive");
  if (!(generic_guard > 0)) throw ConfigError("generic_guard must be positive");
  if (!(qpoch_stop > 0)) throw ConfigError("qpoch_stop must be positive");
  if (generic_orders < 1) throw ConfigError("generic_orders must be positive");
}

bool is_generic(const SpectralParams& params, const ToleranceProfile& prof) {
  const cd p2 = std::exp(2.0 * params.eta);
  cd pw = 1.0;
  for (int m = 1; m <= prof.generic_orders; ++m) {
    pw *= p2;
    if (std::abs(pw - 1.0) <= prof.generic_guard) return false;
  }
  return true;
}

double rel_residual(cd a, cd b) { return std::abs(a - b) / (std::abs(a) + std::abs(b) + 1.0); }

double max_abs(const CMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double rel_residual(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("residual operands differ in shape");
  return max_abs(a - b) / (max_abs(a) + max_abs(b) + 1.0);
}

double rel_residual(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) throw ShapeMismatch("residual operands differ in length");
  return rel_residual(CMat(a), CMat(b));
}

cd inv_sinh(cd z, double guard, const char* what) {
  const cd s = std::sinh(z);
  if (std::abs(s) < guard) {
    std::ostringstream os;
    os << what << ": sinh(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i) within pole guard";
    throw PoleHit(os.str());
  }
  return 1.0 / s;
}

}  // namespace bqkz

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>

#include "bqkz/common.hpp"

namespace bqkz::special {

// (x; q)_inf, truncated once |q^i x| < prof.qpoch_stop.
cd q_pochhammer(cd x, cd q, const ToleranceProfile& prof = {});

// Jackson weight functions. Denominator factors closer than pole_guard to zero raise PoleHit.
cd weight_g(cd x, const SpectralParams& params, const ToleranceProfile& prof = {});
cd weight_h(cd x, const SpectralParams& params, const ToleranceProfile& prof = {});
cd weight_F(cd ell, cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

// Diagonal boundary coefficient C_n^ell(x; xi), n >= 1.
cd c_coeff(int n, cd ell, cd x, cd xi, const SpectralParams& params, const ToleranceProfile& prof = {});

// sinh(x - (1/2 - ell) eta) / sinh(x - (1/2 + ell) eta)
cd vartheta(cd ell, cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

double check_coeffcond4(cd xi, cd x, cd z);
double check_multivariable(int d, std::span<const cd> xs, cd t, cd xi, cd ell, const SpectralParams& params);
double check_trigident(int d, std::span<const cd> xs, cd t_r, cd xi_plus, cd ell_r, const SpectralParams& params);

// The sum-over-subsets function F(x; t) behind check_trigident.
cd trig_F(std::span<const cd> xs, cd t, cd xi, cd ell, const SpectralParams& params);

// Seeded sampler of complex numbers with real and imaginary parts uniform in [-1.5, 1.5].
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  cd draw();
  // Redraws until every value returned by `dens` has modulus at least `guard`.
  cd draw_avoiding(const std::function<std::vector<cd>(cd)>& dens, double guard = 1e-6, int max_tries = 1000);
  std::vector<cd> draw_n(int n);
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 rng_;
};

}  // namespace bqkz::special

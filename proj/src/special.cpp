#include "bqkz/special.hpp"

#include <bit>
#include <sstream>

namespace bqkz::special {

namespace {

struct QPochResult {
  cd value;
  double min_factor;
};

QPochResult qpoch_guarded(cd x, cd q, const ToleranceProfile& prof) {
  if (std::abs(q) >= 1.0) throw DivergentSeries("q-Pochhammer requires |q| < 1");
  QPochResult r{1.0, std::numeric_limits<double>::infinity()};
  cd term = x;
  // geometric tail of the factors after |term| drops below the stop threshold is negligible
  for (int i = 0; i < 1000000; ++i) {
    if (std::abs(term) < prof.qpoch_stop) break;
    const cd f = 1.0 - term;
    r.min_factor = std::min(r.min_factor, std::abs(f));
    r.value *= f;
    term *= q;
  }
  return r;
}

cd qpoch_den(cd x, cd q, const ToleranceProfile& prof, const char* what) {
  auto r = qpoch_guarded(x, q, prof);
  if (r.min_factor < prof.pole_guard) {
    std::ostringstream os;
    os << what << ": q-Pochhammer denominator vanishes";
    throw PoleHit(os.str());
  }
  return r.value;
}

}  // namespace

cd q_pochhammer(cd x, cd q, const ToleranceProfile& prof) { return qpoch_guarded(x, q, prof).value; }

cd weight_g(cd x, const SpectralParams& pr, const ToleranceProfile& prof) {
  const cd q = pr.q(), q2 = q * q, eta = pr.eta;
  const cd pre = std::exp((2.0 * (pr.xi_minus + pr.xi_plus - eta) / pr.tau + 1.0) * x);
  const cd num = q_pochhammer(q2 * std::exp(2.0 * (x + pr.xi_minus) - eta), q2, prof) *
                 q_pochhammer(q * std::exp(2.0 * (x + pr.xi_plus) - eta), q2, prof);
  const cd den = qpoch_den(std::exp(2.0 * (x - pr.xi_minus) + eta), q2, prof, "weight_g") *
                 qpoch_den(q * std::exp(2.0 * (x - pr.xi_plus) + eta), q2, prof, "weight_g");
  return pre * num / den;
}

cd weight_h(cd x, const SpectralParams& pr, const ToleranceProfile& prof) {
  const cd q = pr.q(), q2 = q * q, eta = pr.eta;
  const cd pre = std::exp(-2.0 * eta * x / pr.tau) * (1.0 - std::exp(2.0 * x));
  const cd num = q_pochhammer(q2 * std::exp(2.0 * (x - eta)), q2, prof);
  const cd den = qpoch_den(std::exp(2.0 * (x + eta)), q2, prof, "weight_h");
  return pre * num / den;
}

cd weight_F(cd ell, cd x, const SpectralParams& pr, const ToleranceProfile& prof) {
  const cd q = pr.q(), q2 = q * q, eta = pr.eta;
  const cd pre = std::exp(2.0 * ell * eta * x / pr.tau);
  const cd num = q_pochhammer(q2 * std::exp(2.0 * (x + ell * eta)), q2, prof);
  const cd den = qpoch_den(q2 * std::exp(2.0 * (x - ell * eta)), q2, prof, "weight_F");
  return pre * num / den;
}

cd c_coeff(int n, cd ell, cd x, cd xi, const SpectralParams& pr, const ToleranceProfile& prof) {
  if (n < 1) throw ShapeMismatch("c_coeff index must be >= 1");
  cd r = 1.0;
  for (int j = 1; j < n; ++j) {
    const cd s = (ell + 0.5 - double(j)) * pr.eta;
    r *= sh(xi - x + s) * inv_sinh(xi + x + s, prof.pole_guard, "c_coeff");
  }
  return r;
}

cd vartheta(cd ell, cd x, const SpectralParams& pr, const ToleranceProfile& prof) {
  return sh(x - (0.5 - ell) * pr.eta) * inv_sinh(x - (0.5 + ell) * pr.eta, prof.pole_guard, "vartheta");
}

double check_coeffcond4(cd xi, cd x, cd z) {
  const cd lhs = sh(xi + x) * sh(x - z) + sh(xi - x) * sh(x + z);
  const cd rhs = sh(xi - z) * sh(2.0 * x);
  return rel_residual(lhs, rhs);
}

double check_multivariable(int d, std::span<const cd> xs, cd t, cd xi, cd ell, const SpectralParams& pr) {
  if (d < 1 || d > 12 || int(xs.size()) != d) throw ShapeMismatch("check_multivariable: need 1 <= d <= 12 points");
  const cd eta = pr.eta;
  cd lhs = 0.0;
  std::vector<cd> xi_sh(d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    // bit set: i in I, eps_i = +1
    cd q = (std::popcount(mask) % 2) ? -1.0 : 1.0;
    for (int i = 0; i < d; ++i) {
      const double e = (mask >> i & 1u) ? 1.0 : -1.0;
      q *= sh(xi + e * xs[i]) * sh(t + e * xs[i] + ell * eta);
      xi_sh[i] = xs[i] - e * eta / 2.0;
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) q *= sh(xi_sh[i] + xi_sh[j]) * sh(xi_sh[i] - xi_sh[j]);
    lhs += q;
  }
  cd delta = 1.0;
  for (int i = 0; i < d; ++i) {
    delta *= sh(2.0 * xs[i]);
    for (int j = i + 1; j < d; ++j) delta *= sh(xs[i] + xs[j]) * sh(xs[i] - xs[j]);
  }
  cd rhs = (d % 2) ? -delta : delta;
  for (int i = 1; i <= d; ++i) rhs *= sh(xi + t + (ell - double(i) + 1.0) * eta);
  return rel_residual(lhs, rhs);
}

cd trig_F(std::span<const cd> xs, cd t, cd xi, cd ell, const SpectralParams& pr) {
  const int d = int(xs.size());
  const cd eta = pr.eta, tau = pr.tau;
  cd pre = 1.0;
  for (int i = 1; i <= d; ++i)
    pre *= sh(xi - t - tau / 2.0 + (ell + 1.0 - double(i)) * eta) / sh(t + xs[i - 1] - ell * eta);
  cd total = 0.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    cd v = (std::popcount(mask) % 2) ? -1.0 : 1.0;
    for (int i = 0; i < d; ++i) {
      if (!(mask >> i & 1u)) continue;
      const cd x = xs[i];
      v *= sh(xi + x - tau / 2.0) * sh(t + x + ell * eta) / (sh(xi - x + tau / 2.0) * sh(t - x + tau + ell * eta));
      for (int j = 0; j < d; ++j) {
        const cd y = xs[j];
        if (mask >> j & 1u) {
          if (j > i) v *= sh(x + y - tau - eta) / sh(x + y - tau + eta);
        } else {
          v *= sh(x - y - eta) * sh(x + y - tau) / (sh(x - y) * sh(x + y - tau + eta));
        }
      }
    }
    total += v;
  }
  return pre * total;
}

double check_trigident(int d, std::span<const cd> xs, cd t_r, cd xi_plus, cd ell_r, const SpectralParams& pr) {
  if (d < 1 || d > 10 || int(xs.size()) != d) throw ShapeMismatch("check_trigident: need 1 <= d <= 10 points");
  const cd xi = xi_plus - pr.eta / 2.0;
  const cd a = trig_F(xs, t_r, xi, ell_r, pr);
  const cd b = trig_F(xs, -t_r - pr.tau, xi, ell_r, pr);
  return rel_residual(a, b);
}

cd Sampler::draw() {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double re = u(rng_);
  const double im = u(rng_);
  return {re, im};
}

double Sampler::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng_);
}

std::vector<cd> Sampler::draw_n(int n) {
  std::vector<cd> v(n);
  for (auto& z : v) z = draw();
  return v;
}

cd Sampler::draw_avoiding(const std::function<std::vector<cd>(cd)>& dens, double guard, int max_tries) {
  for (int i = 0; i < max_tries; ++i) {
    const cd z = draw();
    bool ok = true;
    for (cd d : dens(z))
      if (std::abs(d) < guard) ok = false;
    if (ok) return z;
  }
  throw PoleHit("sampler could not avoid the guarded denominators");
}

}  // namespace bqkz::special

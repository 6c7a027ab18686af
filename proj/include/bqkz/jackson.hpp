#pragma once

#include "bqkz/monodromy.hpp"

namespace bqkz::jackson {

using monodromy::Chain;
using spaces::SpinLabel;

struct DomainCheck {
  bool ok;
  double margin;  // -Re(2 xi_+ + 2 xi_- + 2 (2 sum ell - 1) eta + tau)
};

// Re(eta) >= 0 and margin > 0.
DomainCheck check_convergence_domain(const SpectralParams& params, const std::vector<SpinLabel>& spins);

// Summand weight: prod g(x_i) prod_{i<j} h(x_i + x_j) h(x_i - x_j) prod_{r,i} F(t_r + x_i) F(t_r - x_i).
cd total_weight(std::span<const cd> xs, std::span<const cd> t, const std::vector<SpinLabel>& spins,
                const SpectralParams& params, const ToleranceProfile& prof = {});

struct JacksonConfig {
  int S = 0;
  std::vector<cd> x0;  // size S
  int n_cut = 0;       // lattice box [-n_cut, n_cut]^S
  int threads = 0;     // 0: hardware concurrency
  bool skip_poles = false;
  bool allow_outside_domain = false;
};

struct SolutionEvaluation {
  CVec value;
  std::vector<double> shell_norms;    // norm of the contribution of shell m = max_i |n_i|
  std::vector<double> partial_norms;  // norm of the partial sum through shell m
  double tail_estimate = 0;           // outermost shell norm / total norm
  std::vector<std::vector<int>> skipped;
};

// Lattice points of the box in summation order: shells by max |n_i|, lexicographic inside a shell.
std::vector<std::vector<int>> lattice_order(int S, int n_cut);

// Truncated Jackson sum at the chain's t, with xi_+ and xi_- taken from the chain parameters.
// PoleHit names the lattice point unless skip_poles is set.
SolutionEvaluation evaluate_solution(const Chain& ch, const JacksonConfig& cfg);

struct FusionResidual {
  double solution;  // j_s f(t) against f'(t')
  double vacuum;    // j_s Omega against Omega'
};

// Site s of `ch` must be finite with spin k + 1/2 >= 1/2.
FusionResidual solution_fusion_check(const Chain& ch, int s, const JacksonConfig& cfg);

// j_s Bbar(x; t) against Bbar'(x; t') j_s.
double bbar_fusion_check(const Chain& ch, int s, cd x);

}  // namespace bqkz::jackson

#pragma once

#include "bqkz/rops.hpp"

namespace bqkz::monodromy {

using rops::AuxEntries;
using spaces::GradedOperator;
using spaces::SpacePtr;
using spaces::SpinLabel;

// Sites, inhomogeneities and cutoff. The state space has total-level cutoff
// `cutoff`; the auxiliary-extended space V^{1/2} (x) state uses cutoff + 1.
class Chain {
 public:
  Chain(std::vector<SpinLabel> spins, std::vector<cd> t, SpectralParams params, int cutoff,
        ToleranceProfile prof = {});

  int N() const { return int(spins_.size()); }
  const std::vector<SpinLabel>& spins() const { return spins_; }
  const std::vector<cd>& t() const { return t_; }
  const SpectralParams& params() const { return params_; }
  const ToleranceProfile& prof() const { return prof_; }
  int cutoff() const { return cutoff_; }
  const SpacePtr& state() const { return state_; }
  const SpacePtr& full() const { return full_; }

  // Same sites and spaces, different inhomogeneities.
  Chain with_t(std::vector<cd> t) const;

 private:
  std::vector<SpinLabel> spins_;
  std::vector<cd> t_;
  SpectralParams params_;
  ToleranceProfile prof_;
  int cutoff_;
  SpacePtr state_, full_;
};

using Perm = std::vector<int>;  // 0-based; empty means identity

Perm identity_perm(int n);
// s_r ... s_{N-1} as an ordered site list (1-based r): 1..r-1, r+1..N, r.
Perm sigma_shift(int n, int r);

struct Monodromy {
  GradedOperator full;
  AuxEntries e;
};

// Product of L-operators L(x - t_{sigma(i)}) with the auxiliary space on `aux_leg`
// of `big` and site r of the chain on leg state_offset + r.
GradedOperator t_on(SpacePtr big, int aux_leg, int state_offset, const Chain& ch, const Perm& sigma, cd x,
                    bool skip_last = false);
GradedOperator u_on(SpacePtr big, int aux_leg, int state_offset, const Chain& ch, const Perm& sigma, cd xi, cd x);

Monodromy build_T(const Chain& ch, const Perm& sigma, cd x, bool skip_last = false);
Monodromy build_U(const Chain& ch, const Perm& sigma, cd xi, cd x);

// Normalized creation operator (band (0,1) on the state space).
GradedOperator bbar(const Chain& ch, const Perm& sigma, cd xi, cd x);
cd bbar_prefactor(const Chain& ch, cd xi, cd x);

// prod_j Bbar(x_j) Omega; CutoffOverflow if the cutoff is below the number of points.
CVec bethe_vector(const Chain& ch, cd xi, std::span<const cd> xs, const Perm& sigma = {});

// Explicit double sum over signs and subsets; sigma = s_r ... s_{N-1} (r = N gives the identity).
CVec bethe_expansion(const Chain& ch, cd xi, std::span<const cd> xs, int r);

// A^{xi_-}(x) + sinh(xi_+ - x + eta) / sinh(xi_+ + x - eta) D^{xi_-}(x).
GradedOperator transfer(const Chain& ch, cd xi_plus, cd xi_minus, cd x);

// Product of vartheta^{ell_r}(t_r - x): the D-eigenvalue on the vacuum.
cd d_vacuum_eigenvalue(const Chain& ch, cd x);

double check_rtt(const Chain& ch, const Perm& sigma, cd x, cd y);
double check_ru(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y);
double check_b_commute(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y);
double check_bbar_commute(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y);
double check_transfer_commute(const Chain& ch, cd xi_plus, cd xi_minus, cd x, cd y);

}  // namespace bqkz::monodromy

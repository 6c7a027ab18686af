#pragma once

#include "bqkz/spaces.hpp"

namespace bqkz::rops {

using spaces::GradedOperator;
using spaces::SpacePtr;
using spaces::SpinLabel;

enum class Route { explicit_formula, solve, fusion };

// Normalized R-operator on the pair space (k, ell) at difference argument x.
struct ROperator {
  SpinLabel k, ell;
  cd x;
  GradedOperator op;
  Route route = Route::solve;
  double residual = 0;  // intertwining / fusion residual recorded at construction
};

// Entries of an operator on V^{1/2} (x) state with respect to the auxiliary leg.
struct AuxEntries {
  GradedOperator A, B, C, D;
};

// L^{1/2 ell}(x) with its four state-space entries. `full` acts on
// V^{1/2} (x) site with cutoff state_cutoff + 1; entries act on the site with state_cutoff.
struct LOperator {
  SpinLabel ell;
  cd x;
  GradedOperator full;
  AuxEntries e;
};

// Local action of the explicit spin-1/2 L-operator on the (aux, site) pair.
spaces::LocalAction l_action(cd ell, cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

LOperator l_explicit(SpinLabel ell, cd x, int state_cutoff, const SpectralParams& params,
                     const ToleranceProfile& prof = {});

// Splits an operator on V^{1/2} (x) state (aux on leg 0) into its A, B, C, D entries.
AuxEntries aux_entries(const GradedOperator& full, SpacePtr state);

ROperator r_6vertex(cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

// Intertwiner from the Delta / Delta^op relations, solved level by level.
ROperator solve_R(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                  const ToleranceProfile& prof = {});

enum class FusionOrder {
  iota,    // (iota (x) Id) L^{k+1/2} = L13^{1/2}(x - k eta) L23^{k}(x + eta/2) (iota (x) Id)
  j,       // (j (x) Id) L^{k+1/2} = L23^{1/2}(x - k eta) L13^{k}(x + eta/2) (j (x) Id)
  j_dual,  // (j (x) Id) L^{k+1/2} = L13^{k}(x - eta/2) L23^{1/2}(x + k eta) (j (x) Id)
};

// Stage k -> k+1/2 of the fusion recursion. Result acts on V^{k+1/2} (x) ell.
ROperator fuse_L(double k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof = {}, FusionOrder order = FusionOrder::iota);

// R^{k ell} embedded on legs (a, b) of `big` (site spins read from `big`).
GradedOperator r_on_legs(SpacePtr big, int a, int b, cd x, const SpectralParams& params,
                         const ToleranceProfile& prof = {});

double check_ybe(SpinLabel k, SpinLabel l, SpinLabel m, cd x, cd y, cd z, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof = {});
// R^{k ell}(x)^{-1} vs R^{ell k}_21(-x).
double check_unitarity(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                       const ToleranceProfile& prof = {});
// R^{ell k}_21(x) vs R^{k ell}(x).
double check_psym(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                  const ToleranceProfile& prof = {});
// R12(x-y) L13(x-z) L23(y-z) = L23(y-z) L13(x-z) R12(x-y) for finite k, ell and state m.
double check_rll(double k, double l, SpinLabel m, cd x, cd y, cd z, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof = {});
// Spin-1/2 crossing with transpose in the auxiliary leg.
double check_crossing(SpinLabel ell, cd x, int cutoff, const SpectralParams& params, const ToleranceProfile& prof = {});

struct CrossingRatio {
  cd scalar;         // recovered proportionality constant
  double constancy;  // max |lhs - scalar * rhs| / max |lhs|
};
// L^{k ell}(-x)^{T1} against (w (x) Id) L^{k ell}(x - eta) (w (x) Id)^{-1}.
CrossingRatio check_crossing_general(double k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                                     const ToleranceProfile& prof = {});

}  // namespace bqkz::rops

#pragma once

#include <functional>

#include "bqkz/monodromy.hpp"

namespace bqkz::qkz {

using monodromy::Chain;
using spaces::GradedOperator;

struct TransportOperator {
  int r;  // 0-based site
  GradedOperator op;
};

// Xi_r(t; xi_+, xi_-; tau) assembled factor by factor on the chain state space (r is 0-based).
TransportOperator transport(const Chain& ch, int r, cd xi_plus, cd xi_minus);

// Field t -> f(t) on the chain state space.
using VectorField = std::function<CVec(const std::vector<cd>&)>;

// ||f(t + tau e_r) - Xi_r(t) f(t)|| / ||f(t)|| at the chain's t.
double qkz_residual(const Chain& ch, cd xi_plus, cd xi_minus, const VectorField& f, int r);

// Xi_r(t + tau e_s) Xi_s(t) against Xi_s(t + tau e_r) Xi_r(t).
double check_compatibility(const Chain& ch, int r, int s, cd xi_plus, cd xi_minus);

// Chain with site s (spin k + 1/2) split into (k, 1/2) at t_s + eta/2, t_s - k eta.
Chain expanded_chain(const Chain& ch, int s);

// j_s^k on the state space of `ch` into the state space of expanded_chain(ch, s).
GradedOperator fusion_map(const Chain& ch, int s);

// j_s Xi_r(t) against the fused transport on the expanded chain.
double transport_fusion_check(const Chain& ch, int s, int r, cd xi_plus, cd xi_minus);

// For a Verma site s of half-integer weight k: pr_s Xi_r (Verma) against Xi_r (finite) pr_s.
double transport_projection_check(const Chain& ch, int s, int r, cd xi_plus, cd xi_minus);

}  // namespace bqkz::qkz

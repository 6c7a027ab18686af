#include <gtest/gtest.h>

#include "bqkz/rops.hpp"
#include "bqkz/special.hpp"

using namespace bqkz;
using namespace bqkz::rops;
using spaces::make_space;

namespace {

const SpectralParams P;
const SpinLabel H = SpinLabel::Finite(0.5);
const SpinLabel O = SpinLabel::Finite(1.0);
const SpinLabel T3 = SpinLabel::Finite(1.5);
const SpinLabel G = SpinLabel::Generic({0.37, 0.21});
const SpinLabel G2 = SpinLabel::Generic({-0.42, 0.55});

CMat six_vertex_oracle(cd x) {
  const cd a = sh(x + P.eta), b = sh(x), c = sh(P.eta);
  CMat m = CMat::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1.0;
  m(1, 1) = m(2, 2) = b / a;
  m(1, 2) = m(2, 1) = c / a;
  return m;
}

CMat swap4() {
  CMat p = CMat::Zero(4, 4);
  p(0, 0) = p(3, 3) = p(1, 2) = p(2, 1) = 1.0;
  return p;
}

}  // namespace

TEST(SixVertex, DenseForm) {
  const cd x(0.31, -0.22);
  EXPECT_LT(max_abs(r_6vertex(x, P).op.dense() - six_vertex_oracle(x)), 1e-15);
  EXPECT_LT(std::abs(r_6vertex(x, P).op.dense()(1, 1) - sh(x) / sh(x + P.eta)), 1e-15);
}

TEST(SixVertex, ZeroIsPermutation) { EXPECT_LT(max_abs(r_6vertex(0.0, P).op.dense() - swap4()), 1e-15); }

TEST(SixVertex, Unitarity) {
  const cd x(0.4, 0.3);
  const CMat r = r_6vertex(x, P).op.dense(), rm = r_6vertex(-x, P).op.dense();
  EXPECT_LT(max_abs(r * swap4() * rm * swap4() - CMat::Identity(4, 4)), 1e-12);
}

TEST(SixVertex, PoleRaises) { EXPECT_THROW(r_6vertex(-P.eta, P), PoleHit); }

TEST(LExplicit, VacuumActions) {
  const cd x(0.3, 0.25);
  for (SpinLabel l : {H, O, G}) {
    const auto L = l_explicit(l, x, 3, P);
    auto st = L.e.A.domain();
    const CVec om = spaces::vacuum(*st);
    EXPECT_LT((L.e.A.apply(om) - om).norm(), 1e-14);
    EXPECT_LT(L.e.C.apply(om).norm(), 1e-14);
    EXPECT_LT((L.e.D.apply(om) - special::vartheta(l.ell, -x, P) * om).norm(), 1e-13);
  }
}

TEST(LExplicit, EntriesMatchHandFormula) {
  const cd x(-0.2, 0.4), l = G.ell, eta = P.eta;
  const auto L = l_explicit(G, x, 4, P);
  const cd den = sh(x + (0.5 + l) * eta);
  for (int n = 1; n <= 5; ++n) {
    const int i = n - 1;
    EXPECT_LT(std::abs(L.e.A.entry(i, i) - sh(x + (1.5 + l - double(n)) * eta) / den), 1e-13);
    EXPECT_LT(std::abs(L.e.D.entry(i, i) - sh(x + (double(n) - 0.5 - l) * eta) / den), 1e-13);
    if (n <= 4)
      EXPECT_LT(std::abs(L.e.B.entry(i + 1, i) - std::exp((double(n) - l - 0.5) * eta) * sh(eta) / den), 1e-13);
    if (n >= 2)
      EXPECT_LT(std::abs(L.e.C.entry(i - 1, i) - std::exp((l + 1.5 - double(n)) * eta) * sh(double(n - 1) * eta) *
                                                      sh((2.0 * l + 2.0 - double(n)) * eta) / (sh(eta) * den)),
                1e-12);
  }
}

TEST(LExplicit, BandsOfEntries) {
  const auto L = l_explicit(G, cd(0.1, 0.2), 3, P);
  EXPECT_EQ(L.e.A.off_shift_norm(0), 0.0);
  EXPECT_EQ(L.e.D.off_shift_norm(0), 0.0);
  EXPECT_EQ(L.e.B.off_shift_norm(1), 0.0);
  EXPECT_EQ(L.e.C.off_shift_norm(-1), 0.0);
}

TEST(SolveR, HalfHalfIsSixVertex) {
  const cd x(0.23, 0.41);
  EXPECT_LT(max_abs(solve_R(H, H, x, 2, P).op.dense() - six_vertex_oracle(x)), 1e-12);
}

TEST(SolveR, NormalizedAndLevelDiagonal) {
  const auto R = solve_R(O, G, cd(0.2, -0.3), 4, P);
  const CVec om = spaces::vacuum(*R.op.domain());
  EXPECT_LT((R.op.apply(om) - om).norm(), 1e-14);
  EXPECT_EQ(R.op.off_shift_norm(0), 0.0);
  EXPECT_LT(R.residual, 1e-9);
}

TEST(SolveR, EqualSpinsAtZeroIsPermutation) {
  auto sp = make_space({G, G}, 4);
  EXPECT_LT(spaces::residual(solve_R(G, G, 0.0, 4, P).op, spaces::permutation(sp, 0, 1)), 1e-10);
}

TEST(SolveR, HalfLeftMatchesExplicitL) {
  const cd x(0.35, -0.1);
  auto sp = make_space({H, G}, 4);
  const auto L = spaces::embed_action(sp, {0, 1}, 0, 0, l_action(G.ell, x, P));
  EXPECT_LT(spaces::residual(solve_R(H, G, x, 4, P).op, L), 1e-12);
}

TEST(Fusion, StageZeroIsHalfOperator) {
  const cd x(0.2, 0.1);
  auto sp = make_space({H, G}, 3);
  const auto L = spaces::embed_action(sp, {0, 1}, 0, 0, l_action(G.ell, x, P));
  EXPECT_LT(spaces::residual(fuse_L(0.0, G, x, 3, P).op, L), 1e-14);
}

TEST(Fusion, AgreesWithSolveAcrossRoutes) {
  special::Sampler s(31);
  const std::pair<double, SpinLabel> cases[] = {{0.5, H}, {1.0, H}, {1.0, O}, {1.5, O}};
  for (const auto& [k, l] : cases)
    for (int i = 0; i < 5; ++i) {
      const cd x = s.draw() * 0.5;
      const auto F = fuse_L(k - 0.5, l, x, 6, P);
      const auto R = solve_R(SpinLabel::Finite(k), l, x, 6, P);
      EXPECT_LT(spaces::residual(F.op, R.op), 1e-9) << "k=" << k;
    }
}

TEST(Fusion, GenericStateSpinMatchesSolve) {
  const cd x(0.15, -0.25);
  EXPECT_LT(spaces::residual(fuse_L(0.5, G, x, 4, P).op, solve_R(O, G, x, 4, P).op), 1e-9);
}

TEST(Fusion, OrderingsAgree) {
  const cd x(0.3, 0.2);
  for (double k : {0.5, 1.0}) {
    const auto a = fuse_L(k, G, x, 4, P, {}, FusionOrder::iota);
    const auto b = fuse_L(k, G, x, 4, P, {}, FusionOrder::j);
    const auto c = fuse_L(k, G, x, 4, P, {}, FusionOrder::j_dual);
    EXPECT_LT(spaces::residual(a.op, b.op), 1e-10);
    EXPECT_LT(spaces::residual(a.op, c.op), 1e-10);
  }
}

TEST(Structure, YangBaxterHalfSpins) {
  special::Sampler s(32);
  for (int i = 0; i < 5; ++i) EXPECT_LT(check_ybe(H, H, H, s.draw(), s.draw(), s.draw(), 3, P), 1e-11);
}

TEST(Structure, YangBaxterMixed) {
  EXPECT_LT(check_ybe(O, H, G, cd(0.2, 0.1), cd(-0.3, 0.2), cd(0.1, -0.4), 5, P), 1e-9);
  EXPECT_LT(check_ybe(G, G2, T3, cd(0.1, 0.3), cd(0.4, -0.1), cd(-0.2, 0.2), 4, P), 1e-9);
}

TEST(Structure, YangBaxterDegenerateArguments) {
  const cd x(0.2, 0.1);
  EXPECT_LT(check_ybe(H, H, H, x, x, x, 3, P), 1e-15);
}

TEST(Structure, Unitarity) {
  EXPECT_LT(check_unitarity(H, H, cd(0.3, 0.1), 2, P), 1e-12);
  EXPECT_LT(check_unitarity(G, G2, cd(0.3, 0.1), 5, P), 1e-9);
  EXPECT_LT(check_unitarity(G, G, 0.0, 4, P), 1e-12);
}

TEST(Structure, PSymmetry) {
  EXPECT_LT(check_psym(H, H, cd(0.3, 0.1), 2, P), 1e-12);
  EXPECT_LT(check_psym(O, G, cd(0.3, 0.1), 5, P), 1e-9);
  EXPECT_LT(check_psym(G, G2, cd(-0.2, 0.4), 5, P), 1e-9);
}

TEST(Structure, RLL) {
  EXPECT_LT(check_rll(0.5, 0.5, G, cd(0.2, 0.1), cd(-0.1, 0.3), cd(0.05, -0.2), 4, P), 1e-9);
  EXPECT_LT(check_rll(1.0, 0.5, O, cd(0.2, 0.1), cd(-0.1, 0.3), cd(0.05, -0.2), 4, P), 1e-9);
}

TEST(Structure, RLLDetectsWrongArgument) {
  // negative control: the R factor at x+y instead of x-y breaks the relation
  auto sp = make_space({H, H, G}, 4);
  const cd x(0.2, 0.1), y(-0.1, 0.3), z(0.05, -0.2);
  const auto R = spaces::embed(r_6vertex(x + y, P).op, sp, {0, 1});
  const auto L13 = r_on_legs(sp, 0, 2, x - z, P);
  const auto L23 = r_on_legs(sp, 1, 2, y - z, P);
  EXPECT_GT(spaces::residual(R * L13 * L23, L23 * L13 * R), 1e-4);
}

TEST(Crossing, HalfAuxiliary) {
  for (SpinLabel l : {H, O, G}) EXPECT_LT(check_crossing(l, cd(0.3, -0.2), 5, P), 1e-10);
}

TEST(Crossing, GeneralSpinProportional) {
  for (double k : {1.0, 1.5})
    for (SpinLabel l : {H, O, G}) EXPECT_LT(check_crossing_general(k, l, cd(0.25, 0.15), 4, P).constancy, 1e-8);
}

TEST(Crossing, RecoveredScalarForHalfAuxiliary) {
  const cd x(0.25, 0.15);
  for (SpinLabel l : {H, G}) {
    const auto c = check_crossing_general(0.5, l, x, 4, P);
    EXPECT_LT(c.constancy, 1e-10);
    EXPECT_LT(std::abs(c.scalar - special::vartheta(l.ell, x, P)), 1e-10);
  }
}

TEST(RLegs, EmbedsOnChosenLegs) {
  auto sp = make_space({G, H, O}, 3);
  const cd x(0.1, 0.2);
  // R on legs (0, 2) fixes the vacuum and commutes with the permutation of nothing else
  const auto R = r_on_legs(sp, 0, 2, x, P);
  const CVec om = spaces::vacuum(*sp);
  EXPECT_LT((R.apply(om) - om).norm(), 1e-14);
  auto pair = make_space({G, O}, 3);
  const auto local = solve_R(G, O, x, 3, P).op;
  EXPECT_LT(spaces::residual(spaces::embed(local, sp, {0, 2}), R), 1e-15);
}

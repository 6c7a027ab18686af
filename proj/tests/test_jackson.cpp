#include <gtest/gtest.h>

#include "bqkz/jackson.hpp"
#include "bqkz/qkz.hpp"
#include "bqkz/special.hpp"

using namespace bqkz;
using namespace bqkz::jackson;

namespace {

const SpectralParams P;
const SpinLabel H = SpinLabel::Finite(0.5);
const SpinLabel O = SpinLabel::Finite(1.0);
const SpinLabel G = SpinLabel::Generic({0.37, 0.21});

Chain chain(std::vector<SpinLabel> s, int cutoff, SpectralParams p = P) {
  std::vector<cd> t{{0.1, 0.2}, {-0.35, 0.05}, {0.22, -0.13}};
  t.resize(s.size());
  return Chain(std::move(s), std::move(t), p, cutoff);
}

JacksonConfig jcfg(int S, int n_cut, int threads = 1) {
  JacksonConfig c;
  c.S = S;
  c.x0 = std::vector<cd>{{0.23, 0.17}, {-0.41, 0.09}};
  c.x0.resize(S);
  c.n_cut = n_cut;
  c.threads = threads;
  return c;
}

double max_residual(const Chain& ch, const JacksonConfig& c) {
  const qkz::VectorField f = [&](const std::vector<cd>& t) { return evaluate_solution(ch.with_t(t), c).value; };
  double r = 0;
  for (int s = 0; s < ch.N(); ++s) r = std::max(r, qkz::qkz_residual(ch, P.xi_plus, P.xi_minus, f, s));
  return r;
}

}  // namespace

TEST(Domain, MarginValues) {
  EXPECT_NEAR(check_convergence_domain(P, {H}).margin, 4.2, 1e-12);
  EXPECT_NEAR(check_convergence_domain(P, {O, O}).margin, 2.4, 1e-12);
  EXPECT_TRUE(check_convergence_domain(P, {O, O}).ok);
}

TEST(Domain, Violations) {
  SpectralParams p = P;
  p.xi_plus = {3.0, 0.0};
  EXPECT_FALSE(check_convergence_domain(p, {H}).ok);
  SpectralParams n = P;
  n.eta = {-0.1, 0.2};
  EXPECT_FALSE(check_convergence_domain(n, {H}).ok);
}

TEST(Weight, EmptyProductIsOne) {
  const std::vector<cd> t{0.1};
  EXPECT_EQ(total_weight({}, t, {H}, P), cd(1.0));
}

TEST(Weight, FactorStructure) {
  const std::vector<cd> t{{0.1, 0.2}, {-0.35, 0.05}}, xs{{0.23, 0.17}, {-0.41, 0.09}};
  const std::vector<SpinLabel> sp{H, G};
  cd want = 1.0;
  for (int i = 0; i < 2; ++i) {
    want *= special::weight_g(xs[i], P);
    for (int r = 0; r < 2; ++r)
      want *= special::weight_F(sp[r].ell, t[r] + xs[i], P) * special::weight_F(sp[r].ell, t[r] - xs[i], P);
  }
  want *= special::weight_h(xs[0] + xs[1], P) * special::weight_h(xs[0] - xs[1], P);
  EXPECT_LT(std::abs(total_weight(xs, t, sp, P) - want), 1e-12 * std::abs(want));
  EXPECT_THROW(total_weight(xs, std::vector<cd>{0.1}, sp, P), ShapeMismatch);
}

TEST(Lattice, OrderAndCount) {
  EXPECT_EQ(lattice_order(0, 3).size(), 1u);
  const auto pts = lattice_order(2, 2);
  ASSERT_EQ(pts.size(), 25u);
  EXPECT_EQ(pts[0], (std::vector<int>{0, 0}));
  EXPECT_EQ(pts[1], (std::vector<int>{-1, -1}));
  int prev = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int m = std::max(std::abs(pts[i][0]), std::abs(pts[i][1]));
    EXPECT_GE(m, prev);
    if (i && m == prev && m > 0) EXPECT_LT(pts[i - 1], pts[i]);
    prev = m;
  }
  EXPECT_THROW(lattice_order(-1, 2), ShapeMismatch);
}

TEST(Solution, LevelZeroIsVacuum) {
  const Chain ch = chain({H, O}, 2);
  const auto ev = evaluate_solution(ch, jcfg(0, 4));
  EXPECT_LT((ev.value - spaces::vacuum(*ch.state())).norm(), 1e-15);
}

TEST(Solution, InputValidation) {
  const Chain ch = chain({H, O}, 1);
  auto c = jcfg(1, 2);
  c.x0.clear();
  EXPECT_THROW(evaluate_solution(ch, c), ShapeMismatch);
  EXPECT_THROW(evaluate_solution(ch, jcfg(2, 2)), CutoffOverflow);
  SpectralParams bad = P;
  bad.xi_plus = {3.0, 0.0};
  const Chain far = chain({H}, 2, bad);
  EXPECT_THROW(evaluate_solution(far, jcfg(1, 2)), DivergentSeries);
  auto allow = jcfg(1, 2);
  allow.allow_outside_domain = true;
  EXPECT_NO_THROW(evaluate_solution(far, allow));
}

TEST(Solution, ThreadCountDoesNotChangeResult) {
  const Chain ch = chain({H, O}, 2);
  const auto a = evaluate_solution(ch, jcfg(2, 4, 1));
  const auto b = evaluate_solution(ch, jcfg(2, 4, 4));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.shell_norms, b.shell_norms);
}

TEST(Solution, ShellsDecay) {
  const Chain ch = chain({H, O}, 2);
  const auto ev = evaluate_solution(ch, jcfg(1, 12));
  ASSERT_EQ(ev.shell_norms.size(), 13u);
  EXPECT_LT(ev.shell_norms[12], 1e-6 * ev.shell_norms[0]);
  EXPECT_LT(ev.tail_estimate, 1e-6);
  EXPECT_NEAR(ev.partial_norms[12], ev.value.norm(), 1e-15 * ev.value.norm());
}

TEST(Solution, PoleNamesLatticePoint) {
  // x0 sits two steps above a pole of the g weight
  const Chain ch = chain({H}, 2);
  auto c = jcfg(1, 3);
  c.x0 = {P.xi_minus - P.eta / 2.0 + 2.0 * P.tau};
  try {
    evaluate_solution(ch, c);
    FAIL() << "expected a pole";
  } catch (const PoleHit& e) {
    EXPECT_NE(std::string(e.what()).find("lattice point (-2)"), std::string::npos) << e.what();
  }
  c.skip_poles = true;
  const auto ev = evaluate_solution(ch, c);
  EXPECT_EQ(ev.skipped, (std::vector<std::vector<int>>{{-2}, {-3}}));
}

TEST(Solution, QkzResidualShrinksWithCutoff) {
  for (auto spins : {std::vector<SpinLabel>{H}, {H, O}, {O, O}})
    for (int S = 1; S <= 2; ++S) {
      int twice = 0;
      for (auto s : spins) twice += s.twice_k();
      if (twice < S) continue;  // no nonzero vector at that level
      const Chain ch = chain(spins, S);
      const double r4 = max_residual(ch, jcfg(S, 4, 0)), r12 = max_residual(ch, jcfg(S, 12, 0));
      EXPECT_LT(r12, 1e-6) << "N=" << spins.size() << " S=" << S;
      EXPECT_LT(10 * r12, r4) << "N=" << spins.size() << " S=" << S;
    }
}

TEST(Solution, GenericSpinResidual) {
  const Chain ch = chain({G}, 1);
  EXPECT_LT(max_residual(ch, jcfg(1, 12, 0)), 1e-6);
}

TEST(Fusion, CreationOperatorIntertwines) {
  const Chain ch = chain({O, H}, 3);
  for (cd x : {cd(0.2, 0.1), cd(-0.3, 0.25)}) EXPECT_LT(bbar_fusion_check(ch, 0, x), 1e-9);
}

TEST(Fusion, SolutionIntertwines) {
  const Chain ch = chain({O, H}, 1);
  const auto r = solution_fusion_check(ch, 0, jcfg(1, 8, 0));
  EXPECT_LT(r.vacuum, 1e-14);
  EXPECT_LT(r.solution, 1e-9);
}

#include <gtest/gtest.h>

#include "bqkz/spaces.hpp"

using namespace bqkz;
using namespace bqkz::spaces;

namespace {

const SpectralParams P;
const SpinLabel H = SpinLabel::Finite(0.5);
const SpinLabel G = SpinLabel::Generic({0.37, 0.21});

CMat random_mat(int r, int c, unsigned seed) {
  std::srand(seed);
  return CMat::Random(r, c);
}

// Dense operator of a single-site generator written straight from the module rules.
cd e1_coeff(cd ell, int n) {
  const cd eta = P.eta;
  return sh(double(n - 1) * eta) * sh((2.0 * ell + 2.0 - double(n)) * eta) / (sh(eta) * sh(eta));
}

}  // namespace

TEST(SpinLabels, Parsing) {
  EXPECT_EQ(SpinLabel::Finite(1.5).cap(), 4);
  EXPECT_EQ(SpinLabel::Finite(1.5).str(), "3/2");
  EXPECT_EQ(SpinLabel::Finite(1).str(), "1");
  EXPECT_EQ(G.str().rfind("generic:", 0), 0u);
}

TEST(GradedSpaceTest, EnumerationOrderAndLevels) {
  auto s = make_space({G, H, G}, 3);
  int prev = 0;
  for (int i = 0; i < s->dim(); ++i) {
    const int* t = s->tuple(i);
    const int lvl = (t[0] - 1) + (t[1] - 1) + (t[2] - 1);
    EXPECT_EQ(lvl, s->level_of(i));
    EXPECT_GE(lvl, prev);
    EXPECT_LE(t[1], 2);
    EXPECT_EQ(s->index_of(t), i);
    if (i > 0 && s->level_of(i - 1) == lvl) EXPECT_TRUE(std::lexicographical_compare(s->tuple(i - 1), s->tuple(i - 1) + 3, t, t + 3));
    prev = lvl;
  }
  // level sizes: count tuples with n2 <= 2
  int expect = 0;
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 4; ++c) expect += (a + b + c - 3) <= 3;
  EXPECT_EQ(s->dim(), expect);
  EXPECT_EQ(s->index_of({1, 3, 1}), -1);
  EXPECT_EQ(s->index_of({5, 1, 1}), -1);
}

TEST(GradedSpaceTest, SharedLevelsStableUnderCutoff) {
  auto a = make_space({G, G}, 3), b = make_space({G, G}, 5);
  for (int i = 0; i < a->dim(); ++i)
    for (int k = 0; k < 2; ++k) EXPECT_EQ(a->tuple(i)[k], b->tuple(i)[k]);
}

TEST(Generators, HighestWeightFacts) {
  auto s = make_space({G}, 4);
  const CVec m1 = vacuum(*s);
  EXPECT_LT(apply_generator(s, Gen::e1, 0, 0.0, P).apply(m1).norm(), 1e-15);
  const CVec hm = apply_generator(s, Gen::cartan, 0, 0.0, P, 1.0).apply(m1);
  EXPECT_LT(std::abs(hm[0] - std::exp(2.0 * G.ell * P.eta)), 1e-13);
  const auto f = apply_generator(s, Gen::f1, 0, 0.0, P);
  for (int n = 1; n < 5; ++n) EXPECT_EQ(f.entry(n, n - 1), cd(1.0));
  const auto e = apply_generator(s, Gen::e1, 0, 0.0, P);
  for (int n = 2; n <= 5; ++n) EXPECT_LT(std::abs(e.entry(n - 2, n - 1) - e1_coeff(G.ell, n)), 1e-12);
}

TEST(Generators, EvaluationTwists) {
  auto s = make_space({G}, 4);
  const cd x(0.3, -0.2);
  const CMat e1 = apply_generator(s, Gen::e1, 0, 0.0, P).dense();
  const CMat f1 = apply_generator(s, Gen::f1, 0, 0.0, P).dense();
  EXPECT_LT(max_abs(apply_generator(s, Gen::e0, 0, x, P).dense() - std::exp(-x) * f1), 1e-14);
  EXPECT_LT(max_abs(apply_generator(s, Gen::f0, 0, x, P).dense() - std::exp(x) * e1), 1e-13);
  EXPECT_LT(max_abs(apply_generator(s, Gen::f1, 0, x, P).dense() - std::exp(x) * f1), 1e-14);
}

TEST(Generators, FiniteQuotientDropsTop) {
  auto s = make_space({H}, 3);
  const auto f = apply_generator(s, Gen::f1, 0, 0.0, P);
  EXPECT_LT(f.apply(CVec::Unit(2, 1)).norm(), 1e-15);
}

TEST(Generators, RaisingPastCutoffCanThrow) {
  auto s = make_space({G}, 2);
  auto f = apply_generator(s, Gen::f1, 0, 0.0, P, 1.0, Overflow::Drop);
  EXPECT_THROW(f.apply(CVec::Unit(3, 2)), CutoffOverflow);
  EXPECT_THROW(apply_generator(s, Gen::f1, 0, 0.0, P, 1.0, Overflow::Throw), CutoffOverflow);
}

TEST(Coproduct, SingleSiteIsGenerator) {
  auto s = make_space({G}, 3);
  const cd x(0.2, 0.1);
  for (Gen g : {Gen::e1, Gen::f1, Gen::e0, Gen::f0}) {
    std::vector<cd> pts{x};
    EXPECT_LT(max_abs(coproduct_action(s, g, pts, P).dense() - apply_generator(s, g, 0, x, P).dense()), 1e-14);
  }
}

TEST(Coproduct, TwoSiteLoweringOnVacuum) {
  const SpinLabel G2 = SpinLabel::Generic({-0.3, 0.4});
  auto s = make_space({G, G2}, 2);
  const cd x(0.2, 0.1), y(-0.4, 0.3);
  std::vector<cd> pts{x, y};
  const CVec v = coproduct_action(s, Gen::f1, pts, P).apply(vacuum(*s));
  CVec want = CVec::Zero(s->dim());
  want[s->index_of({2, 1})] = std::exp(x) * std::exp(2.0 * G2.ell * P.eta);
  want[s->index_of({1, 2})] = std::exp(y);
  EXPECT_LT((v - want).norm(), 1e-13);
}

TEST(Coproduct, OppositeSwapsRoles) {
  auto s = make_space({G, H}, 3);
  const cd x(0.2, 0.1), y(-0.4, 0.3);
  std::vector<cd> pts{x, y}, rev{y, x};
  auto Pm = permutation(s, 0, 1);
  auto sp = Pm.codomain();
  for (Gen g : {Gen::e1, Gen::f1, Gen::e0, Gen::f0}) {
    const auto a = Pm * coproduct_action(s, g, pts, P, true);
    const auto b = coproduct_action(sp, g, rev, P) * Pm;
    EXPECT_LT(residual(a, b), 1e-14);
  }
}

TEST(Operators, CompositionMatchesDense) {
  auto s = make_space({G, H}, 4);
  auto a = apply_generator(s, Gen::f1, 0, 0.3, P) + apply_generator(s, Gen::e1, 1, -0.2, P);
  auto b = apply_generator(s, Gen::e0, 1, 0.1, P) * cd(0.5, 0.2) + GradedOperator::identity(s);
  const CMat d = (a * b).dense();
  const CMat want = a.dense() * b.dense();
  // blocks pushed above the cutoff are absent in both
  EXPECT_LT(max_abs(d - want), 1e-13);
}

TEST(Operators, FromDenseRejectsOutOfBand) {
  auto s = make_space({G}, 3);
  CMat m = CMat::Zero(4, 4);
  m(2, 0) = 1.0;
  EXPECT_THROW(GradedOperator::from_dense(s, s, m, 0, 1), ShapeMismatch);
  EXPECT_NO_THROW(GradedOperator::from_dense(s, s, m, 0, 2));
}

TEST(Operators, BlockwiseInverse) {
  auto s = make_space({G, G}, 3);
  GradedOperator A(s, s, 0, 0);
  for (int l = 0; l <= s->top_level(); ++l) {
    const int d = s->level_dim(l);
    A.set_block(l, l, random_mat(d, d, 3 + l) + 3.0 * CMat::Identity(d, d));
  }
  EXPECT_LT(residual(A * A.inverse(), GradedOperator::identity(s)), 1e-14);
  GradedOperator Z(s, s, 0, 0);
  Z.set_block(0, 0, CMat::Zero(1, 1));
  EXPECT_THROW(Z.inverse(), IllConditioned);
}

TEST(Operators, EmbedMatchesKronecker) {
  // three finite sites with the cutoff above the top level: the truncation is the full product
  const SpinLabel O = SpinLabel::Finite(1);
  auto big = make_space({H, O, H}, 10);
  auto pair = make_space({H, H}, 10);
  const CMat m = random_mat(4, 4, 9);
  GradedOperator local = GradedOperator::from_dense(pair, pair, m, 2, 2);
  GradedOperator e = embed(local, big, {0, 2});
  for (int i = 0; i < big->dim(); ++i)
    for (int j = 0; j < big->dim(); ++j) {
      const int* a = big->tuple(i);
      const int* b = big->tuple(j);
      const cd want = a[1] == b[1] ? m(pair->index_of({a[0], a[2]}), pair->index_of({b[0], b[2]})) : cd(0.0);
      EXPECT_EQ(e.entry(i, j), want);
    }
}

TEST(Operators, EmbedRequiresMatchingSpins) {
  auto big = make_space({H, G}, 3);
  auto wrong = make_space({G}, 3);
  EXPECT_THROW(embed(GradedOperator::identity(wrong), big, {0}), ShapeMismatch);
}

TEST(Operators, LevelBandExactnessUnderCutoff) {
  const SpinLabel G2 = SpinLabel::Generic({-0.3, 0.4});
  auto a = make_space({G, G2}, 3), b = make_space({G, G2}, 5);
  std::vector<cd> pts{cd(0.2, 0.1), cd(-0.3, 0.2)};
  for (Gen g : {Gen::e1, Gen::f0}) {
    const CMat da = coproduct_action(a, g, pts, P).dense();
    const CMat db = coproduct_action(b, g, pts, P).dense().topLeftCorner(a->dim(), a->dim());
    EXPECT_LT(max_abs(da - db), 1e-13);
  }
}

TEST(Intertwiners, IotaOnHighestWeight) {
  for (double k : {0.5, 1.0, 1.5}) {
    auto io = build_iota(k, P).op;
    CVec v = io.apply(CVec::Unit(io.domain()->dim(), 0));
    EXPECT_LT((v - vacuum(*io.codomain())).norm(), 1e-15);
  }
}

TEST(Intertwiners, IotaIntertwinesAllGenerators) {
  const cd x(0.27, -0.14);
  for (double k : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    auto io = build_iota(k, P).op;
    const cd eta = P.eta;
    std::vector<cd> pts{x - k * eta, x + eta / 2.0};
    for (Gen g : {Gen::e1, Gen::f1, Gen::e0, Gen::f0}) {
      const auto lhs = coproduct_action(io.codomain(), g, pts, P) * io;
      const auto rhs = io * apply_generator(io.domain(), g, 0, x, P);
      EXPECT_LT(residual(lhs, rhs), 1e-10) << "k=" << k;
    }
  }
}

TEST(Intertwiners, JIsPermutedIota) {
  for (double k : {0.5, 1.0}) {
    auto io = build_iota(k, P).op;
    auto j = build_j(k, P).op;
    EXPECT_LT(residual(permutation(io.codomain(), 0, 1) * io, j), 1e-15);
  }
}

TEST(Intertwiners, Injective) {
  for (double k = 0; k <= 3.0; k += 0.5) {
    const CMat d = build_iota(k, P).op.dense();
    Eigen::JacobiSVD<CMat> svd(d);
    EXPECT_GT(svd.singularValues().minCoeff(), 1e-8) << k;
  }
}

TEST(Intertwiners, WHalf) {
  const CMat w = build_w(0.5, P).op.dense();
  CMat want(2, 2);
  want << 0, -1, 1, 0;
  EXPECT_LT(max_abs(w - want), 1e-15);
}

TEST(Intertwiners, WCoefficientsClosedForm) {
  const cd p = P.p();
  for (double k : {0.0, 1.0, 1.5, 2.5}) {
    const int tk = int(std::lround(2 * k));
    const CMat w = build_w(k, P).op.dense();
    CMat want = CMat::Zero(tk + 1, tk + 1);
    for (int n = 1; n <= tk + 1; ++n)
      want(tk + 1 - n, n - 1) = ((n - 1) % 2 ? -1.0 : 1.0) * std::pow(p, double((n - 1) * (tk + 1 - n)));
    EXPECT_LT(max_abs(w - want), 1e-12) << k;
    // mirror symmetry of the coefficients makes w^2 diagonal with entries (-1)^{2k} c_n^2
    const CMat w2 = w * w;
    CMat d = CMat::Zero(tk + 1, tk + 1);
    for (int n = 0; n <= tk; ++n) d(n, n) = (tk % 2 ? -1.0 : 1.0) * want(tk - n, n) * want(tk - n, n);
    EXPECT_LT(max_abs(w2 - d), 1e-12 * (1 + max_abs(d))) << k;
  }
}

TEST(Permutations, SquareIsIdentity) {
  auto s = make_space({G, H, G}, 3);
  auto p1 = permutation(s, 0, 2);
  auto p2 = permutation(p1.codomain(), 0, 2);
  EXPECT_LT(residual(p2 * p1, GradedOperator::identity(s)), 1e-16);
  auto t = permutation(s, 0, 1);
  const CVec v = t.apply(CVec::Unit(s->dim(), s->index_of({2, 1, 1})));
  EXPECT_EQ(v[t.codomain()->index_of({1, 2, 1})], cd(1.0));
}

TEST(Projection, HalfSpinQuotient) {
  auto s = make_space({SpinLabel::Generic(0.5)}, 4);
  auto pr = project_site(s, 0, 0.5);
  EXPECT_EQ(pr.codomain()->dim(), 2);
  EXPECT_LT(pr.apply(CVec::Unit(5, 2)).norm(), 1e-16);
  EXPECT_EQ(pr.apply(CVec::Unit(5, 1))[1], cd(1.0));
  EXPECT_THROW(project_site(make_space({G}, 2), 0, 0.5), ShapeMismatch);
}

TEST(Projection, CommutesWithGenerators) {
  auto s = make_space({SpinLabel::Generic(1.0), H}, 4);
  auto pr = project_site(s, 0, 1.0);
  std::vector<cd> pts{cd(0.1, 0.2), cd(-0.2, 0.1)};
  for (Gen g : {Gen::e1, Gen::f1, Gen::e0, Gen::f0})
    EXPECT_LT(residual(pr * coproduct_action(s, g, pts, P), coproduct_action(pr.codomain(), g, pts, P) * pr), 1e-13);
}

TEST(Splitting, VacuumMapsToVacuum) {
  auto s = make_space({G, SpinLabel::Finite(1.5)}, 4);
  auto j = split_site(s, 1, 1.0, true, P);
  EXPECT_LT((j.apply(vacuum(*s)) - vacuum(*j.codomain())).norm(), 1e-16);
  EXPECT_EQ(j.codomain()->site(1), SpinLabel::Finite(1.0));
  EXPECT_EQ(j.codomain()->site(2), H);
}

#include <gtest/gtest.h>

#include <thread>

#include "bqkz/kops.hpp"
#include "bqkz/rops.hpp"
#include "bqkz/special.hpp"

using namespace bqkz;
using namespace bqkz::kops;

namespace {

const SpectralParams P;
const SpinLabel H = SpinLabel::Finite(0.5);
const SpinLabel O = SpinLabel::Finite(1.0);
const SpinLabel T3 = SpinLabel::Finite(1.5);
const SpinLabel G = SpinLabel::Generic({0.37, 0.21});

// n-th diagonal boundary coefficient as a direct product over consecutive shifts
cd c_oracle(int n, cd ell, cd x, cd xi) {
  cd r = 1.0;
  for (int j = 1; j < n; ++j) {
    const cd s = (ell + 0.5 - double(j)) * P.eta;
    r *= std::sinh(xi - x + s) / std::sinh(xi + x + s);
  }
  return r;
}

}  // namespace

TEST(KHalf, Entries) {
  const cd xi(-0.7, 0.2), x(0.3, 0.1);
  const auto K = k_half(xi, x, P);
  ASSERT_EQ(K.diag.size(), 2u);
  EXPECT_EQ(K.diag[0], cd(1.0));
  EXPECT_LT(std::abs(K.diag[1] - std::sinh(xi - x) / std::sinh(xi + x)), 1e-15);
}

TEST(KHalf, ZeroArgumentIsIdentity) {
  const auto K = k_half(cd(0.4, 0.1), 0.0, P);
  EXPECT_LT(std::abs(K.diag[1] - 1.0), 1e-15);
}

TEST(KHalf, PoleRaises) { EXPECT_THROW(k_half(cd(0.4, 0.1), cd(-0.4, -0.1), P), PoleHit); }

TEST(KDiag, MatchesProductOracle) {
  const cd xi(-0.9, -0.1), x(0.25, 0.3);
  for (SpinLabel l : {H, O, T3, G}) {
    const auto K = k_diag(xi, l, x, 5, P);
    for (std::size_t i = 0; i < K.diag.size(); ++i)
      EXPECT_LT(std::abs(K.diag[i] - c_oracle(int(i) + 1, l.ell, x, xi)), 1e-12 * (1 + std::abs(K.diag[i])));
  }
}

TEST(KDiag, HalfSpinReducesToKHalf) {
  const cd xi(-0.7, 0.2), x(0.1, -0.2);
  const auto a = k_diag(xi, H, x, 3, P), b = k_half(xi, x, P);
  EXPECT_LT(std::abs(a.diag[1] - b.diag[1]), 1e-15);
}

TEST(KDiag, VacuumEntryIsOne) {
  for (SpinLabel l : {O, G}) EXPECT_EQ(k_diag(cd(0.3, 0.4), l, cd(0.1, 0.2), 4, P).diag[0], cd(1.0));
}

TEST(KFusion, AgreesWithClosedForm) {
  special::Sampler s(41);
  for (double k : {0.5, 1.0, 1.5, 2.0})
    for (int i = 0; i < 4; ++i) {
      const cd xi = s.draw(), x = s.draw() * 0.5;
      const auto F = fuse_K(k, xi, x, P);
      const auto C = k_diag(xi, SpinLabel::Finite(k + 0.5), x, 8, P);
      ASSERT_EQ(F.diag.size(), C.diag.size());
      for (std::size_t n = 0; n < F.diag.size(); ++n)
        EXPECT_LT(std::abs(F.diag[n] - C.diag[n]), 1e-9 * (1 + std::abs(C.diag[n]))) << k << " " << n;
      EXPECT_LT(F.off_diagonal, 1e-10);
    }
}

TEST(KFusion, RelationResidual) {
  for (double k : {0.0, 0.5, 1.0, 1.5}) EXPECT_LT(fuse_K_relation_residual(k, cd(-0.7, 0.2), cd(0.2, 0.1), P), 1e-10);
}

TEST(KFusion, ZeroStageIsHalfOperator) {
  const cd xi(-0.7, 0.2), x(0.2, 0.1);
  const auto F = fuse_K(0.0, xi, x, P), K = k_half(xi, x, P);
  EXPECT_LT(std::abs(F.diag[1] - K.diag[1]), 1e-13);
}

TEST(KFusionCache, HitReturnsStoredValue) {
  KFusionCache cache;
  const cd xi(-0.7, 0.2), x(0.2, 0.1);
  const auto a = fuse_K(1.0, xi, x, P, {}, &cache);
  const std::size_t n = cache.size();
  EXPECT_GE(n, 2u);  // stages 1 and 3/2
  const auto b = fuse_K(1.0, xi, x, P, {}, &cache);
  EXPECT_EQ(cache.size(), n);
  for (std::size_t i = 0; i < a.diag.size(); ++i) EXPECT_EQ(a.diag[i], b.diag[i]);
}

TEST(KFusionCache, ConcurrentUse) {
  KFusionCache cache;
  const cd xi(-0.7, 0.2);
  std::vector<std::vector<cd>> got(8);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 8; ++w)
      pool.emplace_back([&, w] { got[w] = fuse_K(1.5, xi, cd(0.1 * (w % 2), 0.2), P, {}, &cache).diag; });
  }
  for (int w = 2; w < 8; ++w) EXPECT_EQ(got[w], got[w % 2]);
  EXPECT_EQ(cache.size(), 8u);  // stages 1/2 .. 2 for each of two arguments
}

TEST(Reflection, DiagonalSources) {
  special::Sampler s(42);
  const std::pair<SpinLabel, SpinLabel> pairs[] = {{H, H}, {H, O}, {O, G}, {G, T3}};
  for (const auto& [a, b] : pairs)
    for (int i = 0; i < 3; ++i)
      EXPECT_LT(check_reflection(a, b, s.draw() * 0.5, s.draw() * 0.5, s.draw(), 4, P), 1e-9);
}

TEST(Reflection, FusedSources) {
  const cd x(0.2, 0.1), y(-0.15, 0.25), xi(-0.7, 0.2);
  EXPECT_LT(check_reflection(O, H, x, y, xi, 4, P, {}, KSource::fused, KSource::diagonal), 1e-9);
  EXPECT_LT(check_reflection(T3, O, x, y, xi, 5, P, {}, KSource::fused, KSource::fused), 1e-9);
}

TEST(Reflection, FusedNeedsFiniteSpin) {
  EXPECT_THROW(check_reflection(G, H, 0.1, 0.2, 0.3, 3, P, {}, KSource::fused), ShapeMismatch);
}

TEST(Reflection, DetectsWrongBoundaryParameter) {
  // negative control: different xi on the two sides
  const cd x(0.2, 0.1), y(-0.15, 0.25);
  const CMat Rm = rops::r_6vertex(x - y, P).op.dense(), Rp = rops::r_6vertex(x + y, P).op.dense();
  const auto a = k_half(cd(-0.7, 0.2), x, P), b = k_half(cd(0.4, -0.3), y, P);
  CMat K1 = CMat::Zero(4, 4), K2 = CMat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      K1(2 * i + j, 2 * i + j) = a.diag[i];
      K2(2 * i + j, 2 * i + j) = b.diag[j];
    }
  EXPECT_GT(max_abs(Rm * K1 * Rp * K2 - K2 * Rp * K1 * Rm), 1e-3);
}

TEST(BoundaryCrossing, Holds) {
  special::Sampler s(43);
  for (int i = 0; i < 10; ++i) EXPECT_LT(check_boundary_crossing(s.draw(), s.draw() * 0.5, P), 1e-12);
}

#include "bqkz/rops.hpp"

#include <sstream>

#include "bqkz/special.hpp"

namespace bqkz::rops {

using spaces::Emit;
using spaces::Gen;
using spaces::make_space;

spaces::LocalAction l_action(cd ell, cd x, const SpectralParams& params, const ToleranceProfile& prof) {
  const cd eta = params.eta;
  const cd inv_den = inv_sinh(x + (0.5 + ell) * eta, prof.pole_guard, "L-operator");
  const cd she = sh(eta);
  return [=](const int* t, const Emit& emit) {
    const int a = t[0], n = t[1];
    const double dn = n;
    int out[2];
    if (a == 1) {
      out[0] = 1;
      out[1] = n;
      emit(sh(x + (1.5 + ell - dn) * eta) * inv_den, out);
      if (n > 1) {
        out[0] = 2;
        out[1] = n - 1;
        emit(std::exp((ell + 1.5 - dn) * eta) * sh((dn - 1.0) * eta) * sh((2.0 * ell + 2.0 - dn) * eta) / she * inv_den,
             out);
      }
    } else {
      out[0] = 1;
      out[1] = n + 1;
      emit(std::exp((dn - ell - 0.5) * eta) * she * inv_den, out);
      out[0] = 2;
      out[1] = n;
      emit(sh(x + (dn - 0.5 - ell) * eta) * inv_den, out);
    }
  };
}

AuxEntries aux_entries(const GradedOperator& full, SpacePtr state) {
  const auto& fs = *full.domain();
  if (!full.codomain()->same_as(fs)) throw ShapeMismatch("aux_entries expects an endomorphism");
  const int ns = state->num_sites();
  if (fs.num_sites() != ns + 1) throw ShapeMismatch("aux_entries: state space must drop exactly the aux leg");
  AuxEntries e{GradedOperator(state, state, 0, 0), GradedOperator(state, state, 0, 1),
               GradedOperator(state, state, 1, 0), GradedOperator(state, state, 0, 0)};
  full.for_each_block([&](int o, int i, const CMat& b) {
    for (int c = 0; c < b.cols(); ++c) {
      const int* ct = fs.tuple(fs.level_start(i) + c);
      const int sc = state->index_of(ct + 1);
      if (sc < 0) continue;
      for (int r = 0; r < b.rows(); ++r) {
        const cd v = b(r, c);
        if (v == 0.0) continue;
        const int* rt = fs.tuple(fs.level_start(o) + r);
        const int sr = state->index_of(rt + 1);
        if (sr < 0) continue;
        GradedOperator& tgt = rt[0] == 1 ? (ct[0] == 1 ? e.A : e.B) : (ct[0] == 1 ? e.C : e.D);
        tgt.add_entry(sr, sc, v);
      }
    }
  });
  return e;
}

namespace {

GradedOperator explicit_half_pair(SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                                  const ToleranceProfile& prof) {
  auto sp = make_space({SpinLabel::Finite(0.5), ell}, cutoff);
  return spaces::embed_action(sp, {0, 1}, 0, 0, l_action(ell.ell, x, params, prof));
}

bool is_half(const SpinLabel& s) { return s.finite && s.twice_k() == 1; }

// Solves A X = B for every level block with A injective.
GradedOperator solve_left(const GradedOperator& A, const GradedOperator& B, double tol, double& resid) {
  GradedOperator X(A.domain(), B.domain(), 0, 0);
  resid = 0;
  for (int l = 0; l <= B.domain()->top_level(); ++l) {
    const CMat* a = A.find_block(l, l);
    const CMat* b = B.find_block(l, l);
    if (!a || !b) throw ShapeMismatch("fusion solve: missing level block");
    Eigen::JacobiSVD<CMat> svd(*a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() && sv(sv.size() - 1) * 1e10 < sv(0)) throw IllConditioned("fusion embedding is not injective");
    CMat x = svd.solve(*b);
    resid = std::max(resid, rel_residual(CMat(*a * x), *b));
    X.set_block(l, l, std::move(x));
  }
  if (resid > tol) {
    std::ostringstream os;
    os << "fusion image escapes the embedding, residual " << resid;
    throw ResidualTooLarge(os.str());
  }
  return X;
}

}  // namespace

LOperator l_explicit(SpinLabel ell, cd x, int state_cutoff, const SpectralParams& params, const ToleranceProfile& prof) {
  auto state = make_space({ell}, state_cutoff);
  auto full = make_space({SpinLabel::Finite(0.5), ell}, state_cutoff + 1, 1);
  GradedOperator op = spaces::embed_action(full, {0, 1}, 0, 0, l_action(ell.ell, x, params, prof));
  AuxEntries e = aux_entries(op, state);
  return {ell, x, std::move(op), std::move(e)};
}

ROperator r_6vertex(cd x, const SpectralParams& params, const ToleranceProfile& prof) {
  const SpinLabel h = SpinLabel::Finite(0.5);
  auto sp = make_space({h, h}, 2);
  const cd inv = inv_sinh(x + params.eta, prof.pole_guard, "6-vertex R");
  CMat m = CMat::Zero(4, 4);
  m(0, 0) = 1.0;
  m(3, 3) = 1.0;
  m(1, 1) = m(2, 2) = sh(x) * inv;
  m(1, 2) = m(2, 1) = sh(params.eta) * inv;
  // basis order of the pair space is (11), (12), (21), (22), matching the usual ordering
  return {h, h, x, GradedOperator::from_dense(sp, sp, m, 0, 0), Route::explicit_formula, 0.0};
}

ROperator solve_R(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                  const ToleranceProfile& prof) {
  auto sp = make_space({k, ell}, cutoff);
  const cd pts[2] = {x, 0.0};
  const Gen gens[4] = {Gen::f1, Gen::e0, Gen::e1, Gen::f0};
  std::vector<GradedOperator> G, Gop;
  for (Gen g : gens) {
    G.push_back(spaces::coproduct_action(sp, g, pts, params, false));
    Gop.push_back(spaces::coproduct_action(sp, g, pts, params, true));
  }
  GradedOperator R(sp, sp, 0, 0);
  R.set_block(0, 0, CMat::Identity(1, 1));
  for (int l = 0; l < sp->top_level(); ++l) {
    const CMat& r = *R.find_block(l, l);
    const int d0 = sp->level_dim(l), d1 = sp->level_dim(l + 1);
    CMat A(d1, 2 * d0), B(d1, 2 * d0);
    A << *G[0].find_block(l + 1, l), *G[1].find_block(l + 1, l);
    B << (*Gop[0].find_block(l + 1, l)) * r, (*Gop[1].find_block(l + 1, l)) * r;
    // X A = B  <=>  A^T X^T = B^T
    CMat At = A.transpose();
    Eigen::JacobiSVD<CMat> svd(At, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (sv.size() < d1 || !(smin > 0) || sv(0) / smin > 1e10) {
      std::ostringstream os;
      os << "R level " << l + 1 << " system condition " << (smin > 0 ? sv(0) / smin : INFINITY);
      throw IllConditioned(os.str());
    }
    CMat Xt = svd.solve(CMat(B.transpose()));
    R.set_block(l + 1, l + 1, Xt.transpose());
  }
  double res = 0;
  for (int g = 0; g < 4; ++g) res = std::max(res, spaces::residual(R * G[g], Gop[g] * R));
  if (res > prof.rel_tol) {
    std::ostringstream os;
    os << "R-operator intertwining residual " << res;
    throw ResidualTooLarge(os.str());
  }
  return {k, ell, x, std::move(R), Route::solve, res};
}

ROperator fuse_L(double k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof, FusionOrder order) {
  const SpinLabel sk = SpinLabel::Finite(k), sh_ = SpinLabel::Finite(0.5);
  const cd eta = params.eta;
  const bool j = order != FusionOrder::iota;
  auto pair = make_space({SpinLabel::Finite(k + 0.5), ell}, cutoff);
  auto triple = make_space(j ? std::vector<SpinLabel>{sk, sh_, ell} : std::vector<SpinLabel>{sh_, sk, ell}, cutoff);
  GradedOperator emb = spaces::split_site(pair, 0, k, j, params);

  auto lower_stage = [&](cd arg) -> GradedOperator {
    if (sk.twice_k() == 0) return GradedOperator::identity(make_space({sk, ell}, cutoff));
    if (sk.twice_k() == 1) return explicit_half_pair(ell, arg, cutoff, params, prof);
    return fuse_L(k - 0.5, ell, arg, cutoff, params, prof, order).op;
  };
  auto half_on = [&](int aux_leg, cd arg) {
    return spaces::embed_action(triple, {aux_leg, 2}, 0, 0, l_action(ell.ell, arg, params, prof));
  };

  GradedOperator rhs;
  switch (order) {
    case FusionOrder::iota:
      rhs = half_on(0, x - k * eta) * spaces::embed(lower_stage(x + eta / 2.0), triple, {1, 2}) * emb;
      break;
    case FusionOrder::j:
      rhs = half_on(1, x - k * eta) * spaces::embed(lower_stage(x + eta / 2.0), triple, {0, 2}) * emb;
      break;
    case FusionOrder::j_dual:
      rhs = spaces::embed(lower_stage(x - eta / 2.0), triple, {0, 2}) * half_on(1, x + k * eta) * emb;
      break;
  }
  double res = 0;
  GradedOperator X = solve_left(emb, rhs, prof.rel_tol, res);
  return {SpinLabel::Finite(k + 0.5), ell, x, std::move(X), Route::fusion, res};
}

GradedOperator r_on_legs(SpacePtr big, int a, int b, cd x, const SpectralParams& params, const ToleranceProfile& prof) {
  const SpinLabel& sa = big->site(a);
  const SpinLabel& sb = big->site(b);
  if (is_half(sa)) return spaces::embed_action(big, {a, b}, 0, 0, l_action(sb.ell, x, params, prof));
  return spaces::embed(solve_R(sa, sb, x, big->cutoff(), params, prof).op, big, {a, b});
}

double check_ybe(SpinLabel k, SpinLabel l, SpinLabel m, cd x, cd y, cd z, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof) {
  auto sp = make_space({k, l, m}, cutoff);
  auto R12 = r_on_legs(sp, 0, 1, x - y, params, prof);
  auto R13 = r_on_legs(sp, 0, 2, x - z, params, prof);
  auto R23 = r_on_legs(sp, 1, 2, y - z, params, prof);
  return spaces::residual(R12 * R13 * R23, R23 * R13 * R12);
}

namespace {

// R^{ell k}_21(x) = P R^{ell k}(x) P as an operator on (k, ell).
GradedOperator r21(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                   const ToleranceProfile& prof) {
  auto kl = make_space({k, ell}, cutoff);
  auto lk = make_space({ell, k}, cutoff);
  GradedOperator R = r_on_legs(lk, 0, 1, x, params, prof);
  GradedOperator P1 = spaces::permutation(kl, 0, 1);
  GradedOperator P2 = spaces::permutation(lk, 0, 1);
  return P2 * R * P1;
}

}  // namespace

double check_unitarity(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                       const ToleranceProfile& prof) {
  auto kl = make_space({k, ell}, cutoff);
  GradedOperator R = r_on_legs(kl, 0, 1, x, params, prof);
  GradedOperator inv = R.inverse();
  GradedOperator other = r21(k, ell, -x, cutoff, params, prof);
  return spaces::residual(inv, other);
}

double check_psym(SpinLabel k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                  const ToleranceProfile& prof) {
  auto kl = make_space({k, ell}, cutoff);
  GradedOperator R = r_on_legs(kl, 0, 1, x, params, prof);
  return spaces::residual(r21(k, ell, x, cutoff, params, prof), R);
}

double check_rll(double k, double l, SpinLabel m, cd x, cd y, cd z, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof) {
  const SpinLabel sk = SpinLabel::Finite(k), sl = SpinLabel::Finite(l);
  auto sp = make_space({sk, sl, m}, cutoff);
  GradedOperator R12;
  if (sk.twice_k() == 1 && sl.twice_k() == 1)
    R12 = spaces::embed(r_6vertex(x - y, params, prof).op, sp, {0, 1});
  else
    R12 = r_on_legs(sp, 0, 1, x - y, params, prof);
  auto L13 = r_on_legs(sp, 0, 2, x - z, params, prof);
  auto L23 = r_on_legs(sp, 1, 2, y - z, params, prof);
  return spaces::residual(R12 * L13 * L23, L23 * L13 * R12);
}

double check_crossing(SpinLabel ell, cd x, int cutoff, const SpectralParams& params, const ToleranceProfile& prof) {
  const LOperator lm = l_explicit(ell, -x, cutoff, params, prof);
  const LOperator ls = l_explicit(ell, x - params.eta, cutoff, params, prof);
  const cd th = special::vartheta(ell.ell, x, params, prof);
  double r = 0;
  r = std::max(r, spaces::residual(lm.e.A, th * ls.e.D));
  r = std::max(r, spaces::residual(lm.e.B, -th * ls.e.B));
  r = std::max(r, spaces::residual(lm.e.C, -th * ls.e.C));
  r = std::max(r, spaces::residual(lm.e.D, th * ls.e.A));
  return r;
}

CrossingRatio check_crossing_general(double k, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                                     const ToleranceProfile& prof) {
  const SpinLabel sk = SpinLabel::Finite(k);
  const int dk = sk.twice_k() + 1;
  const int big = cutoff + sk.twice_k();
  auto pair = make_space({sk, ell}, big);
  GradedOperator Lm = r_on_legs(pair, 0, 1, -x, params, prof);
  GradedOperator Ls = r_on_legs(pair, 0, 1, x - params.eta, params, prof);
  const CMat W = spaces::build_w(k, params).op.dense();
  const CMat Winv = W.inverse();
  const int nmax = std::min(cutoff + 1, ell.cap());
  std::vector<cd> lhs, rhs;
  for (int n = 1; n <= nmax; ++n)
    for (int m = 1; m <= nmax; ++m) {
      CMat a(dk, dk), b(dk, dk);
      for (int i = 1; i <= dk; ++i)
        for (int j = 1; j <= dk; ++j) {
          const int ri = pair->index_of({i, n}), cj = pair->index_of({j, m});
          a(i - 1, j - 1) = Lm.entry(ri, cj);
          b(i - 1, j - 1) = Ls.entry(ri, cj);
        }
      CMat l = a.transpose();
      CMat r = W * b * Winv;
      for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j) {
          lhs.push_back(l(i, j));
          rhs.push_back(r(i, j));
        }
    }
  cd num = 0.0, den = 0.0;
  double lmax = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    num += std::conj(rhs[i]) * lhs[i];
    den += std::conj(rhs[i]) * rhs[i];
    lmax = std::max(lmax, std::abs(lhs[i]));
  }
  const cd alpha = num / den;
  double dev = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i) dev = std::max(dev, std::abs(lhs[i] - alpha * rhs[i]));
  return {alpha, lmax > 0 ? dev / lmax : dev};
}

}  // namespace bqkz::rops

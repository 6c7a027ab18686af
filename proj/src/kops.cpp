#include "bqkz/kops.hpp"

#include <sstream>

#include "bqkz/rops.hpp"
#include "bqkz/special.hpp"

namespace bqkz::kops {

using spaces::make_space;

namespace {

KOperator diag_operator(SpinLabel spin, cd xi, cd x, SpacePtr sp, std::vector<cd> d) {
  GradedOperator op(sp, sp, 0, 0);
  for (int i = 0; i < sp->dim(); ++i) op.add_entry(i, i, d[i]);
  return {spin, xi, x, std::move(op), std::move(d), 0.0, 0.0};
}

KOperator from_full(SpinLabel spin, cd xi, cd x, GradedOperator op) {
  const auto& sp = *op.domain();
  KOperator k{spin, xi, x, op, {}, 0.0, 0.0};
  const CMat m = op.dense();
  for (int i = 0; i < sp.dim(); ++i) {
    k.diag.push_back(m(i, i));
    for (int j = 0; j < sp.dim(); ++j)
      if (i != j) k.off_diagonal = std::max(k.off_diagonal, std::abs(m(i, j)));
  }
  return k;
}

struct Relation {
  GradedOperator j;    // V^{k+1/2} -> V^k (x) V^{1/2}
  GradedOperator rhs;  // P K1(x - k eta) R(2x - (k - 1/2) eta) K2(x + eta/2) iota
};

Relation fusion_relation(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof,
                         KFusionCache* cache);

GradedOperator stage_operator(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof,
                              KFusionCache* cache) {
  const SpinLabel sk = SpinLabel::Finite(k);
  if (sk.twice_k() == 0) return GradedOperator::identity(make_space({sk}, 0));
  return fuse_K(k - 0.5, xi, x, params, prof, cache).op;
}

Relation fusion_relation(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof,
                         KFusionCache* cache) {
  const cd eta = params.eta;
  const SpinLabel sk = SpinLabel::Finite(k), shalf = SpinLabel::Finite(0.5);
  const int cut = sk.twice_k() + 1;
  auto hk = make_space({shalf, sk}, cut);
  GradedOperator iota = spaces::build_iota(k, params).op;
  GradedOperator jj = spaces::build_j(k, params).op;
  GradedOperator P = spaces::permutation(hk, 0, 1);
  GradedOperator K1 = spaces::embed(k_half(xi, x - k * eta, params, prof).op, hk, {0});
  GradedOperator R = rops::r_on_legs(hk, 0, 1, 2.0 * x - (k - 0.5) * eta, params, prof);
  GradedOperator K2 = spaces::embed(stage_operator(k, xi, x + eta / 2.0, params, prof, cache), hk, {1});
  return {jj, P * K1 * R * K2 * iota};
}

}  // namespace

KOperator k_half(cd xi, cd x, const SpectralParams&, const ToleranceProfile& prof) {
  const SpinLabel h = SpinLabel::Finite(0.5);
  auto sp = make_space({h}, 1);
  return diag_operator(h, xi, x, sp, {1.0, sh(xi - x) * inv_sinh(xi + x, prof.pole_guard, "spin-1/2 K")});
}

KOperator k_diag(cd xi, SpinLabel ell, cd x, int cutoff, const SpectralParams& params, const ToleranceProfile& prof) {
  auto sp = make_space({ell}, cutoff);
  std::vector<cd> d(sp->dim());
  for (int i = 0; i < sp->dim(); ++i) d[i] = special::c_coeff(sp->tuple(i)[0], ell.ell, x, xi, params, prof);
  return diag_operator(ell, xi, x, sp, std::move(d));
}

bool KFusionCache::find(const Key& key, KOperator& out) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return false;
  out = it->second;
  return true;
}

void KFusionCache::insert(const Key& key, const KOperator& value) {
  std::lock_guard<std::mutex> lk(mu_);
  map_.emplace(key, value);
}

std::size_t KFusionCache::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return map_.size();
}

KOperator fuse_K(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof,
                 KFusionCache* cache) {
  const SpinLabel target = SpinLabel::Finite(k + 0.5);
  const KFusionCache::Key key{target.twice_k(), x.real(), x.imag(), xi.real(), xi.imag(), params.eta.real(),
                              params.eta.imag()};
  KOperator hit;
  if (cache && cache->find(key, hit)) return hit;

  Relation rel = fusion_relation(k, xi, x, params, prof, cache);
  // j^k is injective and level preserving on the finite pair; solve per level
  const auto& dom = rel.j.domain();
  GradedOperator X(dom, dom, 0, 0);
  double res = 0;
  for (int l = 0; l <= dom->top_level(); ++l) {
    const CMat& a = *rel.j.find_block(l, l);
    const CMat* b = rel.rhs.find_block(l, l);
    CMat bb = b ? *b : CMat::Zero(a.rows(), a.cols());
    Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CMat sol = svd.solve(bb);
    res = std::max(res, rel_residual(CMat(a * sol), bb));
    X.set_block(l, l, std::move(sol));
  }
  KOperator out = from_full(target, xi, x, std::move(X));
  out.residual = res;
  if (res > prof.rel_tol) {
    std::ostringstream os;
    os << "K fusion relation residual " << res;
    throw ResidualTooLarge(os.str());
  }
  if (out.off_diagonal > 1e-8) {
    std::ostringstream os;
    os << "fused K is not diagonal, off-diagonal magnitude " << out.off_diagonal;
    throw ResidualTooLarge(os.str());
  }
  if (cache) cache->insert(key, out);
  return out;
}

double fuse_K_relation_residual(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof) {
  Relation rel = fusion_relation(k, xi, x, params, prof, nullptr);
  KOperator K = fuse_K(k, xi, x, params, prof);
  return spaces::residual(rel.j * K.op, rel.rhs);
}

namespace {

GradedOperator k_for(SpinLabel s, cd xi, cd x, int cutoff, KSource src, const SpectralParams& params,
                     const ToleranceProfile& prof) {
  if (src == KSource::fused) {
    if (!s.finite) throw ShapeMismatch("fused K needs a finite spin");
    if (s.twice_k() == 0) return GradedOperator::identity(make_space({s}, 0));
    return fuse_K(s.k() - 0.5, xi, x, params, prof).op;
  }
  return k_diag(xi, s, x, cutoff, params, prof).op;
}

}  // namespace

double check_reflection(SpinLabel k, SpinLabel ell, cd x, cd y, cd xi, int cutoff, const SpectralParams& params,
                        const ToleranceProfile& prof, KSource src_k, KSource src_l) {
  auto sp = make_space({k, ell}, cutoff);
  GradedOperator Rm = rops::r_on_legs(sp, 0, 1, x - y, params, prof);
  GradedOperator Rp = rops::r_on_legs(sp, 0, 1, x + y, params, prof);
  auto site_k = k_for(k, xi, x, cutoff, src_k, params, prof);
  auto site_l = k_for(ell, xi, y, cutoff, src_l, params, prof);
  // restrict to the site cutoff the pair space needs
  auto fit = [&](const GradedOperator& op, int leg) {
    auto s1 = make_space({sp->site(leg)}, cutoff);
    GradedOperator r(s1, s1, 0, 0);
    for (int i = 0; i < s1->dim(); ++i) r.add_entry(i, i, op.entry(i, i));
    return spaces::embed(r, sp, {leg});
  };
  GradedOperator K1 = fit(site_k, 0);
  GradedOperator K2 = fit(site_l, 1);
  return spaces::residual(Rm * K1 * Rp * K2, K2 * Rp * K1 * Rm);
}

double check_boundary_crossing(cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof) {
  const cd eta = params.eta;
  const cd scal =
      sh(xi + x - eta) * sh(2.0 * x) * inv_sinh(xi + x, prof.pole_guard, "boundary crossing") *
      inv_sinh(2.0 * x - eta, prof.pole_guard, "boundary crossing");
  const CMat R = rops::r_6vertex(2.0 * x - 2.0 * eta, params, prof).op.dense();
  CMat P = CMat::Zero(4, 4);
  P(0, 0) = P(3, 3) = P(1, 2) = P(2, 1) = 1.0;
  const KOperator K = k_half(xi, x, params, prof);
  CMat K2 = CMat::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) K2(2 * a + b, 2 * a + b) = K.diag[b];
  const CMat M = R * P * K2;
  CMat tr = CMat::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b) tr(a, c) += M(2 * a + b, 2 * c + b);
  const KOperator Km = k_half(xi, x - eta, params, prof);
  CMat rhs = CMat::Zero(2, 2);
  rhs(0, 0) = scal * Km.diag[0];
  rhs(1, 1) = scal * Km.diag[1];
  return rel_residual(tr, rhs);
}

}  // namespace bqkz::kops

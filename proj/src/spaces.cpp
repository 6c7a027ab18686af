#include <cmath>

#include "bqkz/spaces.hpp"

namespace bqkz::spaces {

namespace {

struct SiteTerm {
  cd c;
  int n;
};

// pi^ell(e1) m_n coefficient (target m_{n-1}).
cd e1_coeff(cd ell, int n, cd eta) {
  if (n <= 1) return 0.0;
  const cd s = sh(eta);
  return sh(double(n - 1) * eta) * sh((2.0 * ell + 2.0 - double(n)) * eta) / (s * s);
}

// Evaluation-map image of a generator acting on m_n.
SiteTerm site_term(const SpinLabel& st, Gen g, int n, cd x, cd eta, cd lambda) {
  switch (g) {
    case Gen::e1:
      return {std::exp(-x) * e1_coeff(st.ell, n, eta), n - 1};
    case Gen::f1:
      return {std::exp(x), n + 1};
    case Gen::e0:
      return {std::exp(-x), n + 1};
    case Gen::f0:
      return {std::exp(x) * e1_coeff(st.ell, n, eta), n - 1};
    case Gen::cartan:
      return {std::exp(2.0 * lambda * eta * (st.ell + 1.0 - double(n))), n};
  }
  return {0.0, n};
}

void band_of(Gen g, int& lower, int& upper) {
  lower = (g == Gen::e1 || g == Gen::f0) ? 1 : 0;
  upper = (g == Gen::f1 || g == Gen::e0) ? 1 : 0;
}

}  // namespace

GradedOperator apply_generator(SpacePtr space, Gen g, int site, cd eval_x, const SpectralParams& params, cd lambda,
                               Overflow policy) {
  if (site < 0 || site >= space->num_sites()) throw ShapeMismatch("generator site out of range");
  int lo, up;
  band_of(g, lo, up);
  const SpinLabel st = space->site(site);
  const cd eta = params.eta;
  return embed_action(
      space, {site}, lo, up,
      [&](const int* t, const Emit& emit) {
        const SiteTerm r = site_term(st, g, t[0], eval_x, eta, lambda);
        emit(r.c, &r.n);
      },
      policy);
}

GradedOperator coproduct_action(SpacePtr space, Gen g, std::span<const cd> xs, const SpectralParams& params,
                                bool opposite, Overflow policy) {
  const int m = space->num_sites();
  if (m < 1 || int(xs.size()) != m) throw ShapeMismatch("coproduct needs one evaluation point per site");
  if (g == Gen::cartan) throw ShapeMismatch("coproduct_action is defined for e1, f1, e0, f0");
  int lo, up;
  band_of(g, lo, up);
  const bool e_type = (g == Gen::e1 || g == Gen::e0);
  // p^{-h1} accompanies e1 and f0; p^{h1} accompanies e0 and f1 (p^{-h0} = p^{h1})
  const cd lam = (g == Gen::e1) ? -1.0 : (g == Gen::e0) ? 1.0 : (g == Gen::f1) ? 1.0 : -1.0;
  // e-type: Cartan factors on the sites before j; f-type: after j. Opposite swaps.
  const bool before = e_type != opposite;
  const cd eta = params.eta;
  std::vector<int> tgt(m);
  return build_map(
      space, space, lo, up,
      [&](const int* t, const Emit& emit) {
        for (int j = 0; j < m; ++j) {
          const SiteTerm r = site_term(space->site(j), g, t[j], xs[j], eta, 0.0);
          if (r.c == 0.0) continue;
          cd c = r.c;
          for (int i = 0; i < m; ++i) {
            if (i == j || (before ? i > j : i < j)) continue;
            c *= site_term(space->site(i), Gen::cartan, t[i], 0.0, eta, lam).c;
          }
          std::copy(t, t + m, tgt.begin());
          tgt[j] = r.n;
          emit(c, tgt.data());
        }
      },
      policy);
}

IotaCoeffs iota_coeffs(double k, int n, const SpectralParams& params) {
  const cd eta = params.eta;
  const int tk = int(std::lround(2 * k));
  IotaCoeffs r{0.0, 0.0};
  if (n <= tk + 1) r.a = std::exp(eta * double(n - 1) / 2.0);
  if (n >= 2) r.b = std::exp(-eta * (double(n) - 2.0 - 2.0 * k) / 2.0) * sh(double(n - 1) * eta) / sh(eta);
  return r;
}

GradedOperator split_site(SpacePtr dom, int s, double k, bool j_order, const SpectralParams& params) {
  if (s < 0 || s >= dom->num_sites()) throw ShapeMismatch("split site out of range");
  const SpinLabel& st = dom->site(s);
  if (!st.finite || st.twice_k() != int(std::lround(2 * k)) + 1)
    throw ShapeMismatch("split_site: site spin must be Finite(k+1/2)");
  std::vector<SpinLabel> sites;
  for (int i = 0; i < dom->num_sites(); ++i) {
    if (i != s) {
      sites.push_back(dom->site(i));
      continue;
    }
    if (j_order) {
      sites.push_back(SpinLabel::Finite(k));
      sites.push_back(SpinLabel::Finite(0.5));
    } else {
      sites.push_back(SpinLabel::Finite(0.5));
      sites.push_back(SpinLabel::Finite(k));
    }
  }
  auto cod = make_space(sites, dom->cutoff());
  const int m = dom->num_sites();
  std::vector<int> tgt(m + 1);
  return build_map(dom, cod, 0, 0, [&](const int* t, const Emit& emit) {
    const int n = t[s];
    const IotaCoeffs c = iota_coeffs(k, n, params);
    for (int i = 0, o = 0; i < m; ++i, ++o) {
      if (i == s) {
        ++o;
        continue;
      }
      tgt[o] = t[i];
    }
    const int ks = j_order ? s : s + 1;
    const int hs = j_order ? s + 1 : s;
    tgt[hs] = 1;
    tgt[ks] = n;
    emit(c.a, tgt.data());
    tgt[hs] = 2;
    tgt[ks] = n - 1;
    emit(c.b, tgt.data());
  });
}

IntertwinerMap build_iota(double k, const SpectralParams& params) {
  const int tk = int(std::lround(2 * k));
  auto dom = make_space({SpinLabel::Finite(k + 0.5)}, tk + 1);
  return {MapKind::iota, k, split_site(dom, 0, k, false, params)};
}

IntertwinerMap build_j(double k, const SpectralParams& params) {
  const int tk = int(std::lround(2 * k));
  auto dom = make_space({SpinLabel::Finite(k + 0.5)}, tk + 1);
  return {MapKind::j, k, split_site(dom, 0, k, true, params)};
}

IntertwinerMap build_w(double k, const SpectralParams& params) {
  const int tk = int(std::lround(2 * k));
  auto sp = make_space({SpinLabel::Finite(k)}, tk);
  const cd p = params.p();
  std::vector<cd> c(tk + 2);
  c[1] = 1.0;
  for (int n = 1; n <= tk; ++n) c[n + 1] = -c[n] * std::pow(p, double(tk + 1 - 2 * n));
  auto op = build_map(sp, sp, tk, tk, [&](const int* t, const Emit& emit) {
    const int tgt = tk + 2 - t[0];
    emit(c[t[0]], &tgt);
  });
  return {MapKind::w, k, std::move(op)};
}

SpacePtr permuted_space(const SpacePtr& space, int i, int j) {
  auto sites = space->sites();
  std::swap(sites[i], sites[j]);
  return make_space(sites, space->cutoff(), space->aux_count());
}

GradedOperator permutation(SpacePtr space, int i, int j) {
  const int m = space->num_sites();
  if (i < 0 || j < 0 || i >= m || j >= m) throw ShapeMismatch("permutation legs out of range");
  auto cod = permuted_space(space, i, j);
  std::vector<int> tgt(m);
  return build_map(space, cod, 0, 0, [&](const int* t, const Emit& emit) {
    std::copy(t, t + m, tgt.begin());
    std::swap(tgt[i], tgt[j]);
    emit(1.0, tgt.data());
  });
}

GradedOperator project_site(SpacePtr space, int site, double k) {
  const int m = space->num_sites();
  if (site < 0 || site >= m) throw ShapeMismatch("projection site out of range");
  const SpinLabel& st = space->site(site);
  const SpinLabel fin = SpinLabel::Finite(k);
  if (st.finite || std::abs(st.ell - fin.ell) > 1e-14) throw ShapeMismatch("pr^k needs a Verma site of weight k");
  auto sites = space->sites();
  sites[site] = fin;
  auto cod = make_space(sites, space->cutoff(), space->aux_count());
  return build_map(space, cod, 0, 0, [&](const int* t, const Emit& emit) { emit(1.0, t); });
}

}  // namespace bqkz::spaces

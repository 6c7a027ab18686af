#include "bqkz/monodromy.hpp"

#include <numeric>

#include "bqkz/special.hpp"

namespace bqkz::monodromy {

using spaces::make_space;

Chain::Chain(std::vector<SpinLabel> spins, std::vector<cd> t, SpectralParams params, int cutoff,
             ToleranceProfile prof)
    : spins_(std::move(spins)), t_(std::move(t)), params_(params), prof_(prof), cutoff_(cutoff) {
  if (spins_.empty()) throw ShapeMismatch("chain needs at least one site");
  if (spins_.size() != t_.size()) throw ShapeMismatch("one inhomogeneity per site required");
  state_ = make_space(spins_, cutoff_);
  std::vector<SpinLabel> f{SpinLabel::Finite(0.5)};
  f.insert(f.end(), spins_.begin(), spins_.end());
  full_ = make_space(f, cutoff_ + 1, 1);
}

Chain Chain::with_t(std::vector<cd> t) const {
  if (t.size() != t_.size()) throw ShapeMismatch("with_t: wrong number of inhomogeneities");
  Chain c = *this;
  c.t_ = std::move(t);
  return c;
}

Perm identity_perm(int n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Perm sigma_shift(int n, int r) {
  if (r < 1 || r > n) throw ShapeMismatch("sigma_shift: r out of range");
  Perm p;
  for (int i = 1; i <= n; ++i)
    if (i != r) p.push_back(i - 1);
  p.push_back(r - 1);
  return p;
}

namespace {

const Perm& resolve(const Perm& sigma, int n, Perm& storage) {
  if (sigma.empty()) {
    storage = identity_perm(n);
    return storage;
  }
  if (int(sigma.size()) != n) throw ShapeMismatch("permutation size differs from chain length");
  return sigma;
}

GradedOperator k_inverse_on(SpacePtr big, int aux_leg, cd xi, cd x, const ToleranceProfile& prof) {
  const cd v = sh(xi + x) * inv_sinh(xi - x, prof.pole_guard, "inverse K");
  return spaces::embed_action(big, {aux_leg}, 0, 0, [v](const int* t, const spaces::Emit& emit) {
    emit(t[0] == 1 ? cd(1.0) : v, t);
  });
}

}  // namespace

GradedOperator t_on(SpacePtr big, int aux_leg, int state_offset, const Chain& ch, const Perm& sigma_in, cd x,
                    bool skip_last) {
  Perm store;
  const Perm& sigma = resolve(sigma_in, ch.N(), store);
  GradedOperator M = GradedOperator::identity(big);
  const int last = skip_last ? ch.N() - 1 : ch.N();
  for (int i = 0; i < last; ++i) {
    const int r = sigma[i];
    M = M * spaces::embed_action(big, {aux_leg, state_offset + r}, 0, 0,
                                 rops::l_action(ch.spins()[r].ell, x - ch.t()[r], ch.params(), ch.prof()));
  }
  return M;
}

GradedOperator u_on(SpacePtr big, int aux_leg, int state_offset, const Chain& ch, const Perm& sigma, cd xi, cd x) {
  GradedOperator Tp = t_on(big, aux_leg, state_offset, ch, sigma, x);
  GradedOperator Tm = t_on(big, aux_leg, state_offset, ch, sigma, -x);
  return Tp.inverse() * k_inverse_on(big, aux_leg, xi, x, ch.prof()) * Tm;
}

Monodromy build_T(const Chain& ch, const Perm& sigma, cd x, bool skip_last) {
  GradedOperator T = t_on(ch.full(), 0, 1, ch, sigma, x, skip_last);
  AuxEntries e = rops::aux_entries(T, ch.state());
  return {std::move(T), std::move(e)};
}

Monodromy build_U(const Chain& ch, const Perm& sigma, cd xi, cd x) {
  GradedOperator U = u_on(ch.full(), 0, 1, ch, sigma, xi, x);
  AuxEntries e = rops::aux_entries(U, ch.state());
  return {std::move(U), std::move(e)};
}

cd bbar_prefactor(const Chain& ch, cd xi, cd x) {
  const cd eta = ch.params().eta;
  const double g = ch.prof().pole_guard;
  cd pre = 1.0;
  for (int r = 0; r < ch.N(); ++r) {
    const cd l = ch.spins()[r].ell;
    pre *= sh(x - ch.t()[r] - l * eta) * inv_sinh(x - ch.t()[r] + l * eta, g, "Bbar prefactor");
  }
  return pre * sh(xi - x - eta / 2.0) * sh(2.0 * x) * inv_sinh(2.0 * x + eta, g, "Bbar prefactor");
}

GradedOperator bbar(const Chain& ch, const Perm& sigma, cd xi, cd x) {
  const cd pre = bbar_prefactor(ch, xi, x);
  Monodromy U = build_U(ch, sigma, xi, x + ch.params().eta / 2.0);
  return U.e.B * pre;
}

CVec bethe_vector(const Chain& ch, cd xi, std::span<const cd> xs, const Perm& sigma) {
  if (ch.cutoff() < int(xs.size())) throw CutoffOverflow("Bethe vector needs cutoff >= number of points");
  CVec v = spaces::vacuum(*ch.state());
  for (cd x : xs) v = bbar(ch, sigma, xi, x).apply(v);
  return v;
}

CVec bethe_expansion(const Chain& ch, cd xi, std::span<const cd> xs, int r) {
  const int S = int(xs.size());
  const int N = ch.N();
  if (S > 12) throw ShapeMismatch("bethe_expansion supports at most 12 points");
  if (ch.cutoff() < S) throw CutoffOverflow("Bethe expansion needs cutoff >= number of points");
  const Perm sigma = sigma_shift(N, r);
  const int sN = sigma.back();
  const cd eta = ch.params().eta;
  const double g = ch.prof().pole_guard;
  const auto& t = ch.t();
  const cd lN = ch.spins()[sN].ell;

  // creation operators indexed by (point, sign)
  std::vector<GradedOperator> bhat(2 * S), bsite(2 * S);
  for (int i = 0; i < S; ++i)
    for (int s = 0; s < 2; ++s) {
      const double e = s == 0 ? 1.0 : -1.0;
      const cd z = -e * xs[i] - eta / 2.0;
      bhat[2 * i + s] = build_T(ch, sigma, z, true).e.B;
      auto L = spaces::embed_action(ch.full(), {0, sN + 1}, 0, 0, rops::l_action(lN, z - t[sN], ch.params(), ch.prof()));
      bsite[2 * i + s] = rops::aux_entries(L, ch.state()).B;
    }

  CVec total = CVec::Zero(ch.state()->dim());
  std::vector<double> eps(S);
  std::vector<cd> z(S), ex(S);
  for (unsigned em = 0; em < (1u << S); ++em) {
    // lexicographic over signs with +1 first, then over subsets
    for (int i = 0; i < S; ++i) {
      eps[i] = (em >> (S - 1 - i) & 1u) ? -1.0 : 1.0;
      ex[i] = eps[i] * xs[i];
      z[i] = -ex[i] - eta / 2.0;
    }
    cd base = 1.0;
    for (int i = 0; i < S; ++i) {
      base *= eps[i] * sh(xi - ex[i] - eta / 2.0);
      for (int q = 0; q < N; ++q) {
        const cd l = ch.spins()[q].ell;
        base *= sh(ex[i] - t[q] - l * eta) * inv_sinh(ex[i] - t[q] + l * eta, g, "Bethe expansion");
      }
      for (int j = i + 1; j < S; ++j) base *= sh(ex[i] + ex[j] + eta) * inv_sinh(ex[i] + ex[j], g, "Bethe expansion");
    }
    for (unsigned jm = 0; jm < (1u << S); ++jm) {
      auto inJ = [&](int i) { return (jm >> (S - 1 - i) & 1u) != 0; };
      cd Y = base;
      for (int i = 0; i < S; ++i) {
        if (!inJ(i)) continue;
        Y *= sh(z[i] - t[sN] + (0.5 - lN) * eta) * inv_sinh(z[i] - t[sN] + (0.5 + lN) * eta, g, "Bethe expansion");
        for (int j = 0; j < S; ++j)
          if (!inJ(j)) Y *= sh(z[i] - z[j] + eta) * inv_sinh(z[i] - z[j], g, "Bethe expansion");
      }
      CVec v = spaces::vacuum(*ch.state());
      for (int i = 0; i < S; ++i)
        if (inJ(i)) v = bhat[2 * i + (eps[i] < 0)].apply(v);
      for (int i = 0; i < S; ++i)
        if (!inJ(i)) v = bsite[2 * i + (eps[i] < 0)].apply(v);
      total += Y * v;
    }
  }
  return total;
}

GradedOperator transfer(const Chain& ch, cd xi_plus, cd xi_minus, cd x) {
  const cd eta = ch.params().eta;
  Monodromy U = build_U(ch, {}, xi_minus, x);
  const cd c = sh(xi_plus - x + eta) * inv_sinh(xi_plus + x - eta, ch.prof().pole_guard, "transfer");
  return U.e.A + U.e.D * c;
}

cd d_vacuum_eigenvalue(const Chain& ch, cd x) {
  cd v = 1.0;
  for (int r = 0; r < ch.N(); ++r) v *= special::vartheta(ch.spins()[r].ell, ch.t()[r] - x, ch.params(), ch.prof());
  return v;
}

namespace {

SpacePtr double_aux_space(const Chain& ch) {
  std::vector<SpinLabel> s{SpinLabel::Finite(0.5), SpinLabel::Finite(0.5)};
  s.insert(s.end(), ch.spins().begin(), ch.spins().end());
  return make_space(s, ch.cutoff() + 2, 2);
}

GradedOperator r_aux(SpacePtr big, cd x, const Chain& ch) {
  return spaces::embed(rops::r_6vertex(x, ch.params(), ch.prof()).op, big, {0, 1});
}

}  // namespace

double check_rtt(const Chain& ch, const Perm& sigma, cd x, cd y) {
  auto big = double_aux_space(ch);
  GradedOperator R = r_aux(big, x - y, ch);
  GradedOperator T0 = t_on(big, 0, 2, ch, sigma, x);
  GradedOperator T1 = t_on(big, 1, 2, ch, sigma, y);
  return spaces::residual(R * T0 * T1, T1 * T0 * R);
}

double check_ru(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y) {
  auto big = double_aux_space(ch);
  GradedOperator Ryx = r_aux(big, y - x, ch);
  GradedOperator Rs = r_aux(big, -x - y, ch);
  GradedOperator U0 = u_on(big, 0, 2, ch, sigma, xi, x);
  GradedOperator U1 = u_on(big, 1, 2, ch, sigma, xi, y);
  return spaces::residual(Ryx * U0 * Rs * U1, U1 * Rs * U0 * Ryx);
}

double check_b_commute(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y) {
  GradedOperator a = build_U(ch, sigma, xi, x).e.B;
  GradedOperator b = build_U(ch, sigma, xi, y).e.B;
  return spaces::residual(a * b, b * a);
}

double check_bbar_commute(const Chain& ch, const Perm& sigma, cd xi, cd x, cd y) {
  GradedOperator a = bbar(ch, sigma, xi, x);
  GradedOperator b = bbar(ch, sigma, xi, y);
  return spaces::residual(a * b, b * a);
}

double check_transfer_commute(const Chain& ch, cd xi_plus, cd xi_minus, cd x, cd y) {
  GradedOperator a = transfer(ch, xi_plus, xi_minus, x);
  GradedOperator b = transfer(ch, xi_plus, xi_minus, y);
  return spaces::residual(a * b, b * a);
}

}  // namespace bqkz::monodromy

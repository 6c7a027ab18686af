#include "bqkz/qkz.hpp"

#include "bqkz/kops.hpp"

namespace bqkz::qkz {

using spaces::SpinLabel;

namespace {

GradedOperator k_on(const Chain& ch, int r, cd xi, cd z) {
  const auto& st = ch.state();
  const auto K = kops::k_diag(xi, ch.spins()[r], z, ch.cutoff(), ch.params(), ch.prof());
  return spaces::embed(K.op, st, {r});
}

GradedOperator r_pair(const Chain& ch, int a, int b, cd z) {
  return rops::r_on_legs(ch.state(), a, b, z, ch.params(), ch.prof());
}

}  // namespace

TransportOperator transport(const Chain& ch, int r, cd xi_plus, cd xi_minus) {
  const int N = ch.N();
  if (r < 0 || r >= N) throw ShapeMismatch("transport site out of range");
  const auto& t = ch.t();
  const cd tau = ch.params().tau;
  GradedOperator M = GradedOperator::identity(ch.state());
  for (int j = r + 1; j < N; ++j) M = M * r_pair(ch, r, j, t[r] - t[j] + tau);
  M = M * k_on(ch, r, xi_plus, t[r] + tau / 2.0);
  for (int j = N - 1; j > r; --j) M = M * r_pair(ch, j, r, t[j] + t[r]);
  for (int j = r - 1; j >= 0; --j) M = M * r_pair(ch, j, r, t[j] + t[r]);
  M = M * k_on(ch, r, xi_minus, t[r]);
  for (int j = 0; j < r; ++j) M = M * r_pair(ch, r, j, t[r] - t[j]);
  return {r, std::move(M)};
}

double qkz_residual(const Chain& ch, cd xi_plus, cd xi_minus, const VectorField& f, int r) {
  std::vector<cd> t = ch.t();
  const CVec f0 = f(t);
  t[r] += ch.params().tau;
  const CVec f1 = f(t);
  const CVec rhs = transport(ch, r, xi_plus, xi_minus).op.apply(f0);
  const double n0 = f0.norm();
  if (n0 == 0.0) throw ResidualTooLarge("qkz residual undefined for a zero field value");
  return (f1 - rhs).norm() / n0;
}

double check_compatibility(const Chain& ch, int r, int s, cd xi_plus, cd xi_minus) {
  const cd tau = ch.params().tau;
  std::vector<cd> tr = ch.t(), ts = ch.t();
  tr[r] += tau;
  ts[s] += tau;
  const auto lhs = transport(ch.with_t(ts), r, xi_plus, xi_minus).op * transport(ch, s, xi_plus, xi_minus).op;
  const auto rhs = transport(ch.with_t(tr), s, xi_plus, xi_minus).op * transport(ch, r, xi_plus, xi_minus).op;
  return spaces::residual(lhs, rhs);
}

Chain expanded_chain(const Chain& ch, int s) {
  const SpinLabel& st = ch.spins()[s];
  if (!st.finite || st.twice_k() < 1) throw ShapeMismatch("fusion needs a finite site of spin >= 1/2");
  const double k = (st.twice_k() - 1) / 2.0;
  const cd eta = ch.params().eta;
  std::vector<SpinLabel> spins;
  std::vector<cd> t;
  for (int i = 0; i < ch.N(); ++i) {
    if (i == s) {
      spins.push_back(SpinLabel::Finite(k));
      spins.push_back(SpinLabel::Finite(0.5));
      t.push_back(ch.t()[i] + eta / 2.0);
      t.push_back(ch.t()[i] - k * eta);
    } else {
      spins.push_back(ch.spins()[i]);
      t.push_back(ch.t()[i]);
    }
  }
  return Chain(spins, t, ch.params(), ch.cutoff(), ch.prof());
}

GradedOperator fusion_map(const Chain& ch, int s) {
  const double k = (ch.spins()[s].twice_k() - 1) / 2.0;
  return spaces::split_site(ch.state(), s, k, true, ch.params());
}

double transport_fusion_check(const Chain& ch, int s, int r, cd xi_plus, cd xi_minus) {
  const Chain ex = expanded_chain(ch, s);
  GradedOperator J = fusion_map(ch, s);
  // J's codomain is structurally identical to the expanded chain's state space
  GradedOperator lhs = J * transport(ch, r, xi_plus, xi_minus).op;
  GradedOperator rhs;
  if (r < s) {
    rhs = transport(ex, r, xi_plus, xi_minus).op * J;
  } else if (r > s) {
    rhs = transport(ex, r + 1, xi_plus, xi_minus).op * J;
  } else {
    std::vector<cd> t2 = ex.t();
    t2[s] += ch.params().tau;
    rhs = transport(ex.with_t(t2), s + 1, xi_plus, xi_minus).op * transport(ex, s, xi_plus, xi_minus).op * J;
  }
  return spaces::residual(lhs, rhs);
}

double transport_projection_check(const Chain& ch, int s, int r, cd xi_plus, cd xi_minus) {
  const SpinLabel& st = ch.spins()[s];
  if (st.finite) throw ShapeMismatch("projection check needs a Verma site");
  const double k = st.ell.real();
  GradedOperator pr = spaces::project_site(ch.state(), s, k);
  std::vector<SpinLabel> fs = ch.spins();
  fs[s] = SpinLabel::Finite(k);
  const Chain fin(fs, ch.t(), ch.params(), ch.cutoff(), ch.prof());
  return spaces::residual(pr * transport(ch, r, xi_plus, xi_minus).op, transport(fin, r, xi_plus, xi_minus).op * pr);
}

}  // namespace bqkz::qkz

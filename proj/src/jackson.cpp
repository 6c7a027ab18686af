#include "bqkz/jackson.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include "bqkz/qkz.hpp"
#include "bqkz/special.hpp"

namespace bqkz::jackson {

DomainCheck check_convergence_domain(const SpectralParams& params, const std::vector<SpinLabel>& spins) {
  cd sum = 0.0;
  for (const auto& s : spins) sum += s.ell;
  const cd c = 2.0 * params.xi_plus + 2.0 * params.xi_minus + 2.0 * (2.0 * sum - 1.0) * params.eta + params.tau;
  const double margin = -c.real();
  return {params.eta.real() >= 0.0 && margin > 0.0, margin};
}

cd total_weight(std::span<const cd> xs, std::span<const cd> t, const std::vector<SpinLabel>& spins,
                const SpectralParams& params, const ToleranceProfile& prof) {
  if (t.size() != spins.size()) throw ShapeMismatch("total_weight: one inhomogeneity per site required");
  cd w = 1.0;
  const std::size_t S = xs.size();
  for (std::size_t i = 0; i < S; ++i) {
    w *= special::weight_g(xs[i], params, prof);
    for (std::size_t j = i + 1; j < S; ++j)
      w *= special::weight_h(xs[i] + xs[j], params, prof) * special::weight_h(xs[i] - xs[j], params, prof);
    for (std::size_t r = 0; r < t.size(); ++r)
      w *= special::weight_F(spins[r].ell, t[r] + xs[i], params, prof) *
           special::weight_F(spins[r].ell, t[r] - xs[i], params, prof);
  }
  return w;
}

std::vector<std::vector<int>> lattice_order(int S, int n_cut) {
  if (S < 0 || n_cut < 0) throw ShapeMismatch("lattice_order: negative size");
  std::vector<std::vector<int>> out;
  if (S == 0) {
    out.emplace_back();
    return out;
  }
  for (int m = 0; m <= n_cut; ++m) {
    std::vector<int> n(S, -m);
    while (true) {
      int mx = 0;
      for (int v : n) mx = std::max(mx, std::abs(v));
      if (mx == m) out.push_back(n);
      int i = S - 1;
      while (i >= 0 && n[i] == m) n[i--] = -m;
      if (i < 0) break;
      ++n[i];
    }
  }
  return out;
}

namespace {

std::string point_str(const std::vector<int>& n) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
  os << ")";
  return os.str();
}

}  // namespace

SolutionEvaluation evaluate_solution(const Chain& ch, const JacksonConfig& cfg) {
  if (int(cfg.x0.size()) != cfg.S) throw ShapeMismatch("base point must have S components");
  if (ch.cutoff() < cfg.S) throw CutoffOverflow("solution needs level cutoff >= S");
  if (!cfg.allow_outside_domain && !check_convergence_domain(ch.params(), ch.spins()).ok)
    throw DivergentSeries("parameters outside the convergence domain");

  const auto pts = lattice_order(cfg.S, cfg.n_cut);
  const int dim = ch.state()->dim();
  const cd tau = ch.params().tau;
  std::vector<CVec> terms(pts.size());
  std::vector<char> skipped(pts.size(), 0);
  std::vector<std::string> errors(pts.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<cd> xs(cfg.S);
    for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) {
      for (int a = 0; a < cfg.S; ++a) xs[a] = cfg.x0[a] + tau * double(pts[i][a]);
      try {
        const cd w = total_weight(xs, ch.t(), ch.spins(), ch.params(), ch.prof());
        terms[i] = w * monodromy::bethe_vector(ch, ch.params().xi_minus, xs);
      } catch (const PoleHit& e) {
        skipped[i] = 1;
        errors[i] = e.what();
      }
    }
  };
  int nt = cfg.threads > 0 ? cfg.threads : int(std::max(1u, std::thread::hardware_concurrency()));
  nt = std::min<int>(nt, int(pts.size()));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  }

  SolutionEvaluation ev;
  ev.value = CVec::Zero(dim);
  ev.shell_norms.assign(cfg.n_cut + 1, 0.0);
  ev.partial_norms.assign(cfg.n_cut + 1, 0.0);
  std::size_t i = 0;
  for (int m = 0; m <= cfg.n_cut; ++m) {
    CVec shell = CVec::Zero(dim);
    for (; i < pts.size(); ++i) {
      int mx = 0;
      for (int v : pts[i]) mx = std::max(mx, std::abs(v));
      if (mx != m) break;
      if (skipped[i]) {
        if (!cfg.skip_poles) throw PoleHit("lattice point " + point_str(pts[i]) + ": " + errors[i]);
        ev.skipped.push_back(pts[i]);
        continue;
      }
      shell += terms[i];
    }
    ev.value += shell;
    ev.shell_norms[m] = shell.norm();
    ev.partial_norms[m] = ev.value.norm();
  }
  const double tot = ev.value.norm();
  ev.tail_estimate = tot > 0 ? ev.shell_norms.back() / tot : 0.0;
  return ev;
}

FusionResidual solution_fusion_check(const Chain& ch, int s, const JacksonConfig& cfg) {
  const Chain ex = qkz::expanded_chain(ch, s);
  const auto J = qkz::fusion_map(ch, s);
  FusionResidual out{};
  const CVec om = spaces::vacuum(*ch.state());
  out.vacuum = rel_residual(CVec(J.apply(om)), spaces::vacuum(*ex.state()));
  JacksonConfig c = cfg;
  c.allow_outside_domain = true;  // the expanded chain has the same total spin
  const CVec lhs = J.apply(evaluate_solution(ch, cfg).value);
  const CVec rhs = evaluate_solution(ex, c).value;
  out.solution = rel_residual(lhs, rhs);
  return out;
}

double bbar_fusion_check(const Chain& ch, int s, cd x) {
  const Chain ex = qkz::expanded_chain(ch, s);
  const auto J = qkz::fusion_map(ch, s);
  const cd xi = ch.params().xi_minus;
  return spaces::residual(J * monodromy::bbar(ch, {}, xi, x), monodromy::bbar(ex, {}, xi, x) * J);
}

}  // namespace bqkz::jackson

#include "bqkz/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "bqkz/jackson.hpp"
#include "bqkz/kops.hpp"
#include "bqkz/qkz.hpp"
#include "bqkz/special.hpp"

namespace bqkz::harness {

using monodromy::Chain;
using spaces::SpinLabel;
using special::Sampler;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Case {
  std::string suite, id;
  double tol;
  // Draws its own spectral points; PoleHit and IllConditioned trigger a redraw.
  std::function<double(Sampler&)> run;
};

using CaseList = std::vector<Case>;

struct Ctx {
  const RunConfig& cfg;
  std::uint64_t seed;
  int threads;  // for nested lattice sums
};

SpinLabel draw_spin(Sampler& s, bool allow_generic = true) {
  const int n = allow_generic ? 4 : 3;
  const int c = std::min(n - 1, int(s.uniform(0, n)));
  if (c < 3) return SpinLabel::Finite(0.5 * (c + 1));
  return SpinLabel::Generic({s.uniform(-1.0, 1.0), s.uniform(0.2, 0.8)});
}

std::string spins_id(std::initializer_list<SpinLabel> l) {
  std::string out;
  for (const auto& s : l) out += (out.empty() ? "" : ",") + s.str();
  return out;
}

cd small(Sampler& s) { return s.draw() * 0.5; }

std::vector<cd> draw_t(Sampler& s, int n) {
  std::vector<cd> t(n);
  for (auto& z : t) z = small(s);
  return t;
}

// Suites -----------------------------------------------------------------------

void suite_identities(const Ctx& c, CaseList& out) {
  const auto& p = c.cfg.params;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const int dm = 1 + i % 6, dt = 1 + i % 4;
    out.push_back({"identities", "coeffcond4/" + std::to_string(i), c.cfg.rel_tol, [](Sampler& s) {
                     return special::check_coeffcond4(s.draw(), s.draw(), s.draw());
                   }});
    out.push_back({"identities", "multivariable/d=" + std::to_string(dm) + "/" + std::to_string(i), c.cfg.rel_tol,
                   [dm, p](Sampler& s) {
                     const auto xs = s.draw_n(dm);
                     return special::check_multivariable(dm, xs, s.draw(), s.draw(), s.draw(), p);
                   }});
    out.push_back({"identities", "trigident/d=" + std::to_string(dt) + "/" + std::to_string(i), c.cfg.rel_tol,
                   [dt, p](Sampler& s) {
                     const auto xs = s.draw_n(dt);
                     return special::check_trigident(dt, xs, s.draw(), s.draw(), s.draw(), p);
                   }});
  }
}

template <class F>
void pair_suite(const Ctx& c, CaseList& out, const char* name, F check) {
  Sampler g(c.seed);
  for (int i = 0; i < c.cfg.samples; ++i) {
    const SpinLabel k = draw_spin(g), l = draw_spin(g);
    out.push_back({name, spins_id({k, l}) + "/" + std::to_string(i), c.cfg.rel_tol,
                   [k, l, check](Sampler& s) { return check(k, l, s); }});
  }
}

void suite_ybe(const Ctx& c, CaseList& out) {
  Sampler g(c.seed);
  const int L = c.cfg.level_cutoff;
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const SpinLabel a = draw_spin(g), b = draw_spin(g), m = draw_spin(g);
    out.push_back({"ybe", spins_id({a, b, m}) + "/" + std::to_string(i), c.cfg.rel_tol, [=](Sampler& s) {
                     return rops::check_ybe(a, b, m, small(s), small(s), small(s), L, p, prof);
                   }});
  }
}

void suite_rll(const Ctx& c, CaseList& out) {
  Sampler g(c.seed);
  const int L = c.cfg.level_cutoff;
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const SpinLabel a = draw_spin(g, false), b = draw_spin(g, false), m = draw_spin(g);
    out.push_back({"rll", spins_id({a, b, m}) + "/" + std::to_string(i), c.cfg.rel_tol, [=](Sampler& s) {
                     return rops::check_rll(a.k(), b.k(), m, small(s), small(s), small(s), L, p, prof);
                   }});
  }
}

void suite_unitarity(const Ctx& c, CaseList& out) {
  const int L = c.cfg.level_cutoff;
  const auto p = c.cfg.params;
  const auto prof = c.cfg.prof;
  pair_suite(c, out, "unitarity",
             [=](SpinLabel k, SpinLabel l, Sampler& s) { return rops::check_unitarity(k, l, small(s), L, p, prof); });
}

void suite_psym(const Ctx& c, CaseList& out) {
  const int L = c.cfg.level_cutoff;
  const auto p = c.cfg.params;
  const auto prof = c.cfg.prof;
  pair_suite(c, out, "psym",
             [=](SpinLabel k, SpinLabel l, Sampler& s) { return rops::check_psym(k, l, small(s), L, p, prof); });
}

void suite_crossing(const Ctx& c, CaseList& out) {
  Sampler g(c.seed);
  const int L = c.cfg.level_cutoff;
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const SpinLabel l = draw_spin(g);
    out.push_back({"crossing", "1/2," + l.str() + "/" + std::to_string(i), c.cfg.rel_tol,
                   [=](Sampler& s) { return rops::check_crossing(l, small(s), L, p, prof); }});
    const double k = i % 2 ? 1.5 : 1.0;
    out.push_back({"crossing", "ratio/" + SpinLabel::Finite(k).str() + "," + l.str() + "/" + std::to_string(i),
                   c.cfg.rel_tol,
                   [=](Sampler& s) { return rops::check_crossing_general(k, l, small(s), L, p, prof).constancy; }});
  }
}

void suite_reflection(const Ctx& c, CaseList& out) {
  Sampler g(c.seed);
  const int L = c.cfg.level_cutoff;
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const SpinLabel k = draw_spin(g), l = draw_spin(g);
    out.push_back({"reflection", spins_id({k, l}) + "/" + std::to_string(i), c.cfg.rel_tol, [=](Sampler& s) {
                     return kops::check_reflection(k, l, small(s), small(s), s.draw(), L, p, prof);
                   }});
    if (k.finite && l.finite) {
      out.push_back({"reflection", "fused/" + spins_id({k, l}) + "/" + std::to_string(i), c.cfg.rel_tol,
                     [=](Sampler& s) {
                       return kops::check_reflection(k, l, small(s), small(s), s.draw(), L, p, prof,
                                                     kops::KSource::fused, kops::KSource::fused);
                     }});
    }
  }
}

void suite_kcrossing(const Ctx& c, CaseList& out) {
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i)
    out.push_back({"kcrossing", std::to_string(i), c.cfg.rel_tol,
                   [=](Sampler& s) { return kops::check_boundary_crossing(s.draw(), small(s), p, prof); }});
}

void suite_kfusion(const Ctx& c, CaseList& out) {
  const auto& p = c.cfg.params;
  const auto& prof = c.cfg.prof;
  for (int i = 0; i < c.cfg.samples; ++i) {
    const double k = 0.5 * (i % 5);  // K^{k+1/2} for spins 1/2 .. 5/2
    const SpinLabel target = SpinLabel::Finite(k + 0.5);
    out.push_back({"kfusion", target.str() + "/" + std::to_string(i), c.cfg.rel_tol, [=](Sampler& s) {
                     const cd xi = s.draw(), x = small(s);
                     const auto fused = kops::fuse_K(k, xi, x, p, prof);
                     const auto closed = kops::k_diag(xi, target, x, target.twice_k(), p, prof);
                     double r = 0;
                     for (std::size_t n = 0; n < closed.diag.size(); ++n)
                       r = std::max(r, rel_residual(fused.diag[n], closed.diag[n]));
                     return std::max(r, kops::fuse_K_relation_residual(k, xi, x, p, prof));
                   }});
  }
}

Chain config_chain(const RunConfig& cfg, int cutoff) { return Chain(cfg.spins, cfg.t, cfg.params, cutoff, cfg.prof); }

void suite_rtt(const Ctx& c, CaseList& out) {
  const Chain ch = config_chain(c.cfg, c.cfg.level_cutoff);
  for (int i = 0; i < c.cfg.samples; ++i)
    out.push_back({"rtt", std::to_string(i), c.cfg.rel_tol, [ch](Sampler& s) {
                     const Chain w = ch.with_t(draw_t(s, ch.N()));
                     return monodromy::check_rtt(w, {}, small(s), small(s));
                   }});
}

void suite_ru(const Ctx& c, CaseList& out) {
  const Chain ch = config_chain(c.cfg, c.cfg.level_cutoff);
  for (int i = 0; i < c.cfg.samples; ++i) {
    out.push_back({"ru", std::to_string(i), c.cfg.rel_tol, [ch](Sampler& s) {
                     const Chain w = ch.with_t(draw_t(s, ch.N()));
                     return monodromy::check_ru(w, {}, s.draw(), small(s), small(s));
                   }});
    out.push_back({"ru", "bbar-commute/" + std::to_string(i), c.cfg.rel_tol, [ch](Sampler& s) {
                     const Chain w = ch.with_t(draw_t(s, ch.N()));
                     return monodromy::check_bbar_commute(w, {}, s.draw(), small(s), small(s));
                   }});
  }
}

void suite_bethe(const Ctx& c, CaseList& out) {
  const int cut = std::max(1, c.cfg.level_cutoff);
  const Chain ch = config_chain(c.cfg, cut);
  const int smax = std::min(3, cut);
  for (int i = 0; i < c.cfg.samples; ++i) {
    const int S = 1 + i % smax;
    const int r = 1 + i % ch.N();
    out.push_back({"bethe", "S=" + std::to_string(S) + ",r=" + std::to_string(r) + "/" + std::to_string(i),
                   c.cfg.rel_tol, [ch, S, r](Sampler& s) {
                     const Chain w = ch.with_t(draw_t(s, ch.N()));
                     const cd xi = s.draw();
                     std::vector<cd> xs(S);
                     for (auto& x : xs) x = small(s);
                     const auto sigma = monodromy::sigma_shift(w.N(), r);
                     return rel_residual(monodromy::bethe_vector(w, xi, xs, sigma),
                                         monodromy::bethe_expansion(w, xi, xs, r));
                   }});
  }
}

void suite_transfer(const Ctx& c, CaseList& out) {
  const Chain ch = config_chain(c.cfg, c.cfg.level_cutoff);
  for (int i = 0; i < c.cfg.samples; ++i)
    out.push_back({"transfer", std::to_string(i), c.cfg.rel_tol, [ch](Sampler& s) {
                     const Chain w = ch.with_t(draw_t(s, ch.N()));
                     return monodromy::check_transfer_commute(w, s.draw(), s.draw(), small(s), small(s));
                   }});
}

std::vector<int> fusable_sites(const RunConfig& cfg) {
  std::vector<int> out;
  for (int i = 0; i < int(cfg.spins.size()); ++i)
    if (cfg.spins[i].finite && cfg.spins[i].twice_k() >= 1) out.push_back(i);
  return out;
}

void suite_transport(const Ctx& c, CaseList& out) {
  const Chain ch = config_chain(c.cfg, c.cfg.level_cutoff);
  const int N = ch.N();
  const auto& p = c.cfg.params;
  const auto fs = fusable_sites(c.cfg);
  for (int i = 0; i < c.cfg.samples; ++i) {
    for (int r = 0; r < N; ++r)
      for (int q = r + 1; q < N; ++q)
        out.push_back({"transport",
                       "compat/" + std::to_string(r + 1) + "," + std::to_string(q + 1) + "/" + std::to_string(i),
                       c.cfg.rel_tol, [=](Sampler& s) {
                         return qkz::check_compatibility(ch.with_t(draw_t(s, N)), r, q, p.xi_plus, p.xi_minus);
                       }});
    for (int sidx : fs) {
      const int r = i % N;
      out.push_back({"transport",
                     "fusion/s=" + std::to_string(sidx + 1) + ",r=" + std::to_string(r + 1) + "/" + std::to_string(i),
                     c.cfg.rel_tol, [=](Sampler& s) {
                       return qkz::transport_fusion_check(ch.with_t(draw_t(s, N)), sidx, r, p.xi_plus, p.xi_minus);
                     }});
    }
  }
}

jackson::JacksonConfig jackson_config(const RunConfig& cfg, int n_cut, int threads) {
  jackson::JacksonConfig j;
  j.S = cfg.S;
  j.x0 = cfg.x0;
  j.n_cut = n_cut;
  j.threads = threads;
  return j;
}

int max_n_cut(const RunConfig& cfg) {
  int m = 0;
  for (int n : cfg.n_cuts) m = std::max(m, n);
  return m;
}

void suite_qkz(const Ctx& c, CaseList& out) {
  const Chain ch = config_chain(c.cfg, std::max(c.cfg.S, 0));
  const auto jc = jackson_config(c.cfg, max_n_cut(c.cfg), c.threads);
  const auto& p = c.cfg.params;
  auto f = [ch, jc](const std::vector<cd>& t) { return jackson::evaluate_solution(ch.with_t(t), jc).value; };
  for (int r = 0; r < ch.N(); ++r)
    out.push_back({"qkz", "r=" + std::to_string(r + 1) + ",n_cut=" + std::to_string(jc.n_cut), c.cfg.qkz_tol,
                   [=](Sampler&) { return qkz::qkz_residual(ch, p.xi_plus, p.xi_minus, f, r); }});
}

void suite_solfusion(const Ctx& c, CaseList& out) {
  RunConfig cfg = c.cfg;
  auto fs = fusable_sites(cfg);
  if (fs.empty()) {
    cfg.spins[0] = SpinLabel::Finite(1.0);
    fs.push_back(0);
  }
  const Chain ch = config_chain(cfg, std::max(cfg.S, 1));
  const auto jc = jackson_config(cfg, max_n_cut(cfg), c.threads);
  for (int sidx : fs) {
    const std::string site = "s=" + std::to_string(sidx + 1);
    out.push_back({"solfusion", "solution/" + site, c.cfg.rel_tol, [=](Sampler&) {
                     const auto r = jackson::solution_fusion_check(ch, sidx, jc);
                     return std::max(r.solution, r.vacuum);
                   }});
    for (int i = 0; i < c.cfg.samples; ++i)
      out.push_back({"solfusion", "bbar/" + site + "/" + std::to_string(i), c.cfg.rel_tol, [=](Sampler& s) {
                       return jackson::bbar_fusion_check(ch.with_t(draw_t(s, ch.N())), sidx, small(s));
                     }});
  }
}

using SuiteFn = void (*)(const Ctx&, CaseList&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"ybe", suite_ybe},         {"rll", suite_rll},
      {"unitarity", suite_unitarity}, {"psym", suite_psym},
      {"crossing", suite_crossing}, {"reflection", suite_reflection},
      {"kcrossing", suite_kcrossing}, {"kfusion", suite_kfusion},
      {"rtt", suite_rtt},         {"ru", suite_ru},
      {"bethe", suite_bethe},     {"transfer", suite_transfer},
      {"transport", suite_transport}, {"qkz", suite_qkz},
      {"solfusion", suite_solfusion}, {"identities", suite_identities},
  };
  return r;
}

CaseRecord execute(const Case& c, std::uint64_t seed, const std::string& digest) {
  CaseRecord rec;
  rec.suite = c.suite;
  rec.case_id = c.id;
  rec.params_digest = digest;
  rec.tol = c.tol;
  const auto t0 = std::chrono::steady_clock::now();
  Sampler s(seed);
  rec.residual = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 8; ++attempt) {
    try {
      rec.residual = c.run(s);
      rec.error.clear();
      break;
    } catch (const PoleHit& e) {
      rec.error = e.what();
    } catch (const IllConditioned& e) {
      rec.error = e.what();
    } catch (const std::exception& e) {
      rec.error = e.what();
      break;
    }
  }
  rec.pass = rec.error.empty() && rec.residual < rec.tol;
  rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

nlohmann::ordered_json complex_json(cd z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

}  // namespace

int Report::passed() const {
  int n = 0;
  for (const auto& c : cases) n += c.pass;
  return n;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : registry()) v.push_back(n);
    return v;
  }();
  return names;
}

std::string params_digest(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config::canonical_params(cfg));
  return os.str();
}

nlohmann::ordered_json config_json(const RunConfig& cfg) {
  using J = nlohmann::ordered_json;
  J j;
  j["params"] = {{"eta", complex_json(cfg.params.eta)},
                 {"tau", complex_json(cfg.params.tau)},
                 {"xi_plus", complex_json(cfg.params.xi_plus)},
                 {"xi_minus", complex_json(cfg.params.xi_minus)}};
  J spins = J::array(), t = J::array(), x0 = J::array();
  for (const auto& s : cfg.spins) spins.push_back(s.str());
  for (cd z : cfg.t) t.push_back(complex_json(z));
  for (cd z : cfg.x0) x0.push_back(complex_json(z));
  j["chain"] = {{"spins", spins}, {"t", t}};
  j["jackson"] = {{"S", cfg.S}, {"x0", x0}, {"n_cut", cfg.n_cuts}, {"level_cutoff", cfg.level_cutoff}};
  J v;
  v["suites"] = cfg.suites;
  v["rel_tol"] = cfg.rel_tol;
  v["qkz_tol"] = cfg.qkz_tol;
  if (cfg.seed) v["seed"] = *cfg.seed;
  else v["seed"] = nullptr;
  v["samples"] = cfg.samples;
  v["deterministic"] = cfg.deterministic;
  j["verify"] = v;
  j["params_digest"] = params_digest(cfg);
  return j;
}

Report run_suite(const RunConfig& cfg) {
  cfg.validate();
  for (const auto& s : cfg.suites)
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("verify.suites: unknown suite '" + s + "'");
  bool sampled = false;
  for (const auto& s : cfg.suites) sampled |= s != "qkz";
  if (sampled && !cfg.seed) throw ConfigError("verify.seed: required for sampled suites");
  const std::uint64_t seed = cfg.seed.value_or(0);

  int threads = cfg.threads > 0 ? cfg.threads : int(std::max(1u, std::thread::hardware_concurrency()));
  if (cfg.deterministic) threads = 1;

  CaseList cases;
  for (const auto& [name, fn] : registry()) {
    if (std::find(cfg.suites.begin(), cfg.suites.end(), name) == cfg.suites.end()) continue;
    // cases already run in parallel, so lattice sums inside a case stay serial
    Ctx ctx{cfg, splitmix(seed ^ fnv1a(name)), 1};
    fn(ctx, cases);
  }

  Report rep;
  rep.config = config_json(cfg);
  const std::string digest = params_digest(cfg);
  rep.cases.resize(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cases.size();) {
      const std::uint64_t cs = splitmix(splitmix(seed ^ fnv1a(cases[i].suite)) + fnv1a(cases[i].id));
      rep.cases[i] = execute(cases[i], cs, digest);
    }
  };
  const int nt = std::min<int>(threads, int(cases.size()));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  }
  return rep;
}

nlohmann::ordered_json to_json(const Report& r) {
  using J = nlohmann::ordered_json;
  J j;
  j["config"] = r.config;
  J cases = J::array();
  for (const auto& c : r.cases) {
    J e;
    e["suite"] = c.suite;
    e["case_id"] = c.case_id;
    e["params_digest"] = c.params_digest;
    if (std::isfinite(c.residual)) e["residual"] = c.residual;
    else e["residual"] = nullptr;
    e["tol"] = c.tol;
    e["pass"] = c.pass;
    e["runtime_ms"] = c.runtime_ms;
    if (!c.error.empty()) e["error"] = c.error;
    cases.push_back(std::move(e));
  }
  j["cases"] = std::move(cases);
  j["summary"] = {{"total", r.total()}, {"passed", r.passed()}};
  return j;
}

Report from_json(const nlohmann::ordered_json& j) {
  Report r;
  r.config = j.at("config");
  for (const auto& e : j.at("cases")) {
    CaseRecord c;
    c.suite = e.at("suite").get<std::string>();
    c.case_id = e.at("case_id").get<std::string>();
    c.params_digest = e.at("params_digest").get<std::string>();
    c.residual = e.at("residual").is_null() ? std::numeric_limits<double>::infinity() : e.at("residual").get<double>();
    c.tol = e.at("tol").get<double>();
    c.pass = e.at("pass").get<bool>();
    c.runtime_ms = e.at("runtime_ms").get<long long>();
    if (e.contains("error")) c.error = e.at("error").get<std::string>();
    r.cases.push_back(std::move(c));
  }
  return r;
}

void emit_report(const Report& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report to '" + path + "'");
  f << to_json(r).dump(2) << "\n";
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Sweep sweep_qkz(const RunConfig& cfg) {
  cfg.validate();
  const Chain ch = config_chain(cfg, cfg.S);
  const auto dom = jackson::check_convergence_domain(cfg.params, cfg.spins);
  Sweep sw;
  sw.sites = ch.N();
  sw.in_domain = dom.ok;
  sw.margin = dom.margin;
  const int threads = cfg.deterministic ? 1 : cfg.threads;
  for (int n : cfg.n_cuts) {
    auto jc = jackson_config(cfg, n, threads);
    jc.allow_outside_domain = true;
    SweepRow row;
    row.n_cut = n;
    row.tail_estimate = jackson::evaluate_solution(ch, jc).tail_estimate;
    auto f = [&](const std::vector<cd>& t) { return jackson::evaluate_solution(ch.with_t(t), jc).value; };
    for (int r = 0; r < ch.N(); ++r)
      row.residuals.push_back(qkz::qkz_residual(ch, cfg.params.xi_plus, cfg.params.xi_minus, f, r));
    sw.rows.push_back(std::move(row));
  }
  return sw;
}

void write_sweep_csv(const Sweep& s, std::ostream& os) {
  if (!s.in_domain)
    os << "# warning: parameters outside the convergence domain (margin " << s.margin << ")\n";
  os << "n_cut,tail_estimate";
  for (int r = 1; r <= s.sites; ++r) os << ",residual_r" << r;
  os << "\n";
  os << std::setprecision(17);
  for (const auto& row : s.rows) {
    os << row.n_cut << "," << row.tail_estimate;
    for (double v : row.residuals) os << "," << v;
    os << "\n";
  }
}

}  // namespace bqkz::harness

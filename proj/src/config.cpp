#include "bqkz/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bqkz::config {

namespace {

class Parser {
 public:
  Parser(const std::string& s, int line) : s_(s), line_(line) {}

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return {string()};
    if (c == '[') return {array()};
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return {true};
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return {false};
    }
    return {number()};
  }

  void finish() {
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after value");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value::Array array() {
    ++pos_;
    Value::Array out;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(value());
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  double number() {
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
      ++end;
    std::string tok = s_.substr(pos_, end - pos_);
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    const char* b = tok.data();
    if (*b == '+') ++b;
    double d = 0;
    auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), d);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("invalid number '" + tok + "'");
    pos_ = end;
    return d;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
};

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      while (i + 1 < s.size() && s[i + 1] != '\n') ++i;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    }
  }
  return depth;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

// Typed accessors --------------------------------------------------------------

std::string name(const std::string& sec, const std::string& key) { return sec + "." + key; }

double as_number(const Value& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return std::get<double>(v.v);
}

int as_int(const Value& v, const std::string& field) {
  const double d = as_number(v, field);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(field + ": expected an integer");
  return int(d);
}

cd as_complex(const Value& v, const std::string& field) {
  if (v.is_number()) return {std::get<double>(v.v), 0.0};
  if (!v.is_array()) throw ConfigError(field + ": expected [re, im]");
  const auto& a = std::get<Value::Array>(v.v);
  if (a.size() != 2) throw ConfigError(field + ": expected [re, im]");
  return {as_number(a[0], field), as_number(a[1], field)};
}

const Value::Array& as_array(const Value& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field + ": expected an array");
  return std::get<Value::Array>(v.v);
}

std::string as_string(const Value& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + ": expected a string");
  return std::get<std::string>(v.v);
}

std::string fmt(double d) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt(cd z) { return "[" + fmt(z.real()) + ", " + fmt(z.imag()) + "]"; }

}  // namespace

Document parse_toml(const std::string& text) {
  Document doc;
  std::string section;
  doc[section];
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const int start = lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') {
      const auto close = t.find(']');
      if (close == std::string::npos) throw ConfigError("line " + std::to_string(start) + ": unterminated section header");
      const std::string rest = trim(t.substr(close + 1));
      if (!rest.empty() && rest[0] != '#')
        throw ConfigError("line " + std::to_string(start) + ": text after section header");
      section = trim(t.substr(1, close - 1));
      if (!valid_key(section)) throw ConfigError("line " + std::to_string(start) + ": invalid section name");
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(start) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (!valid_key(key)) throw ConfigError("line " + std::to_string(start) + ": invalid key '" + key + "'");
    std::string rhs = t.substr(eq + 1);
    // arrays may continue over several lines
    while (bracket_balance(rhs) > 0 && std::getline(in, line)) {
      ++lineno;
      rhs += "\n" + line;
    }
    Parser p(rhs, start);
    Value v = p.value();
    p.finish();
    auto& sec = doc[section];
    if (sec.count(key)) throw ConfigError("line " + std::to_string(start) + ": duplicate key '" + key + "'");
    sec.emplace(key, std::move(v));
  }
  return doc;
}

spaces::SpinLabel parse_spin(const std::string& s, const std::string& field) {
  auto bad = [&] { return ConfigError(field + ": invalid spin '" + s + "'"); };
  if (s.rfind("generic:", 0) == 0) {
    std::string body = s.substr(8);
    std::erase_if(body, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (body.empty()) throw bad();
    double re = 0, im = 0;
    const char* b = body.data();
    const char* e = b + body.size();
    if (*b == '+') ++b;
    auto r1 = std::from_chars(b, e, re);
    if (r1.ec != std::errc()) throw bad();
    const char* p = r1.ptr;
    if (p != e) {
      if (e[-1] != 'i' || (*p != '+' && *p != '-')) throw bad();
      const char* q = *p == '+' ? p + 1 : p;
      auto r2 = std::from_chars(q, e - 1, im);
      if (r2.ec != std::errc() || r2.ptr != e - 1) throw bad();
    }
    return spaces::SpinLabel::Generic({re, im});
  }
  int num = 0, den = 1;
  const auto slash = s.find('/');
  const std::string a = s.substr(0, slash);
  auto r = std::from_chars(a.data(), a.data() + a.size(), num);
  if (a.empty() || r.ec != std::errc() || r.ptr != a.data() + a.size() || num < 0) throw bad();
  if (slash != std::string::npos) {
    const std::string b = s.substr(slash + 1);
    auto r2 = std::from_chars(b.data(), b.data() + b.size(), den);
    if (b.empty() || r2.ec != std::errc() || r2.ptr != b.data() + b.size() || den != 2) throw bad();
  }
  return spaces::SpinLabel::Finite(double(num) / den);
}

void RunConfig::validate() const {
  if (spins.empty()) throw ConfigError("chain.spins: at least one site required");
  if (t.size() != spins.size()) throw ConfigError("chain.t: one inhomogeneity per site required");
  if (S < 0) throw ConfigError("jackson.S: must be >= 0");
  if (int(x0.size()) != S) throw ConfigError("jackson.x0: needs S entries");
  if (level_cutoff < 0 || level_cutoff > 12) throw ConfigError("jackson.level_cutoff: must be in [0, 12]");
  for (int n : n_cuts)
    if (n < 0) throw ConfigError("jackson.n_cut: entries must be >= 0");
  if (!(rel_tol > 0)) throw ConfigError("verify.rel_tol: must be positive");
  if (!(qkz_tol > 0)) throw ConfigError("verify.qkz_tol: must be positive");
  if (samples < 1) throw ConfigError("verify.samples: must be >= 1");
  if (threads < 0) throw ConfigError("verify.threads: must be >= 0");
  try {
    prof.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("tolerances: ") + e.what());
  }
}

RunConfig parse_config(const std::string& text) {
  const Document doc = parse_toml(text);
  RunConfig c;
  static const std::map<std::string, std::vector<std::string>> known{
      {"", {}},
      {"params", {"eta", "tau", "xi_plus", "xi_minus"}},
      {"chain", {"spins", "t"}},
      {"jackson", {"S", "x0", "n_cut", "level_cutoff"}},
      {"verify", {"suites", "rel_tol", "qkz_tol", "seed", "samples", "threads", "deterministic"}},
      {"tolerances", {"construction_tol", "pole_guard", "generic_guard", "qpoch_stop", "generic_orders"}},
  };
  for (const auto& [sec, kv] : doc) {
    auto it = known.find(sec);
    if (it == known.end()) throw ConfigError("unknown section [" + sec + "]");
    for (const auto& [k, v] : kv)
      if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
        throw ConfigError(name(sec, k) + ": unknown key");
  }
  auto get = [&](const std::string& sec, const std::string& key) -> const Value* {
    auto s = doc.find(sec);
    if (s == doc.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };

  if (auto v = get("params", "eta")) c.params.eta = as_complex(*v, "params.eta");
  if (auto v = get("params", "tau")) c.params.tau = as_complex(*v, "params.tau");
  if (auto v = get("params", "xi_plus")) c.params.xi_plus = as_complex(*v, "params.xi_plus");
  if (auto v = get("params", "xi_minus")) c.params.xi_minus = as_complex(*v, "params.xi_minus");

  if (auto v = get("chain", "spins")) {
    c.spins.clear();
    const auto& a = as_array(*v, "chain.spins");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string f = "chain.spins[" + std::to_string(i) + "]";
      c.spins.push_back(parse_spin(as_string(a[i], f), f));
    }
  }
  if (auto v = get("chain", "t")) {
    c.t.clear();
    const auto& a = as_array(*v, "chain.t");
    for (std::size_t i = 0; i < a.size(); ++i) c.t.push_back(as_complex(a[i], "chain.t[" + std::to_string(i) + "]"));
  }

  if (auto v = get("jackson", "S")) c.S = as_int(*v, "jackson.S");
  if (auto v = get("jackson", "x0")) {
    c.x0.clear();
    const auto& a = as_array(*v, "jackson.x0");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.x0.push_back(as_complex(a[i], "jackson.x0[" + std::to_string(i) + "]"));
  }
  if (auto v = get("jackson", "n_cut")) {
    c.n_cuts.clear();
    if (v->is_number()) {
      c.n_cuts.push_back(as_int(*v, "jackson.n_cut"));
    } else {
      for (const auto& e : as_array(*v, "jackson.n_cut")) c.n_cuts.push_back(as_int(e, "jackson.n_cut"));
    }
  }
  if (auto v = get("jackson", "level_cutoff")) c.level_cutoff = as_int(*v, "jackson.level_cutoff");

  if (auto v = get("verify", "suites")) {
    for (const auto& e : as_array(*v, "verify.suites")) c.suites.push_back(as_string(e, "verify.suites"));
  }
  if (auto v = get("verify", "rel_tol")) c.rel_tol = as_number(*v, "verify.rel_tol");
  if (auto v = get("verify", "qkz_tol")) c.qkz_tol = as_number(*v, "verify.qkz_tol");
  if (auto v = get("verify", "seed")) {
    const double d = as_number(*v, "verify.seed");
    if (d < 0 || d != std::floor(d) || d > 9.007199254740992e15) throw ConfigError("verify.seed: expected a nonnegative integer");
    c.seed = std::uint64_t(d);
  }
  if (auto v = get("verify", "samples")) c.samples = as_int(*v, "verify.samples");
  if (auto v = get("verify", "threads")) c.threads = as_int(*v, "verify.threads");
  if (auto v = get("verify", "deterministic")) {
    if (!v->is_bool()) throw ConfigError("verify.deterministic: expected true or false");
    c.deterministic = std::get<bool>(v->v);
  }

  if (auto v = get("tolerances", "construction_tol")) c.prof.rel_tol = as_number(*v, "tolerances.construction_tol");
  if (auto v = get("tolerances", "pole_guard")) c.prof.pole_guard = as_number(*v, "tolerances.pole_guard");
  if (auto v = get("tolerances", "generic_guard")) c.prof.generic_guard = as_number(*v, "tolerances.generic_guard");
  if (auto v = get("tolerances", "qpoch_stop")) c.prof.qpoch_stop = as_number(*v, "tolerances.qpoch_stop");
  if (auto v = get("tolerances", "generic_orders")) c.prof.generic_orders = as_int(*v, "tolerances.generic_orders");

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_params(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[params]\n";
  os << "eta = " << fmt(cfg.params.eta) << "\n";
  os << "tau = " << fmt(cfg.params.tau) << "\n";
  os << "xi_plus = " << fmt(cfg.params.xi_plus) << "\n";
  os << "xi_minus = " << fmt(cfg.params.xi_minus) << "\n";
  os << "[chain]\nspins = [";
  for (std::size_t i = 0; i < cfg.spins.size(); ++i) os << (i ? ", " : "") << '"' << cfg.spins[i].str() << '"';
  os << "]\nt = [";
  for (std::size_t i = 0; i < cfg.t.size(); ++i) os << (i ? ", " : "") << fmt(cfg.t[i]);
  os << "]\n";
  return os.str();
}

}  // namespace bqkz::config

#include <algorithm>
#include <climits>
#include <sstream>

#include "bqkz/spaces.hpp"

namespace bqkz::spaces {

SpinLabel SpinLabel::Finite(double k) {
  const double tk = 2.0 * k;
  if (k < 0 || std::abs(tk - std::round(tk)) > 1e-12) throw ConfigError("finite spin must be a nonnegative half-integer");
  return SpinLabel{true, cd(std::round(tk) / 2.0, 0.0)};
}

SpinLabel SpinLabel::Generic(cd ell) { return SpinLabel{false, ell}; }

int SpinLabel::cap() const { return finite ? twice_k() + 1 : INT_MAX; }

int SpinLabel::twice_k() const { return int(std::lround(2.0 * ell.real())); }

std::string SpinLabel::str() const {
  std::ostringstream os;
  if (finite) {
    const int tk = twice_k();
    if (tk % 2 == 0)
      os << tk / 2;
    else
      os << tk << "/2";
  } else {
    os << "generic:" << ell.real() << (ell.imag() < 0 ? "" : "+") << ell.imag() << "i";
  }
  return os.str();
}

GradedSpace::GradedSpace(std::vector<SpinLabel> sites, int cutoff, int aux_count)
    : sites_(std::move(sites)), cutoff_(cutoff), aux_count_(aux_count) {
  if (cutoff < 0) throw ShapeMismatch("level cutoff must be nonnegative");
  const int m = num_sites();
  std::vector<int> rmax(m);
  for (int i = 0; i < m; ++i) rmax[i] = int(std::min<long long>(sites_[i].cap(), cutoff + 1LL));

  std::vector<int> cur(m, 1);
  starts_.clear();
  // depth-first fill gives lexicographic order inside each level
  std::function<void(int, int, int)> fill = [&](int i, int rem, int lvl) {
    if (i == m) {
      if (rem == 0) {
        tuples_.insert(tuples_.end(), cur.begin(), cur.end());
        levels_.push_back(lvl);
      }
      return;
    }
    for (int n = 1; n <= rmax[i] && n - 1 <= rem; ++n) {
      cur[i] = n;
      fill(i + 1, rem - (n - 1), lvl);
    }
    cur[i] = 1;
  };
  for (int lvl = 0; lvl <= cutoff; ++lvl) {
    const int before = int(levels_.size());
    starts_.push_back(before);
    fill(0, lvl, lvl);
    if (int(levels_.size()) > before) top_ = lvl;
  }
  starts_.resize(top_ + 1);
  dim_ = int(levels_.size());
  starts_.push_back(dim_);

  radix_.assign(m, 1);
  long long total = 1;
  for (int i = m - 1; i >= 0; --i) {
    radix_[i] = total;
    total *= rmax[i];
    if (total > (1LL << 22)) use_dense_ = false;
  }
  if (use_dense_) dense_lookup_.assign(std::size_t(total), -1);
  for (int k = 0; k < dim_; ++k) {
    long long code = 0;
    for (int i = 0; i < m; ++i) code += (tuple(k)[i] - 1) * radix_[i];
    if (use_dense_)
      dense_lookup_[std::size_t(code)] = k;
    else
      sparse_lookup_[code] = k;
  }
}

int GradedSpace::level_dim(int lvl) const {
  if (lvl < 0 || lvl > top_) return 0;
  return starts_[lvl + 1] - starts_[lvl];
}

int GradedSpace::index_of(const int* t) const {
  const int m = num_sites();
  long long code = 0;
  int lvl = 0;
  for (int i = 0; i < m; ++i) {
    if (t[i] < 1 || t[i] > sites_[i].cap()) return -1;
    lvl += t[i] - 1;
    if (lvl > cutoff_) return -1;
    code += (t[i] - 1) * radix_[i];
  }
  if (use_dense_) return dense_lookup_[std::size_t(code)];
  auto it = sparse_lookup_.find(code);
  return it == sparse_lookup_.end() ? -1 : it->second;
}

bool GradedSpace::same_as(const GradedSpace& o) const {
  return this == &o || (cutoff_ == o.cutoff_ && sites_ == o.sites_);
}

std::string GradedSpace::describe() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < num_sites(); ++i) os << (i ? "," : "") << sites_[i].str();
  os << "] cutoff " << cutoff_ << " dim " << dim_;
  return os.str();
}

SpacePtr make_space(std::vector<SpinLabel> sites, int cutoff, int aux_count) {
  return std::make_shared<const GradedSpace>(std::move(sites), cutoff, aux_count);
}

namespace {

// Level above which a space has no vectors even without truncation.
long long natural_top(const GradedSpace& s) {
  long long t = 0;
  for (const auto& st : s.sites()) {
    if (!st.finite) return LLONG_MAX;
    t += st.twice_k();
  }
  return t;
}

void require_same(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (a != b && !a->same_as(*b)) throw ShapeMismatch(std::string(what) + ": " + a->describe() + " vs " + b->describe());
}

}  // namespace

GradedOperator::GradedOperator(SpacePtr dom, SpacePtr cod, int lower, int upper)
    : dom_(std::move(dom)), cod_(std::move(cod)), lower_(lower), upper_(upper) {
  if (lower < 0 || upper < 0) throw ShapeMismatch("band widths must be nonnegative");
  const std::size_t n = std::size_t(dom_->top_level() + 1) * std::size_t(lower_ + upper_ + 1);
  blocks_.resize(n);
  present_.assign(n, 0);
}

GradedOperator GradedOperator::identity(SpacePtr s) {
  GradedOperator op(s, s, 0, 0);
  for (int l = 0; l <= s->top_level(); ++l) op.set_block(l, l, CMat::Identity(s->level_dim(l), s->level_dim(l)));
  return op;
}

GradedOperator GradedOperator::from_dense(SpacePtr dom, SpacePtr cod, const CMat& m, int lower, int upper) {
  if (m.rows() != cod->dim() || m.cols() != dom->dim()) throw ShapeMismatch("dense matrix does not match spaces");
  GradedOperator op(dom, cod, lower, upper);
  for (int in = 0; in <= dom->top_level(); ++in)
    for (int out = 0; out <= cod->top_level(); ++out) {
      auto blk = m.block(cod->level_start(out), dom->level_start(in), cod->level_dim(out), dom->level_dim(in));
      if (op.in_band(out, in)) {
        op.set_block(out, in, blk);
      } else if (blk.size() && blk.cwiseAbs().maxCoeff() != 0.0) {
        throw ShapeMismatch("dense matrix has entries outside the declared band");
      }
    }
  return op;
}

bool GradedOperator::in_band(int out, int in) const {
  return in >= 0 && in <= dom_->top_level() && out >= 0 && out <= cod_->top_level() && out - in >= -lower_ &&
         out - in <= upper_;
}

int GradedOperator::slot(int out, int in) const { return in * (lower_ + upper_ + 1) + (out - in + lower_); }

bool GradedOperator::has_block(int out, int in) const { return in_band(out, in) && present_[slot(out, in)]; }

CMat& GradedOperator::block(int out, int in) {
  if (!in_band(out, in)) throw ShapeMismatch("block outside operator band");
  const int s = slot(out, in);
  if (!present_[s]) {
    blocks_[s] = CMat::Zero(cod_->level_dim(out), dom_->level_dim(in));
    present_[s] = 1;
  }
  return blocks_[s];
}

const CMat* GradedOperator::find_block(int out, int in) const {
  if (!in_band(out, in)) return nullptr;
  const int s = slot(out, in);
  return present_[s] ? &blocks_[s] : nullptr;
}

void GradedOperator::set_block(int out, int in, CMat m) {
  if (m.rows() != cod_->level_dim(out) || m.cols() != dom_->level_dim(in)) throw ShapeMismatch("block shape");
  block(out, in) = std::move(m);
}

cd GradedOperator::entry(int row, int col) const {
  const int lo = cod_->level_of(row), li = dom_->level_of(col);
  const CMat* b = find_block(lo, li);
  if (!b) return 0.0;
  return (*b)(row - cod_->level_start(lo), col - dom_->level_start(li));
}

void GradedOperator::add_entry(int row, int col, cd v) {
  const int lo = cod_->level_of(row), li = dom_->level_of(col);
  block(lo, li)(row - cod_->level_start(lo), col - dom_->level_start(li)) += v;
}

CVec GradedOperator::apply(const CVec& v) const {
  if (v.size() != dom_->dim()) throw ShapeMismatch("vector length does not match operator domain");
  CVec out = CVec::Zero(cod_->dim());
  const long long nat = natural_top(*cod_);
  for (int in = 0; in <= dom_->top_level(); ++in) {
    auto seg = v.segment(dom_->level_start(in), dom_->level_dim(in));
    if (seg.cwiseAbs().maxCoeff() == 0.0) continue;
    for (int s = -lower_; s <= upper_; ++s) {
      const int o = in + s;
      if (o < 0) continue;
      if (o > cod_->cutoff()) {
        if (o <= nat) {
          std::ostringstream os;
          os << "operator maps level " << in << " to " << o << " beyond cutoff " << cod_->cutoff();
          throw CutoffOverflow(os.str());
        }
        continue;
      }
      if (const CMat* b = find_block(o, in)) out.segment(cod_->level_start(o), cod_->level_dim(o)) += (*b) * seg;
    }
  }
  return out;
}

GradedOperator GradedOperator::operator*(const GradedOperator& rhs) const {
  require_same(dom_, rhs.cod_, "compose");
  GradedOperator r(rhs.dom_, cod_, lower_ + rhs.lower_, upper_ + rhs.upper_);
  rhs.for_each_block([&](int mid, int in, const CMat& b) {
    for (int o = std::max(0, mid - lower_); o <= std::min(cod_->top_level(), mid + upper_); ++o)
      if (const CMat* a = find_block(o, mid)) r.block(o, in).noalias() += (*a) * b;
  });
  return r;
}

GradedOperator GradedOperator::operator+(const GradedOperator& rhs) const {
  require_same(dom_, rhs.dom_, "add");
  require_same(cod_, rhs.cod_, "add");
  GradedOperator r(dom_, cod_, std::max(lower_, rhs.lower_), std::max(upper_, rhs.upper_));
  for_each_block([&](int o, int i, const CMat& b) { r.block(o, i) += b; });
  rhs.for_each_block([&](int o, int i, const CMat& b) { r.block(o, i) += b; });
  return r;
}

GradedOperator GradedOperator::operator-(const GradedOperator& rhs) const { return *this + rhs * cd(-1.0); }

GradedOperator GradedOperator::operator*(cd s) const {
  GradedOperator r = *this;
  r *= s;
  return r;
}

GradedOperator& GradedOperator::operator*=(cd s) {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (present_[i]) blocks_[i] *= s;
  return *this;
}

GradedOperator operator*(cd s, const GradedOperator& op) { return op * s; }

GradedOperator GradedOperator::inverse(double max_cond) const {
  if (lower_ != 0 || upper_ != 0) throw ShapeMismatch("blockwise inverse needs a level-preserving operator");
  require_same(dom_, cod_, "inverse");
  GradedOperator r(cod_, dom_, 0, 0);
  for (int l = 0; l <= dom_->top_level(); ++l) {
    const CMat* b = find_block(l, l);
    if (!b) throw IllConditioned("missing diagonal block in inverse");
    Eigen::PartialPivLU<CMat> lu(*b);
    const double rc = lu.rcond();
    if (!(rc * max_cond > 1.0)) {
      std::ostringstream os;
      os << "level " << l << " block condition estimate " << (rc > 0 ? 1.0 / rc : INFINITY);
      throw IllConditioned(os.str());
    }
    r.set_block(l, l, lu.inverse());
  }
  return r;
}

GradedOperator GradedOperator::truncated(int max_level) const {
  GradedOperator r(dom_, cod_, lower_, upper_);
  for_each_block([&](int o, int i, const CMat& b) {
    if (o <= max_level && i <= max_level) r.set_block(o, i, b);
  });
  return r;
}

CMat GradedOperator::dense() const {
  CMat m = CMat::Zero(cod_->dim(), dom_->dim());
  for_each_block([&](int o, int i, const CMat& b) {
    m.block(cod_->level_start(o), dom_->level_start(i), b.rows(), b.cols()) = b;
  });
  return m;
}

double GradedOperator::off_shift_norm(int shift) const {
  double m = 0;
  for_each_block([&](int o, int i, const CMat& b) {
    if (o - i != shift) m = std::max(m, max_abs(b));
  });
  return m;
}

double residual(const GradedOperator& a, const GradedOperator& b, int max_level) {
  require_same(a.domain(), b.domain(), "residual");
  require_same(a.codomain(), b.codomain(), "residual");
  const auto& dom = *a.domain();
  const auto& cod = *a.codomain();
  const int lo = std::max(a.lower(), b.lower()), up = std::max(a.upper(), b.upper());
  double diff = 0, na = 0, nb = 0;
  for (int in = 0; in <= dom.top_level(); ++in) {
    if (max_level >= 0 && in > max_level) continue;
    for (int o = std::max(0, in - lo); o <= std::min(cod.top_level(), in + up); ++o) {
      if (max_level >= 0 && o > max_level) continue;
      const CMat* pa = a.find_block(o, in);
      const CMat* pb = b.find_block(o, in);
      if (!pa && !pb) continue;
      if (pa && pb) {
        diff = std::max(diff, max_abs(*pa - *pb));
      } else {
        diff = std::max(diff, max_abs(pa ? *pa : *pb));
      }
      if (pa) na = std::max(na, max_abs(*pa));
      if (pb) nb = std::max(nb, max_abs(*pb));
    }
  }
  return diff / (na + nb + 1.0);
}

GradedOperator build_map(SpacePtr dom, SpacePtr cod, int lower, int upper, const LocalAction& f, Overflow policy) {
  GradedOperator op(dom, cod, lower, upper);
  const int mc = cod->num_sites();
  std::vector<int> tgt(mc);
  for (int i = 0; i < dom->dim(); ++i) {
    const int li = dom->level_of(i);
    Emit emit = [&](cd c, const int* t) {
      if (c == 0.0) return;
      int lvl = 0;
      for (int s = 0; s < mc; ++s) {
        if (t[s] < 1 || t[s] > cod->site(s).cap()) return;
        lvl += t[s] - 1;
      }
      if (lvl > cod->cutoff()) {
        if (policy == Overflow::Throw) throw CutoffOverflow("action leaves the truncated space");
        return;
      }
      const int j = cod->index_of(t);
      if (j < 0) throw ShapeMismatch("target tuple missing from codomain basis");
      if (lvl - li < -lower || lvl - li > upper) throw ShapeMismatch("action violates declared band");
      op.add_entry(j, i, c);
    };
    f(dom->tuple(i), emit);
  }
  return op;
}

GradedOperator embed_action(SpacePtr big, const std::vector<int>& legs, int lower, int upper, const LocalAction& f,
                            Overflow policy) {
  const int m = big->num_sites();
  const int nl = int(legs.size());
  for (int l : legs)
    if (l < 0 || l >= m) throw ShapeMismatch("leg index out of range");
  std::vector<int> loc(nl), full(m);
  LocalAction g = [&](const int* t, const Emit& emit) {
    for (int a = 0; a < nl; ++a) loc[a] = t[legs[a]];
    std::copy(t, t + m, full.begin());
    Emit inner = [&](cd c, const int* lt) {
      for (int a = 0; a < nl; ++a) full[legs[a]] = lt[a];
      emit(c, full.data());
    };
    f(loc.data(), inner);
  };
  return build_map(big, big, lower, upper, g, policy);
}

GradedOperator embed(const GradedOperator& local, SpacePtr big, const std::vector<int>& legs) {
  const auto& ld = *local.domain();
  const auto& lc = *local.codomain();
  const int nl = int(legs.size());
  if (ld.num_sites() != nl || lc.num_sites() != nl) throw ShapeMismatch("embed: leg count differs from local sites");
  for (int a = 0; a < nl; ++a)
    if (!(ld.site(a) == big->site(legs[a])) || !(lc.site(a) == big->site(legs[a])))
      throw ShapeMismatch("embed: local site spin differs from target leg");
  const long long need = std::min<long long>(big->cutoff(), natural_top(ld));
  if (ld.cutoff() < need || lc.cutoff() < std::min<long long>(big->cutoff(), natural_top(lc)))
    throw ShapeMismatch("embed: local operator cutoff below the target cutoff");
  LocalAction f = [&](const int* lt, const Emit& emit) {
    const int col = ld.index_of(lt);
    if (col < 0) return;
    const int li = ld.level_of(col);
    const int cc = col - ld.level_start(li);
    for (int o = std::max(0, li - local.lower()); o <= std::min(lc.top_level(), li + local.upper()); ++o) {
      const CMat* b = local.find_block(o, li);
      if (!b) continue;
      for (int r = 0; r < b->rows(); ++r) {
        const cd c = (*b)(r, cc);
        if (c != 0.0) emit(c, lc.tuple(lc.level_start(o) + r));
      }
    }
  };
  return embed_action(big, legs, local.lower(), local.upper(), f);
}

CVec vacuum(const GradedSpace& s) {
  CVec v = CVec::Zero(s.dim());
  v(0) = 1.0;
  return v;
}

}  // namespace bqkz::spaces

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bqkz/common.hpp"

namespace bqkz::spaces {

// Site representation: finite V^k (dimension 2k+1) or Verma M^ell.
struct SpinLabel {
  bool finite = false;
  cd ell{0.0, 0.0};

  static SpinLabel Finite(double k);
  static SpinLabel Generic(cd ell);

  // Largest admissible basis index n (2k+1 for finite sites).
  int cap() const;
  int twice_k() const;
  double k() const { return ell.real(); }
  std::string str() const;
  bool operator==(const SpinLabel& o) const { return finite == o.finite && ell == o.ell; }
};

// Tensor product of sites truncated at total level <= cutoff.
// Basis: levels ascending, lexicographic inside a level. Indices n_i start at 1.
class GradedSpace {
 public:
  GradedSpace(std::vector<SpinLabel> sites, int cutoff, int aux_count = 0);

  int num_sites() const { return int(sites_.size()); }
  const std::vector<SpinLabel>& sites() const { return sites_; }
  const SpinLabel& site(int i) const { return sites_[i]; }
  int cutoff() const { return cutoff_; }
  int aux_count() const { return aux_count_; }
  int dim() const { return dim_; }
  // Highest level that has basis vectors.
  int top_level() const { return top_; }
  int level_dim(int lvl) const;
  int level_start(int lvl) const { return starts_[lvl]; }
  const int* tuple(int i) const { return &tuples_[std::size_t(i) * sites_.size()]; }
  int level_of(int i) const { return levels_[i]; }
  // -1 when the tuple is not in the truncated basis.
  int index_of(const int* tuple) const;
  int index_of(std::initializer_list<int> t) const { return index_of(std::data(t)); }
  bool same_as(const GradedSpace& o) const;
  std::string describe() const;

 private:
  std::vector<SpinLabel> sites_;
  int cutoff_;
  int aux_count_;
  int dim_ = 0;
  int top_ = 0;
  std::vector<int> tuples_;
  std::vector<int> levels_;
  std::vector<int> starts_;  // size top_+2
  std::vector<long long> radix_;
  std::vector<int> dense_lookup_;
  std::unordered_map<long long, int> sparse_lookup_;
  bool use_dense_ = true;
};

using SpacePtr = std::shared_ptr<const GradedSpace>;
SpacePtr make_space(std::vector<SpinLabel> sites, int cutoff, int aux_count = 0);

enum class Overflow { Drop, Throw };

// Linear map between graded spaces stored as dense blocks (out level, in level)
// with out - in in [-lower, upper].
class GradedOperator {
 public:
  GradedOperator() = default;
  GradedOperator(SpacePtr dom, SpacePtr cod, int lower, int upper);

  static GradedOperator identity(SpacePtr s);
  static GradedOperator from_dense(SpacePtr dom, SpacePtr cod, const CMat& m, int lower, int upper);

  const SpacePtr& domain() const { return dom_; }
  const SpacePtr& codomain() const { return cod_; }
  int lower() const { return lower_; }
  int upper() const { return upper_; }

  bool in_band(int out, int in) const;
  bool has_block(int out, int in) const;
  // Creates a zero block on first access. Levels must be inside the band.
  CMat& block(int out, int in);
  const CMat* find_block(int out, int in) const;
  void set_block(int out, int in, CMat m);

  // Entry lookup by basis index (zero outside stored blocks).
  cd entry(int row, int col) const;
  void add_entry(int row, int col, cd v);

  // Applies to a coefficient vector. CutoffOverflow when a nonzero input level
  // would need a block that the codomain truncation cannot hold.
  CVec apply(const CVec& v) const;

  GradedOperator operator*(const GradedOperator& rhs) const;
  GradedOperator operator+(const GradedOperator& rhs) const;
  GradedOperator operator-(const GradedOperator& rhs) const;
  GradedOperator operator*(cd s) const;
  GradedOperator& operator*=(cd s);

  // Blockwise inverse of a level-preserving operator. IllConditioned if any
  // block has condition number above max_cond.
  GradedOperator inverse(double max_cond = 1e10) const;

  // Restricts to blocks whose in and out levels are both <= max_level.
  GradedOperator truncated(int max_level) const;

  CMat dense() const;
  // Largest |entry| in blocks with out - in != shift.
  double off_shift_norm(int shift) const;

  template <class F>
  void for_each_block(F&& f) const {
    for (int in = 0; in <= dom_->top_level(); ++in)
      for (int out = std::max(0, in - lower_); out <= std::min(cod_->top_level(), in + upper_); ++out)
        if (const CMat* b = find_block(out, in)) f(out, in, *b);
  }

 private:
  int slot(int out, int in) const;
  SpacePtr dom_, cod_;
  int lower_ = 0, upper_ = 0;
  std::vector<CMat> blocks_;
  std::vector<char> present_;
};

GradedOperator operator*(cd s, const GradedOperator& op);

// Relative residual max|A-B| / (max|A| + max|B| + 1) over all blocks whose
// levels are <= max_level (all blocks when max_level < 0).
double residual(const GradedOperator& a, const GradedOperator& b, int max_level = -1);

using Emit = std::function<void(cd, const int*)>;
using LocalAction = std::function<void(const int*, const Emit&)>;

// Builds an operator by applying `f` to every domain basis tuple. Targets outside a
// finite site's cap or below index 1 are dropped (quotient action); targets
// above the codomain cutoff are dropped or rejected according to `policy`.
GradedOperator build_map(SpacePtr dom, SpacePtr cod, int lower, int upper, const LocalAction& f,
                         Overflow policy = Overflow::Drop);

// Operator on `big` acting with `f` on the listed legs only. `f` sees and emits
// local tuples of length legs.size().
GradedOperator embed_action(SpacePtr big, const std::vector<int>& legs, int lower, int upper, const LocalAction& f,
                            Overflow policy = Overflow::Drop);

// Embeds an operator whose domain is the tensor product of `legs` of `big`.
GradedOperator embed(const GradedOperator& local, SpacePtr big, const std::vector<int>& legs);

// Quantum group generators at one site, through the evaluation map at eval_x.
enum class Gen { e1, f1, e0, f0, cartan };

// `lambda` is the exponent for Gen::cartan, i.e. p^{lambda h1}.
GradedOperator apply_generator(SpacePtr space, Gen g, int site, cd eval_x, const SpectralParams& params,
                               cd lambda = 1.0, Overflow policy = Overflow::Drop);

// Iterated (opposite) coproduct of an affine generator with one evaluation point per site.
GradedOperator coproduct_action(SpacePtr space, Gen g, std::span<const cd> eval_points, const SpectralParams& params,
                                bool opposite = false, Overflow policy = Overflow::Drop);

// Coefficients of iota^k: v_n^{k+1/2} -> a v_1 (x) v_n + b v_2 (x) v_{n-1}.
struct IotaCoeffs {
  cd a;  // on v_1^{1/2} (x) v_n^k (zero when n = 2k+2)
  cd b;  // on v_2^{1/2} (x) v_{n-1}^k (zero when n = 1)
};
IotaCoeffs iota_coeffs(double k, int n, const SpectralParams& params);

enum class MapKind { iota, j, w, pr, P };

struct IntertwinerMap {
  MapKind kind;
  double k = 0;
  GradedOperator op;
};

// iota^k : V^{k+1/2} -> V^{1/2} (x) V^k and j^k = P o iota^k : V^{k+1/2} -> V^k (x) V^{1/2}.
IntertwinerMap build_iota(double k, const SpectralParams& params);
IntertwinerMap build_j(double k, const SpectralParams& params);
// w^k(v_n) = c_n v_{2k+2-n}, c_1 = 1, c_{n+1} = -c_n p^{2k+1-2n}.
IntertwinerMap build_w(double k, const SpectralParams& params);

// Splits site s of `dom` (which must be Finite(k+1/2)) into two finite sites:
// (1/2, k) for the iota ordering, (k, 1/2) for the j ordering. Codomain keeps the cutoff.
GradedOperator split_site(SpacePtr dom, int s, double k, bool j_order, const SpectralParams& params);

// Swaps legs i and j; the codomain has the two sites exchanged.
GradedOperator permutation(SpacePtr space, int i, int j);
// Space with legs i and j exchanged.
SpacePtr permuted_space(const SpacePtr& space, int i, int j);
// pr^k on one site: the site must be Generic(k) with k a nonnegative half-integer.
GradedOperator project_site(SpacePtr space, int site, double k);

// Canonical level-0 vector m_1 (x) ... (x) m_1.
CVec vacuum(const GradedSpace& s);

}  // namespace bqkz::spaces

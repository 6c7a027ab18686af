#pragma once

#include <map>
#include <mutex>
#include <tuple>

#include "bqkz/spaces.hpp"

namespace bqkz::kops {

using spaces::GradedOperator;
using spaces::SpacePtr;
using spaces::SpinLabel;

struct KOperator {
  SpinLabel spin;
  cd xi;
  cd x;
  GradedOperator op;      // single-site, level preserving
  std::vector<cd> diag;   // diagonal coefficients by basis index
  double residual = 0;    // defining-relation residual for fused operators
  double off_diagonal = 0;
};

// diag(1, sinh(xi - x) / sinh(xi + x)) on V^{1/2}.
KOperator k_half(cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

// Diagonal operator with entries C_n^ell(x; xi) on the (truncated) site.
KOperator k_diag(cd xi, SpinLabel ell, cd x, int cutoff, const SpectralParams& params,
                 const ToleranceProfile& prof = {});

// Stores fused stages keyed by (2k, x, xi, eta). Safe for concurrent use.
class KFusionCache {
 public:
  using Key = std::tuple<int, double, double, double, double, double, double>;
  bool find(const Key& key, KOperator& out) const;
  // Keeps the first value stored for a key.
  void insert(const Key& key, const KOperator& value);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<Key, KOperator> map_;
};

// K^{k+1/2}(x) from the fusion relation with j^k (recursion starts at K^0 = Id).
// Throws ResidualTooLarge if the relation cannot be solved or the result is
// not diagonal to within 1e-8.
KOperator fuse_K(double k, cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof = {},
                 KFusionCache* cache = nullptr);

// Right-hand side of the fusion relation and its residual against j^k K^{k+1/2}.
double fuse_K_relation_residual(double k, cd xi, cd x, const SpectralParams& params,
                                const ToleranceProfile& prof = {});

enum class KSource {
  diagonal,  // closed-form C_n^ell coefficients
  fused,     // recursive fusion from the spin-1/2 operator (finite spins only)
};

// R(x-y) K1(x) R(x+y) K2(y) = K2(y) R(x+y) K1(x) R(x-y) on the pair (k, ell).
double check_reflection(SpinLabel k, SpinLabel ell, cd x, cd y, cd xi, int cutoff, const SpectralParams& params,
                        const ToleranceProfile& prof = {}, KSource src_k = KSource::diagonal,
                        KSource src_l = KSource::diagonal);

// Tr_2(R12(2x - 2 eta) P12 K2(x)) against the scalar multiple of K1(x - eta).
double check_boundary_crossing(cd xi, cd x, const SpectralParams& params, const ToleranceProfile& prof = {});

}  // namespace bqkz::kops

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tensorray/common.hpp"

namespace tensorray {

/// Sorted (non-decreasing) tuple of axis labels 0..n-1.
struct MultiIndex {
  std::vector<int> entries;

  /// Number of distinct permutations of entries: m! / prod(rep!).
  int multiplicity() const;
};

/// Canonical coefficient layout of S^m R^n: lexicographic order over sorted
/// tuples. Instances are cached and shared; they never change once built.
class SymBasis {
 public:
  SymBasis(int n, int m);

  int n() const { return n_; }
  int m() const { return m_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& index(std::size_t k) const { return indices_[k]; }
  double multiplicity(std::size_t k) const { return mult_[k]; }

  /// Position of an arbitrary (unsorted) tuple.
  std::size_t position(std::span<const int> entries) const;

 private:
  int n_, m_;
  std::vector<MultiIndex> indices_;
  std::vector<double> mult_;
  std::vector<std::size_t> full_to_canon_;  // row-major n^m table
};

const SymBasis& sym_basis(int n, int m);

/// C(n+m-1, m).
std::size_t sym_dim(int n, int m);

/// Dense rank-m array over R^n, row-major.
struct FullTensor {
  int n = 0;
  int m = 0;
  CVec data;

  static FullTensor zero(int n, int m);
  std::size_t flat(std::span<const int> idx) const;
};

struct SymTensor {
  int n = 0;
  int m = 0;
  CVec c;  // canonical coefficients, sym_basis(n, m) order

  static SymTensor zero(int n, int m);
  const SymBasis& basis() const { return sym_basis(n, m); }
  cplx& at(std::span<const int> entries) { return c[basis().position(entries)]; }
  cplx at(std::span<const int> entries) const { return c[basis().position(entries)]; }

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(cplx s);
  /// sqrt of the delta-form <T, T>.
  double norm() const;
};

SymTensor operator+(SymTensor a, const SymTensor& b);
SymTensor operator-(SymTensor a, const SymTensor& b);
SymTensor operator*(cplx s, SymTensor a);

FullTensor expand(const SymTensor& t);
SymTensor symmetrize(const FullTensor& full);

/// T_{i_1..i_m} v^{i_1}..v^{i_m}.
cplx contract_power(const SymTensor& t, std::span<const double> v);

/// Canonical weights w_I = mult(I) prod_k v[I_k], so that
/// contract_power(T, v) = sum_I w_I T_I.
RVec power_weights(int m, std::span<const double> v);

SymTensor vector_power(std::span<const double> v, int m);

/// eps_ij(y) = delta_ij - y_i y_j / |y|^2.
SymTensor epsilon_tensor(std::span<const double> y);

/// Applies the n x n matrix p (row-major) to every index slot.
SymTensor apply_each_slot(const SymTensor& t, std::span<const double> p);

/// Tangential component: eps(y) applied to every slot.
SymTensor tangential_project(const SymTensor& t, std::span<const double> y);

/// y^p T_{p i_2 .. i_m}; a rank m-1 tensor.
SymTensor contract_first(const SymTensor& t, std::span<const double> y);

enum class Kernel { delta, epsilon };

/// K^m(A, conj B) where K^m is the symmetric power of the kernel, symmetrized
/// over all 2m slots (sum over perfect matchings of the slots).
cplx power_contract_pair(const SymTensor& a, const SymTensor& b, Kernel kernel,
                         std::span<const double> y = {});

/// Same with an explicit symmetric n x n kernel matrix.
cplx power_contract_pair(const SymTensor& a, const SymTensor& b, std::span<const double> kernel);

}  // namespace tensorray

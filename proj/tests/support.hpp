#pragma once

// Shared generators and brute-force oracles for the unit tests.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tensorray/tensor_algebra.hpp"

namespace tensorray::testing {

inline cplx random_cplx(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  return {normal(rng), normal(rng)};
}

inline RVec random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  RVec v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline RVec random_unit(std::mt19937_64& rng, int n) {
  RVec v = random_vec(rng, n);
  const double r = std::sqrt(norm2(v));
  for (double& x : v) x /= r;
  return v;
}

inline SymTensor random_sym(std::mt19937_64& rng, int n, int m) {
  SymTensor t = SymTensor::zero(n, m);
  for (cplx& c : t.c) c = random_cplx(rng);
  return t;
}

/// Calls f(idx) for every index tuple in {0..n-1}^m, row-major.
template <class F>
void for_each_full_index(int n, int m, F&& f) {
  std::vector<int> idx(m, 0);
  while (true) {
    f(idx);
    int a = m - 1;
    while (a >= 0 && ++idx[a] == n) idx[a--] = 0;
    if (a < 0) return;
  }
}

/// T_{i1..im} v^{i1}..v^{im} by looping over all n^m index tuples.
inline cplx brute_contract(const SymTensor& t, const RVec& v) {
  cplx s = 0.0;
  for_each_full_index(t.n, t.m, [&](const std::vector<int>& idx) {
    double w = 1.0;
    for (int i : idx) w *= v[i];
    s += t.at(idx) * w;
  });
  return s;
}

/// Sum over full index tuples of (K a)_{I} conj(b)_{J} with K applied slotwise
/// as the matrix sandwich <K^m A, B>; for symmetric K this equals the
/// symmetrized pairing of A against B.
inline cplx brute_sandwich(const SymTensor& a, const SymTensor& b, const std::vector<double>& K) {
  const int n = a.n, m = a.m;
  cplx s = 0.0;
  for_each_full_index(n, m, [&](const std::vector<int>& I) {
    for_each_full_index(n, m, [&](const std::vector<int>& J) {
      double w = 1.0;
      for (int k = 0; k < m; ++k) w *= K[I[k] * n + J[k]];
      if (w != 0.0) s += w * a.at(I) * std::conj(b.at(J));
    });
  });
  return s;
}

}  // namespace tensorray::testing

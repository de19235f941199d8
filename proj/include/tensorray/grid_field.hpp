#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tensorray/common.hpp"

namespace tensorray {

/// Uniform Cartesian grid on [-L, L)^n with N nodes per axis:
/// x_j = -L + j h, h = 2L / N.
struct GridSpec {
  int n = 3;
  double L = 10.0;
  int N = 64;

  double h() const { return 2.0 * L / N; }
  std::size_t size() const;
  double coord(int j) const { return -L + j * h(); }
  /// Row-major flat index, axis 0 slowest.
  std::size_t flat(std::span<const int> j) const;
  void unflat(std::size_t f, int* j) const;
};

/// Symmetric m-tensor field sampled on a GridSpec, one array per canonical
/// component (sym_basis(n, m) order).
struct GridField {
  GridSpec grid;
  int m = 0;
  std::vector<CVec> comps;

  static GridField zero(const GridSpec& g, int m);

  /// Multilinear interpolation of every component at x; zero outside the
  /// grid's node hull. Second-order accurate.
  void sample(std::span<const double> x, cplx* out) const;

  /// Sum over components and nodes of multiplicity-weighted |value|^2, times h^n.
  double l2_norm() const;
};

/// Relative L2 distance ||a - b|| / ||b|| under GridField::l2_norm.
double relative_l2(const GridField& a, const GridField& b);

}  // namespace tensorray

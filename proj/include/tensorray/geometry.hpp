#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "tensorray/common.hpp"

namespace tensorray {

/// Construction parameters. For n = 3, `polar` Gauss-Legendre rings times
/// `azimuth` uniform longitudes; for n = 2, `azimuth` uniform angles; for
/// n = 4, `polar` Chebyshev (second kind) nodes in the last coordinate times
/// the n = 3 atlas on the remaining S^2 with (polar, azimuth).
/// Counts must be even so that no direction has xi_n = 0, which keeps the
/// Householder frames of antipodal partners identical.
struct AtlasParams {
  int n = 3;
  int polar = 16;
  int azimuth = 32;
};

/// Direction quadrature on S^{n-1} with frames of xi^perp and an exact
/// antipodal pairing.
struct SphereAtlas {
  AtlasParams params;
  int n = 3;
  std::vector<RVec> directions;
  RVec weights;
  std::vector<std::vector<RVec>> frames;  // frames[k][a], a < n-1
  std::vector<std::size_t> pairing;
  int exact_degree = 0;  // D_atlas
  /// n = 3 only: ring polar angles, ascending in cos(theta); direction
  /// k = ring * azimuth + a has longitude 2 pi a / azimuth.
  RVec polar_angles;

  std::size_t size() const { return directions.size(); }
};

SphereAtlas build_atlas(const AtlasParams& params);

/// Orthonormal basis of xi^perp: images of e_1..e_{n-1} under the Householder
/// reflection through xi + sign(xi_n) e_n (sign(0) = +).
std::vector<RVec> frame_of(std::span<const double> xi);

/// Gauss-Legendre nodes and weights on [-1, 1], ascending, exactly mirrored.
void gauss_legendre(int count, RVec& nodes, RVec& weights);

/// Uniform grid on xi^perp in frame coordinates: u_j = -L + j h, h = 2L/N,
/// N^{n-1} nodes in row-major order (first frame axis slowest).
struct PlaneGrid {
  int dim = 2;  // n - 1
  double L = 10.0;
  int N = 64;

  double h() const { return 2.0 * L / N; }
  std::size_t size() const;
  double coord(int j) const { return -L + j * h(); }
  void unflat(std::size_t f, int* j) const;
  /// Ambient position sum_a u_a e_a of node f.
  RVec embed(std::size_t f, const std::vector<RVec>& frame) const;
};

/// Tensor-product Lagrange stencil over atlas directions around a unit
/// vector: 4 x 4 nodes in (polar angle, longitude) for n = 3, with rings
/// continued across the poles by the half-turn in longitude; 4 nodes in angle
/// for n = 2. Weights sum to 1. Not available for n = 4.
struct DirectionStencil {
  std::size_t count = 0;
  std::size_t index[16];
  double weight[16];
};
DirectionStencil direction_stencil(const SphereAtlas& atlas, std::span<const double> xi);

/// Weights of 4-point Lagrange interpolation at x through nodes t[0..3].
void lagrange4(const double* t, double x, double* w);

/// h^{n-1} times the sum of values.
cplx integrate_plane(const PlaneGrid& plane, std::span<const cplx> values);

/// Composite trapezoid rule on [-t_max, t_max] with n_t nodes; spectrally
/// accurate for Gaussian-type integrands.
struct LineRule {
  double t_max = 10.0;
  int n_t = 81;
  RVec nodes;
  RVec weights;

  static LineRule make(double t_max, int n_t);
};

/// CSV with columns k, xi_1..xi_n, weight, pair.
void write_atlas_csv(const SphereAtlas& atlas, std::ostream& out);

}  // namespace tensorray

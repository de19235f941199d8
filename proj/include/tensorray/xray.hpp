#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tensorray/common.hpp"
#include "tensorray/geometry.hpp"
#include "tensorray/grid_field.hpp"
#include "tensorray/phantoms.hpp"

namespace tensorray {

/// Pointwise access to a symmetric m-tensor field. Implementations must be
/// safe for concurrent const calls.
class FieldSampler {
 public:
  virtual ~FieldSampler() = default;
  virtual int n() const = 0;
  virtual int m() const = 0;
  /// All canonical components at x.
  virtual void sample(const double* x, cplx* out) const = 0;
  /// Quadrature of t -> <f(x + t xi), xi^m> over the rule; xi unit, x on xi^perp.
  virtual cplx line_integral(const double* x, const double* xi, const LineRule& rule) const;
};

class PhantomSampler final : public FieldSampler {
 public:
  explicit PhantomSampler(Phantom ph);
  int n() const override { return ph_.n; }
  int m() const override { return ph_.m; }
  void sample(const double* x, cplx* out) const override;
  cplx line_integral(const double* x, const double* xi, const LineRule& rule) const override;
  const Phantom& phantom() const { return ph_; }

 private:
  Phantom ph_;
};

class GridSampler final : public FieldSampler {
 public:
  explicit GridSampler(GridField f) : f_(std::move(f)) {}
  int n() const override { return f_.grid.n; }
  int m() const override { return f_.m; }
  void sample(const double* x, cplx* out) const override { f_.sample({x, static_cast<std::size_t>(n())}, out); }

 private:
  GridField f_;
};

/// Integral of <f(x + t xi), xi^m> dt. x is projected onto xi^perp first.
cplx ray_integral(const FieldSampler& f, std::span<const double> x, std::span<const double> xi,
                  const LineRule& rule);

/// |xi|^{m-1} I f(x - <x,xi> xi / |xi|^2, xi / |xi|).
cplx extended_J(const FieldSampler& f, std::span<const double> x, std::span<const double> xi,
                const LineRule& rule);

/// Values phi(x, xi_k) on one plane grid per atlas direction.
struct Sinogram {
  std::shared_ptr<const SphereAtlas> atlas;
  PlaneGrid plane;
  int m = 0;
  CVec values;  // direction-major, row-major plane order

  int n() const { return atlas->n; }
  /// (-1)^m
  int parity() const { return m % 2 == 0 ? 1 : -1; }
  std::size_t offset(std::size_t k) const { return k * plane.size(); }
  cplx& at(std::size_t k, std::size_t j) { return values[offset(k) + j]; }
  cplx at(std::size_t k, std::size_t j) const { return values[offset(k) + j]; }
  /// max |phi|, or 1 for the zero sinogram.
  double scale() const;
};

Sinogram make_sinogram(std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane, int m);

Sinogram transform(const FieldSampler& f, std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane,
                   const LineRule& rule);

/// The extension psi of sampled sinogram data: cubic B-spline interpolation
/// on each plane grid and Lagrange interpolation across atlas directions.
/// Returns nullopt outside the interpolation window.
class SinogramInterpolant {
 public:
  explicit SinogramInterpolant(const Sinogram& s);

  /// phi at a unit direction xi and a point x (projected onto xi^perp).
  std::optional<cplx> restricted(std::span<const double> x, std::span<const double> xi) const;
  /// psi(x, xi) = |xi|^{m-1} phi(x - <x,xi>xi/|xi|^2, xi/|xi|).
  std::optional<cplx> operator()(std::span<const double> x, std::span<const double> xi) const;
  /// Plane interpolation only, at frame coordinates u of direction k.
  std::optional<cplx> plane_value(std::size_t k, std::span<const double> u) const;

  int n() const { return n_; }
  int m() const { return m_; }
  const Sinogram& data() const { return data_; }

 private:
  Sinogram data_;
  CVec coeffs_;
  int n_, m_;
};

/// psi_extend as a free function; builds the interpolant on each call.
std::optional<cplx> psi_extend(const Sinogram& s, std::span<const double> x, std::span<const double> xi);

/// Cubic B-spline prefilter along every axis of a row-major N^dim block.
void bspline_prefilter(cplx* data, int N, int dim);
/// Cubic B-spline evaluation on a row-major N^dim coefficient block at
/// fractional grid positions s (node units); nullopt if the 4-wide support
/// leaves the grid.
std::optional<cplx> bspline_eval(const cplx* coeffs, int N, int dim, const double* s);

}  // namespace tensorray

#pragma once

#include <span>
#include <vector>

#include "tensorray/common.hpp"
#include "tensorray/grid_field.hpp"
#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

inline constexpr int kMaxPhantomDegree = 6;

struct Monomial {
  std::vector<int> powers;  // one exponent per axis
  cplx coeff;
};

struct Polynomial {
  std::vector<Monomial> terms;

  int degree() const;
  cplx eval(std::span<const double> u) const;
  Polynomial derivative(int axis) const;
  /// u_axis * p
  Polynomial times_coordinate(int axis) const;
  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator*=(cplx s);
  /// Merges equal exponents and drops zero coefficients.
  void canonicalize();
};

/// Gaussian x polynomial test field: component I equals
/// p_I(x - c) exp(-|x - c|^2 / (2 sigma^2)).
struct Phantom {
  int n = 3;
  int m = 0;
  double sigma = 1.0;
  RVec center;
  std::vector<Polynomial> comps;  // sym_basis(n, m) order

  static Phantom zero(int n, int m, double sigma = 1.0);
  /// Throws Error unless shapes match and degrees are within the cap.
  void validate() const;
  /// Largest |f_I(x)| over a coarse scan of the 8 sigma ball; used as the field scale.
  double scale() const;
};

/// Unit Gaussian in component (1,..,1) and zero elsewhere; for m = 0 the
/// plain unit Gaussian.
Phantom gaussian_phantom(int n, int m, double sigma = 1.0);

/// Seeded random phantom: every component gets a random polynomial of the
/// given total degree and the center a random offset of size <= 0.5 sigma.
/// With zero_mean, constant terms are shifted so that f^(0) = 0.
Phantom random_phantom(int n, int m, int degree, unsigned long long seed, bool zero_mean = false,
                       double sigma = 1.0);

SymTensor eval(const Phantom& ph, std::span<const double> x);
/// Writes all canonical components at x into out.
void eval_into(const Phantom& ph, std::span<const double> x, cplx* out);

/// Closed-form transform under f^(y) = (2 pi)^{-n/2} int e^{-i<y,x>} f(x) dx.
SymTensor fourier_value(const Phantom& ph, std::span<const double> y);

/// Symmetrized gradient of a rank m-1 phantom; its ray transform vanishes.
Phantom potential_field(const Phantom& potential);

/// Grid field whose Fourier coefficients are the tangential projections of
/// the seed's closed-form transform at every nonzero grid frequency.
GridField solenoidal_phantom(const Phantom& seed, const GridSpec& grid);

/// Samples the phantom at grid nodes.
GridField sample_on_grid(const Phantom& ph, const GridSpec& grid);

/// Univariate restriction t -> <f(x + t xi), xi^m> = q(t) exp(-(t - t0)^2/(2 sigma^2)) * g0,
/// with q expanded in powers of (t - t0).
struct LineRestriction {
  CVec q;           // coefficients of (t - t0)^k
  double t0 = 0.0;  // Gaussian center along the line
  double g0 = 0.0;  // exp(-dist^2 / (2 sigma^2)) at the closest point
  double sigma = 1.0;
};
LineRestriction restrict_to_line(const Phantom& ph, std::span<const double> x,
                                 std::span<const double> xi);

}  // namespace tensorray

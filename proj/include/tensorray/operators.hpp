#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensorray/common.hpp"
#include "tensorray/geometry.hpp"
#include "tensorray/phantoms.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

namespace tensorray {

enum class EvalPath { exact, interpolated };

/// Central differences along the tilde fields. X fields step by hx and Xi
/// fields by hxi, both as the parameter of p + t V(p) in (x, xi) space.
struct StencilSpec {
  double hx = 0.02;
  double hxi = 0.02;
  int order = 2;  // 2 or 4
  EvalPath path = EvalPath::exact;

  void validate() const;
};

/// 0-based axis pairs (i_k, j_k).
using IndexPair = std::pair<int, int>;
using IndexTuple = std::vector<IndexPair>;

/// A function on R^n x (R^n \ 0), usually the extension psi of a sinogram.
/// nullopt marks points outside the evaluable window.
class PsiSource {
 public:
  virtual ~PsiSource() = default;
  virtual int n() const = 0;
  virtual int m() const = 0;
  virtual std::optional<cplx> operator()(const double* x, const double* xi) const = 0;
};

/// psi = J f re-integrated at every query.
class ExactPsi final : public PsiSource {
 public:
  ExactPsi(Phantom ph, LineRule rule);
  int n() const override { return sampler_.n(); }
  int m() const override { return sampler_.m(); }
  std::optional<cplx> operator()(const double* x, const double* xi) const override;

 private:
  PhantomSampler sampler_;
  LineRule rule_;
};

/// psi from stored sinogram samples.
class InterpolatedPsi final : public PsiSource {
 public:
  explicit InterpolatedPsi(const Sinogram& s) : interp_(s) {}
  int n() const override { return interp_.n(); }
  int m() const override { return interp_.m(); }
  std::optional<cplx> operator()(const double* x, const double* xi) const override;

 private:
  SinogramInterpolant interp_;
};

class FunctionPsi final : public PsiSource {
 public:
  using Fn = std::function<std::optional<cplx>(const double* x, const double* xi)>;
  FunctionPsi(int n, int m, Fn fn) : n_(n), m_(m), fn_(std::move(fn)) {}
  int n() const override { return n_; }
  int m() const override { return m_; }
  std::optional<cplx> operator()(const double* x, const double* xi) const override { return fn_(x, xi); }

 private:
  int n_, m_;
  Fn fn_;
};

/// |xi|^lambda base(x, xi / |xi|): the degree-lambda extension of the
/// restriction of base to the unit sphere bundle.
class HomogeneousPsi final : public PsiSource {
 public:
  HomogeneousPsi(const PsiSource& base, double lambda) : base_(base), lambda_(lambda) {}
  int n() const override { return base_.n(); }
  int m() const override { return base_.m(); }
  std::optional<cplx> operator()(const double* x, const double* xi) const override;

 private:
  const PsiSource& base_;
  double lambda_;
};

/// base + amplitude * |xi|^{m-1} exp(-|x'|^2 / 2) p(xi / |xi|), x' the
/// projection of x onto xi^perp and p a seeded homogeneous polynomial of
/// degree m + 2 with standard normal coefficients. The added term has the
/// parity and homogeneity of range data but is not itself in the range.
class PerturbedPsi final : public PsiSource {
 public:
  PerturbedPsi(const PsiSource& base, double amplitude, std::uint64_t seed);
  int n() const override { return base_.n(); }
  int m() const override { return base_.m(); }
  std::optional<cplx> operator()(const double* x, const double* xi) const override;

 private:
  const PsiSource& base_;
  double amplitude_;
  Polynomial p_;
};

/// First-order tilde fields and their compositions, evaluated at (x, xi).
std::optional<cplx> apply_X(const PsiSource& psi, int i, const double* x, const double* xi, const StencilSpec& st);
std::optional<cplx> apply_Xi(const PsiSource& psi, int i, const double* x, const double* xi, const StencilSpec& st);
/// Mixed ambient differences d^2/dx^i dxi^j - d^2/dx^j dxi^i with steps (hx, hxi).
std::optional<cplx> apply_john_ambient(const PsiSource& psi, int i, int j, const double* x, const double* xi,
                                       const StencilSpec& st);
/// X_i Xi_j - X_j Xi_i.
std::optional<cplx> apply_john_intrinsic(const PsiSource& psi, int i, int j, const double* x, const double* xi,
                                         const StencilSpec& st);
/// (Delta_xi)^l with Delta_xi = -sum_i Xi_i^2.
std::optional<cplx> apply_delta_xi(const PsiSource& psi, int l, const double* x, const double* xi,
                                   const StencilSpec& st);
/// (J_ij - c (xi_i X_j - xi_j X_i)) applied to psi.
std::optional<cplx> apply_john_shifted(const PsiSource& psi, int i, int j, double c, const double* x,
                                       const double* xi, const StencilSpec& st);
/// Composite range operator: factor k (1-based from the left) is
/// J_{i_k j_k} - (k - 1)(xi_{i_k} X_{j_k} - xi_{j_k} X_{i_k}); the rightmost
/// factor acts first. The tuple has m + 1 pairs.
std::optional<cplx> apply_composite(const PsiSource& psi, const IndexTuple& tuple, const double* x,
                                    const double* xi, const StencilSpec& st);

/// c_l(lambda, k) = lambda - k + l + 1 for 1 <= l <= k.
double lemma32_coefficient(int l, double lambda, int k);

/// A point of T S^{n-1}.
struct TangentPoint {
  RVec x;
  RVec xi;
};

/// Seeded points: xi uniform on the sphere, x uniform in the radius-r disc of xi^perp.
std::vector<TangentPoint> sample_tangent_points(int n, std::size_t count, double radius, std::uint64_t seed);

struct ResidualStats {
  IndexTuple tuple;
  double max_residual = 0.0;
  double rms_residual = 0.0;
  std::size_t points_used = 0;
  std::size_t excluded = 0;  // stencil left the evaluable window
  double h = 0.0;
  int order = 2;
};

/// Residual magnitudes |op(psi)| over the sample points.
ResidualStats residual_stats(const std::function<std::optional<cplx>(const TangentPoint&)>& op,
                             const std::vector<TangentPoint>& points);

ResidualStats composite_range_residual(const PsiSource& psi, const IndexTuple& tuple, const StencilSpec& st,
                                       const std::vector<TangentPoint>& points);

/// All tuples with i_k < j_k for each of the m + 1 factors.
std::vector<IndexTuple> tuples_ordered(int n, int m);
/// `count` distinct seeded tuples drawn from those with i_k != j_k.
std::vector<IndexTuple> tuples_sampled(int n, int m, std::size_t count, std::uint64_t seed);
/// Ordered set, plus 64 sampled tuples when n^{2m+2} exceeds 4096.
std::vector<IndexTuple> default_tuples(int n, int m, std::uint64_t seed);

/// phi^(y, xi) for unit xi orthogonal to y.
class SpectralSource {
 public:
  virtual ~SpectralSource() = default;
  virtual int n() const = 0;
  virtual int m() const = 0;
  virtual std::optional<cplx> operator()(const double* y, const double* xi) const = 0;
};

/// sqrt(2 pi) <f^(y), xi^m> from the closed-form transform.
class ExactSpectral final : public SpectralSource {
 public:
  explicit ExactSpectral(Phantom ph) : ph_(std::move(ph)) {}
  int n() const override { return ph_.n; }
  int m() const override { return ph_.m; }
  std::optional<cplx> operator()(const double* y, const double* xi) const override;

 private:
  Phantom ph_;
};

class InterpolatedSpectral final : public SpectralSource {
 public:
  explicit InterpolatedSpectral(const SpectralSinogram& ss) : interp_(ss) {}
  int n() const override { return interp_.data().atlas->n; }
  int m() const override { return interp_.data().m; }
  std::optional<cplx> operator()(const double* y, const double* xi) const override { return interp_(y, xi); }

 private:
  SpectralInterpolant interp_;
};

class FunctionSpectral final : public SpectralSource {
 public:
  using Fn = std::function<std::optional<cplx>(const double* y, const double* xi)>;
  FunctionSpectral(int n, int m, Fn fn) : n_(n), m_(m), fn_(std::move(fn)) {}
  int n() const override { return n_; }
  int m() const override { return m_; }
  std::optional<cplx> operator()(const double* y, const double* xi) const override { return fn_(y, xi); }

 private:
  int n_, m_;
  Fn fn_;
};

/// Applies A_{i_1 j_1} ... A_{i_c j_c}, A_ij = y_i d/dxi^j - y_j d/dxi^i, to
/// the degree-m extension |xi|^m phi^(y, xi/|xi|) on the plane y^perp and
/// evaluates at the unit vector at angle theta in the frame of y^perp
/// (n = 3). Angular derivatives are central differences with step h.
std::optional<cplx> fourier_annihilator(const SpectralSource& src, const IndexTuple& tuple, const double* y,
                                        double theta, double h);

struct FrequencyPoint {
  RVec y;
  double theta = 0.0;
};
/// Seeded points with |y| uniform in [r_min, r_max] and uniform directions.
std::vector<FrequencyPoint> sample_frequency_points(int n, std::size_t count, double r_min, double r_max,
                                                    std::uint64_t seed);

ResidualStats fourier_annihilator_residual(const SpectralSource& src, const IndexTuple& tuple, double h,
                                           const std::vector<FrequencyPoint>& points);

/// {tuple, max_residual, rms_residual, points_used, h, order}; tuple labels 1-based.
std::string residual_json(const ResidualStats& r);

}  // namespace tensorray

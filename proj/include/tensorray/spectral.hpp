#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tensorray/common.hpp"
#include "tensorray/geometry.hpp"
#include "tensorray/grid_field.hpp"
#include "tensorray/phantoms.hpp"
#include "tensorray/tensor_algebra.hpp"
#include "tensorray/xray.hpp"

namespace tensorray {

/// Frequency samples dual to a GridSpec. Node j per axis sits at
/// y_j = (j - N/2) pi / L (centered order); values approximate
/// f^(y) = (2 pi)^{-n/2} int e^{-i<y,x>} f(x) dx.
struct SpectralField {
  GridSpec grid;  // the spatial grid this field is dual to
  int m = 0;
  std::vector<CVec> comps;

  static SpectralField zero(const GridSpec& g, int m);
  double dy() const { return kPi / grid.L; }
  double freq(int j) const { return (j - grid.N / 2) * dy(); }
  /// Largest radius of a ball inside the frequency box.
  double y_max() const { return (grid.N / 2 - 1) * dy(); }
  SymTensor at(std::size_t f) const;
  void set(std::size_t f, const SymTensor& t);
};

SpectralField field_fft(const GridField& f);
GridField field_ifft(const SpectralField& F);

/// Closed-form transform of a phantom at every frequency node.
SpectralField sample_fourier(const Phantom& ph, const GridSpec& grid);

/// Plane transforms of a sinogram. Each plane is zero-padded symmetrically
/// by `pad` before the transform, so `plane` is the padded spatial grid and
/// the frequency node j along a frame axis is v_j = (j - N/2) pi / L.
struct SpectralSinogram {
  std::shared_ptr<const SphereAtlas> atlas;
  PlaneGrid plane;
  int m = 0;
  CVec values;  // direction-major

  std::size_t offset(std::size_t k) const { return k * plane.size(); }
  double dv() const { return kPi / plane.L; }
  double freq(int j) const { return (j - plane.N / 2) * dv(); }
  double v_max() const { return (plane.N / 2 - 2) * dv(); }
  /// Ambient frequency of node f on direction k.
  RVec ambient(std::size_t k, std::size_t f) const;
};

/// Transform of one direction's plane, padded by `pad` (1 = no padding).
CVec plane_fft(const Sinogram& s, std::size_t k, int pad = 1);
SpectralSinogram plane_fft_all(const Sinogram& s, int pad = 1);
/// phi^(y, xi) off the frequency nodes: cubic B-spline interpolation on each
/// frequency plane, evaluated at the projection of y, and Lagrange
/// interpolation across atlas directions (n = 2, 3).
class SpectralInterpolant {
 public:
  explicit SpectralInterpolant(const SpectralSinogram& ss);
  /// Plane k at the frame coordinates of y; nullopt outside the window.
  std::optional<cplx> plane_at(std::size_t k, const double* y) const;
  /// Direction-interpolated value at a unit xi (ideally orthogonal to y).
  std::optional<cplx> operator()(const double* y, const double* xi) const;
  const SpectralSinogram& data() const { return *ss_; }

 private:
  const SpectralSinogram* ss_;
  CVec coeffs_;
};

/// Inverse of plane_fft_all restricted to the unpadded window.
Sinogram plane_ifft_all(const SpectralSinogram& ss, int pad = 1);

/// sqrt(2 pi) <f^(y), xi^m>; y must be orthogonal to xi.
cplx slice_predict(const Phantom& ph, std::span<const double> y, std::span<const double> xi);
cplx slice_predict(const SymTensor& fhat, std::span<const double> y, std::span<const double> xi);

/// Tangential projection at every nonzero frequency; y = 0 is left unchanged.
SpectralField solenoidal_project(const SpectralField& F);

/// max over y != 0 of |y^p F_{p i_2..i_m}(y)| / |y|, relative to max |F|;
/// zero for m = 0 and for the zero field.
double tangential_defect(const SpectralField& F);

enum class RecoveryMode { great_circle, band };

struct RecoverOptions {
  RecoveryMode mode = RecoveryMode::great_circle;
  /// Directions sampled on the half circle orthogonal to y.
  int circle_samples = 16;
  /// Band half-width in radians; 0 selects half the atlas angular spacing.
  double theta_tol = 0.0;
  /// Frequencies beyond this radius are set to zero; 0 selects the largest
  /// radius covered by both the plane and the ambient frequency windows.
  double y_max = 0.0;
};

struct RecoveryResult {
  SpectralField field;         // Phi^, tangential at every y != 0
  RVec misfit;                 // relative least-squares residual per node
  std::vector<std::uint8_t> ill_posed;
  std::size_t ill_posed_count = 0;
  std::size_t recovered = 0;   // nodes with a solved fit
  double max_misfit = 0.0;
  /// sqrt(sum of squared residuals / sum of squared data) over solved nodes.
  double aggregate_misfit = 0.0;
  double y_max = 0.0;
};

RecoveryResult recover_tangential(const SpectralSinogram& ss, const GridSpec& target,
                                  const RecoverOptions& opt = {});

struct ReconstructOptions {
  int pad = 2;
  RecoverOptions recover;
};

/// plane transforms, tangential recovery, division by sqrt(2 pi), inverse FFT.
GridField reconstruct_solenoidal(const Sinogram& s, const GridSpec& grid, const ReconstructOptions& opt = {},
                                 RecoveryResult* diagnostics = nullptr);

std::string to_string(RecoveryMode mode);
RecoveryMode recovery_mode_from_string(const std::string& s);

}  // namespace tensorray

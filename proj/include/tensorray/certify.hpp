#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tensorray/operators.hpp"
#include "tensorray/phantoms.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

namespace tensorray {

/// max over paired samples of |phi(x, -xi) - (-1)^m phi(x, xi)| / scale.
/// Antipodal frames coincide, so paired planes share node coordinates.
double check_parity(const Sinogram& s);

enum class Verdict { in_range_consistent, inconsistent, inconclusive };
std::string to_string(Verdict v);
/// CLI exit code: 0 consistent, 1 inconsistent, 2 inconclusive.
int exit_code(Verdict v);

struct CertifyConfig {
  double tau_parity = 1e-8;
  /// John and Fourier residual thresholds; 0 selects 10 x the floor measured
  /// on a reference phantom sampled on the same atlas and plane grid.
  double tau_john = 0.0;
  double tau_fourier = 0.0;
  double tau_recovery = 1e-3;
  /// Interpolated-path stencil; steps comparable to the plane spacing keep
  /// interpolation error from being amplified by the high-order stencils.
  StencilSpec stencil{0.25, 0.25, 2, EvalPath::interpolated};
  std::size_t points = 24;
  double radius = 2.0;
  /// Angular step of the Fourier annihilator stencil.
  double fourier_h = 0.1;
  std::size_t fourier_points = 24;
  double fourier_r_min = 0.5;
  double fourier_r_max = 3.0;
  int pad = 2;
  std::uint64_t seed = 1;
  /// Also report residuals paired with smooth bump test functions.
  bool weak = false;
  std::size_t weak_bumps = 8;
};

struct CertificateReport {
  int m = 0;
  double parity_defect = 0.0;
  std::vector<ResidualStats> john;
  std::vector<ResidualStats> fourier;
  std::vector<double> weak_residuals;  // one per bump, max over tuples
  double recovery_misfit = 0.0;
  /// Composite residual ratios under step halving (phantom-backed runs).
  std::vector<double> h_trend;
  double coverage = 1.0;  // fraction of requested points with a full stencil
  double tau_parity = 0.0, tau_john = 0.0, tau_fourier = 0.0, tau_recovery = 0.0;
  bool calibrated = false;
  Verdict verdict = Verdict::inconclusive;
};

/// Residual floors of a reference phantom under the same sampling and
/// config; used for the default thresholds.
struct Calibration {
  double john_floor = 0.0;
  double fourier_floor = 0.0;
};
Calibration calibrate(std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane, int m,
                      const CertifyConfig& cfg);

/// Parity, composite residuals over the default tuple set, Fourier
/// annihilator residuals and the tangential-recovery misfit, aggregated into
/// a verdict. A backing phantom adds exact-path step-halving ratios.
CertificateReport certify(const Sinogram& s, const CertifyConfig& cfg, const Phantom* backing = nullptr);

std::string certificate_json(const CertificateReport& r);

}  // namespace tensorray

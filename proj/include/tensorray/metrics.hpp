#pragma once

#include <string>

#include "tensorray/common.hpp"
#include "tensorray/operators.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

namespace tensorray {

struct WeightParams {
  int r = 0;
  double s = 0.0;
  double t = 0.0;
};

/// Gamma((n-1)/2) / (4 pi^{(n+1)/2}).
double hst_prefactor(int n);

/// Epstein zeta of Z^d, sum over k != 0 of |k|^{-s}, analytically continued.
double epstein_zeta(int d, double s);

/// Weight of the origin node in the d-dimensional rule with spacing `step`
/// for integrands |y|^alpha g(y): -Z_d(-alpha) step^{d + alpha}. It cancels
/// the leading error of the punctured lattice sum, so the rule keeps its
/// smooth-integrand accuracy. Equals step^d for alpha = 0.
double origin_weight(int d, double alpha, double step);

/// Scalar product of plane-transformed sinograms:
/// prefactor * sum_k w_k int |y|^{2t} (1 + |y|^2)^{s-t} phi1^ conj(phi2^) dy.
cplx hst_inner(const SpectralSinogram& a, const SpectralSinogram& b, double s, double t);
double hst_norm(const SpectralSinogram& a, double s, double t);
/// The same weighted norm of sinogram samples, reading the plane variable as
/// the weighted one. l2st_norm(phi^) = hst_norm(phi) is the Plancherel identity.
double l2st_norm(const Sinogram& phi, double s, double t);
double l2st_norm(const SpectralSinogram& phi, double s, double t);

/// Delta_xi^l phi at every sinogram node, differentiating the extension psi.
Sinogram delta_xi_sinogram(const PsiSource& psi, std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane,
                           int l, const StencilSpec& st);

struct HrstResult {
  double square = 0.0;  // sum_l C(r,l) (Delta^l phi, phi); negative signals under-resolution
  double norm = 0.0;    // sqrt(square), or NaN when square < 0
};
/// sqrt(sum_l C(r, l) hst_inner(Delta_xi^l phi, phi)); psi supplies Delta_xi.
HrstResult hrst_norm(const Sinogram& phi, const PsiSource& psi, const WeightParams& w, int pad = 2,
                     const StencilSpec& st = {});

/// c_{m,n}: the moment integral over the great subsphere S^{n-2} divided by the
/// matching epsilon^m component, cross-checked over several index choices.
double compute_cmn(int n, int m);
/// Largest relative spread of c_{m,n} over the index choices.
double cmn_spread(int n, int m);

/// 2 pi * prefactor * c_{m,n} * int |y|^{2t} (1 + |y|^2)^{s-t} eps^m(F, F) dy.
/// Equals ||If||^2 in H^{s+1/2}_{t+1/2} for tangential F = f^s. At y = 0 the
/// fiber integral is replaced by its average over directions of y.
double fourier_side_energy(const SpectralField& F, double s, double t);

/// {params, direct, fourier_side, rel_diff, cmn}
std::string norm_report_json(int n, int m, double s, double t, double direct, double fourier_side);

}  // namespace tensorray

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include "support.hpp"
#include "tensorray/metrics.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

const LineRule& rule() {
  static const LineRule r = LineRule::make(10.0, 81);
  return r;
}

/// Direct lattice sum over 0 < |k| <= R plus the continuum tail
/// |S^{d-1}| R^{d-s} / (s - d); valid for s > d.
double lattice_zeta(int d, double s, int R) {
  double sum = 0.0;
  std::vector<int> k(d, -R);
  for (;;) {
    long r2 = 0;
    for (int v : k) r2 += static_cast<long>(v) * v;
    if (r2 > 0 && r2 <= static_cast<long>(R) * R) sum += std::pow(static_cast<double>(r2), -0.5 * s);
    int a = 0;
    while (a < d && ++k[a] > R) k[a++] = -R;
    if (a == d) break;
  }
  return sum + sphere_area(d) * std::pow(R, d - s) / (s - d);
}

}  // namespace

TEST_CASE("hst_prefactor", "[metrics]") {
  CHECK(std::abs(hst_prefactor(3) - 1.0 / (4.0 * kPi * kPi)) < 1e-17);
  CHECK(std::abs(hst_prefactor(2) - 1.0 / (4.0 * kPi)) < 1e-16);
}

TEST_CASE("epstein_zeta against lattice sums and special values", "[metrics]") {
  // Z_1(s) = 2 zeta(s).
  CHECK(std::abs(epstein_zeta(1, 2.0) - kPi * kPi / 3.0) < 1e-12);
  // Z_2(4) = 4 zeta(2) beta(2) with Catalan's constant beta(2).
  CHECK(std::abs(epstein_zeta(2, 4.0) - 4.0 * (kPi * kPi / 6.0) * 0.915965594177219015) < 1e-12);
  for (int d = 1; d <= 3; ++d) {
    CHECK(epstein_zeta(d, 0.0) == -1.0);
    CHECK(epstein_zeta(d, -2.0) == 0.0);
    for (double s : {d + 1.5, d + 3.0}) {
      const double want = lattice_zeta(d, s, d == 3 ? 40 : 400);
      CHECK(std::abs(epstein_zeta(d, s) - want) < 2e-4 * std::abs(want));
    }
  }
  CHECK_THROWS_AS(epstein_zeta(2, 2.0), Error);
}

TEST_CASE("origin weight reduces to the plain cell for alpha = 0", "[metrics]") {
  CHECK(std::abs(origin_weight(2, 0.0, 0.3) - 0.09) < 1e-15);
  CHECK(origin_weight(2, 2.0, 0.3) == 0.0);
  CHECK_THROWS_AS(origin_weight(2, -2.0, 0.3), Error);
}

TEST_CASE("c_{m,3} values and index spread", "[metrics]") {
  CHECK(std::abs(compute_cmn(3, 0) - 2.0 * kPi) < 1e-12);
  CHECK(std::abs(compute_cmn(3, 1) - kPi) < 1e-12);
  CHECK(compute_cmn(3, 2) > 0.0);
  for (int m = 0; m <= 2; ++m) CHECK(cmn_spread(3, m) <= 1e-10);
}

TEST_CASE("weighted norms: zero data, scaling and Plancherel", "[metrics][property]") {
  const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 4, 8}));
  const PlaneGrid plane{2, 10.0, 32};
  CHECK(hst_norm(plane_fft_all(make_sinogram(at, plane, 0), 1), 1.0, 0.2) == 0.0);

  const Sinogram s = transform(PhantomSampler(random_phantom(3, 1, 2, 81)), at, plane, rule());
  Sinogram twice = s;
  for (cplx& v : twice.values) v *= 2.0;
  for (double t : {0.0, 0.3, -0.4}) {
    const double a = hst_norm(plane_fft_all(s, 1), 0.5, t);
    CHECK(std::abs(hst_norm(plane_fft_all(twice, 1), 0.5, t) - 2.0 * a) < 1e-12 * a);
  }
  const double direct = l2st_norm(s, 0.0, 0.0);
  const double spectral = hst_norm(plane_fft_all(s, 1), 0.0, 0.0);
  CHECK(std::abs(direct - spectral) <= 1e-6 * spectral);
  // The weight |y|^{2t} on R^2 is integrable only for t > -1.
  CHECK_THROWS_AS(hst_norm(plane_fft_all(s, 1), 0.0, -1.0), Error);
  CHECK_NOTHROW(hst_norm(plane_fft_all(s, 1), 0.0, -0.99));
}

TEST_CASE("hrst_norm with r = 0 equals hst_norm", "[metrics]") {
  const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 4, 8}));
  const Sinogram s = transform(PhantomSampler(random_phantom(3, 0, 2, 82)), at, PlaneGrid{2, 10.0, 32}, rule());
  const InterpolatedPsi psi(s);
  const HrstResult r = hrst_norm(s, psi, WeightParams{0, 0.5, 0.1}, 2);
  CHECK(std::abs(r.norm - hst_norm(plane_fft_all(s, 2), 0.5, 0.1)) < 1e-12 * r.norm);
  CHECK_THROWS_AS(hrst_norm(s, psi, WeightParams{-1, 0.0, 0.0}), Error);
}

TEST_CASE("direct and Fourier-side energies agree for the Gaussian", "[metrics]") {
  const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 8, 16}));
  const Phantom ph = gaussian_phantom(3, 0);
  const SpectralSinogram ss = plane_fft_all(transform(PhantomSampler(ph), at, PlaneGrid{2, 16.0, 48}, rule()), 1);
  const SpectralField F = sample_fourier(ph, GridSpec{3, 16.0, 48});
  for (double t : {0.0, 0.4}) {
    const double direct = std::pow(hst_norm(ss, 0.5, t + 0.5), 2);
    const double fourier = fourier_side_energy(F, 0.0, t);
    CHECK(std::abs(direct - fourier) <= 1e-2 * fourier);
  }
}

TEST_CASE("norm_report_json fields", "[metrics]") {
  const auto j = nlohmann::json::parse(norm_report_json(3, 1, 0.5, 0.0, 2.0, 1.0));
  CHECK(j["params"]["m"] == 1);
  CHECK(j["direct"] == 2.0);
  CHECK(j["rel_diff"] == 1.0);
  CHECK(std::abs(j["cmn"].get<double>() - kPi) < 1e-12);
}

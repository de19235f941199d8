#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "tensorray/xray.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

const LineRule& rule() {
  static const LineRule r = LineRule::make(10.0, 81);
  return r;
}

std::shared_ptr<const SphereAtlas> small_atlas() {
  static const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 8, 16}));
  return at;
}

/// f_i = x_i exp(-|x|^2 / 2).
Phantom radial_vector_field() {
  Phantom ph = Phantom::zero(3, 1);
  for (int i = 0; i < 3; ++i) {
    std::vector<int> p(3, 0);
    p[i] = 1;
    ph.comps[i].terms.push_back({p, 1.0});
  }
  return ph;
}

}  // namespace

TEST_CASE("ray_integral closed forms", "[xray]") {
  const PhantomSampler g(gaussian_phantom(3, 0));
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const RVec xi = random_unit(rng, 3);
    CHECK(std::abs(ray_integral(g, RVec{0.0, 0.0, 0.0}, xi, rule()) - kSqrt2Pi) < 1e-12);
    RVec x = frame_of(xi)[0];
    CHECK(std::abs(ray_integral(g, x, xi, rule()) - kSqrt2Pi * std::exp(-0.5)) < 1e-12);
    const RVec x2 = random_vec(rng, 3);
    CHECK(std::abs(ray_integral(PhantomSampler(radial_vector_field()), x2, xi, rule())) < 1e-14);
  }
}

TEST_CASE("ray_integral rejects non-unit directions", "[xray]") {
  const PhantomSampler g(gaussian_phantom(3, 0));
  CHECK_THROWS_AS(ray_integral(g, RVec{0.0, 0.0, 0.0}, RVec{0.0, 0.0, 2.0}, rule()), Error);
}

TEST_CASE("phantom and sampling quadratures agree", "[xray]") {
  const Phantom ph = random_phantom(3, 2, 3, 32);
  const PhantomSampler s(ph);
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const RVec xi = random_unit(rng, 3);
    const RVec x = random_vec(rng, 3);
    const cplx fast = ray_integral(s, x, xi, rule());
    // The generic sampling rule needs x on xi^perp.
    RVec p = x;
    const double xx = dot(x, xi);
    for (int d = 0; d < 3; ++d) p[d] -= xx * xi[d];
    CHECK(std::abs(fast - s.FieldSampler::line_integral(p.data(), xi.data(), rule())) < 1e-12);
  }
}

TEST_CASE("extended_J homogeneity and shift invariance", "[xray]") {
  std::mt19937_64 rng(34);
  for (int m = 0; m <= 2; ++m) {
    const PhantomSampler s(random_phantom(3, m, 2, 35 + m));
    for (int trial = 0; trial < 10; ++trial) {
      const RVec x = random_vec(rng, 3);
      const RVec xi = random_vec(rng, 3);
      RVec xi2 = xi, xs = x;
      for (int d = 0; d < 3; ++d) {
        xi2[d] *= 2.0;
        xs[d] += 5.0 * xi[d];
      }
      const cplx v = extended_J(s, x, xi, rule());
      CHECK(std::abs(extended_J(s, x, xi2, rule()) - std::pow(2.0, m - 1) * v) < 1e-12);
      CHECK(std::abs(extended_J(s, xs, xi, rule()) - v) < 1e-12);
    }
  }
}

TEST_CASE("transform of the unit Gaussian", "[xray]") {
  const PlaneGrid plane{2, 10.0, 32};
  const Sinogram s = transform(PhantomSampler(gaussian_phantom(3, 0)), small_atlas(), plane, rule());
  double worst = 0.0;
  for (std::size_t k = 0; k < s.atlas->size(); ++k)
    for (std::size_t f = 0; f < plane.size(); ++f) {
      const RVec x = plane.embed(f, s.atlas->frames[k]);
      worst = std::max(worst, std::abs(s.at(k, f) - kSqrt2Pi * std::exp(-0.5 * norm2(x))));
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("adding a potential field leaves the transform unchanged", "[xray][property]") {
  const PlaneGrid plane{2, 10.0, 24};
  const Phantom sol = random_phantom(3, 1, 2, 36);
  Phantom sum = sol;
  Phantom seed = random_phantom(3, 0, 2, 37);
  seed.center = sol.center;  // components only add under a shared envelope
  const Phantom pot = potential_field(seed);
  for (std::size_t c = 0; c < sum.comps.size(); ++c) {
    sum.comps[c] += pot.comps[c];
    sum.comps[c].canonicalize();
  }
  const Sinogram a = transform(PhantomSampler(sum), small_atlas(), plane, rule());
  const Sinogram b = transform(PhantomSampler(sol), small_atlas(), plane, rule());
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d += std::norm(a.values[i] - b.values[i]);
    n += std::norm(b.values[i]);
  }
  CHECK(std::sqrt(d / n) <= 1e-7);
}

TEST_CASE("doubling the line rule leaves Gaussian sinograms unchanged", "[xray]") {
  const PlaneGrid plane{2, 10.0, 16};
  const PhantomSampler s(random_phantom(3, 1, 3, 38));
  const Sinogram a = transform(s, small_atlas(), plane, LineRule::make(10.0, 81));
  const Sinogram b = transform(s, small_atlas(), plane, LineRule::make(10.0, 161));
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d += std::norm(a.values[i] - b.values[i]);
    n += std::norm(b.values[i]);
  }
  CHECK(std::sqrt(d / n) <= 1e-10);
}

TEST_CASE("psi_extend restriction, homogeneity and shift", "[xray]") {
  const PlaneGrid plane{2, 10.0, 48};
  const Sinogram s = transform(PhantomSampler(random_phantom(3, 2, 2, 39)), small_atlas(), plane, rule());
  const SinogramInterpolant psi(s);
  // Node values are reproduced exactly up to the prefilter accuracy.
  for (std::size_t k = 0; k < s.atlas->size(); k += 13)
    for (std::size_t f = 0; f < plane.size(); f += 97) {
      int j[2];
      plane.unflat(f, j);
      // Neighbouring directions see x in rotated frames, so stay well inside the window.
      if (std::abs(plane.coord(j[0])) > 0.5 * plane.L || std::abs(plane.coord(j[1])) > 0.5 * plane.L) continue;
      const RVec x = plane.embed(f, s.atlas->frames[k]);
      const auto v = psi(x, s.atlas->directions[k]);
      REQUIRE(v);
      CHECK(std::abs(*v - s.at(k, f)) < 1e-10 * s.scale());
    }
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const RVec x = random_vec(rng, 3);
    const RVec xi = random_unit(rng, 3);
    RVec xi2 = xi, xs = x;
    for (int d = 0; d < 3; ++d) {
      xi2[d] *= 2.0;
      xs[d] += 3.0 * xi[d];
    }
    const auto v = psi(x, xi);
    REQUIRE(v);
    CHECK(std::abs(*psi(x, xi2) - 2.0 * *v) < 1e-13);
    CHECK(std::abs(*psi(xs, xi) - *v) < 1e-12);
    CHECK(std::abs(*psi_extend(s, x, xi) - *v) == 0.0);
  }
  CHECK_FALSE(psi(RVec{20.0, 0.0, 0.0}, RVec{0.0, 0.0, 1.0}).has_value());
}

TEST_CASE("bspline interpolation reproduces nodes and quadratics", "[xray]") {
  const int N = 24;
  CVec data(N * N);
  auto q = [](double s, double t) { return cplx(1.0 + 0.3 * s - 0.02 * s * t + 0.01 * t * t, 0.5); };
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) data[i * N + j] = q(i, j);
  CVec coeffs = data;
  bspline_prefilter(coeffs.data(), N, 2);
  const double node[2] = {7.0, 11.0};
  CHECK(std::abs(*bspline_eval(coeffs.data(), N, 2, node) - q(7, 11)) < 1e-9);
  // Interior points far from the mirrored edges see only the polynomial.
  const double mid[2] = {11.4, 12.7};
  CHECK(std::abs(*bspline_eval(coeffs.data(), N, 2, mid) - q(11.4, 12.7)) < 1e-4);
  const double edge[2] = {0.5, 5.0};
  CHECK_FALSE(bspline_eval(coeffs.data(), N, 2, edge).has_value());
}

TEST_CASE("grid sampler is second-order accurate", "[xray]") {
  const Phantom ph = gaussian_phantom(3, 0);
  std::vector<double> err;
  for (int N : {32, 64}) {
    const GridSampler g(sample_on_grid(ph, GridSpec{3, 8.0, N}));
    err.push_back(std::abs(ray_integral(g, RVec{0.3, 0.1, 0.0}, RVec{0.0, 0.0, 1.0}, LineRule::make(7.9, 401)) -
                           ray_integral(PhantomSampler(ph), RVec{0.3, 0.1, 0.0}, RVec{0.0, 0.0, 1.0}, rule())));
  }
  CHECK(err[0] / err[1] > 3.0);
}

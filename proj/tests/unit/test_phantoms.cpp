#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "tensorray/phantoms.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

Polynomial monomial(std::vector<int> powers, cplx c = 1.0) { return Polynomial{{Monomial{std::move(powers), c}}}; }

/// f_i = x_i exp(-|x|^2 / 2).
Phantom radial_vector_field() {
  Phantom ph = Phantom::zero(3, 1);
  for (int i = 0; i < 3; ++i) {
    std::vector<int> p(3, 0);
    p[i] = 1;
    ph.comps[i] = monomial(p);
  }
  return ph;
}

double frobenius(const SymTensor& a) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.c.size(); ++k) s += a.basis().multiplicity(k) * std::norm(a.c[k]);
  return s;
}

}  // namespace

TEST_CASE("eval examples", "[phantoms]") {
  const Phantom g = gaussian_phantom(3, 0);
  CHECK(eval(g, RVec{0.0, 0.0, 0.0}).c[0] == cplx(1.0));
  const SymTensor v = eval(radial_vector_field(), RVec{1.0, 0.0, 0.0});
  CHECK(std::abs(v.c[0] - std::exp(-0.5)) < 1e-15);
  CHECK(v.c[1] == 0.0);
  CHECK(v.c[2] == 0.0);
}

TEST_CASE("Gaussian tail bound", "[phantoms][property]") {
  // With coefficient mass sum |c| <= 1 and sigma = 1, |f_I| <= max(1, r^d) e^{-r^2/2} at
  // radius r from the center. That is below 1e-12 at 8 sigma for d <= 2 and at
  // 9 sigma for d <= 4; at 8 sigma a lone u_1^4 term still reaches 5.2e-11.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int degree = 1 + trial % 4;
    Phantom ph = random_phantom(3, trial % 3, degree, 500 + trial);
    for (auto& p : ph.comps) {
      double mass = 0.0;
      for (const auto& t : p.terms) mass += std::abs(t.coeff);
      p *= 1.0 / mass;
    }
    const double r = degree <= 2 ? 8.05 : 9.0;
    const RVec u = random_unit(rng, 3);
    RVec x(3);
    for (int d = 0; d < 3; ++d) x[d] = ph.center[d] + r * u[d];
    for (const cplx& c : eval(ph, x).c) CHECK(std::abs(c) < 1e-12);
  }
  const Phantom quartic{3, 0, 1.0, {0.0, 0.0, 0.0}, {Polynomial{{Monomial{{4, 0, 0}, 1.0}}}}};
  CHECK(std::abs(eval(quartic, RVec{8.0, 0.0, 0.0}).c[0] - 4096.0 * std::exp(-32.0)) < 1e-24);
}

TEST_CASE("fourier_value closed forms", "[phantoms]") {
  std::mt19937_64 rng(12);
  const Phantom g = gaussian_phantom(3, 0);
  const Phantom r = radial_vector_field();
  for (int trial = 0; trial < 10; ++trial) {
    const RVec y = random_vec(rng, 3);
    const double e = std::exp(-0.5 * norm2(y));
    CHECK(std::abs(fourier_value(g, y).c[0] - e) < 1e-15);
    const SymTensor fr = fourier_value(r, y);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(fr.c[i] - cplx(0.0, -y[i] * e)) < 1e-15);
  }
}

TEST_CASE("center shift multiplies the transform by exp(-i<y,c>)", "[phantoms]") {
  std::mt19937_64 rng(13);
  Phantom ph = random_phantom(3, 2, 3, 77);
  Phantom moved = ph;
  moved.center = {0.7, -0.2, 0.4};
  for (int trial = 0; trial < 10; ++trial) {
    const RVec y = random_vec(rng, 3);
    const cplx phase = std::exp(cplx(0.0, -dot(y, moved.center) + dot(y, ph.center)));
    const SymTensor a = fourier_value(ph, y), b = fourier_value(moved, y);
    for (std::size_t k = 0; k < a.c.size(); ++k) CHECK(std::abs(b.c[k] - phase * a.c[k]) < 1e-13);
  }
}

TEST_CASE("fourier_value agrees with the grid FFT of samples", "[phantoms]") {
  const GridSpec grid{3, 9.0, 64};
  for (int m = 0; m <= 2; ++m) {
    const Phantom ph = random_phantom(3, m, 3, 40 + m);
    const SpectralField num = field_fft(sample_on_grid(ph, grid));
    const SpectralField ref = sample_fourier(ph, grid);
    double d = 0.0, s = 0.0;
    for (std::size_t c = 0; c < num.comps.size(); ++c)
      for (std::size_t f = 0; f < grid.size(); ++f) {
        d += std::norm(num.comps[c][f] - ref.comps[c][f]);
        s += std::norm(ref.comps[c][f]);
      }
    CHECK(std::sqrt(d / s) <= 1e-6);
  }
}

TEST_CASE("potential_field of the unit Gaussian", "[phantoms]") {
  const Phantom f = potential_field(gaussian_phantom(3, 0));
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const RVec x = random_vec(rng, 3);
    const SymTensor v = eval(f, x);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(v.c[i] + x[i] * std::exp(-0.5 * norm2(x))) < 1e-15);
  }
}

TEST_CASE("potential fields have vanishing line integrals", "[phantoms][property]") {
  std::mt19937_64 rng(15);
  const LineRule rule = LineRule::make(10.0, 81);
  for (int m = 1; m <= 2; ++m) {
    const Phantom f = potential_field(random_phantom(3, m - 1, 3, 90 + m));
    const PhantomSampler s(f);
    double worst = 0.0;
    for (int line = 0; line < 100; ++line) {
      const RVec xi = random_unit(rng, 3);
      const RVec x = random_vec(rng, 3);
      worst = std::max(worst, std::abs(ray_integral(s, x, xi, rule)));
    }
    CHECK(worst <= 1e-8 * f.scale());
  }
}

TEST_CASE("rank-2 potential matches the symmetrized finite-difference Jacobian", "[phantoms]") {
  const Phantom v = radial_vector_field();
  const Phantom f = potential_field(v);
  std::mt19937_64 rng(16);
  const double h = 1e-4;
  for (int trial = 0; trial < 10; ++trial) {
    const RVec x = random_vec(rng, 3);
    const SymTensor got = eval(f, x);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        auto d = [&](int comp, int axis) {
          RVec p = x, q = x;
          p[axis] += h;
          q[axis] -= h;
          return (eval(v, p).c[comp] - eval(v, q).c[comp]) / (2.0 * h);
        };
        const cplx want = 0.5 * (d(i, j) + d(j, i));
        const int ij[2] = {i, j};
        CHECK(std::abs(got.at(ij) - want) < 1e-6);
      }
  }
}

TEST_CASE("solenoidal_phantom", "[phantoms]") {
  const GridSpec grid{3, 8.0, 32};
  const Phantom g = gaussian_phantom(3, 0);
  const GridField f0 = solenoidal_phantom(g, grid);
  const SpectralField want0 = sample_fourier(g, grid);
  const GridField ref0 = field_ifft(want0);
  CHECK(relative_l2(f0, ref0) < 1e-12);

  // The radial field is a pure gradient, so nothing survives.
  const GridField pot = solenoidal_phantom(radial_vector_field(), grid);
  double mx = 0.0;
  for (const auto& c : pot.comps)
    for (const cplx& v : c) mx = std::max(mx, std::abs(v));
  CHECK(mx < 1e-12);

  const Phantom seed = random_phantom(3, 1, 2, 17);
  const SpectralField F = field_fft(solenoidal_phantom(seed, grid));
  CHECK(tangential_defect(F) < 1e-12);
}

TEST_CASE("solenoidal and potential parts are orthogonal", "[phantoms][property]") {
  const GridSpec grid{3, 9.0, 48};
  for (int m = 1; m <= 2; ++m) {
    const SpectralField S = field_fft(solenoidal_phantom(random_phantom(3, m, 2, 60 + m), grid));
    const SpectralField P = sample_fourier(potential_field(random_phantom(3, m - 1, 2, 70 + m)), grid);
    cplx ip = 0.0;
    double ns = 0.0, np = 0.0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
      const SymTensor a = S.at(f), b = P.at(f);
      for (std::size_t k = 0; k < a.c.size(); ++k) ip += a.basis().multiplicity(k) * a.c[k] * std::conj(b.c[k]);
      ns += frobenius(a);
      np += frobenius(b);
    }
    CHECK(std::abs(ip) <= 1e-6 * std::sqrt(ns * np));
  }
}

TEST_CASE("validation rejects degree above 6 and shape errors", "[phantoms]") {
  Phantom ph = Phantom::zero(3, 0);
  ph.comps[0] = monomial({7, 0, 0});
  CHECK_THROWS_AS(ph.validate(), Error);
  CHECK_THROWS_AS(random_phantom(3, 1, 7, 1), Error);
  Phantom bad = Phantom::zero(3, 1);
  bad.comps.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
}

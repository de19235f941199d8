#include <algorithm>
#include <catch_amalgamated.hpp>
#include <sstream>

#include "support.hpp"
#include "tensorray/geometry.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

double odd_double_factorial(int k) {  // (k - 1)!! for even k
  double v = 1.0;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

/// Closed-form integral of xi^alpha over S^2: zero unless all exponents are
/// even, else 4 pi prod (a_i - 1)!! / (|a| + 1)!!.
double sphere_moment(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  double den = 1.0;
  for (int j = a + b + c + 1; j > 1; j -= 2) den *= j;
  return 4.0 * kPi * odd_double_factorial(a) * odd_double_factorial(b) * odd_double_factorial(c) / den;
}

}  // namespace

TEST_CASE("atlas weights, moments and pairing", "[geometry]") {
  for (auto p : {AtlasParams{3, 8, 16}, AtlasParams{3, 16, 32}}) {
    const SphereAtlas at = build_atlas(p);
    double w = 0.0, x2 = 0.0;
    for (std::size_t k = 0; k < at.size(); ++k) {
      w += at.weights[k];
      x2 += at.weights[k] * at.directions[k][0] * at.directions[k][0];
      CHECK(at.pairing[at.pairing[k]] == k);
      CHECK(at.pairing[k] != k);
      for (int d = 0; d < 3; ++d) CHECK(at.directions[at.pairing[k]][d] == -at.directions[k][d]);
    }
    CHECK(std::abs(w - 4.0 * kPi) < 1e-10);
    CHECK(std::abs(x2 - 4.0 * kPi / 3.0) < 1e-10);
  }
}

TEST_CASE("atlas integrates monomials up to its declared degree", "[geometry][property]") {
  const SphereAtlas at = build_atlas({3, 8, 16});
  REQUIRE(at.exact_degree >= 8);
  for (int a = 0; a <= at.exact_degree; ++a)
    for (int b = 0; a + b <= at.exact_degree; ++b)
      for (int c = 0; a + b + c <= at.exact_degree; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < at.size(); ++k) {
          const RVec& x = at.directions[k];
          s += at.weights[k] * std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
        }
        CHECK(std::abs(s - sphere_moment(a, b, c)) < 1e-10);
      }
}

TEST_CASE("frames are orthonormal and shared by antipodal partners", "[geometry]") {
  const SphereAtlas at = build_atlas({3, 8, 16});
  for (std::size_t k = 0; k < at.size(); ++k) {
    const auto& f = at.frames[k];
    CHECK(std::abs(norm2(at.directions[k]) - 1.0) < 1e-14);
    for (int a = 0; a < 2; ++a) {
      CHECK(std::abs(dot(f[a], at.directions[k])) < 1e-14);
      for (int b = 0; b < 2; ++b) CHECK(std::abs(dot(f[a], f[b]) - (a == b ? 1.0 : 0.0)) < 1e-14);
      for (int d = 0; d < 3; ++d) CHECK(at.frames[at.pairing[k]][a][d] == f[a][d]);
    }
  }
}

TEST_CASE("frame_of examples", "[geometry]") {
  const auto f = frame_of(RVec{0.0, 0.0, 1.0});
  CHECK(f[0] == RVec{1.0, 0.0, 0.0});
  CHECK(f[1] == RVec{0.0, 1.0, 0.0});
  const auto g = frame_of(RVec{1.0, 0.0, 0.0});
  for (const auto& v : g) CHECK(std::abs(v[0]) < 1e-15);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 3;
    const RVec xi = random_unit(rng, n);
    auto basis = frame_of(xi);
    basis.push_back(xi);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) CHECK(std::abs(dot(basis[a], basis[b]) - (a == b ? 1.0 : 0.0)) < 1e-14);
  }
}

TEST_CASE("plane nodes satisfy the incidence constraint", "[geometry]") {
  const SphereAtlas at = build_atlas({3, 4, 8});
  const PlaneGrid plane{2, 5.0, 16};
  for (std::size_t k = 0; k < at.size(); ++k)
    for (std::size_t f = 0; f < plane.size(); f += 7)
      CHECK(std::abs(dot(plane.embed(f, at.frames[k]), at.directions[k])) < 1e-13);
}

TEST_CASE("integrate_plane", "[geometry]") {
  const PlaneGrid small{2, 3.0, 12};
  CHECK(std::abs(integrate_plane(small, CVec(small.size(), 1.0)) - 36.0) < 1e-12);
  for (int N : {64, 128}) {
    const PlaneGrid plane{2, 10.0, N};
    CVec g(plane.size()), odd(plane.size());
    int j[2];
    for (std::size_t f = 0; f < plane.size(); ++f) {
      plane.unflat(f, j);
      const double u = plane.coord(j[0]), v = plane.coord(j[1]);
      g[f] = std::exp(-0.5 * (u * u + v * v));
      odd[f] = u * g[f];
    }
    CHECK(std::abs(integrate_plane(plane, g) - 2.0 * kPi) < 1e-8);
    CHECK(std::abs(integrate_plane(plane, odd)) < 1e-14);
  }
}

TEST_CASE("gauss_legendre nodes", "[geometry]") {
  RVec x, w;
  gauss_legendre(2, x, w);
  CHECK(std::abs(x[1] - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(x[0] == -x[1]);
  gauss_legendre(5, x, w);
  double s = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += w[k];
    m4 += w[k] * std::pow(x[k], 8);
  }
  CHECK(std::abs(s - 2.0) < 1e-14);
  CHECK(std::abs(m4 - 2.0 / 9.0) < 1e-14);
}

TEST_CASE("lagrange4 reproduces cubics", "[geometry][property]") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double t[4] = {u(rng), 0.0, 0.0, 0.0};
    for (int k = 1; k < 4; ++k) t[k] = t[k - 1] + 0.2 + 0.5 * (u(rng) + 1.0);
    const double c[4] = {u(rng), u(rng), u(rng), u(rng)};
    auto p = [&](double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); };
    const double x = t[1] + (t[2] - t[1]) * 0.5 * (u(rng) + 1.0);
    double w[4];
    lagrange4(t, x, w);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += w[k] * p(t[k]);
    CHECK(std::abs(s - p(x)) < 1e-12);
  }
}

TEST_CASE("direction_stencil weights sum to one and converge at fourth order", "[geometry]") {
  auto fn = [](const RVec& v) { return std::exp(0.5 * v[0]) * (1.0 + v[1] * v[2]); };
  std::vector<double> worst;
  for (auto p : {AtlasParams{3, 16, 32}, AtlasParams{3, 32, 64}}) {
    const SphereAtlas at = build_atlas(p);
    std::mt19937_64 rng(23);
    double w = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const RVec xi = random_unit(rng, 3);
      const DirectionStencil st = direction_stencil(at, xi);
      REQUIRE(st.count == 16);
      double s = 0.0, v = 0.0;
      for (std::size_t k = 0; k < st.count; ++k) {
        s += st.weight[k];
        v += st.weight[k] * fn(at.directions[st.index[k]]);
      }
      CHECK(std::abs(s - 1.0) < 1e-13);
      w = std::max(w, std::abs(v - fn(xi)));
    }
    worst.push_back(w);
  }
  CHECK(worst[1] < 5e-5);
  CHECK(worst[0] / worst[1] > 10.0);
}

TEST_CASE("atlas CSV dump", "[geometry]") {
  const SphereAtlas at = build_atlas({3, 2, 4});
  std::ostringstream out;
  write_atlas_csv(at, out);
  const std::string s = out.str();
  CHECK(s.rfind("k,xi_1,xi_2,xi_3,weight,pair\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 9);
}

TEST_CASE("build_atlas rejects odd counts", "[geometry]") {
  CHECK_THROWS_AS(build_atlas({3, 7, 16}), Error);
  CHECK_THROWS_AS(build_atlas({3, 8, 15}), Error);
}

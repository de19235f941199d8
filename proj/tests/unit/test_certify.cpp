#include <catch_amalgamated.hpp>
#include <json.hpp>

#include "support.hpp"
#include "tensorray/certify.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

std::shared_ptr<const SphereAtlas> certify_atlas() {
  static const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 16, 32}));
  return at;
}

const PlaneGrid kPlane{2, 10.0, 32};

CertifyConfig small_config() {
  CertifyConfig c;
  c.points = 8;
  c.fourier_points = 8;
  return c;
}

Sinogram phantom_sinogram(const Phantom& ph) {
  return transform(PhantomSampler(ph), certify_atlas(), kPlane, LineRule::make(10.0, 81));
}

}  // namespace

TEST_CASE("parity defect of transforms and flipped data", "[certify]") {
  const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 4, 8}));
  for (int m = 0; m <= 2; ++m) {
    const Sinogram s = transform(PhantomSampler(random_phantom(3, m, 2, 111 + m)), at, PlaneGrid{2, 10.0, 16},
                                 LineRule::make(10.0, 81));
    CHECK(check_parity(s) <= 1e-10);
    // Relabelling the rank flips the expected sign, so the defect is about 2.
    Sinogram wrong = s;
    wrong.m = m + 1;
    CHECK(check_parity(wrong) > 1.0);
  }
  // A single antipodal pair with phi(-xi) = phi(xi) for odd m.
  Sinogram s = make_sinogram(at, PlaneGrid{2, 2.0, 4}, 1);
  s.at(0, 0) = 1.0;
  s.at(at->pairing[0], 0) = 1.0;
  CHECK(check_parity(s) == 2.0);
}

TEST_CASE("verdict names and exit codes", "[certify]") {
  CHECK(exit_code(Verdict::in_range_consistent) == 0);
  CHECK(exit_code(Verdict::inconsistent) == 1);
  CHECK(exit_code(Verdict::inconclusive) == 2);
  CHECK(to_string(Verdict::inconclusive) == "inconclusive");
}

TEST_CASE("certificate JSON carries the note and tolerances", "[certify]") {
  CertificateReport r;
  r.m = 1;
  r.john.push_back(ResidualStats{{{0, 1}, {1, 2}}, 1e-3, 1e-4, 8, 0, 0.25, 2});
  const auto j = nlohmann::json::parse(certificate_json(r));
  CHECK(j["verdict"] == "inconclusive");
  CHECK(j["note"].get<std::string>().find("not a proof") != std::string::npos);
  CHECK(j["john_residuals"][0]["tuple"][1][0] == 2);
  CHECK(j["tolerances"].contains("calibrated"));
}

TEST_CASE("zero sinogram is consistent", "[certify]") {
  const Sinogram zero = make_sinogram(certify_atlas(), kPlane, 1);
  const CertificateReport r = certify(zero, small_config());
  CHECK(r.parity_defect == 0.0);
  CHECK(r.recovery_misfit == 0.0);
  CHECK(r.calibrated);
  CHECK(r.verdict == Verdict::in_range_consistent);
}

TEST_CASE("clean transform passes and noisy data fails", "[certify]") {
  const Phantom ph = random_phantom(3, 1, 2, 121);
  const Sinogram clean = phantom_sinogram(ph);
  CertifyConfig cfg = small_config();
  const CertificateReport ok = certify(clean, cfg, &ph);
  INFO(certificate_json(ok));
  CHECK(ok.verdict == Verdict::in_range_consistent);
  REQUIRE(ok.h_trend.size() == 2);
  for (double r : ok.h_trend) CHECK(std::abs(r - 4.0) < 0.8);

  Sinogram noisy = clean;
  std::mt19937_64 rng(122);
  const double amp = 0.05 * clean.scale();
  for (std::size_t k = 0; k < noisy.atlas->size(); ++k) {
    const std::size_t kp = noisy.atlas->pairing[k];
    if (kp < k) continue;
    for (std::size_t j = 0; j < noisy.plane.size(); ++j) {
      const cplx e = amp * random_cplx(rng);
      noisy.at(k, j) += e;
      noisy.at(kp, j) -= e;  // keeps the odd parity intact
    }
  }
  CHECK(check_parity(noisy) <= 1e-10);
  const CertificateReport bad = certify(noisy, cfg);
  INFO(certificate_json(bad));
  CHECK(bad.verdict == Verdict::inconsistent);
}

TEST_CASE("weak residuals are reported per bump", "[certify]") {
  CertifyConfig cfg = small_config();
  cfg.weak = true;
  cfg.weak_bumps = 3;
  cfg.tau_john = 1.0;
  cfg.tau_fourier = 1.0;
  const CertificateReport r = certify(phantom_sinogram(gaussian_phantom(3, 0)), cfg);
  CHECK(r.weak_residuals.size() == 3);
  CHECK_FALSE(r.calibrated);
}

TEST_CASE("invalid tolerances are rejected", "[certify]") {
  CertifyConfig cfg;
  cfg.tau_parity = 0.0;
  CHECK_THROWS_AS(certify(make_sinogram(certify_atlas(), kPlane, 0), cfg), Error);
}

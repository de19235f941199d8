#include <catch_amalgamated.hpp>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "support.hpp"
#include "tensorray/io.hpp"

using namespace tensorray;
using namespace tensorray::testing;

namespace {

Sinogram small_sinogram(int m, std::uint64_t seed) {
  const auto at = std::make_shared<const SphereAtlas>(build_atlas({3, 2, 4}));
  Sinogram s = make_sinogram(at, PlaneGrid{2, 3.0, 8}, m);
  std::mt19937_64 rng(seed);
  for (cplx& v : s.values) v = random_cplx(rng);
  return s;
}

std::string bytes_of(const Sinogram& s) {
  std::ostringstream out;
  write_sinogram(s, out);
  return out.str();
}

}  // namespace

TEST_CASE("sinogram container round trip is bit-identical", "[io]") {
  for (int m = 0; m <= 2; ++m) {
    const Sinogram s = small_sinogram(m, 91 + m);
    const std::string a = bytes_of(s);
    CHECK(a.compare(0, 8, "TNSRRAY1") == 0);
    std::istringstream in(a);
    const Sinogram back = read_sinogram(in);
    CHECK(back.m == m);
    CHECK(back.plane.N == 8);
    CHECK(back.values == s.values);
    CHECK(bytes_of(back) == a);
  }
}

TEST_CASE("field containers round trip in both domains", "[io]") {
  const GridSpec grid{3, 4.0, 8};
  std::mt19937_64 rng(92);
  GridField f = GridField::zero(grid, 2);
  for (auto& c : f.comps)
    for (cplx& v : c) v = random_cplx(rng);
  std::stringstream a;
  write_field(f, a);
  const GridField g = read_field(a);
  CHECK(g.comps == f.comps);
  CHECK(g.m == 2);

  const SpectralField F = field_fft(f);
  std::stringstream b;
  write_spectral_field(F, b);
  const std::string text = b.str();
  CHECK(text.find("\"domain\":\"frequency\"") != std::string::npos);
  CHECK(read_spectral_field(b).comps == F.comps);
  // The domain flag is enforced.
  std::istringstream wrong(text);
  CHECK_THROWS_AS(read_field(wrong), Error);
}

TEST_CASE("spectral sinogram round trip", "[io]") {
  const SpectralSinogram ss = plane_fft_all(small_sinogram(1, 93), 2);
  std::stringstream buf;
  write_spectral_sinogram(ss, buf);
  const SpectralSinogram back = read_spectral_sinogram(buf);
  CHECK(back.values == ss.values);
  CHECK(back.plane.N == 16);
  std::istringstream as_space(buf.str());
  CHECK_THROWS_AS(read_sinogram(as_space), Error);
}

TEST_CASE("malformed containers are rejected", "[io]") {
  const std::string good = bytes_of(small_sinogram(1, 94));
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  CHECK_THROWS_AS(read_sinogram(a), Error);
  std::istringstream b(good.substr(0, good.size() - 5));
  CHECK_THROWS_AS(read_sinogram(b), Error);
  std::istringstream c(good + "x");
  CHECK_THROWS_AS(read_sinogram(c), Error);
  std::istringstream d(good.substr(0, 12));
  CHECK_THROWS_AS(read_sinogram(d), Error);
}

TEST_CASE("files and headers", "[io]") {
  const auto dir = std::filesystem::temp_directory_path() / "tensorray_test_io";
  std::filesystem::create_directories(dir);
  const Sinogram s = small_sinogram(2, 95);
  save(s, dir / "s.tnsr");
  CHECK(load_sinogram(dir / "s.tnsr").values == s.values);
  const auto h = nlohmann::json::parse(read_header(dir / "s.tnsr"));
  CHECK(h["kind"] == "sinogram");
  CHECK(h["parity"] == 1);
  CHECK(h["atlas"]["polar"] == 2);
  CHECK_THROWS_AS(load_field(dir / "s.tnsr"), Error);
  CHECK_THROWS_AS(load_sinogram(dir / "missing.tnsr"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sinogram CSV layout", "[io]") {
  const Sinogram s = small_sinogram(0, 96);
  std::ostringstream out;
  write_sinogram_csv(s, out);
  const std::string text = out.str();
  CHECK(text.rfind("k,u_1,u_2,re,im\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == s.values.size() + 1);
  CHECK(text.find("\n0,-3,-3,") != std::string::npos);
}

TEST_CASE("phantom JSON round trip and validation", "[io]") {
  for (int m = 0; m <= 2; ++m) {
    const Phantom ph = random_phantom(3, m, 3, 97 + m);
    const Phantom back = phantom_from_json(phantom_to_json(ph));
    CHECK(back.center == ph.center);
    CHECK(phantom_to_json(back) == phantom_to_json(ph));
    std::mt19937_64 rng(98);
    const RVec x = random_vec(rng, 3);
    const SymTensor a = eval(ph, x), b = eval(back, x);
    for (std::size_t k = 0; k < a.c.size(); ++k) CHECK(a.c[k] == b.c[k]);
  }
  CHECK_THROWS_AS(phantom_from_json(R"({"n": 3, "m": 0, "colour": 1})"), Error);
  CHECK_THROWS_AS(phantom_from_json(R"({"n": 3, "m": 1, "components": [{"index": [4], "monomials": []}]})"), Error);
  CHECK_THROWS_AS(phantom_from_json(R"({"n": 3, "m": 0, "components": [{"index": [],
      "monomials": [{"powers": [7, 0, 0], "coeff_re": 1}]}]})"),
                  Error);
  CHECK_THROWS_AS(phantom_from_json("[1, 2]"), Error);
  const Phantom sparse = phantom_from_json(R"({"n": 3, "m": 1, "components": [{"index": [2],
      "monomials": [{"powers": [0, 0, 0], "coeff_re": 2.0}]}]})");
  CHECK(sparse.comps[0].terms.empty());
  CHECK(sparse.comps[1].terms.size() == 1);
}

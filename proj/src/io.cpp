#include "tensorray/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

constexpr std::uint64_t kMaxHeader = 1 << 20;

void write_container(std::ostream& out, const ordered_json& header, std::span<const cplx> values) {
  const std::string h = header.dump();
  const std::uint64_t len = h.size();
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  // std::complex<double> is layout-compatible with double[2].
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 16));
  require(static_cast<bool>(out), "write: stream failure");
}

json read_header_json(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  require(in && std::memcmp(magic, kMagic, 8) == 0, "read: not a TNSRRAY1 container");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  require(in && len > 0 && len <= kMaxHeader, "read: bad header length");
  std::string h(len, '\0');
  in.read(h.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), "read: truncated header");
  json j = json::parse(h, nullptr, false);
  require(!j.is_discarded() && j.is_object(), "read: header is not a JSON object");
  return j;
}

void read_payload(std::istream& in, cplx* dst, std::size_t count) {
  in.read(reinterpret_cast<char*>(static_cast<void*>(dst)), static_cast<std::streamsize>(count * 16));
  require(static_cast<bool>(in), "read: truncated payload");
  in.peek();
  require(in.eof(), "read: trailing bytes after payload");
}

void expect(const json& h, const char* kind, const char* domain) {
  require(h.value("kind", "") == kind, std::string("read: expected kind ") + kind);
  require(h.value("domain", "") == domain, std::string("read: expected domain ") + domain);
}

template <class T>
T field_of(const json& h, const char* key) {
  require(h.contains(key), std::string("read: header lacks ") + key);
  return h.at(key).get<T>();
}

ordered_json sinogram_header(const char* domain, const SphereAtlas& at, const PlaneGrid& plane, int m,
                             std::size_t count) {
  ordered_json h;
  h["kind"] = "sinogram";
  h["domain"] = domain;
  h["n"] = at.n;
  h["m"] = m;
  h["atlas"] = {{"n", at.params.n}, {"polar", at.params.polar}, {"azimuth", at.params.azimuth}};
  h["L"] = plane.L;
  h["N"] = plane.N;
  h["parity"] = m % 2 == 0 ? 1 : -1;
  h["count"] = count;
  return h;
}

struct SinogramShape {
  std::shared_ptr<const SphereAtlas> atlas;
  PlaneGrid plane;
  int m;
};

SinogramShape read_sinogram_shape(const json& h) {
  const json& a = h.at("atlas");
  AtlasParams p{field_of<int>(a, "n"), field_of<int>(a, "polar"), field_of<int>(a, "azimuth")};
  SinogramShape s;
  s.atlas = std::make_shared<const SphereAtlas>(build_atlas(p));
  s.plane.dim = p.n - 1;
  s.plane.L = field_of<double>(h, "L");
  s.plane.N = field_of<int>(h, "N");
  s.m = field_of<int>(h, "m");
  require(field_of<int>(h, "n") == p.n, "read: atlas dimension mismatch");
  require(s.m >= 0 && s.plane.N > 0 && s.plane.L > 0.0, "read: bad sinogram shape");
  require(field_of<int>(h, "parity") == (s.m % 2 == 0 ? 1 : -1), "read: parity flag contradicts m");
  require(field_of<std::size_t>(h, "count") == s.atlas->size() * s.plane.size(), "read: count mismatch");
  return s;
}

ordered_json field_header(const char* domain, const GridSpec& g, int m) {
  ordered_json h;
  h["kind"] = "field";
  h["domain"] = domain;
  h["n"] = g.n;
  h["m"] = m;
  h["L"] = g.L;
  h["N"] = g.N;
  h["components"] = sym_dim(g.n, m);
  h["count"] = sym_dim(g.n, m) * g.size();
  return h;
}

GridSpec read_field_shape(const json& h, int& m) {
  GridSpec g{field_of<int>(h, "n"), field_of<double>(h, "L"), field_of<int>(h, "N")};
  m = field_of<int>(h, "m");
  require(g.n >= 1 && m >= 0 && g.N > 0 && g.L > 0.0, "read: bad field shape");
  require(field_of<std::size_t>(h, "count") == sym_dim(g.n, m) * g.size(), "read: count mismatch");
  return g;
}

template <class F>
void write_components(std::ostream& out, const ordered_json& h, const F& f) {
  CVec flat;
  for (const auto& c : f.comps) flat.insert(flat.end(), c.begin(), c.end());
  write_container(out, h, flat);
}

template <class F>
void read_components(std::istream& in, F& f) {
  const std::size_t per = f.grid.size();
  CVec flat(per * f.comps.size());
  read_payload(in, flat.data(), flat.size());
  for (std::size_t c = 0; c < f.comps.size(); ++c)
    f.comps[c].assign(flat.begin() + c * per, flat.begin() + (c + 1) * per);
}

}  // namespace

void write_sinogram(const Sinogram& s, std::ostream& out) {
  write_container(out, sinogram_header("space", *s.atlas, s.plane, s.m, s.values.size()), s.values);
}

Sinogram read_sinogram(std::istream& in) {
  const json h = read_header_json(in);
  expect(h, "sinogram", "space");
  const SinogramShape sh = read_sinogram_shape(h);
  Sinogram s = make_sinogram(sh.atlas, sh.plane, sh.m);
  read_payload(in, s.values.data(), s.values.size());
  return s;
}

void write_spectral_sinogram(const SpectralSinogram& s, std::ostream& out) {
  write_container(out, sinogram_header("frequency", *s.atlas, s.plane, s.m, s.values.size()), s.values);
}

SpectralSinogram read_spectral_sinogram(std::istream& in) {
  const json h = read_header_json(in);
  expect(h, "sinogram", "frequency");
  const SinogramShape sh = read_sinogram_shape(h);
  SpectralSinogram s{sh.atlas, sh.plane, sh.m, CVec(sh.atlas->size() * sh.plane.size())};
  read_payload(in, s.values.data(), s.values.size());
  return s;
}

void write_field(const GridField& f, std::ostream& out) {
  write_components(out, field_header("space", f.grid, f.m), f);
}

GridField read_field(std::istream& in) {
  const json h = read_header_json(in);
  expect(h, "field", "space");
  int m = 0;
  const GridSpec g = read_field_shape(h, m);
  GridField f = GridField::zero(g, m);
  read_components(in, f);
  return f;
}

void write_spectral_field(const SpectralField& f, std::ostream& out) {
  write_components(out, field_header("frequency", f.grid, f.m), f);
}

SpectralField read_spectral_field(std::istream& in) {
  const json h = read_header_json(in);
  expect(h, "field", "frequency");
  int m = 0;
  const GridSpec g = read_field_shape(h, m);
  SpectralField f = SpectralField::zero(g, m);
  read_components(in, f);
  return f;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + p.string());
  return in;
}

}  // namespace

void save(const Sinogram& s, const std::filesystem::path& p) {
  auto out = open_out(p);
  write_sinogram(s, out);
}

void save(const GridField& f, const std::filesystem::path& p) {
  auto out = open_out(p);
  write_field(f, out);
}

Sinogram load_sinogram(const std::filesystem::path& p) {
  auto in = open_in(p);
  return read_sinogram(in);
}

GridField load_field(const std::filesystem::path& p) {
  auto in = open_in(p);
  return read_field(in);
}

std::string read_header(const std::filesystem::path& p) {
  auto in = open_in(p);
  return read_header_json(in).dump();
}

void write_sinogram_csv(const Sinogram& s, std::ostream& out) {
  require(s.values.size() <= (std::size_t{1} << 20), "write_sinogram_csv: too many samples for CSV");
  const int dim = s.plane.dim;
  out << "k";
  for (int a = 0; a < dim; ++a) out << ",u_" << a + 1;
  out << ",re,im\n";
  char buf[64];
  std::vector<int> j(dim);
  for (std::size_t k = 0; k < s.atlas->size(); ++k) {
    for (std::size_t f = 0; f < s.plane.size(); ++f) {
      s.plane.unflat(f, j.data());
      out << k;
      for (int a = 0; a < dim; ++a) {
        std::snprintf(buf, sizeof buf, ",%.17g", s.plane.coord(j[a]));
        out << buf;
      }
      const cplx v = s.at(k, f);
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", v.real(), v.imag());
      out << buf;
    }
  }
}

std::string phantom_to_json(const Phantom& ph) {
  ph.validate();
  const SymBasis& b = sym_basis(ph.n, ph.m);
  ordered_json j;
  j["n"] = ph.n;
  j["m"] = ph.m;
  j["sigma"] = ph.sigma;
  j["center"] = ph.center;
  j["components"] = ordered_json::array();
  for (std::size_t c = 0; c < b.size(); ++c) {
    if (ph.comps[c].terms.empty()) continue;
    ordered_json comp;
    std::vector<int> idx;
    for (int e : b.index(c).entries) idx.push_back(e + 1);
    comp["index"] = idx;
    comp["monomials"] = ordered_json::array();
    for (const auto& t : ph.comps[c].terms)
      comp["monomials"].push_back({{"powers", t.powers}, {"coeff_re", t.coeff.real()}, {"coeff_im", t.coeff.imag()}});
    j["components"].push_back(std::move(comp));
  }
  return j.dump(2);
}

Phantom phantom_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  require(!j.is_discarded() && j.is_object(), "phantom: not a JSON object");
  for (const auto& [key, _] : j.items())
    require(key == "n" || key == "m" || key == "sigma" || key == "center" || key == "components",
            "phantom: unknown key " + key);
  const int n = field_of<int>(j, "n");
  const int m = field_of<int>(j, "m");
  require(n >= 2 && n <= 5 && m >= 0, "phantom: unsupported n or m");
  Phantom ph = Phantom::zero(n, m, j.value("sigma", 1.0));
  if (j.contains("center")) ph.center = j.at("center").get<RVec>();
  const SymBasis& b = sym_basis(n, m);
  std::vector<bool> seen(b.size(), false);
  for (const auto& comp : j.value("components", json::array())) {
    const auto idx = field_of<std::vector<int>>(comp, "index");
    require(static_cast<int>(idx.size()) == m, "phantom: component index must have m entries");
    std::vector<int> zero_based;
    for (int e : idx) {
      require(e >= 1 && e <= n, "phantom: component index out of range 1..n");
      zero_based.push_back(e - 1);
    }
    const std::size_t pos = b.position(zero_based);
    require(!seen[pos], "phantom: component listed twice");
    seen[pos] = true;
    for (const auto& mono : field_of<json>(comp, "monomials")) {
      Monomial t;
      t.powers = field_of<std::vector<int>>(mono, "powers");
      t.coeff = cplx(mono.value("coeff_re", 0.0), mono.value("coeff_im", 0.0));
      ph.comps[pos].terms.push_back(std::move(t));
    }
    ph.comps[pos].canonicalize();
  }
  ph.validate();
  return ph;
}

}  // namespace tensorray

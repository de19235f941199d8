#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tensorray/grid_field.hpp"
#include "tensorray/phantoms.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

namespace tensorray {

/// Binary container: the 8 magic bytes "TNSRRAY1", the JSON header length as
/// a little-endian uint64, the JSON header, then little-endian float64
/// (re, im) pairs in the object's storage order. Headers carry
/// domain "space" or "frequency" and kind "sinogram" or "field".
inline constexpr char kMagic[9] = "TNSRRAY1";

void write_sinogram(const Sinogram& s, std::ostream& out);
Sinogram read_sinogram(std::istream& in);
void write_spectral_sinogram(const SpectralSinogram& s, std::ostream& out);
SpectralSinogram read_spectral_sinogram(std::istream& in);
void write_field(const GridField& f, std::ostream& out);
GridField read_field(std::istream& in);
void write_spectral_field(const SpectralField& f, std::ostream& out);
SpectralField read_spectral_field(std::istream& in);

void save(const Sinogram& s, const std::filesystem::path& p);
void save(const GridField& f, const std::filesystem::path& p);
Sinogram load_sinogram(const std::filesystem::path& p);
GridField load_field(const std::filesystem::path& p);

/// Header of a container file without its payload.
std::string read_header(const std::filesystem::path& p);

/// CSV with columns k, u_1..u_{n-1}, re, im. Refuses more than 2^20 rows.
void write_sinogram_csv(const Sinogram& s, std::ostream& out);

/// {n, m, sigma, center, components: [{index: [1-based axes], monomials:
/// [{powers, coeff_re, coeff_im}]}]}. Components absent from the JSON are zero.
std::string phantom_to_json(const Phantom& ph);
Phantom phantom_from_json(const std::string& text);

}  // namespace tensorray

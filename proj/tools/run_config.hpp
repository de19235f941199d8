#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensorray/certify.hpp"
#include "tensorray/geometry.hpp"
#include "tensorray/grid_field.hpp"
#include "tensorray/operators.hpp"
#include "tensorray/phantoms.hpp"

namespace tensorray::cli {

inline constexpr const char* kSchema = "tensorray.run/1";

struct PhantomConfig {
  /// gaussian | random | potential | file
  std::string kind = "random";
  int degree = 2;
  double sigma = 1.0;
  bool zero_mean = false;
  std::string path;  // kind == file
};

struct ConvergenceConfig {
  double h0 = 0.08;
  int halvings = 3;
  std::size_t points = 8;
  double radius = 1.5;
  /// Amplitude of the seeded non-range term, in units of the phantom scale.
  double perturbation = 0.0;
};

struct RunConfig {
  int n = 3;
  int m = 1;
  PhantomConfig phantom;
  std::string input;  // sinogram file for certify and reconstruct
  AtlasParams atlas{3, 16, 32};
  PlaneGrid plane{2, 10.0, 48};
  double t_max = 10.0;
  int n_t = 81;
  GridSpec grid{3, 10.0, 48};
  StencilSpec stencil{0.02, 0.02, 2, EvalPath::exact};
  int r = 0;
  std::vector<std::pair<double, double>> sweep{{0.0, 0.0}};  // (s, t)
  /// default | ordered | sampled
  std::string tuple_policy = "default";
  std::size_t tuple_count = 64;
  CertifyConfig certify;
  int pad = 2;
  ConvergenceConfig convergence;
  std::string output = ".";
  std::uint64_t seed = 1;
  unsigned workers = 0;

  Phantom make_phantom() const;
  LineRule line_rule() const { return LineRule::make(t_max, n_t); }
  std::vector<IndexTuple> tuples() const;
};

/// Parses and validates a config document; unknown keys and out-of-range
/// values raise Error naming the offending key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& c);

}  // namespace tensorray::cli

#include "run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "tensorray/io.hpp"

namespace tensorray::cli {

namespace {

using nlohmann::json;

/// Reads keys of one JSON object and rejects any key that was never read.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j.is_object(), where_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items())
      require(seen_.count(key) > 0, "config: unknown key " + where_ + "." + key);
  }

  template <class T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      dst = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error("config: " + where_ + "." + key + " has the wrong type");
    }
  }

  /// Nested section, or nullptr when absent.
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw Error("config: " + key + " " + what);
}

}  // namespace

Phantom RunConfig::make_phantom() const {
  if (phantom.kind == "gaussian") return gaussian_phantom(n, m, phantom.sigma);
  if (phantom.kind == "random") return random_phantom(n, m, phantom.degree, seed, phantom.zero_mean, phantom.sigma);
  if (phantom.kind == "potential") {
    require(m >= 1, "phantom: potential fields need m >= 1");
    return potential_field(random_phantom(n, m - 1, phantom.degree, seed, false, phantom.sigma));
  }
  std::ifstream in(phantom.path);
  require(static_cast<bool>(in), "phantom: cannot read " + phantom.path);
  std::stringstream ss;
  ss << in.rdbuf();
  Phantom ph = phantom_from_json(ss.str());
  require(ph.n == n && ph.m == m, "phantom: file n/m do not match the config");
  return ph;
}

std::vector<IndexTuple> RunConfig::tuples() const {
  if (tuple_policy == "ordered") return tuples_ordered(n, m);
  if (tuple_policy == "sampled") return tuples_sampled(n, m, tuple_count, seed);
  return default_tuples(n, m, seed);
}

RunConfig parse_config(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), "config: not valid JSON");
  RunConfig c;
  {
    Section top(j, "config");
    std::string schema;
    top.get("schema", schema);
    require(schema == kSchema, std::string("config: schema must be \"") + kSchema + "\"");
    top.get("n", c.n);
    top.get("m", c.m);
    top.get("input", c.input);
    top.get("output", c.output);
    top.get("seed", c.seed);
    top.get("workers", c.workers);
    top.get("pad", c.pad);
    if (const json* p = top.child("phantom")) {
      Section s(*p, "phantom");
      s.get("kind", c.phantom.kind);
      s.get("degree", c.phantom.degree);
      s.get("sigma", c.phantom.sigma);
      s.get("zero_mean", c.phantom.zero_mean);
      s.get("path", c.phantom.path);
    }
    if (const json* p = top.child("atlas")) {
      Section s(*p, "atlas");
      s.get("polar", c.atlas.polar);
      s.get("azimuth", c.atlas.azimuth);
    }
    if (const json* p = top.child("plane")) {
      Section s(*p, "plane");
      s.get("L", c.plane.L);
      s.get("N", c.plane.N);
    }
    if (const json* p = top.child("grid")) {
      Section s(*p, "grid");
      s.get("L", c.grid.L);
      s.get("N", c.grid.N);
    }
    if (const json* p = top.child("line_rule")) {
      Section s(*p, "line_rule");
      s.get("t_max", c.t_max);
      s.get("n_t", c.n_t);
    }
    if (const json* p = top.child("stencil")) {
      Section s(*p, "stencil");
      s.get("h", c.stencil.hx);
      c.stencil.hxi = c.stencil.hx;
      s.get("h_xi", c.stencil.hxi);
      s.get("order", c.stencil.order);
      std::string path = "exact";
      s.get("path", path);
      check(path == "exact" || path == "interpolated", "stencil.path", "must be exact or interpolated");
      c.stencil.path = path == "exact" ? EvalPath::exact : EvalPath::interpolated;
    }
    if (const json* p = top.child("weights")) {
      Section s(*p, "weights");
      s.get("r", c.r);
      std::vector<std::vector<double>> sweep;
      s.get("sweep", sweep);
      if (p->contains("sweep")) {
        c.sweep.clear();
        for (const auto& row : sweep) {
          check(row.size() == 2, "weights.sweep", "rows must be [s, t]");
          c.sweep.emplace_back(row[0], row[1]);
        }
      }
    }
    if (const json* p = top.child("tuples")) {
      Section s(*p, "tuples");
      s.get("policy", c.tuple_policy);
      s.get("count", c.tuple_count);
    }
    if (const json* p = top.child("tolerances")) {
      Section s(*p, "tolerances");
      s.get("parity", c.certify.tau_parity);
      s.get("john", c.certify.tau_john);
      s.get("fourier", c.certify.tau_fourier);
      s.get("recovery", c.certify.tau_recovery);
    }
    if (const json* p = top.child("certify")) {
      Section s(*p, "certify");
      s.get("points", c.certify.points);
      s.get("radius", c.certify.radius);
      s.get("h", c.certify.stencil.hx);
      c.certify.stencil.hxi = c.certify.stencil.hx;
      s.get("order", c.certify.stencil.order);
      s.get("fourier_h", c.certify.fourier_h);
      s.get("fourier_points", c.certify.fourier_points);
      s.get("fourier_r_min", c.certify.fourier_r_min);
      s.get("fourier_r_max", c.certify.fourier_r_max);
      s.get("weak", c.certify.weak);
      s.get("weak_bumps", c.certify.weak_bumps);
    }
    if (const json* p = top.child("convergence")) {
      Section s(*p, "convergence");
      s.get("h0", c.convergence.h0);
      s.get("halvings", c.convergence.halvings);
      s.get("points", c.convergence.points);
      s.get("radius", c.convergence.radius);
      s.get("perturbation", c.convergence.perturbation);
    }
  }
  c.atlas.n = c.n;
  c.plane.dim = c.n - 1;
  c.grid.n = c.n;
  c.certify.pad = c.pad;
  c.certify.seed = c.seed;
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const RunConfig& c) {
  check(c.n >= 2 && c.n <= 4, "n", "must be 2, 3 or 4");
  check(c.m >= 0 && c.m <= 4, "m", "must be in 0..4");
  const auto& p = c.phantom;
  check(p.kind == "gaussian" || p.kind == "random" || p.kind == "potential" || p.kind == "file", "phantom.kind",
        "must be gaussian, random, potential or file");
  check(p.degree >= 0 && p.degree <= kMaxPhantomDegree, "phantom.degree", "must be in 0..6");
  check(p.sigma > 0.0, "phantom.sigma", "must be positive");
  check(p.kind != "file" || !p.path.empty(), "phantom.path", "is required for kind file");
  check(p.kind != "potential" || (c.m >= 1 && p.degree + 1 <= kMaxPhantomDegree), "phantom.kind",
        "potential needs m >= 1 and degree <= 5");
  check(c.atlas.polar >= 2 && c.atlas.polar % 2 == 0, "atlas.polar", "must be even and >= 2");
  check(c.atlas.azimuth >= 2 && c.atlas.azimuth % 2 == 0, "atlas.azimuth", "must be even and >= 2");
  check(c.plane.L > 0.0, "plane.L", "must be positive");
  check(c.plane.N >= 8 && c.plane.N % 2 == 0 && c.plane.N <= 512, "plane.N", "must be even in 8..512");
  check(c.grid.L > 0.0, "grid.L", "must be positive");
  check(c.grid.N >= 8 && c.grid.N % 2 == 0 && c.grid.N <= 96, "grid.N", "must be even in 8..96");
  check(c.t_max > 0.0, "line_rule.t_max", "must be positive");
  check(c.n_t >= 3, "line_rule.n_t", "must be >= 3");
  check(c.stencil.hx > 0.0 && c.stencil.hxi > 0.0, "stencil.h", "must be positive");
  check(c.stencil.order == 2 || c.stencil.order == 4, "stencil.order", "must be 2 or 4");
  check(c.r >= 0, "weights.r", "must be a non-negative integer");
  check(!c.sweep.empty(), "weights.sweep", "must not be empty");
  // Open interval (-(n-1)/2, (n-2)/2) for the range and norm-identity pipelines.
  const double t_lo = -(c.n - 1) / 2.0, t_hi = (c.n - 2) / 2.0;
  for (const auto& [s, t] : c.sweep) {
    check(std::isfinite(s), "weights.sweep", "s must be finite");
    check(t > t_lo && t < t_hi, "weights.sweep",
          "t must lie in the open interval (" + std::to_string(t_lo) + ", " + std::to_string(t_hi) + ")");
  }
  check(c.tuple_policy == "default" || c.tuple_policy == "ordered" || c.tuple_policy == "sampled", "tuples.policy",
        "must be default, ordered or sampled");
  check(c.tuple_count >= 1, "tuples.count", "must be positive");
  const auto& k = c.certify;
  check(k.tau_parity > 0.0, "tolerances.parity", "must be positive");
  check(k.tau_recovery > 0.0, "tolerances.recovery", "must be positive");
  check(k.tau_john >= 0.0, "tolerances.john", "must be >= 0 (0 calibrates)");
  check(k.tau_fourier >= 0.0, "tolerances.fourier", "must be >= 0 (0 calibrates)");
  check(k.points >= 1 && k.fourier_points >= 1, "certify.points", "must be positive");
  check(k.radius > 0.0, "certify.radius", "must be positive");
  check(k.stencil.hx > 0.0, "certify.h", "must be positive");
  check(k.stencil.order == 2 || k.stencil.order == 4, "certify.order", "must be 2 or 4");
  check(k.fourier_h > 0.0, "certify.fourier_h", "must be positive");
  check(k.fourier_r_min > 0.0 && k.fourier_r_max > k.fourier_r_min, "certify.fourier_r_min",
        "needs 0 < r_min < r_max");
  check(c.pad >= 1 && c.pad <= 4, "pad", "must be in 1..4");
  const auto& v = c.convergence;
  check(v.h0 > 0.0, "convergence.h0", "must be positive");
  check(v.halvings >= 1 && v.halvings <= 6, "convergence.halvings", "must be in 1..6");
  check(v.points >= 1, "convergence.points", "must be positive");
  check(v.radius > 0.0, "convergence.radius", "must be positive");
  check(v.perturbation >= 0.0, "convergence.perturbation", "must be >= 0");
  check(c.workers <= 1024, "workers", "must be <= 1024");
}

}  // namespace tensorray::cli

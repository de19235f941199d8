#include "tensorray/metrics.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <optional>

#include "tensorray/parallel.hpp"
#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

namespace {

/// Upper incomplete gamma for any real a when x > 0, by the downward
/// recurrence Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a.
double upper_gamma(double a, double x) {
  if (a > 0.0) return boost::math::tgamma(a, x);
  if (a == 0.0) return boost::math::expint(1, x);
  return (upper_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

bool near_integer(double v, double tol = 1e-12) { return std::abs(v - std::round(v)) <= tol; }

/// sum over nodes of W(|v|) a conj(b) step^dim, nodes at (j - N/2) step,
/// W(r) = r^{2t} (1 + r^2)^{s-t}, origin handled by origin_weight.
cplx weighted_plane_sum(const cplx* a, const cplx* b, int N, int dim, double step, double s, double t, double w0) {
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(N);
  const double cell = std::pow(step, dim);
  cplx acc = 0.0;
  int j[3];
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t g = f;
    double r2 = 0.0;
    for (int d = dim - 1; d >= 0; --d) {
      j[d] = static_cast<int>(g % N);
      g /= N;
      const double v = (j[d] - N / 2) * step;
      r2 += v * v;
    }
    const cplx ab = a[f] * std::conj(b[f]);
    if (r2 == 0.0) {
      acc += w0 * ab;
      continue;
    }
    acc += std::pow(r2, t) * std::pow(1.0 + r2, s - t) * cell * ab;
  }
  return acc;
}

void check_weight(int d, double t) {
  require(2.0 * t > -d, "weighted norm: t must exceed -d/2 for the weight to be integrable");
}

cplx atlas_sum(const SphereAtlas& at, const std::function<cplx(std::size_t)>& per_direction) {
  CVec parts(at.size());
  parallel_for(at.size(), [&](std::size_t k) { parts[k] = at.weights[k] * per_direction(k); });
  return pairwise_sum<cplx>(parts.begin(), parts.end());
}

double double_factorial_odd(int m) {  // (2m - 1)!!
  double v = 1.0;
  for (int k = 1; k <= 2 * m - 1; k += 2) v *= k;
  return v;
}

struct CmnEntry {
  double value;
  double spread;
};

CmnEntry cmn_compute(int n, int m) {
  require(n >= 3 && n <= 5, "compute_cmn: implemented for 3 <= n <= 5");
  require(m >= 0, "compute_cmn: negative rank");
  const int p = n - 1;  // the great subsphere lives in span(e_1..e_{n-1})
  std::vector<RVec> nodes;
  RVec weights;
  if (p == 2) {
    const int Q = 4 * m + 16;
    for (int q = 0; q < Q; ++q) {
      const double th = 2.0 * kPi * q / Q;
      nodes.push_back({std::cos(th), std::sin(th)});
      weights.push_back(2.0 * kPi / Q);
    }
  } else {
    const int P = 2 * (m + 4);
    const SphereAtlas at = build_atlas({p, P, 2 * P});
    nodes = at.directions;
    weights = at.weights;
  }
  // Index multisets of size 2m over the subsphere axes with every axis
  // repeated an even number of times; these have nonzero epsilon^m components.
  std::vector<std::vector<int>> choices;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      choices.push_back(cur);
      return;
    }
    for (int a = start; a < p; ++a)
      for (int rep = 2; rep <= left; rep += 2) {
        for (int r = 0; r < rep; ++r) cur.push_back(a);
        rec(a + 1, left - rep);
        for (int r = 0; r < rep; ++r) cur.pop_back();
      }
  };
  rec(0, 2 * m);
  std::vector<double> ratios;
  for (const auto& idx : choices) {
    double moment = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      double v = weights[q];
      for (int a : idx) v *= nodes[q][a];
      moment += v;
    }
    // epsilon restricted to the subsphere plane is the identity there, so
    // the symmetrized component is the fraction of matchings pairing equal labels.
    double e = 1.0;
    for (int a = 0; a < p; ++a) {
      const int c = static_cast<int>(std::count(idx.begin(), idx.end(), a));
      e *= double_factorial_odd(c / 2);
    }
    e /= double_factorial_odd(m);
    ratios.push_back(moment / e);
  }
  CmnEntry out{ratios.front(), 0.0};
  for (double r : ratios) out.spread = std::max(out.spread, std::abs(r - out.value) / out.value);
  require(out.spread <= 1e-8, "compute_cmn: index choices disagree; subsphere quadrature failed");
  return out;
}

/// Optional on-disk cache in $TENSORRAY_CACHE/cmn.json, keyed "n,m". Entries
/// are only ever written from cmn_compute; unreadable files are ignored.
std::optional<CmnEntry> cmn_disk_lookup(const std::filesystem::path& file, const std::string& key) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains(key)) return std::nullopt;
  const auto& e = j[key];
  if (!e.contains("value") || !e.contains("spread") || !e["value"].is_number()) return std::nullopt;
  return CmnEntry{e["value"].get<double>(), e["spread"].get<double>()};
}

void cmn_disk_store(const std::filesystem::path& file, const std::string& key, const CmnEntry& c) {
  nlohmann::json j = nlohmann::json::object();
  if (std::ifstream in(file); in) {
    auto old = nlohmann::json::parse(in, nullptr, false);
    if (!old.is_discarded() && old.is_object()) j = std::move(old);
  }
  j[key] = {{"value", c.value}, {"spread", c.spread}};
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file);
  if (out) out << j.dump(2) << "\n";
}

const CmnEntry& cmn_cached(int n, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, CmnEntry> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({n, m});
  if (it != cache.end()) return it->second;
  const char* dir = std::getenv("TENSORRAY_CACHE");
  const std::string key = std::to_string(n) + "," + std::to_string(m);
  std::optional<CmnEntry> entry;
  if (dir && *dir) entry = cmn_disk_lookup(std::filesystem::path(dir) / "cmn.json", key);
  if (!entry) {
    entry = cmn_compute(n, m);
    if (dir && *dir) cmn_disk_store(std::filesystem::path(dir) / "cmn.json", key, *entry);
  }
  return cache.emplace(std::make_pair(n, m), *entry).first->second;
}

}  // namespace

double hst_prefactor(int n) { return std::tgamma(0.5 * (n - 1)) / (4.0 * std::pow(kPi, 0.5 * (n + 1))); }

double epstein_zeta(int d, double s) {
  require(d >= 1 && std::abs(s - d) > 1e-12, "epstein_zeta: pole at s = d");
  if (std::abs(s) <= 1e-14) return -1.0;
  if (s < 0.0 && near_integer(0.5 * s)) return 0.0;  // trivial zeros
  // Riemann's splitting of the theta integral at t = 1 (Z^d is self-dual).
  const int K = 5;
  std::vector<int> k(d, -K);
  double sum = 0.0;
  for (;;) {
    long r2 = 0;
    for (int v : k) r2 += static_cast<long>(v) * v;
    if (r2 > 0 && r2 <= K * K) {
      const double x = kPi * static_cast<double>(r2);
      sum += upper_gamma(0.5 * s, x) * std::pow(x, -0.5 * s) + upper_gamma(0.5 * (d - s), x) * std::pow(x, -0.5 * (d - s));
    }
    int a = 0;
    while (a < d && ++k[a] > K) k[a++] = -K;
    if (a == d) break;
  }
  const double lambda = sum + 2.0 / (s - d) - 2.0 / s;
  return lambda * std::pow(kPi, 0.5 * s) / std::tgamma(0.5 * s);
}

double origin_weight(int d, double alpha, double step) {
  require(alpha > -d, "origin_weight: weight not integrable");
  return -epstein_zeta(d, -alpha) * std::pow(step, d + alpha);
}

cplx hst_inner(const SpectralSinogram& a, const SpectralSinogram& b, double s, double t) {
  require(a.atlas == b.atlas || (a.atlas->size() == b.atlas->size() && a.atlas->n == b.atlas->n),
          "hst_inner: atlas mismatch");
  require(a.plane.N == b.plane.N && a.plane.L == b.plane.L && a.plane.dim == b.plane.dim, "hst_inner: grid mismatch");
  const int n = a.atlas->n;
  check_weight(n - 1, t);
  const double w0 = origin_weight(a.plane.dim, 2.0 * t, a.dv());
  const cplx sum = atlas_sum(*a.atlas, [&](std::size_t k) {
    return weighted_plane_sum(a.values.data() + a.offset(k), b.values.data() + b.offset(k), a.plane.N, a.plane.dim,
                              a.dv(), s, t, w0);
  });
  return hst_prefactor(n) * sum;
}

double hst_norm(const SpectralSinogram& a, double s, double t) {
  return std::sqrt(std::max(0.0, hst_inner(a, a, s, t).real()));
}

double l2st_norm(const Sinogram& phi, double s, double t) {
  const int n = phi.n();
  check_weight(n - 1, t);
  require(phi.plane.N % 2 == 0, "l2st_norm: plane size must be even");
  const double w0 = origin_weight(phi.plane.dim, 2.0 * t, phi.plane.h());
  const cplx sum = atlas_sum(*phi.atlas, [&](std::size_t k) {
    const cplx* v = phi.values.data() + phi.offset(k);
    return weighted_plane_sum(v, v, phi.plane.N, phi.plane.dim, phi.plane.h(), s, t, w0);
  });
  return std::sqrt(std::max(0.0, hst_prefactor(n) * sum.real()));
}

double l2st_norm(const SpectralSinogram& phi, double s, double t) { return hst_norm(phi, s, t); }

Sinogram delta_xi_sinogram(const PsiSource& psi, std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane,
                           int l, const StencilSpec& st) {
  Sinogram out = make_sinogram(std::move(atlas), plane, psi.m());
  const SphereAtlas& at = *out.atlas;
  parallel_for(at.size(), [&](std::size_t k) {
    for (std::size_t j = 0; j < plane.size(); ++j) {
      const RVec x = plane.embed(j, at.frames[k]);
      const auto v = apply_delta_xi(psi, l, x.data(), at.directions[k].data(), st);
      require(v.has_value(), "delta_xi_sinogram: stencil left the evaluable window");
      out.at(k, j) = *v;
    }
  });
  return out;
}

HrstResult hrst_norm(const Sinogram& phi, const PsiSource& psi, const WeightParams& w, int pad,
                     const StencilSpec& st) {
  require(w.r >= 0, "hrst_norm: r must be non-negative");
  const SpectralSinogram base = plane_fft_all(phi, pad);
  HrstResult res;
  double binom = 1.0;
  for (int l = 0; l <= w.r; ++l) {
    if (l == 0) {
      res.square += hst_inner(base, base, w.s, w.t).real();
    } else {
      const Sinogram d = delta_xi_sinogram(psi, phi.atlas, phi.plane, l, st);
      res.square += binom * hst_inner(plane_fft_all(d, pad), base, w.s, w.t).real();
    }
    binom = binom * (w.r - l) / (l + 1);
  }
  res.norm = res.square >= 0.0 ? std::sqrt(res.square) : std::nan("");
  return res;
}

double compute_cmn(int n, int m) { return cmn_cached(n, m).value; }

double cmn_spread(int n, int m) { return cmn_cached(n, m).spread; }

double fourier_side_energy(const SpectralField& F, double s, double t) {
  const int n = F.grid.n;
  const int m = F.m;
  check_weight(n, t);
  const double c = compute_cmn(n, m);
  const GridSpec& g = F.grid;
  const double cell = std::pow(F.dy(), n);
  double fscale = 0.0;
  for (const auto& comp : F.comps)
    for (const auto& v : comp) fscale = std::max(fscale, std::abs(v));
  const double w0 = origin_weight(n, 2.0 * t, F.dy());
  RVec parts(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t f) {
    int j[4];
    double y[4];
    g.unflat(f, j);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      y[d] = F.freq(j[d]);
      r2 += y[d] * y[d];
    }
    const SymTensor T = F.at(f);
    if (r2 == 0.0) {
      // Average over directions of y of the fiber integral over S^{n-1} cap y^perp.
      double mom = 1.0;
      for (int k = 0; k < m; ++k) mom *= n + 2 * k;
      const double avg = sphere_area(n - 1) * double_factorial_odd(m) / mom *
                         power_contract_pair(T, T, Kernel::delta).real();
      parts[f] = w0 * avg;
      return;
    }
    if (m > 0 && fscale > 0.0) {
      const SymTensor div = contract_first(T, std::span<const double>(y, n));
      require(div.norm() <= 1e-8 * fscale * std::sqrt(r2), "fourier_side_energy: input is not tangential");
    }
    const double w = std::pow(r2, t) * std::pow(1.0 + r2, s - t) * cell;
    parts[f] = w * c * power_contract_pair(T, T, Kernel::epsilon, std::span<const double>(y, n)).real();
  });
  return 2.0 * kPi * hst_prefactor(n) * pairwise_sum<double>(parts.begin(), parts.end());
}

std::string norm_report_json(int n, int m, double s, double t, double direct, double fourier_side) {
  nlohmann::ordered_json j;
  j["params"] = {{"n", n}, {"m", m}, {"s", s}, {"t", t}};
  j["direct"] = direct;
  j["fourier_side"] = fourier_side;
  j["rel_diff"] = fourier_side != 0.0 ? std::abs(direct - fourier_side) / std::abs(fourier_side) : std::abs(direct);
  j["cmn"] = compute_cmn(n, m);
  return j.dump();
}

}  // namespace tensorray

#include "tensorray/certify.hpp"

#include <cmath>
#include <json.hpp>

#include "tensorray/parallel.hpp"

namespace tensorray {

namespace {

struct ResidualSweep {
  std::vector<ResidualStats> stats;
  /// values[tuple][point]; nullopt where the stencil left the window.
  std::vector<std::vector<std::optional<cplx>>> values;
};

ResidualSweep john_sweep(const PsiSource& psi, const std::vector<IndexTuple>& tuples, const StencilSpec& st,
                         const std::vector<TangentPoint>& pts) {
  ResidualSweep out;
  out.values.assign(tuples.size(), std::vector<std::optional<cplx>>(pts.size()));
  parallel_for(tuples.size() * pts.size(), [&](std::size_t w) {
    const std::size_t t = w / pts.size(), p = w % pts.size();
    out.values[t][p] = apply_composite(psi, tuples[t], pts[p].x.data(), pts[p].xi.data(), st);
  });
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    ResidualStats r;
    r.tuple = tuples[t];
    r.h = st.hx;
    r.order = st.order;
    double ss = 0.0;
    for (const auto& v : out.values[t]) {
      if (!v) {
        ++r.excluded;
        continue;
      }
      ++r.points_used;
      r.max_residual = std::max(r.max_residual, std::abs(*v));
      ss += std::norm(*v);
    }
    r.rms_residual = r.points_used ? std::sqrt(ss / r.points_used) : 0.0;
    out.stats.push_back(std::move(r));
  }
  return out;
}

std::vector<ResidualStats> fourier_sweep(const SpectralSource& src, const std::vector<IndexTuple>& tuples,
                                         const CertifyConfig& cfg) {
  const auto pts = sample_frequency_points(src.n(), cfg.fourier_points, cfg.fourier_r_min, cfg.fourier_r_max,
                                           cfg.seed + 17);
  std::vector<ResidualStats> out;
  for (const auto& t : tuples) out.push_back(fourier_annihilator_residual(src, t, cfg.fourier_h, pts));
  return out;
}

double max_of(const std::vector<ResidualStats>& v) {
  double m = 0.0;
  for (const auto& r : v) m = std::max(m, r.max_residual);
  return m;
}

double coverage_of(const std::vector<ResidualStats>& v) {
  double c = 1.0;
  for (const auto& r : v) {
    const std::size_t req = r.points_used + r.excluded;
    if (req > 0) c = std::min(c, static_cast<double>(r.points_used) / req);
  }
  return c;
}

}  // namespace

double check_parity(const Sinogram& s) {
  const SphereAtlas& at = *s.atlas;
  require(at.pairing.size() == at.size(), "check_parity: atlas has no antipodal pairing");
  const double sign = s.parity();
  const double scale = s.scale();
  double defect = 0.0;
  for (std::size_t k = 0; k < at.size(); ++k) {
    const std::size_t kp = at.pairing[k];
    require(kp < at.size(), "check_parity: unpaired direction");
    for (std::size_t j = 0; j < s.plane.size(); ++j)
      defect = std::max(defect, std::abs(s.at(kp, j) - sign * s.at(k, j)));
  }
  return defect / scale;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::in_range_consistent:
      return "in_range_consistent";
    case Verdict::inconsistent:
      return "inconsistent";
    default:
      return "inconclusive";
  }
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::in_range_consistent:
      return 0;
    case Verdict::inconsistent:
      return 1;
    default:
      return 2;
  }
}

Calibration calibrate(std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane, int m,
                      const CertifyConfig& cfg) {
  const int n = atlas->n;
  const Phantom ref = random_phantom(n, m, 2, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const Sinogram s = transform(PhantomSampler(ref), std::move(atlas), plane, LineRule::make(10.0, 81));
  const InterpolatedPsi psi(s);
  const auto tuples = default_tuples(n, m, cfg.seed);
  const auto pts = sample_tangent_points(n, cfg.points, cfg.radius, cfg.seed);
  Calibration c;
  c.john_floor = max_of(john_sweep(psi, tuples, cfg.stencil, pts).stats);
  const SpectralSinogram ss = plane_fft_all(s, cfg.pad);
  c.fourier_floor = max_of(fourier_sweep(InterpolatedSpectral(ss), tuples, cfg));
  return c;
}

CertificateReport certify(const Sinogram& s, const CertifyConfig& cfg, const Phantom* backing) {
  cfg.stencil.validate();
  require(cfg.tau_parity > 0.0 && cfg.tau_recovery > 0.0 && cfg.tau_john >= 0.0 && cfg.tau_fourier >= 0.0,
          "certify: tolerances must be positive");
  const int n = s.n();
  CertificateReport rep;
  rep.m = s.m;
  rep.parity_defect = check_parity(s);

  const auto tuples = default_tuples(n, s.m, cfg.seed);
  const auto pts = sample_tangent_points(n, cfg.points, cfg.radius, cfg.seed);
  const InterpolatedPsi psi(s);
  const ResidualSweep sweep = john_sweep(psi, tuples, cfg.stencil, pts);
  rep.john = sweep.stats;

  const SpectralSinogram ss = plane_fft_all(s, cfg.pad);
  rep.fourier = fourier_sweep(InterpolatedSpectral(ss), tuples, cfg);

  const RecoveryResult rec = recover_tangential(ss, GridSpec{n, s.plane.L, s.plane.N});
  rep.recovery_misfit = rec.aggregate_misfit;

  if (cfg.weak) {
    // Averages of the strong residual against Gaussian bumps in (x, xi).
    const auto centers = sample_tangent_points(n, cfg.weak_bumps, cfg.radius, cfg.seed + 1);
    for (const auto& c : centers) {
      double worst = 0.0;
      for (std::size_t t = 0; t < tuples.size(); ++t) {
        cplx acc = 0.0;
        double wsum = 0.0;
        for (std::size_t p = 0; p < pts.size(); ++p) {
          if (!sweep.values[t][p]) continue;
          double d2 = 0.0;
          for (int d = 0; d < n; ++d)
            d2 += std::pow(pts[p].x[d] - c.x[d], 2) + std::pow(pts[p].xi[d] - c.xi[d], 2);
          const double w = std::exp(-2.0 * d2);
          acc += w * *sweep.values[t][p];
          wsum += w;
        }
        if (wsum > 0.0) worst = std::max(worst, std::abs(acc) / wsum);
      }
      rep.weak_residuals.push_back(worst);
    }
  }

  if (backing) {
    const ExactPsi exact(*backing, LineRule::make(10.0, 81));
    const std::vector<TangentPoint> few(pts.begin(), pts.begin() + std::min<std::size_t>(pts.size(), 8));
    double prev = 0.0;
    for (double h : {0.08, 0.04, 0.02}) {
      const double cur = composite_range_residual(exact, tuples.front(), StencilSpec{h, h, 2, EvalPath::exact}, few)
                             .max_residual;
      if (prev > 0.0) rep.h_trend.push_back(cur > 0.0 ? prev / cur : 0.0);
      prev = cur;
    }
  }

  rep.tau_parity = cfg.tau_parity;
  rep.tau_recovery = cfg.tau_recovery;
  rep.tau_john = cfg.tau_john;
  rep.tau_fourier = cfg.tau_fourier;
  if (rep.tau_john == 0.0 || rep.tau_fourier == 0.0) {
    const Calibration c = calibrate(s.atlas, s.plane, s.m, cfg);
    if (rep.tau_john == 0.0) rep.tau_john = 10.0 * c.john_floor;
    if (rep.tau_fourier == 0.0) rep.tau_fourier = 10.0 * c.fourier_floor;
    rep.calibrated = true;
  }

  rep.coverage = std::min(coverage_of(rep.john), coverage_of(rep.fourier));
  if (rep.coverage < 0.5) {
    rep.verdict = Verdict::inconclusive;
  } else {
    const bool ok = rep.parity_defect <= rep.tau_parity && max_of(rep.john) <= rep.tau_john &&
                    max_of(rep.fourier) <= rep.tau_fourier && rep.recovery_misfit <= rep.tau_recovery;
    rep.verdict = ok ? Verdict::in_range_consistent : Verdict::inconsistent;
  }
  return rep;
}

std::string certificate_json(const CertificateReport& r) {
  using nlohmann::ordered_json;
  auto stats = [](const std::vector<ResidualStats>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& s : v) a.push_back(ordered_json::parse(residual_json(s)));
    return a;
  };
  ordered_json j;
  j["m"] = r.m;
  j["parity_defect"] = r.parity_defect;
  j["john_residuals"] = stats(r.john);
  j["fourier_residuals"] = stats(r.fourier);
  if (!r.weak_residuals.empty()) j["weak_residuals"] = r.weak_residuals;
  j["recovery_misfit"] = r.recovery_misfit;
  j["h_trend"] = r.h_trend;
  j["coverage"] = r.coverage;
  j["tolerances"] = {{"parity", r.tau_parity},
                     {"john", r.tau_john},
                     {"fourier", r.tau_fourier},
                     {"recovery", r.tau_recovery},
                     {"calibrated", r.calibrated}};
  j["verdict"] = to_string(r.verdict);
  j["note"] = "consistent with range membership at the sampled resolution; not a proof of membership";
  return j.dump(2);
}

}  // namespace tensorray

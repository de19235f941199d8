// Batch driver: every subcommand validates the full config, computes, and
// writes deterministic JSON/CSV/binary outputs under --out. Wall-clock
// times go only to run.log in the same directory.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "run_config.hpp"
#include "tensorray/certify.hpp"
#include "tensorray/io.hpp"
#include "tensorray/metrics.hpp"
#include "tensorray/parallel.hpp"
#include "tensorray/spectral.hpp"
#include "tensorray/xray.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace tensorray;
using tensorray::cli::RunConfig;

namespace {

constexpr int kErrorExit = 3;

struct Context {
  RunConfig cfg;
  fs::path out;
  bool quiet = false;
  std::string command;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void say(const std::string& line) const {
    if (!quiet) std::cout << line << "\n";
  }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream f(out / name, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), "cannot write " + (out / name).string());
    f << text;
    if (text.empty() || text.back() != '\n') f << "\n";
    say("wrote " + (out / name).string());
  }

  void log(const std::string& what) const {
    std::ofstream f(out / "run.log", std::ios::app);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    f << stamp << " " << command << " " << what << " elapsed=" << secs << "s\n";
  }
};

std::shared_ptr<const SphereAtlas> make_atlas(const RunConfig& c) {
  return std::make_shared<const SphereAtlas>(build_atlas(c.atlas));
}

Sinogram phantom_sinogram(const RunConfig& c, const Phantom& ph) {
  return transform(PhantomSampler(ph), make_atlas(c), c.plane, c.line_rule());
}

/// Sinogram from the positional path, the config input, or the phantom.
Sinogram obtain_sinogram(const Context& ctx, const std::string& path, std::optional<Phantom>& backing) {
  const std::string p = !path.empty() ? path : ctx.cfg.input;
  if (!p.empty()) {
    Sinogram s = load_sinogram(p);
    require(s.n() == ctx.cfg.n && s.m == ctx.cfg.m, "input: sinogram n/m header does not match the config");
    return s;
  }
  backing = ctx.cfg.make_phantom();
  return phantom_sinogram(ctx.cfg, *backing);
}

int cmd_phantom(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const Phantom ph = c.make_phantom();
  ctx.write_text("phantom.json", phantom_to_json(ph));
  const GridField samples = sample_on_grid(ph, c.grid);
  save(samples, ctx.out / "samples.tnsr");

  ordered_json rep;
  rep["n"] = c.n;
  rep["m"] = c.m;
  rep["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
  rep["samples_l2"] = samples.l2_norm();
  if (c.m == 0) {
    // Rank-0 fields have no potential part.
    save(samples, ctx.out / "solenoidal.tnsr");
    rep["solenoidal_l2"] = samples.l2_norm();
    rep["potential_l2"] = nullptr;
    rep["tangential_defect"] = 0.0;
  } else {
    const SpectralField Fs = solenoidal_project(field_fft(samples));
    const GridField sol = field_ifft(Fs);
    GridField pot = samples;
    for (std::size_t k = 0; k < pot.comps.size(); ++k)
      for (std::size_t f = 0; f < pot.comps[k].size(); ++f) pot.comps[k][f] -= sol.comps[k][f];
    save(sol, ctx.out / "solenoidal.tnsr");
    save(pot, ctx.out / "potential.tnsr");
    rep["solenoidal_l2"] = sol.l2_norm();
    rep["potential_l2"] = pot.l2_norm();
    rep["tangential_defect"] = tangential_defect(Fs);
  }
  ctx.write_text("phantom_report.json", rep.dump(2));
  return 0;
}

int cmd_transform(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const Phantom ph = c.make_phantom();
  const Sinogram s = phantom_sinogram(c, ph);
  save(s, ctx.out / "sinogram.tnsr");
  if (s.values.size() <= (std::size_t{1} << 20)) {
    std::ofstream csv(ctx.out / "sinogram.csv", std::ios::binary | std::ios::trunc);
    write_sinogram_csv(s, csv);
  }
  ordered_json rep;
  rep["n"] = c.n;
  rep["m"] = c.m;
  rep["directions"] = s.atlas->size();
  rep["plane"] = {{"L", s.plane.L}, {"N", s.plane.N}};
  rep["max_abs"] = s.scale();
  rep["field_scale"] = ph.scale();
  rep["parity_defect"] = check_parity(s);
  ctx.write_text("transform_report.json", rep.dump(2));
  return 0;
}

int cmd_certify(const Context& ctx, const std::string& path) {
  std::optional<Phantom> backing;
  const Sinogram s = obtain_sinogram(ctx, path, backing);
  const CertificateReport rep = certify(s, ctx.cfg.certify, backing ? &*backing : nullptr);
  ctx.write_text("certificate.json", certificate_json(rep));
  ctx.say("verdict: " + to_string(rep.verdict));
  return exit_code(rep.verdict);
}

int cmd_reconstruct(const Context& ctx, const std::string& path) {
  const RunConfig& c = ctx.cfg;
  std::optional<Phantom> backing;
  const Sinogram s = obtain_sinogram(ctx, path, backing);
  RecoveryResult diag;
  ReconstructOptions opt;
  opt.pad = c.pad;
  const GridField rec = reconstruct_solenoidal(s, c.grid, opt, &diag);
  save(rec, ctx.out / "reconstruction.tnsr");
  ordered_json rep;
  rep["n"] = c.n;
  rep["m"] = s.m;
  rep["aggregate_misfit"] = diag.aggregate_misfit;
  rep["max_misfit"] = diag.max_misfit;
  rep["recovered_nodes"] = diag.recovered;
  rep["ill_posed_nodes"] = diag.ill_posed_count;
  rep["y_max"] = diag.y_max;
  rep["tangential_defect"] = tangential_defect(diag.field);
  if (backing) {
    const GridField ref = field_ifft(solenoidal_project(sample_fourier(*backing, c.grid)));
    rep["reference_l2"] = ref.l2_norm();
    rep["relative_l2_error"] = ref.l2_norm() > 0.0 ? relative_l2(rec, ref) : rec.l2_norm();
  }
  ctx.write_text("reconstruct_report.json", rep.dump(2));
  return 0;
}

int cmd_reshetnyak(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  require(c.r == 0, "reshetnyak: the Fourier-side identity is implemented for r = 0 only");
  const Phantom ph = c.make_phantom();
  const SpectralSinogram ss = plane_fft_all(phantom_sinogram(c, ph), c.pad);
  const SpectralField F = solenoidal_project(sample_fourier(ph, c.grid));
  ordered_json rows = ordered_json::array();
  for (const auto& [s, t] : c.sweep) {
    const double direct_norm = hst_norm(ss, s + 0.5, t + 0.5);
    const double fourier = fourier_side_energy(F, s, t);
    auto row = ordered_json::parse(norm_report_json(c.n, c.m, s, t, direct_norm * direct_norm, fourier));
    row["params"]["r"] = c.r;
    row["direct_norm"] = direct_norm;
    rows.push_back(std::move(row));
  }
  ctx.write_text("reshetnyak.json", rows.dump(2));
  return 0;
}

int cmd_convergence(const Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const auto& v = c.convergence;
  const Phantom ph = c.make_phantom();
  std::optional<Sinogram> sino;
  std::unique_ptr<PsiSource> base;
  if (c.stencil.path == EvalPath::exact) {
    base = std::make_unique<ExactPsi>(ph, c.line_rule());
  } else {
    sino = phantom_sinogram(c, ph);
    base = std::make_unique<InterpolatedPsi>(*sino);
  }
  std::unique_ptr<PsiSource> perturbed;
  if (v.perturbation > 0.0) perturbed = std::make_unique<PerturbedPsi>(*base, v.perturbation * ph.scale(), c.seed);
  const PsiSource& psi = perturbed ? *perturbed : *base;

  const auto tuples = c.tuples();
  const auto pts = sample_tangent_points(c.n, v.points, v.radius, c.seed);
  std::string csv = "h,order,max_residual,rms_residual,points_used,ratio\n";
  double prev = 0.0, h = v.h0;
  char buf[256];
  for (int k = 0; k <= v.halvings; ++k, h /= 2.0) {
    StencilSpec st = c.stencil;
    st.hx = st.hxi = h;
    double mx = 0.0, ss = 0.0;
    std::size_t used = 0;
    for (const auto& t : tuples) {
      const ResidualStats r = composite_range_residual(psi, t, st, pts);
      mx = std::max(mx, r.max_residual);
      ss += r.rms_residual * r.rms_residual * r.points_used;
      used += r.points_used;
    }
    const double rms = used ? std::sqrt(ss / used) : 0.0;
    if (k == 0)
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%zu,\n", h, st.order, mx, rms, used);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%zu,%.17g\n", h, st.order, mx, rms, used,
                    mx > 0.0 ? prev / mx : 0.0);
    csv += buf;
    prev = mx;
  }
  ctx.write_text("convergence.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor ray transform range checks"};
  app.require_subcommand(1);
  std::string config_path, out_dir, input_path;
  std::optional<unsigned> worker_count;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--workers", worker_count, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "seed for every stochastic choice (overrides the config)");
  app.add_flag("--quiet", quiet, "print nothing but errors");
  // Subcommands inherit this, so global options may follow the subcommand name.
  app.fallthrough();
  for (const char* name : {"phantom", "transform", "reshetnyak", "convergence"}) app.add_subcommand(name);
  app.add_subcommand("certify")->add_option("input", input_path, "sinogram file");
  app.add_subcommand("reconstruct")->add_option("input", input_path, "sinogram file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kErrorExit;
  }

  Context ctx;
  ctx.quiet = quiet;
  ctx.command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = config_path.empty() ? cli::parse_config(std::string("{\"schema\":\"") + cli::kSchema + "\"}")
                                        : cli::load_config(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (seed) cfg.seed = cfg.certify.seed = *seed;
    if (worker_count) cfg.workers = *worker_count;
    cli::validate(cfg);
    ctx.cfg = cfg;
    ctx.out = cfg.output;
    fs::create_directories(ctx.out);
    set_workers(cfg.workers);
    ctx.log("start seed=" + std::to_string(cfg.seed) + " workers=" + std::to_string(workers()));

    int rc = 0;
    if (ctx.command == "phantom") rc = cmd_phantom(ctx);
    else if (ctx.command == "transform") rc = cmd_transform(ctx);
    else if (ctx.command == "certify") rc = cmd_certify(ctx, input_path);
    else if (ctx.command == "reconstruct") rc = cmd_reconstruct(ctx, input_path);
    else if (ctx.command == "reshetnyak") rc = cmd_reshetnyak(ctx);
    else rc = cmd_convergence(ctx);
    ctx.log("done exit=" + std::to_string(rc));
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "tensorray " << ctx.command << ": " << e.what() << "\n";
    if (!ctx.out.empty()) ctx.log(std::string("error ") + e.what());
    return kErrorExit;
  }
}

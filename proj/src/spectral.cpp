#include "tensorray/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numeric>

#include "tensorray/parallel.hpp"

namespace tensorray {

namespace {

std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

/// Unnormalized DFT over an N^dim row-major block; sign -1 forward, +1 backward.
void dft_inplace(cplx* data, int N, int dim, int sign) {
  std::size_t total = 1;
  int dims[4];
  for (int d = 0; d < dim; ++d) {
    dims[d] = N;
    total *= static_cast<std::size_t>(N);
  }
  fftw_complex* buf = fftw_alloc_complex(total);
  require(buf != nullptr, "fft: allocation failed");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(dim, dims, buf, buf, sign, FFTW_ESTIMATE);
  }
  std::memcpy(buf, data, total * sizeof(cplx));
  fftw_execute(plan);
  std::memcpy(static_cast<void*>(data), buf, total * sizeof(cplx));
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
}

/// (-1)^{j_0 + .. + j_{dim-1}} for row-major index f.
double checker(std::size_t f, int N, int dim) {
  int s = 0;
  for (int d = 0; d < dim; ++d) {
    s += static_cast<int>(f % N);
    f /= N;
  }
  return (s % 2 == 0) ? 1.0 : -1.0;
}

/// Continuous-normalized transform between nodes x_j = -L + j h and
/// y_k = (k - N/2) pi / L, both in natural row-major order.
/// e^{-i y_k x_j} = (-1)^{k - N/2} (-1)^j e^{-2 pi i k j / N} per axis.
void centered_transform(cplx* data, int N, int dim, double h, bool inverse) {
  require(N % 2 == 0, "fft: grid size must be even");
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(N);
  const double scale = std::pow(h, dim) / std::pow(2.0 * kPi, 0.5 * dim);
  const double half_sign = ((N / 2) * dim) % 2 == 0 ? 1.0 : -1.0;
  if (!inverse) {
    for (std::size_t f = 0; f < total; ++f) data[f] *= checker(f, N, dim);
    dft_inplace(data, N, dim, FFTW_FORWARD);
    for (std::size_t f = 0; f < total; ++f) data[f] *= checker(f, N, dim) * half_sign * scale;
  } else {
    for (std::size_t f = 0; f < total; ++f) data[f] *= checker(f, N, dim) * half_sign;
    dft_inplace(data, N, dim, FFTW_BACKWARD);
    const double inv = 1.0 / (static_cast<double>(total) * scale);
    for (std::size_t f = 0; f < total; ++f) data[f] *= checker(f, N, dim) * inv;
  }
}

/// Pushes a reduced tensor on span(B columns) forward to the ambient space:
/// Phi_I = sum_a prod_k B[I_k][a_k] T_a. B is n x r, column-major by vector.
SymTensor push_forward(const CVec& reduced, int r, const std::vector<RVec>& B, int n, int m) {
  const SymBasis& rb = sym_basis(r, m);
  const SymBasis& nb = sym_basis(n, m);
  SymTensor out = SymTensor::zero(n, m);
  int rpow = 1;
  for (int k = 0; k < m; ++k) rpow *= r;
  int a[8];
  for (std::size_t I = 0; I < nb.size(); ++I) {
    const auto& idx = nb.index(I).entries;
    cplx s = 0.0;
    for (int f = 0; f < rpow; ++f) {
      int g = f;
      double w = 1.0;
      for (int k = m - 1; k >= 0; --k) {
        a[k] = g % r;
        g /= r;
      }
      for (int k = 0; k < m; ++k) w *= B[a[k]][idx[k]];
      if (w == 0.0) continue;
      s += w * reduced[rb.position(std::span<const int>(a, m))];
    }
    out.c[I] = s;
  }
  return out;
}

double atlas_spacing(const SphereAtlas& at) {
  if (at.n == 2) return 2.0 * kPi / at.params.azimuth;
  return std::max(kPi / at.params.polar, 2.0 * kPi / at.params.azimuth);
}

}  // namespace

SpectralField SpectralField::zero(const GridSpec& g, int m) {
  SpectralField F;
  F.grid = g;
  F.m = m;
  F.comps.assign(sym_dim(g.n, m), CVec(g.size(), 0.0));
  return F;
}

SymTensor SpectralField::at(std::size_t f) const {
  SymTensor t = SymTensor::zero(grid.n, m);
  for (std::size_t c = 0; c < comps.size(); ++c) t.c[c] = comps[c][f];
  return t;
}

void SpectralField::set(std::size_t f, const SymTensor& t) {
  for (std::size_t c = 0; c < comps.size(); ++c) comps[c][f] = t.c[c];
}

SpectralField field_fft(const GridField& f) {
  SpectralField F;
  F.grid = f.grid;
  F.m = f.m;
  F.comps = f.comps;
  for (auto& c : F.comps) centered_transform(c.data(), f.grid.N, f.grid.n, f.grid.h(), false);
  return F;
}

GridField field_ifft(const SpectralField& F) {
  GridField f;
  f.grid = F.grid;
  f.m = F.m;
  f.comps = F.comps;
  for (auto& c : f.comps) centered_transform(c.data(), F.grid.N, F.grid.n, F.grid.h(), true);
  return f;
}

SpectralField sample_fourier(const Phantom& ph, const GridSpec& grid) {
  require(ph.n == grid.n, "sample_fourier: dimension mismatch");
  SpectralField F = SpectralField::zero(grid, ph.m);
  parallel_for(grid.size(), [&](std::size_t f) {
    int j[4];
    double y[4];
    grid.unflat(f, j);
    for (int d = 0; d < grid.n; ++d) y[d] = F.freq(j[d]);
    F.set(f, fourier_value(ph, std::span<const double>(y, grid.n)));
  });
  return F;
}

RVec SpectralSinogram::ambient(std::size_t k, std::size_t f) const {
  int j[3];
  plane.unflat(f, j);
  const auto& fr = atlas->frames[k];
  RVec y(atlas->n, 0.0);
  for (int a = 0; a < plane.dim; ++a) {
    const double v = freq(j[a]);
    for (int d = 0; d < atlas->n; ++d) y[d] += v * fr[a][d];
  }
  return y;
}

CVec plane_fft(const Sinogram& s, std::size_t k, int pad) {
  require(k < s.atlas->size(), "plane_fft: direction index out of range");
  require(pad >= 1, "plane_fft: pad must be >= 1");
  const PlaneGrid& pg = s.plane;
  const int Np = pg.N * pad;
  const int off = (Np - pg.N) / 2;
  PlaneGrid padded{pg.dim, pg.L * pad, Np};
  CVec buf(padded.size(), 0.0);
  int j[3];
  for (std::size_t f = 0; f < pg.size(); ++f) {
    pg.unflat(f, j);
    std::size_t g = 0;
    for (int a = 0; a < pg.dim; ++a) g = g * Np + (j[a] + off);
    buf[g] = s.at(k, f);
  }
  centered_transform(buf.data(), Np, pg.dim, pg.h(), false);
  return buf;
}

SpectralSinogram plane_fft_all(const Sinogram& s, int pad) {
  SpectralSinogram ss;
  ss.atlas = s.atlas;
  ss.m = s.m;
  ss.plane = PlaneGrid{s.plane.dim, s.plane.L * pad, s.plane.N * pad};
  ss.values.assign(s.atlas->size() * ss.plane.size(), 0.0);
  parallel_for(s.atlas->size(), [&](std::size_t k) {
    const CVec v = plane_fft(s, k, pad);
    std::copy(v.begin(), v.end(), ss.values.begin() + static_cast<std::ptrdiff_t>(ss.offset(k)));
  });
  return ss;
}

Sinogram plane_ifft_all(const SpectralSinogram& ss, int pad) {
  require(pad >= 1 && ss.plane.N % pad == 0, "plane_ifft_all: pad does not divide the plane size");
  const PlaneGrid win{ss.plane.dim, ss.plane.L / pad, ss.plane.N / pad};
  Sinogram s = make_sinogram(ss.atlas, win, ss.m);
  const int Np = ss.plane.N;
  const int off = (Np - win.N) / 2;
  parallel_for(ss.atlas->size(), [&](std::size_t k) {
    CVec buf(ss.values.begin() + static_cast<std::ptrdiff_t>(ss.offset(k)),
             ss.values.begin() + static_cast<std::ptrdiff_t>(ss.offset(k) + ss.plane.size()));
    centered_transform(buf.data(), Np, ss.plane.dim, ss.plane.h(), true);
    int j[3];
    for (std::size_t f = 0; f < win.size(); ++f) {
      win.unflat(f, j);
      std::size_t g = 0;
      for (int a = 0; a < win.dim; ++a) g = g * Np + (j[a] + off);
      s.at(k, f) = buf[g];
    }
  });
  return s;
}

SpectralInterpolant::SpectralInterpolant(const SpectralSinogram& ss) : ss_(&ss), coeffs_(ss.values) {
  const std::size_t ps = ss.plane.size();
  parallel_for(ss.atlas->size(), [&](std::size_t k) { bspline_prefilter(coeffs_.data() + k * ps, ss.plane.N, ss.plane.dim); });
}

std::optional<cplx> SpectralInterpolant::plane_at(std::size_t k, const double* y) const {
  const SphereAtlas& at = *ss_->atlas;
  const int r = ss_->plane.dim;
  const int Np = ss_->plane.N;
  double s[3];
  for (int a = 0; a < r; ++a) {
    double v = 0.0;
    for (int d = 0; d < at.n; ++d) v += y[d] * at.frames[k][a][d];
    s[a] = v / ss_->dv() + Np / 2;
  }
  return bspline_eval(coeffs_.data() + ss_->offset(k), Np, r, s);
}

std::optional<cplx> SpectralInterpolant::operator()(const double* y, const double* xi) const {
  const SphereAtlas& at = *ss_->atlas;
  const DirectionStencil st = direction_stencil(at, std::span<const double>(xi, static_cast<std::size_t>(at.n)));
  cplx v = 0.0;
  for (std::size_t i = 0; i < st.count; ++i) {
    if (st.weight[i] == 0.0) continue;
    const auto pv = plane_at(st.index[i], y);
    if (!pv) return std::nullopt;
    v += st.weight[i] * *pv;
  }
  return v;
}

cplx slice_predict(const SymTensor& fhat, std::span<const double> y, std::span<const double> xi) {
  double yx = 0.0;
  for (std::size_t d = 0; d < y.size(); ++d) yx += y[d] * xi[d];
  require(std::abs(yx) <= 1e-10 * std::max(1.0, std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0))),
          "slice_predict: y is not orthogonal to xi");
  return kSqrt2Pi * contract_power(fhat, xi);
}

cplx slice_predict(const Phantom& ph, std::span<const double> y, std::span<const double> xi) {
  return slice_predict(fourier_value(ph, y), y, xi);
}

SpectralField solenoidal_project(const SpectralField& F) {
  SpectralField out = F;
  if (F.m == 0) return out;
  const GridSpec& g = F.grid;
  parallel_for(g.size(), [&](std::size_t f) {
    int j[4];
    double y[4];
    g.unflat(f, j);
    double r2 = 0.0;
    for (int d = 0; d < g.n; ++d) {
      y[d] = F.freq(j[d]);
      r2 += y[d] * y[d];
    }
    if (r2 == 0.0) return;
    out.set(f, tangential_project(F.at(f), std::span<const double>(y, g.n)));
  });
  return out;
}

double tangential_defect(const SpectralField& F) {
  if (F.m == 0) return 0.0;
  const GridSpec& g = F.grid;
  RVec scale(g.size(), 0.0), defect(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t f) {
    int j[4];
    double y[4];
    g.unflat(f, j);
    double r2 = 0.0;
    for (int d = 0; d < g.n; ++d) {
      y[d] = F.freq(j[d]);
      r2 += y[d] * y[d];
    }
    const SymTensor T = F.at(f);
    scale[f] = T.norm();
    if (r2 > 0.0) defect[f] = contract_first(T, std::span<const double>(y, g.n)).norm() / std::sqrt(r2);
  });
  const double s = *std::max_element(scale.begin(), scale.end());
  return s > 0.0 ? *std::max_element(defect.begin(), defect.end()) / s : 0.0;
}

RecoveryResult recover_tangential(const SpectralSinogram& ss, const GridSpec& target, const RecoverOptions& opt) {
  const SphereAtlas& at = *ss.atlas;
  const int n = at.n;
  const int m = ss.m;
  const int r = n - 1;
  require(target.n == n, "recover_tangential: target dimension mismatch");
  if (opt.mode == RecoveryMode::great_circle)
    require(n == 2 || n == 3, "recover_tangential: great_circle mode needs n = 2 or 3");

  const SpectralInterpolant interp(ss);
  const int Np = ss.plane.N;
  auto plane_at = [&](std::size_t k, const double* y) { return interp.plane_at(k, y); };

  RecoveryResult res;
  res.field = SpectralField::zero(target, m);
  res.misfit.assign(target.size(), 0.0);
  res.ill_posed.assign(target.size(), 0);
  const double grid_ymax = res.field.y_max();
  res.y_max = opt.y_max > 0.0 ? opt.y_max : std::min(grid_ymax, ss.v_max());

  const SymBasis& rb = sym_basis(r, m);
  const std::size_t rdim = rb.size();

  // Great-circle design: identical for every y in the frame (a, b) of y^perp.
  const int Q = (n == 2) ? 1 : std::max(opt.circle_samples, static_cast<int>(rdim));
  std::vector<RVec> etas(Q);
  Eigen::MatrixXd A(Q, static_cast<Eigen::Index>(rdim));
  for (int q = 0; q < Q; ++q) {
    const double th = kPi * q / Q;
    etas[q] = (n == 2) ? RVec{1.0} : RVec{std::cos(th), std::sin(th)};
    const RVec w = power_weights(m, etas[q]);
    for (std::size_t c = 0; c < rdim; ++c) A(q, static_cast<Eigen::Index>(c)) = w[c];
  }
  const Eigen::MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();

  const double theta_tol = opt.theta_tol > 0.0 ? opt.theta_tol : 0.5 * atlas_spacing(at);
  const double sin_tol = std::sin(theta_tol);

  std::size_t dc = 0;  // plane node v = 0
  for (int a = 0; a < r; ++a) dc = dc * Np + Np / 2;

  std::vector<double> bnorm(target.size(), 0.0);
  parallel_for(target.size(), [&](std::size_t f) {
    int j[4];
    double y[4];
    target.unflat(f, j);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      y[d] = res.field.freq(j[d]);
      r2 += y[d] * y[d];
    }
    const double ry = std::sqrt(r2);
    if (ry > res.y_max) return;

    if (r2 == 0.0) {
      // Every direction is orthogonal to y = 0: fit the full tensor.
      const SymBasis& nb = sym_basis(n, m);
      Eigen::MatrixXd D(static_cast<Eigen::Index>(at.size()), static_cast<Eigen::Index>(nb.size()));
      Eigen::VectorXcd b(static_cast<Eigen::Index>(at.size()));
      for (std::size_t k = 0; k < at.size(); ++k) {
        const RVec w = power_weights(m, at.directions[k]);
        for (std::size_t c = 0; c < nb.size(); ++c)
          D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = w[c];
        b(static_cast<Eigen::Index>(k)) = ss.values[ss.offset(k) + dc];
      }
      const auto cod = D.completeOrthogonalDecomposition();
      if (cod.rank() < static_cast<Eigen::Index>(nb.size())) {
        res.ill_posed[f] = 1;
        return;
      }
      const Eigen::VectorXd xr = cod.solve(b.real());
      const Eigen::VectorXd xim = cod.solve(b.imag());
      Eigen::VectorXcd x(xr.size());
      x.real() = xr;
      x.imag() = xim;
      SymTensor t = SymTensor::zero(n, m);
      for (std::size_t c = 0; c < nb.size(); ++c) t.c[c] = x(static_cast<Eigen::Index>(c));
      res.field.set(f, t);
      const double bn = b.norm();
      bnorm[f] = bn;
      res.misfit[f] = bn > 0.0 ? (D.cast<cplx>() * x - b).norm() / bn : 0.0;
      return;
    }

    RVec yh(n);
    for (int d = 0; d < n; ++d) yh[d] = y[d] / ry;
    const std::vector<RVec> B = frame_of(yh);

    Eigen::VectorXcd x;
    Eigen::VectorXcd b;
    Eigen::MatrixXd D;
    if (opt.mode == RecoveryMode::great_circle) {
      b.resize(Q);
      for (int q = 0; q < Q; ++q) {
        double xi[3];
        for (int d = 0; d < n; ++d) {
          xi[d] = 0.0;
          for (int a = 0; a < r; ++a) xi[d] += etas[q][a] * B[a][d];
        }
        const auto v = interp(y, xi);
        if (!v) {
          res.ill_posed[f] = 1;
          return;
        }
        b(q) = *v;
      }
      x = pinv.cast<cplx>() * b;
      D = A;
    } else {
      std::vector<RVec> rows;
      std::vector<cplx> vals;
      for (std::size_t k = 0; k < at.size(); ++k) {
        double c = 0.0;
        for (int d = 0; d < n; ++d) c += at.directions[k][d] * yh[d];
        if (std::abs(c) > sin_tol) continue;
        const auto pv = plane_at(k, y);
        if (!pv) continue;
        RVec eta(r);
        for (int a = 0; a < r; ++a) {
          double s = 0.0;
          for (int d = 0; d < n; ++d) s += at.directions[k][d] * B[a][d];
          eta[a] = s;
        }
        rows.push_back(power_weights(m, eta));
        vals.push_back(*pv);
      }
      if (rows.size() < rdim) {
        res.ill_posed[f] = 1;
        return;
      }
      D.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rdim));
      b.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rdim; ++c)
          D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        b(static_cast<Eigen::Index>(i)) = vals[i];
      }
      Eigen::MatrixXd G = D.transpose() * D;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
      const double lmax = es.eigenvalues().maxCoeff();
      if (!(lmax > 0.0) || es.eigenvalues().minCoeff() < 1e-10 * lmax) {
        res.ill_posed[f] = 1;
        return;
      }
      G.diagonal().array() += 1e-12 * lmax;
      x = G.cast<cplx>().ldlt().solve(D.transpose().cast<cplx>() * b);
    }
    CVec red(rdim);
    for (std::size_t c = 0; c < rdim; ++c) red[c] = x(static_cast<Eigen::Index>(c));
    res.field.set(f, push_forward(red, r, B, n, m));
    const double bn = b.norm();
    bnorm[f] = bn;
    res.misfit[f] = bn > 0.0 ? (D.cast<cplx>() * x - b).norm() / bn : 0.0;
  });

  double bmax = 0.0, rr = 0.0, bb = 0.0;
  for (double v : bnorm) bmax = std::max(bmax, v);
  for (std::size_t f = 0; f < target.size(); ++f) {
    if (res.ill_posed[f]) {
      ++res.ill_posed_count;
      continue;
    }
    rr += std::pow(res.misfit[f] * bnorm[f], 2);
    bb += bnorm[f] * bnorm[f];
    if (bnorm[f] > 0.0 || res.misfit[f] > 0.0) ++res.recovered;
    if (bnorm[f] >= 1e-6 * bmax) res.max_misfit = std::max(res.max_misfit, res.misfit[f]);
  }
  res.aggregate_misfit = bb > 0.0 ? std::sqrt(rr / bb) : 0.0;
  return res;
}

GridField reconstruct_solenoidal(const Sinogram& s, const GridSpec& grid, const ReconstructOptions& opt,
                                 RecoveryResult* diagnostics) {
  const SpectralSinogram ss = plane_fft_all(s, opt.pad);
  RecoveryResult res = recover_tangential(ss, grid, opt.recover);
  SpectralField F = res.field;
  for (auto& c : F.comps)
    for (auto& v : c) v /= kSqrt2Pi;
  GridField out = field_ifft(F);
  if (diagnostics) *diagnostics = std::move(res);
  return out;
}

std::string to_string(RecoveryMode mode) { return mode == RecoveryMode::band ? "band" : "great_circle"; }

RecoveryMode recovery_mode_from_string(const std::string& s) {
  if (s == "great_circle") return RecoveryMode::great_circle;
  if (s == "band") return RecoveryMode::band;
  throw Error("unknown recovery mode: " + s);
}

}  // namespace tensorray

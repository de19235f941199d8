#include "tensorray/xray.hpp"

#include <algorithm>
#include <cmath>

#include "tensorray/parallel.hpp"
#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

namespace {

constexpr double kBsplinePole = -0.26794919243112270;  // sqrt(3) - 2

void prefilter_line(cplx* c, std::size_t stride, int N) {
  if (N < 2) return;
  const double z = kBsplinePole;
  auto at = [&](int k) -> cplx& { return c[static_cast<std::size_t>(k) * stride]; };
  for (int k = 0; k < N; ++k) at(k) *= 6.0;
  // Mirror-boundary causal initialization, truncated where z^k < 1e-17.
  const int horizon = std::min(N, 30);
  cplx sum = at(0);
  double zk = z;
  for (int k = 1; k < horizon; ++k) {
    sum += zk * at(k);
    zk *= z;
  }
  at(0) = sum;
  for (int k = 1; k < N; ++k) at(k) += z * at(k - 1);
  at(N - 1) = (z / (z * z - 1.0)) * (at(N - 1) + z * at(N - 2));
  for (int k = N - 2; k >= 0; --k) at(k) = z * (at(k + 1) - at(k));
}

void bspline_weights(double t, double* w) {
  const double t2 = t * t, t3 = t2 * t;
  const double u = 1.0 - t;
  w[0] = u * u * u / 6.0;
  w[1] = (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0;
  w[2] = (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0;
  w[3] = t3 / 6.0;
}

void check_finite(cplx v, const char* what) {
  require(std::isfinite(v.real()) && std::isfinite(v.imag()), std::string(what) + ": non-finite field sample");
}

}  // namespace

cplx FieldSampler::line_integral(const double* x, const double* xi, const LineRule& rule) const {
  const int nn = n();
  const RVec w = power_weights(m(), std::span<const double>(xi, nn));
  CVec vals(w.size());
  double p[4];
  cplx s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    for (int d = 0; d < nn; ++d) p[d] = x[d] + rule.nodes[q] * xi[d];
    sample(p, vals.data());
    cplx v = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) v += w[c] * vals[c];
    s += rule.weights[q] * v;
  }
  return s;
}

PhantomSampler::PhantomSampler(Phantom ph) : ph_(std::move(ph)) { ph_.validate(); }

void PhantomSampler::sample(const double* x, cplx* out) const {
  eval_into(ph_, std::span<const double>(x, static_cast<std::size_t>(ph_.n)), out);
}

cplx PhantomSampler::line_integral(const double* x, const double* xi, const LineRule& rule) const {
  const std::size_t nn = static_cast<std::size_t>(ph_.n);
  const LineRestriction lr = restrict_to_line(ph_, {x, nn}, {xi, nn});
  if (lr.g0 == 0.0) return 0.0;
  const double inv2s2 = 0.5 / (lr.sigma * lr.sigma);
  cplx s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double u = rule.nodes[q] - lr.t0;
    const double g = std::exp(-u * u * inv2s2);
    if (g == 0.0) continue;
    cplx poly = 0.0;
    for (std::size_t k = lr.q.size(); k-- > 0;) poly = poly * u + lr.q[k];
    s += rule.weights[q] * g * poly;
  }
  return s * lr.g0;
}

cplx ray_integral(const FieldSampler& f, std::span<const double> x, std::span<const double> xi,
                  const LineRule& rule) {
  const int n = f.n();
  require(static_cast<int>(x.size()) == n && static_cast<int>(xi.size()) == n, "ray_integral: dimension mismatch");
  double r2 = 0.0, xx = 0.0;
  for (int d = 0; d < n; ++d) {
    r2 += xi[d] * xi[d];
    xx += x[d] * xi[d];
  }
  require(std::abs(std::sqrt(r2) - 1.0) <= 1e-10, "ray_integral: direction is not a unit vector; use extended_J");
  double p[4];
  for (int d = 0; d < n; ++d) p[d] = x[d] - xx * xi[d];
  const cplx v = f.line_integral(p, xi.data(), rule);
  check_finite(v, "ray_integral");
  return v;
}

cplx extended_J(const FieldSampler& f, std::span<const double> x, std::span<const double> xi,
                const LineRule& rule) {
  const int n = f.n();
  require(static_cast<int>(x.size()) == n && static_cast<int>(xi.size()) == n, "extended_J: dimension mismatch");
  double r2 = 0.0, xx = 0.0;
  for (int d = 0; d < n; ++d) {
    r2 += xi[d] * xi[d];
    xx += x[d] * xi[d];
  }
  require(r2 > 0.0, "extended_J: xi = 0");
  const double r = std::sqrt(r2);
  double p[4], u[4];
  for (int d = 0; d < n; ++d) {
    p[d] = x[d] - xx * xi[d] / r2;
    u[d] = xi[d] / r;
  }
  const cplx v = f.line_integral(p, u, rule);
  check_finite(v, "extended_J");
  return std::pow(r, f.m() - 1) * v;
}

double Sinogram::scale() const {
  double s = 0.0;
  for (const auto& v : values) s = std::max(s, std::abs(v));
  return s > 0.0 ? s : 1.0;
}

Sinogram make_sinogram(std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane, int m) {
  require(atlas != nullptr, "make_sinogram: null atlas");
  require(plane.dim == atlas->n - 1, "make_sinogram: plane dimension must be n - 1");
  Sinogram s;
  s.atlas = std::move(atlas);
  s.plane = plane;
  s.m = m;
  s.values.assign(s.atlas->size() * plane.size(), 0.0);
  return s;
}

Sinogram transform(const FieldSampler& f, std::shared_ptr<const SphereAtlas> atlas, const PlaneGrid& plane,
                   const LineRule& rule) {
  require(atlas != nullptr && atlas->n == f.n(), "transform: atlas dimension mismatch");
  Sinogram s = make_sinogram(std::move(atlas), plane, f.m());
  const SphereAtlas& at = *s.atlas;
  parallel_for(at.size(), [&](std::size_t k) {
    const auto& xi = at.directions[k];
    for (std::size_t j = 0; j < plane.size(); ++j) {
      const RVec x = plane.embed(j, at.frames[k]);
      const cplx v = f.line_integral(x.data(), xi.data(), rule);
      check_finite(v, "transform");
      s.at(k, j) = v;
    }
  });
  return s;
}

void bspline_prefilter(cplx* data, int N, int dim) {
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(N);
  std::size_t stride = 1;
  for (int axis = dim - 1; axis >= 0; --axis) {
    // Lines along `axis`: every start index whose axis coordinate is 0.
    const std::size_t block = stride * static_cast<std::size_t>(N);
    for (std::size_t outer = 0; outer < total; outer += block)
      for (std::size_t inner = 0; inner < stride; ++inner) prefilter_line(data + outer + inner, stride, N);
    stride = block;
  }
}

std::optional<cplx> bspline_eval(const cplx* coeffs, int N, int dim, const double* s) {
  int i0[3] = {0, 0, 0};
  double w[3][4];
  for (int d = 0; d < dim; ++d) {
    if (!(s[d] >= 1.0 && s[d] <= N - 2.0)) return std::nullopt;
    const double fl = std::min(std::floor(s[d]), N - 3.0);
    i0[d] = static_cast<int>(fl) - 1;
    bspline_weights(s[d] - fl, w[d]);
  }
  cplx v = 0.0;
  if (dim == 1) {
    for (int a = 0; a < 4; ++a) v += w[0][a] * coeffs[i0[0] + a];
  } else if (dim == 2) {
    for (int a = 0; a < 4; ++a) {
      const cplx* row = coeffs + static_cast<std::size_t>(i0[0] + a) * N + i0[1];
      cplx r = 0.0;
      for (int b = 0; b < 4; ++b) r += w[1][b] * row[b];
      v += w[0][a] * r;
    }
  } else {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const cplx* row = coeffs + (static_cast<std::size_t>(i0[0] + a) * N + (i0[1] + b)) * N + i0[2];
        cplx r = 0.0;
        for (int c = 0; c < 4; ++c) r += w[2][c] * row[c];
        v += w[0][a] * w[1][b] * r;
      }
  }
  return v;
}

SinogramInterpolant::SinogramInterpolant(const Sinogram& s)
    : data_(s), coeffs_(s.values), n_(s.n()), m_(s.m) {
  require(n_ == 2 || n_ == 3, "SinogramInterpolant: direction interpolation needs n = 2 or 3");
  const std::size_t ps = s.plane.size();
  for (std::size_t k = 0; k < s.atlas->size(); ++k) bspline_prefilter(coeffs_.data() + k * ps, s.plane.N, s.plane.dim);
}

std::optional<cplx> SinogramInterpolant::plane_value(std::size_t k, std::span<const double> u) const {
  const PlaneGrid& pg = data_.plane;
  double s[3];
  for (int a = 0; a < pg.dim; ++a) s[a] = (u[a] + pg.L) / pg.h();
  return bspline_eval(coeffs_.data() + data_.offset(k), pg.N, pg.dim, s);
}

std::optional<cplx> SinogramInterpolant::restricted(std::span<const double> x, std::span<const double> xi) const {
  const SphereAtlas& at = *data_.atlas;
  const DirectionStencil st = direction_stencil(at, xi);
  double u[3];
  cplx v = 0.0;
  for (std::size_t q = 0; q < st.count; ++q) {
    if (st.weight[q] == 0.0) continue;
    const std::size_t k = st.index[q];
    for (int a = 0; a < n_ - 1; ++a) {
      double s = 0.0;
      for (int d = 0; d < n_; ++d) s += x[d] * at.frames[k][a][d];
      u[a] = s;
    }
    const auto pv = plane_value(k, std::span<const double>(u, n_ - 1));
    if (!pv) return std::nullopt;
    v += st.weight[q] * *pv;
  }
  return v;
}

std::optional<cplx> SinogramInterpolant::operator()(std::span<const double> x, std::span<const double> xi) const {
  require(static_cast<int>(x.size()) == n_ && static_cast<int>(xi.size()) == n_, "psi_extend: dimension mismatch");
  double r2 = 0.0, xx = 0.0;
  for (int d = 0; d < n_; ++d) {
    r2 += xi[d] * xi[d];
    xx += x[d] * xi[d];
  }
  require(r2 > 0.0, "psi_extend: xi = 0");
  const double r = std::sqrt(r2);
  double p[3], e[3];
  for (int d = 0; d < n_; ++d) {
    p[d] = x[d] - xx * xi[d] / r2;
    e[d] = xi[d] / r;
  }
  const auto v = restricted(std::span<const double>(p, n_), std::span<const double>(e, n_));
  if (!v) return std::nullopt;
  return std::pow(r, m_ - 1) * *v;
}

std::optional<cplx> psi_extend(const Sinogram& s, std::span<const double> x, std::span<const double> xi) {
  return SinogramInterpolant(s)(x, xi);
}

}  // namespace tensorray

#include "tensorray/operators.hpp"

#include <array>
#include <cmath>
#include <json.hpp>
#include <random>

#include "tensorray/parallel.hpp"
#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

namespace {

/// g(p) with p = (x, xi) packed into 2n doubles.
using Fn = std::function<std::optional<cplx>(const double* p)>;

struct FdStencil {
  int count;
  int offset[4];
  double weight[4];
};

FdStencil first_derivative(int order) {
  if (order == 4) return {4, {-2, -1, 1, 2}, {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0}};
  return {2, {-1, 1, 0, 0}, {-0.5, 0.5, 0.0, 0.0}};
}

enum class Field { X, Xi };

/// Tilde field at p: X_i = (e_i - xi_i xi, 0), Xi_i = (-x_i xi, e_i - xi_i xi).
void field_vector(Field f, int i, int n, const double* p, double* v) {
  const double* x = p;
  const double* xi = p + n;
  for (int d = 0; d < n; ++d) {
    const double e = d == i ? 1.0 : 0.0;
    if (f == Field::X) {
      v[d] = e - xi[i] * xi[d];
      v[n + d] = 0.0;
    } else {
      v[d] = -x[i] * xi[d];
      v[n + d] = e - xi[i] * xi[d];
    }
  }
}

Fn along(Fn g, Field f, int i, int n, const StencilSpec& st) {
  const double h = f == Field::X ? st.hx : st.hxi;
  const FdStencil fd = first_derivative(st.order);
  return [g = std::move(g), f, i, n, h, fd](const double* p) -> std::optional<cplx> {
    double v[8], q[8];
    field_vector(f, i, n, p, v);
    cplx s = 0.0;
    for (int a = 0; a < fd.count; ++a) {
      for (int d = 0; d < 2 * n; ++d) q[d] = p[d] + fd.offset[a] * h * v[d];
      const auto val = g(q);
      if (!val) return std::nullopt;
      s += fd.weight[a] * *val;
    }
    return s / h;
  };
}

Fn base(const PsiSource& psi) {
  const int n = psi.n();
  return [&psi, n](const double* p) { return psi(p, p + n); };
}

/// J_ij g - c (xi_i X_j g - xi_j X_i g).
Fn shifted(const Fn& g, int i, int j, double c, int n, const StencilSpec& st) {
  Fn a = along(along(g, Field::Xi, j, n, st), Field::X, i, n, st);
  Fn b = along(along(g, Field::Xi, i, n, st), Field::X, j, n, st);
  Fn xj, xi_;
  if (c != 0.0) {
    xj = along(g, Field::X, j, n, st);
    xi_ = along(g, Field::X, i, n, st);
  }
  return [a, b, xj, xi_, i, j, c, n](const double* p) -> std::optional<cplx> {
    const auto va = a(p);
    const auto vb = b(p);
    if (!va || !vb) return std::nullopt;
    cplx r = *va - *vb;
    if (c != 0.0) {
      const auto vj = xj(p);
      const auto vi = xi_(p);
      if (!vj || !vi) return std::nullopt;
      r -= c * (p[n + i] * *vj - p[n + j] * *vi);
    }
    return r;
  };
}

std::optional<cplx> at_point(const Fn& g, int n, const double* x, const double* xi) {
  double p[8];
  for (int d = 0; d < n; ++d) {
    p[d] = x[d];
    p[n + d] = xi[d];
  }
  return g(p);
}

void check_axes(int n, int i, int j) {
  require(i >= 0 && i < n && j >= 0 && j < n, "operators: axis index out of range");
}

}  // namespace

void StencilSpec::validate() const {
  require(hx > 0.0 && hxi > 0.0, "StencilSpec: steps must be positive");
  require(order == 2 || order == 4, "StencilSpec: order must be 2 or 4");
}

ExactPsi::ExactPsi(Phantom ph, LineRule rule) : sampler_(std::move(ph)), rule_(std::move(rule)) {}

std::optional<cplx> ExactPsi::operator()(const double* x, const double* xi) const {
  const std::size_t n = static_cast<std::size_t>(sampler_.n());
  return extended_J(sampler_, {x, n}, {xi, n}, rule_);
}

std::optional<cplx> InterpolatedPsi::operator()(const double* x, const double* xi) const {
  const std::size_t n = static_cast<std::size_t>(interp_.n());
  return interp_({x, n}, {xi, n});
}

std::optional<cplx> HomogeneousPsi::operator()(const double* x, const double* xi) const {
  const int n = base_.n();
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) r2 += xi[d] * xi[d];
  require(r2 > 0.0, "HomogeneousPsi: xi = 0");
  const double r = std::sqrt(r2);
  double u[4];
  for (int d = 0; d < n; ++d) u[d] = xi[d] / r;
  const auto v = base_(x, u);
  if (!v) return std::nullopt;
  return std::pow(r, lambda_) * *v;
}

std::optional<cplx> apply_X(const PsiSource& psi, int i, const double* x, const double* xi, const StencilSpec& st) {
  st.validate();
  check_axes(psi.n(), i, i);
  return at_point(along(base(psi), Field::X, i, psi.n(), st), psi.n(), x, xi);
}

std::optional<cplx> apply_Xi(const PsiSource& psi, int i, const double* x, const double* xi,
                             const StencilSpec& st) {
  st.validate();
  check_axes(psi.n(), i, i);
  return at_point(along(base(psi), Field::Xi, i, psi.n(), st), psi.n(), x, xi);
}

std::optional<cplx> apply_john_ambient(const PsiSource& psi, int i, int j, const double* x, const double* xi,
                                       const StencilSpec& st) {
  st.validate();
  const int n = psi.n();
  check_axes(n, i, j);
  const FdStencil fd = first_derivative(st.order);
  double px[4], pxi[4];
  // d^2 psi / dx^a dxi^b by the tensor product of first-derivative stencils.
  auto mixed = [&](int a, int b) -> std::optional<cplx> {
    cplx s = 0.0;
    for (int u = 0; u < fd.count; ++u)
      for (int v = 0; v < fd.count; ++v) {
        for (int d = 0; d < n; ++d) {
          px[d] = x[d] + (d == a ? fd.offset[u] * st.hx : 0.0);
          pxi[d] = xi[d] + (d == b ? fd.offset[v] * st.hxi : 0.0);
        }
        const auto val = psi(px, pxi);
        if (!val) return std::nullopt;
        s += fd.weight[u] * fd.weight[v] * *val;
      }
    return s / (st.hx * st.hxi);
  };
  if (i == j) return cplx(0.0);
  const auto a = mixed(i, j);
  const auto b = mixed(j, i);
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

std::optional<cplx> apply_john_intrinsic(const PsiSource& psi, int i, int j, const double* x, const double* xi,
                                         const StencilSpec& st) {
  return apply_john_shifted(psi, i, j, 0.0, x, xi, st);
}

std::optional<cplx> apply_john_shifted(const PsiSource& psi, int i, int j, double c, const double* x,
                                       const double* xi, const StencilSpec& st) {
  st.validate();
  check_axes(psi.n(), i, j);
  return at_point(shifted(base(psi), i, j, c, psi.n(), st), psi.n(), x, xi);
}

std::optional<cplx> apply_delta_xi(const PsiSource& psi, int l, const double* x, const double* xi,
                                   const StencilSpec& st) {
  st.validate();
  require(l >= 0, "apply_delta_xi: negative power");
  const int n = psi.n();
  Fn g = base(psi);
  for (int it = 0; it < l; ++it) {
    std::vector<Fn> terms;
    for (int i = 0; i < n; ++i) terms.push_back(along(along(g, Field::Xi, i, n, st), Field::Xi, i, n, st));
    g = [terms](const double* p) -> std::optional<cplx> {
      cplx s = 0.0;
      for (const auto& t : terms) {
        const auto v = t(p);
        if (!v) return std::nullopt;
        s -= *v;
      }
      return s;
    };
  }
  return at_point(g, n, x, xi);
}

std::optional<cplx> apply_composite(const PsiSource& psi, const IndexTuple& tuple, const double* x,
                                    const double* xi, const StencilSpec& st) {
  st.validate();
  const int n = psi.n();
  const int k = static_cast<int>(tuple.size());
  require(k == psi.m() + 1, "apply_composite: tuple must have m + 1 pairs");
  Fn g = base(psi);
  for (int l = k; l >= 1; --l) {
    const auto [i, j] = tuple[l - 1];
    check_axes(n, i, j);
    g = shifted(g, i, j, lemma32_coefficient(l, psi.m() - 1, k), n, st);
  }
  return at_point(g, n, x, xi);
}

double lemma32_coefficient(int l, double lambda, int k) {
  require(l >= 1 && l <= k, "lemma32_coefficient: need 1 <= l <= k");
  return lambda - k + l + 1;
}

PerturbedPsi::PerturbedPsi(const PsiSource& base, double amplitude, std::uint64_t seed)
    : base_(base), amplitude_(amplitude) {
  const int n = base.n(), deg = base.m() + 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Exponent vectors of total degree deg in lexicographic order.
  std::vector<int> e(n, 0);
  std::function<void(int, int)> rec = [&](int axis, int left) {
    if (axis == n - 1) {
      e[axis] = left;
      p_.terms.push_back({e, cplx(normal(rng), 0.0)});
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[axis] = k;
      rec(axis + 1, left - k);
    }
  };
  rec(0, deg);
}

std::optional<cplx> PerturbedPsi::operator()(const double* x, const double* xi) const {
  const auto b = base_(x, xi);
  if (!b) return std::nullopt;
  const int n = base_.n();
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) r2 += xi[d] * xi[d];
  const double r = std::sqrt(r2);
  RVec u(n);
  double xu = 0.0, x2 = 0.0;
  for (int d = 0; d < n; ++d) {
    u[d] = xi[d] / r;
    xu += x[d] * u[d];
    x2 += x[d] * x[d];
  }
  const double perp2 = x2 - xu * xu;
  return *b + amplitude_ * std::pow(r, base_.m() - 1) * std::exp(-0.5 * perp2) * p_.eval(u);
}

std::vector<TangentPoint> sample_tangent_points(int n, std::size_t count, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<TangentPoint> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    RVec xi(n), w(n);
    for (auto& v : xi) v = normal(rng);
    for (auto& v : w) v = normal(rng);
    const double r = std::sqrt(norm2(xi));
    if (r < 1e-3) continue;
    for (auto& v : xi) v /= r;
    const double c = dot(w, xi);
    for (int d = 0; d < n; ++d) w[d] -= c * xi[d];
    const double wn = std::sqrt(norm2(w));
    if (wn < 1e-3) continue;
    const double rad = radius * std::pow(uni(rng), 1.0 / (n - 1));
    for (auto& v : w) v *= rad / wn;
    pts.push_back({w, xi});
  }
  return pts;
}

ResidualStats residual_stats(const std::function<std::optional<cplx>(const TangentPoint&)>& op,
                             const std::vector<TangentPoint>& points) {
  std::vector<double> mag(points.size(), -1.0);
  parallel_for(points.size(), [&](std::size_t q) {
    const auto v = op(points[q]);
    if (v) mag[q] = std::abs(*v);
  });
  ResidualStats r;
  double ss = 0.0;
  for (double v : mag) {
    if (v < 0.0) {
      ++r.excluded;
      continue;
    }
    ++r.points_used;
    r.max_residual = std::max(r.max_residual, v);
    ss += v * v;
  }
  r.rms_residual = r.points_used ? std::sqrt(ss / r.points_used) : 0.0;
  return r;
}

ResidualStats composite_range_residual(const PsiSource& psi, const IndexTuple& tuple, const StencilSpec& st,
                                       const std::vector<TangentPoint>& points) {
  ResidualStats r = residual_stats(
      [&](const TangentPoint& p) { return apply_composite(psi, tuple, p.x.data(), p.xi.data(), st); }, points);
  r.tuple = tuple;
  r.h = st.hx;
  r.order = st.order;
  return r;
}

std::vector<IndexTuple> tuples_ordered(int n, int m) {
  std::vector<IndexPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<IndexTuple> out{IndexTuple{}};
  for (int f = 0; f <= m; ++f) {
    std::vector<IndexTuple> next;
    for (const auto& t : out)
      for (const auto& p : pairs) {
        IndexTuple u = t;
        u.push_back(p);
        next.push_back(std::move(u));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<IndexTuple> tuples_sampled(int n, int m, std::size_t count, std::uint64_t seed) {
  std::vector<IndexPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::size_t total = 1;
  for (int f = 0; f <= m; ++f) total *= pairs.size();
  std::vector<std::size_t> codes(total);
  for (std::size_t c = 0; c < total; ++c) codes[c] = c;
  // Partial Fisher-Yates with a modulus draw keeps the sample identical across standard libraries.
  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(count, total);
  for (std::size_t a = 0; a < take; ++a) std::swap(codes[a], codes[a + rng() % (total - a)]);
  std::vector<IndexTuple> out;
  for (std::size_t a = 0; a < take; ++a) {
    IndexTuple t(m + 1);
    std::size_t c = codes[a];
    for (int f = m; f >= 0; --f) {
      t[f] = pairs[c % pairs.size()];
      c /= pairs.size();
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<IndexTuple> default_tuples(int n, int m, std::uint64_t seed) {
  std::vector<IndexTuple> out = tuples_ordered(n, m);
  if (std::pow(static_cast<double>(n), 2 * m + 2) > 4096.0) {
    const auto extra = tuples_sampled(n, m, 64, seed);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

std::optional<cplx> ExactSpectral::operator()(const double* y, const double* xi) const {
  const std::size_t n = static_cast<std::size_t>(ph_.n);
  return kSqrt2Pi * contract_power(fourier_value(ph_, {y, n}), {xi, n});
}

std::optional<cplx> fourier_annihilator(const SpectralSource& src, const IndexTuple& tuple, const double* y,
                                        double theta, double h) {
  const int n = src.n();
  require(n == 3, "fourier_annihilator: implemented for n = 3");
  require(h > 0.0, "fourier_annihilator: step must be positive");
  RVec yv(y, y + n);
  const double ry = std::sqrt(norm2(yv));
  require(ry > 0.0, "fourier_annihilator: y = 0");
  RVec yh = yv;
  for (auto& v : yh) v /= ry;
  const auto B = frame_of(yh);
  const int c = static_cast<int>(tuple.size());
  // In-plane components of V = y_i e_j - y_j e_i for each factor.
  std::vector<std::array<double, 2>> V(c);
  for (int k = 0; k < c; ++k) {
    const auto [i, j] = tuple[k];
    check_axes(n, i, j);
    for (int a = 0; a < 2; ++a) V[k][a] = y[i] * B[a][j] - y[j] * B[a][i];
  }
  const int m = src.m();
  // profile(L, theta): the degree (m - L) profile after the L rightmost factors.
  std::function<std::optional<cplx>(int, double)> profile = [&](int L, double th) -> std::optional<cplx> {
    const double ct = std::cos(th), stt = std::sin(th);
    if (L == 0) {
      double xi[3];
      for (int d = 0; d < n; ++d) xi[d] = ct * B[0][d] + stt * B[1][d];
      return src(y, xi);
    }
    const auto& v = V[c - L];
    const double vr = v[0] * ct + v[1] * stt;
    const double vt = -v[0] * stt + v[1] * ct;
    const double deg = m - (L - 1);
    const auto g = profile(L - 1, th);
    const auto gp = profile(L - 1, th + h);
    const auto gm = profile(L - 1, th - h);
    if (!g || !gp || !gm) return std::nullopt;
    return deg * vr * *g + vt * (*gp - *gm) / (2.0 * h);
  };
  return profile(c, theta);
}

std::vector<FrequencyPoint> sample_frequency_points(int n, std::size_t count, double r_min, double r_max,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<FrequencyPoint> pts;
  while (pts.size() < count) {
    RVec y(n);
    for (auto& v : y) v = normal(rng);
    const double r = std::sqrt(norm2(y));
    if (r < 1e-3) continue;
    const double rad = r_min + (r_max - r_min) * uni(rng);
    for (auto& v : y) v *= rad / r;
    pts.push_back({y, 2.0 * kPi * uni(rng)});
  }
  return pts;
}

ResidualStats fourier_annihilator_residual(const SpectralSource& src, const IndexTuple& tuple, double h,
                                           const std::vector<FrequencyPoint>& points) {
  std::vector<double> mag(points.size(), -1.0);
  parallel_for(points.size(), [&](std::size_t q) {
    const auto v = fourier_annihilator(src, tuple, points[q].y.data(), points[q].theta, h);
    if (v) mag[q] = std::abs(*v);
  });
  ResidualStats r;
  r.tuple = tuple;
  r.h = h;
  r.order = 2;
  double ss = 0.0;
  for (double v : mag) {
    if (v < 0.0) {
      ++r.excluded;
      continue;
    }
    ++r.points_used;
    r.max_residual = std::max(r.max_residual, v);
    ss += v * v;
  }
  r.rms_residual = r.points_used ? std::sqrt(ss / r.points_used) : 0.0;
  return r;
}

std::string residual_json(const ResidualStats& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (const auto& [a, b] : r.tuple) t.push_back({a + 1, b + 1});
  j["tuple"] = t;
  j["max_residual"] = r.max_residual;
  j["rms_residual"] = r.rms_residual;
  j["points_used"] = r.points_used;
  j["excluded"] = r.excluded;
  j["h"] = r.h;
  j["order"] = r.order;
  return j.dump();
}

}  // namespace tensorray

#include "tensorray/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "tensorray/spectral.hpp"

namespace tensorray {

namespace {

// Probabilists' Hermite polynomial He_k(z).
double hermite_he(int k, double z) {
  double a = 1.0, b = z;
  if (k == 0) return a;
  for (int j = 1; j < k; ++j) {
    const double c = z * b - j * a;
    a = b;
    b = c;
  }
  return b;
}

// E[u^k] for u ~ N(0, s^2).
double gaussian_moment(int k, double s) {
  if (k % 2) return 0.0;
  double r = 1.0;
  for (int j = k - 1; j > 0; j -= 2) r *= j;
  return r * std::pow(s, k);
}

}  // namespace

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms) {
    int s = 0;
    for (int p : t.powers) s += p;
    d = std::max(d, s);
  }
  return d;
}

cplx Polynomial::eval(std::span<const double> u) const {
  cplx s = 0.0;
  for (const auto& t : terms) {
    double p = 1.0;
    for (std::size_t d = 0; d < t.powers.size(); ++d)
      for (int e = 0; e < t.powers[d]; ++e) p *= u[d];
    s += t.coeff * p;
  }
  return s;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial out;
  for (const auto& t : terms) {
    if (t.powers[axis] == 0) continue;
    Monomial mo = t;
    mo.coeff *= static_cast<double>(mo.powers[axis]);
    mo.powers[axis] -= 1;
    out.terms.push_back(std::move(mo));
  }
  out.canonicalize();
  return out;
}

Polynomial Polynomial::times_coordinate(int axis) const {
  Polynomial out = *this;
  for (auto& t : out.terms) t.powers[axis] += 1;
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  canonicalize();
  return *this;
}

Polynomial& Polynomial::operator*=(cplx s) {
  for (auto& t : terms) t.coeff *= s;
  canonicalize();
  return *this;
}

void Polynomial::canonicalize() {
  std::map<std::vector<int>, cplx> acc;
  for (const auto& t : terms) acc[t.powers] += t.coeff;
  terms.clear();
  for (const auto& [p, c] : acc)
    if (c != 0.0) terms.push_back(Monomial{p, c});
}

Phantom Phantom::zero(int n, int m, double sigma) {
  Phantom ph;
  ph.n = n;
  ph.m = m;
  ph.sigma = sigma;
  ph.center.assign(n, 0.0);
  ph.comps.assign(sym_dim(n, m), Polynomial{});
  return ph;
}

void Phantom::validate() const {
  require(n >= 2 && n <= 4, "phantom: n must be in {2,3,4}");
  require(m >= 0, "phantom: negative rank");
  require(sigma > 0.0, "phantom: sigma must be positive");
  require(static_cast<int>(center.size()) == n, "phantom: center has wrong dimension");
  require(comps.size() == sym_dim(n, m), "phantom: component count does not match C(n+m-1, m)");
  for (const auto& p : comps) {
    for (const auto& t : p.terms) {
      require(static_cast<int>(t.powers.size()) == n, "phantom: monomial exponent vector has wrong length");
      for (int e : t.powers) require(e >= 0, "phantom: negative exponent");
    }
    require(p.degree() <= kMaxPhantomDegree, "phantom: polynomial degree exceeds 6");
  }
}

double Phantom::scale() const {
  const int steps = 9;
  const double span = 4.0 * sigma;
  std::vector<cplx> v(comps.size());
  RVec x(n);
  double best = 0.0;
  std::vector<int> j(n, 0);
  const int total = static_cast<int>(std::pow(steps, n));
  for (int f = 0; f < total; ++f) {
    int r = f;
    for (int d = 0; d < n; ++d) {
      j[d] = r % steps;
      r /= steps;
      x[d] = center[d] - span + 2.0 * span * j[d] / (steps - 1);
    }
    eval_into(*this, x, v.data());
    for (const auto& c : v) best = std::max(best, std::abs(c));
  }
  return best;
}

Phantom gaussian_phantom(int n, int m, double sigma) {
  Phantom ph = Phantom::zero(n, m, sigma);
  ph.comps[0].terms.push_back(Monomial{std::vector<int>(n, 0), 1.0});
  return ph;
}

Phantom random_phantom(int n, int m, int degree, unsigned long long seed, bool zero_mean, double sigma) {
  require(degree >= 0 && degree <= kMaxPhantomDegree, "random_phantom: degree out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Phantom ph = Phantom::zero(n, m, sigma);
  for (int d = 0; d < n; ++d) ph.center[d] = 0.5 * sigma * uni(rng) / std::sqrt(static_cast<double>(n));
  // All exponent vectors of total degree <= degree, in a fixed order.
  std::vector<std::vector<int>> exps;
  std::vector<int> e(n, 0);
  const int total = static_cast<int>(std::pow(degree + 1, n));
  for (int f = 0; f < total; ++f) {
    int r = f, s = 0;
    for (int d = 0; d < n; ++d) {
      e[d] = r % (degree + 1);
      r /= degree + 1;
      s += e[d];
    }
    if (s <= degree) exps.push_back(e);
  }
  for (auto& p : ph.comps) {
    for (const auto& ex : exps) {
      int s = 0;
      for (int v : ex) s += v;
      // Scale higher monomials by sigma^-s so every term has unit size at |u| ~ sigma.
      p.terms.push_back(Monomial{ex, uni(rng) * std::pow(sigma, -s)});
    }
    if (zero_mean) {
      cplx mean = 0.0;
      for (const auto& t : p.terms) {
        double mo = 1.0;
        for (int v : t.powers) mo *= gaussian_moment(v, sigma);
        mean += t.coeff * mo;
      }
      p.terms.push_back(Monomial{std::vector<int>(n, 0), -mean});
    }
    p.canonicalize();
  }
  return ph;
}

void eval_into(const Phantom& ph, std::span<const double> x, cplx* out) {
  const int n = ph.n;
  double u[4];
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) {
    u[d] = x[d] - ph.center[d];
    r2 += u[d] * u[d];
  }
  const double g = std::exp(-0.5 * r2 / (ph.sigma * ph.sigma));
  // Power table u_d^k, k <= degree cap.
  double pw[4][kMaxPhantomDegree + 2];
  for (int d = 0; d < n; ++d) {
    pw[d][0] = 1.0;
    for (int k = 1; k <= kMaxPhantomDegree + 1; ++k) pw[d][k] = pw[d][k - 1] * u[d];
  }
  for (std::size_t c = 0; c < ph.comps.size(); ++c) {
    cplx s = 0.0;
    for (const auto& t : ph.comps[c].terms) {
      double p = 1.0;
      for (int d = 0; d < n; ++d) p *= pw[d][t.powers[d]];
      s += t.coeff * p;
    }
    out[c] = s * g;
  }
}

SymTensor eval(const Phantom& ph, std::span<const double> x) {
  require(static_cast<int>(x.size()) == ph.n, "eval: point has wrong dimension");
  SymTensor t = SymTensor::zero(ph.n, ph.m);
  eval_into(ph, x, t.c.data());
  return t;
}

SymTensor fourier_value(const Phantom& ph, std::span<const double> y) {
  const int n = ph.n;
  require(static_cast<int>(y.size()) == n, "fourier_value: frequency has wrong dimension");
  const double s = ph.sigma;
  double y2 = 0.0, yc = 0.0;
  for (int d = 0; d < n; ++d) {
    y2 += y[d] * y[d];
    yc += y[d] * ph.center[d];
  }
  const cplx base = std::pow(s, n) * std::exp(-0.5 * s * s * y2) * std::exp(cplx(0.0, -yc));
  // (i d/dy)^k applied to exp(-s^2 y^2 / 2) gives (-i s)^k He_k(s y) exp(...).
  cplx table[4][kMaxPhantomDegree + 2];
  const cplx mis(0.0, -s);
  for (int d = 0; d < n; ++d) {
    cplx pk = 1.0;
    for (int k = 0; k <= kMaxPhantomDegree + 1; ++k) {
      table[d][k] = pk * hermite_he(k, s * y[d]);
      pk *= mis;
    }
  }
  SymTensor t = SymTensor::zero(n, ph.m);
  for (std::size_t c = 0; c < ph.comps.size(); ++c) {
    cplx acc = 0.0;
    for (const auto& term : ph.comps[c].terms) {
      cplx p = term.coeff;
      for (int d = 0; d < n; ++d) p *= table[d][term.powers[d]];
      acc += p;
    }
    t.c[c] = acc * base;
  }
  return t;
}

Phantom potential_field(const Phantom& v) {
  v.validate();
  const int n = v.n;
  const int m = v.m + 1;
  Phantom f = Phantom::zero(n, m, v.sigma);
  f.center = v.center;
  const auto& bf = sym_basis(n, m);
  const auto& bv = sym_basis(n, v.m);
  const double inv_s2 = 1.0 / (v.sigma * v.sigma);
  // d_a [p e^{-|u|^2/2s^2}] = (d_a p - u_a p / s^2) e^{...}
  auto grad = [&](const Polynomial& p, int a) {
    Polynomial out = p.derivative(a);
    Polynomial q = p.times_coordinate(a);
    q *= -inv_s2;
    out += q;
    return out;
  };
  for (std::size_t k = 0; k < bf.size(); ++k) {
    const auto& idx = bf.index(k).entries;
    Polynomial acc;
    for (int slot = 0; slot < m; ++slot) {
      std::vector<int> rest;
      for (int r = 0; r < m; ++r)
        if (r != slot) rest.push_back(idx[r]);
      acc += grad(v.comps[bv.position(rest)], idx[slot]);
    }
    acc *= 1.0 / m;
    f.comps[k] = acc;
  }
  f.validate();
  return f;
}

GridField sample_on_grid(const Phantom& ph, const GridSpec& grid) {
  require(grid.n == ph.n, "sample_on_grid: dimension mismatch");
  GridField g = GridField::zero(grid, ph.m);
  std::vector<int> j(grid.n);
  RVec x(grid.n);
  std::vector<cplx> v(g.comps.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.unflat(f, j.data());
    for (int d = 0; d < grid.n; ++d) x[d] = grid.coord(j[d]);
    eval_into(ph, x, v.data());
    for (std::size_t c = 0; c < v.size(); ++c) g.comps[c][f] = v[c];
  }
  return g;
}

GridField solenoidal_phantom(const Phantom& seed, const GridSpec& grid) {
  seed.validate();
  SpectralField fh = sample_fourier(seed, grid);
  return field_ifft(solenoidal_project(fh));
}

LineRestriction restrict_to_line(const Phantom& ph, std::span<const double> x,
                                 std::span<const double> xi) {
  const int n = ph.n;
  const int m = ph.m;
  double a[4], b[4];
  double ax = 0.0;
  for (int d = 0; d < n; ++d) {
    a[d] = x[d] - ph.center[d];
    ax += a[d] * xi[d];
  }
  LineRestriction lr;
  lr.sigma = ph.sigma;
  lr.t0 = -ax;
  double dist2 = 0.0;
  for (int d = 0; d < n; ++d) {
    b[d] = a[d] + lr.t0 * xi[d];
    dist2 += b[d] * b[d];
  }
  lr.g0 = std::exp(-0.5 * dist2 / (ph.sigma * ph.sigma));
  const RVec w = power_weights(m, std::span<const double>(xi.data(), n));
  lr.q.assign(kMaxPhantomDegree + 1, 0.0);
  // (b_d + s xi_d)^k coefficient tables via the binomial expansion.
  double bin[4][kMaxPhantomDegree + 1][kMaxPhantomDegree + 1];
  for (int d = 0; d < n; ++d) {
    for (int k = 0; k <= kMaxPhantomDegree; ++k) {
      double c = 1.0;  // C(k, j)
      for (int j = 0; j <= k; ++j) {
        bin[d][k][j] = c * std::pow(b[d], k - j) * std::pow(xi[d], j);
        c = c * (k - j) / (j + 1);
      }
    }
  }
  double poly[kMaxPhantomDegree + 1], tmp[kMaxPhantomDegree + 1];
  for (std::size_t c = 0; c < ph.comps.size(); ++c) {
    if (w[c] == 0.0) continue;
    for (const auto& t : ph.comps[c].terms) {
      std::fill(poly, poly + kMaxPhantomDegree + 1, 0.0);
      poly[0] = 1.0;
      int deg = 0;
      for (int d = 0; d < n; ++d) {
        const int k = t.powers[d];
        if (k == 0) continue;
        std::fill(tmp, tmp + kMaxPhantomDegree + 1, 0.0);
        for (int i = 0; i <= deg; ++i)
          for (int j = 0; j <= k; ++j) tmp[i + j] += poly[i] * bin[d][k][j];
        deg += k;
        std::copy(tmp, tmp + kMaxPhantomDegree + 1, poly);
      }
      for (int i = 0; i <= deg; ++i) lr.q[i] += w[c] * t.coeff * poly[i];
    }
  }
  return lr;
}

}  // namespace tensorray

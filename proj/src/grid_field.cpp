#include "tensorray/grid_field.hpp"

#include <cmath>

#include "tensorray/tensor_algebra.hpp"

namespace tensorray {

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(N);
  return s;
}

std::size_t GridSpec::flat(std::span<const int> j) const {
  std::size_t f = 0;
  for (int d = 0; d < n; ++d) f = f * N + j[d];
  return f;
}

void GridSpec::unflat(std::size_t f, int* j) const {
  for (int d = n - 1; d >= 0; --d) {
    j[d] = static_cast<int>(f % N);
    f /= N;
  }
}

GridField GridField::zero(const GridSpec& g, int m) {
  GridField f;
  f.grid = g;
  f.m = m;
  f.comps.assign(sym_dim(g.n, m), CVec(g.size(), 0.0));
  return f;
}

void GridField::sample(std::span<const double> x, cplx* out) const {
  const int n = grid.n;
  const std::size_t nc = comps.size();
  for (std::size_t c = 0; c < nc; ++c) out[c] = 0.0;
  const double h = grid.h();
  int j0[4];
  double frac[4];
  for (int d = 0; d < n; ++d) {
    const double s = (x[d] + grid.L) / h;
    const double fl = std::floor(s);
    if (fl < 0.0 || fl > grid.N - 2) return;
    j0[d] = static_cast<int>(fl);
    frac[d] = s - fl;
  }
  int j[4];
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (corner >> d) & 1;
      j[d] = j0[d] + bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    if (w == 0.0) continue;
    const std::size_t f = grid.flat(std::span<const int>(j, n));
    for (std::size_t c = 0; c < nc; ++c) out[c] += w * comps[c][f];
  }
}

double GridField::l2_norm() const {
  const auto& b = sym_basis(grid.n, m);
  double s = 0.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double sc = 0.0;
    for (const auto& v : comps[c]) sc += std::norm(v);
    s += b.multiplicity(c) * sc;
  }
  return std::sqrt(s * std::pow(grid.h(), grid.n));
}

double relative_l2(const GridField& a, const GridField& b) {
  require(a.grid.n == b.grid.n && a.grid.N == b.grid.N && a.m == b.m,
          "relative_l2: grid or rank mismatch");
  GridField d = a;
  for (std::size_t c = 0; c < d.comps.size(); ++c)
    for (std::size_t k = 0; k < d.comps[c].size(); ++k) d.comps[c][k] -= b.comps[c][k];
  const double nb = b.l2_norm();
  return nb > 0.0 ? d.l2_norm() / nb : d.l2_norm();
}

}  // namespace tensorray

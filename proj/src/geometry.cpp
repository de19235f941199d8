#include "tensorray/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tensorray {

void gauss_legendre(int count, RVec& nodes, RVec& weights) {
  require(count >= 1, "gauss_legendre: need at least one node");
  nodes.assign(count, 0.0);
  weights.assign(count, 0.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    // Newton on P_count from the Chebyshev-type initial guess; root i counts down from +1.
    double z = std::cos(kPi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[count - 1 - i] = z;
    nodes[i] = -z;
    weights[count - 1 - i] = w;
    weights[i] = w;
  }
  if (count % 2 == 1) nodes[count / 2] = 0.0;
}

std::vector<RVec> frame_of(std::span<const double> xi) {
  const int n = static_cast<int>(xi.size());
  const double s = xi[n - 1] >= 0.0 ? 1.0 : -1.0;
  RVec v(xi.begin(), xi.end());
  v[n - 1] += s;
  double vv = 0.0;
  for (double a : v) vv += a * a;
  std::vector<RVec> frame(n - 1, RVec(n, 0.0));
  for (int a = 0; a < n - 1; ++a)
    for (int i = 0; i < n; ++i) frame[a][i] = (i == a ? 1.0 : 0.0) - 2.0 * v[i] * v[a] / vv;
  return frame;
}

namespace {

void finalize(SphereAtlas& at) {
  at.frames.resize(at.size());
  for (std::size_t k = 0; k < at.size(); ++k) {
    const std::size_t p = at.pairing[k];
    if (p < k) {
      // Exact antipode of the earlier partner; same weight.
      for (int d = 0; d < at.n; ++d) at.directions[k][d] = -at.directions[p][d];
      at.weights[k] = at.weights[p];
    }
  }
  for (std::size_t k = 0; k < at.size(); ++k) at.frames[k] = frame_of(at.directions[k]);
}

SphereAtlas atlas_s1(int count) {
  SphereAtlas at;
  at.n = 2;
  for (int a = 0; a < count; ++a) {
    const double phi = kPi * (2.0 * a + 1.0) / count;
    at.directions.push_back({std::cos(phi), std::sin(phi)});
    at.weights.push_back(2.0 * kPi / count);
    at.pairing.push_back((a + count / 2) % count);
  }
  at.exact_degree = count - 1;
  return at;
}

SphereAtlas atlas_s2(int polar, int azimuth) {
  SphereAtlas at;
  at.n = 3;
  RVec z, w;
  gauss_legendre(polar, z, w);
  for (int p = 0; p < polar; ++p) {
    at.polar_angles.push_back(std::acos(z[p]));
    const double r = std::sqrt(std::max(0.0, 1.0 - z[p] * z[p]));
    for (int a = 0; a < azimuth; ++a) {
      const double phi = 2.0 * kPi * a / azimuth;
      at.directions.push_back({r * std::cos(phi), r * std::sin(phi), z[p]});
      at.weights.push_back(w[p] * 2.0 * kPi / azimuth);
      at.pairing.push_back(static_cast<std::size_t>(polar - 1 - p) * azimuth + (a + azimuth / 2) % azimuth);
    }
  }
  at.exact_degree = std::min(2 * polar - 1, azimuth - 1);
  return at;
}

SphereAtlas atlas_s3(int polar, int azimuth) {
  SphereAtlas inner = atlas_s2(polar, azimuth);
  finalize(inner);
  SphereAtlas at;
  at.n = 4;
  const std::size_t ni = inner.size();
  for (int k = 1; k <= polar; ++k) {
    const double ang = kPi * k / (polar + 1);
    // Ascending z, mirrored exactly.
    const int kk = k <= polar / 2 ? k : polar + 1 - k;
    const double zabs = std::cos(kPi * kk / (polar + 1));
    const double z = k <= polar / 2 ? -zabs : zabs;
    const double wz = kPi / (polar + 1) * std::sin(ang) * std::sin(ang);
    const double r = std::sqrt(1.0 - z * z);
    for (std::size_t q = 0; q < ni; ++q) {
      const auto& om = inner.directions[q];
      at.directions.push_back({r * om[0], r * om[1], r * om[2], z});
      at.weights.push_back(wz * inner.weights[q]);
      at.pairing.push_back(static_cast<std::size_t>(polar - k) * ni + inner.pairing[q]);
    }
  }
  at.exact_degree = std::min(2 * polar - 1, inner.exact_degree);
  return at;
}

}  // namespace

SphereAtlas build_atlas(const AtlasParams& params) {
  SphereAtlas at;
  switch (params.n) {
    case 2:
      require(params.azimuth >= 2 && params.azimuth % 2 == 0, "build_atlas: azimuth count must be even and >= 2");
      at = atlas_s1(params.azimuth);
      break;
    case 3:
    case 4:
      require(params.polar >= 2 && params.polar % 2 == 0, "build_atlas: polar count must be even and >= 2");
      require(params.azimuth >= 2 && params.azimuth % 2 == 0, "build_atlas: azimuth count must be even and >= 2");
      at = params.n == 3 ? atlas_s2(params.polar, params.azimuth) : atlas_s3(params.polar, params.azimuth);
      break;
    default:
      throw Error("build_atlas: unsupported dimension (n must be 2, 3 or 4)");
  }
  at.params = params;
  finalize(at);
  return at;
}

std::size_t PlaneGrid::size() const {
  std::size_t s = 1;
  for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(N);
  return s;
}

void PlaneGrid::unflat(std::size_t f, int* j) const {
  for (int d = dim - 1; d >= 0; --d) {
    j[d] = static_cast<int>(f % N);
    f /= N;
  }
}

RVec PlaneGrid::embed(std::size_t f, const std::vector<RVec>& frame) const {
  int j[3];
  unflat(f, j);
  const int n = dim + 1;
  RVec x(n, 0.0);
  for (int a = 0; a < dim; ++a) {
    const double u = coord(j[a]);
    for (int i = 0; i < n; ++i) x[i] += u * frame[a][i];
  }
  return x;
}

cplx integrate_plane(const PlaneGrid& plane, std::span<const cplx> values) {
  require(values.size() == plane.size(), "integrate_plane: value count does not match grid");
  cplx s = 0.0;
  for (const auto& v : values) s += v;
  return s * std::pow(plane.h(), plane.dim);
}

LineRule LineRule::make(double t_max, int n_t) {
  require(t_max > 0.0 && n_t >= 3, "LineRule: need t_max > 0 and at least 3 nodes");
  LineRule r;
  r.t_max = t_max;
  r.n_t = n_t;
  const double dt = 2.0 * t_max / (n_t - 1);
  for (int j = 0; j < n_t; ++j) {
    r.nodes.push_back(-t_max + j * dt);
    r.weights.push_back((j == 0 || j == n_t - 1) ? 0.5 * dt : dt);
  }
  return r;
}

void write_atlas_csv(const SphereAtlas& atlas, std::ostream& out) {
  out << "k";
  for (int d = 0; d < atlas.n; ++d) out << ",xi_" << d + 1;
  out << ",weight,pair\n";
  out.precision(17);
  for (std::size_t k = 0; k < atlas.size(); ++k) {
    out << k;
    for (double c : atlas.directions[k]) out << ',' << c;
    out << ',' << atlas.weights[k] << ',' << atlas.pairing[k] << '\n';
  }
}

}  // namespace tensorray

namespace tensorray {

void lagrange4(const double* t, double x, double* w) {
  for (int i = 0; i < 4; ++i) {
    double num = 1.0, den = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      num *= x - t[j];
      den *= t[i] - t[j];
    }
    w[i] = num / den;
  }
}

DirectionStencil direction_stencil(const SphereAtlas& atlas, std::span<const double> xi) {
  DirectionStencil st;
  if (atlas.n == 2) {
    const int A = atlas.params.azimuth;
    const double dphi = 2.0 * kPi / A;
    double phi = std::atan2(xi[1], xi[0]);
    // Atlas angles are (a + 1/2) dphi.
    double s = phi / dphi - 0.5;
    const double fl = std::floor(s);
    const int a0 = static_cast<int>(fl);
    const double t[4] = {-1.0, 0.0, 1.0, 2.0};
    double w[4];
    lagrange4(t, s - fl, w);
    st.count = 4;
    for (int q = 0; q < 4; ++q) {
      st.index[q] = static_cast<std::size_t>(((a0 - 1 + q) % A + A) % A);
      st.weight[q] = w[q];
    }
    return st;
  }
  require(atlas.n == 3, "direction_stencil: only n = 2 and n = 3 atlases are supported");
  const int P = atlas.params.polar;
  const int A = atlas.params.azimuth;
  const double theta = std::acos(std::clamp(xi[2], -1.0, 1.0));
  double phi = std::atan2(xi[1], xi[0]);
  if (phi < 0.0) phi += 2.0 * kPi;
  // Extended ring coordinate: position i in increasing-theta order.
  auto ring_theta = [&](int i) {
    if (i < 0) return -atlas.polar_angles[P - 1 - (-1 - i)];
    if (i >= P) return 2.0 * kPi - atlas.polar_angles[P - 1 - (2 * P - 1 - i)];
    return atlas.polar_angles[P - 1 - i];
  };
  int i0 = -1;
  while (i0 + 1 <= P && ring_theta(i0 + 1) <= theta) ++i0;
  double tr[4];
  for (int q = 0; q < 4; ++q) tr[q] = ring_theta(i0 - 1 + q);
  double wr[4];
  lagrange4(tr, theta, wr);
  const double dphi = 2.0 * kPi / A;
  const double s = phi / dphi;
  const double fl = std::floor(s);
  const int a0 = static_cast<int>(fl);
  const double ta[4] = {-1.0, 0.0, 1.0, 2.0};
  double wa[4];
  lagrange4(ta, s - fl, wa);
  st.count = 16;
  for (int q = 0; q < 4; ++q) {
    int i = i0 - 1 + q;
    int shift = 0;
    if (i < 0) {
      i = -1 - i;
      shift = A / 2;
    } else if (i >= P) {
      i = 2 * P - 1 - i;
      shift = A / 2;
    }
    const int ring = P - 1 - i;
    for (int r = 0; r < 4; ++r) {
      const int a = (((a0 - 1 + r + shift) % A) + A) % A;
      st.index[q * 4 + r] = static_cast<std::size_t>(ring) * A + a;
      st.weight[q * 4 + r] = wr[q] * wa[r];
    }
  }
  return st;
}

}  // namespace tensorray

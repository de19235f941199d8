#include "tensorray/tensor_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace tensorray {

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void enumerate_sorted(int n, int m, int start, std::vector<int>& cur,
                      std::vector<MultiIndex>& out) {
  if (static_cast<int>(cur.size()) == m) {
    out.push_back(MultiIndex{cur});
    return;
  }
  for (int a = start; a < n; ++a) {
    cur.push_back(a);
    enumerate_sorted(n, m, a, cur, out);
    cur.pop_back();
  }
}

// Unflattens a row-major index over [0,n)^m.
void unflatten(std::size_t f, int n, int m, int* idx) {
  for (int k = m - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(f % n);
    f /= n;
  }
}

using Matching = std::vector<std::pair<int, int>>;

void enumerate_matchings(std::vector<int>& free_slots, Matching& cur, std::vector<Matching>& out) {
  if (free_slots.empty()) {
    out.push_back(cur);
    return;
  }
  const int a = free_slots.front();
  for (std::size_t k = 1; k < free_slots.size(); ++k) {
    const int b = free_slots[k];
    std::vector<int> rest;
    for (std::size_t r = 1; r < free_slots.size(); ++r)
      if (r != k) rest.push_back(free_slots[r]);
    cur.emplace_back(a, b);
    enumerate_matchings(rest, cur, out);
    cur.pop_back();
  }
}

const std::vector<Matching>& matchings(int slots) {
  static std::mutex mu;
  static std::map<int, std::vector<Matching>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(slots);
  if (it != cache.end()) return it->second;
  std::vector<int> free_slots(slots);
  for (int i = 0; i < slots; ++i) free_slots[i] = i;
  std::vector<Matching> out;
  Matching cur;
  enumerate_matchings(free_slots, cur, out);
  return cache.emplace(slots, std::move(out)).first->second;
}

}  // namespace

int MultiIndex::multiplicity() const {
  double r = std::tgamma(static_cast<double>(entries.size()) + 1.0);
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j] == entries[i]) ++j;
    r /= std::tgamma(static_cast<double>(j - i) + 1.0);
    i = j;
  }
  return static_cast<int>(std::lround(r));
}

SymBasis::SymBasis(int n, int m) : n_(n), m_(m) {
  require(n >= 1 && m >= 0, "SymBasis: need n >= 1 and m >= 0");
  std::vector<int> cur;
  enumerate_sorted(n, m, 0, cur, indices_);
  mult_.reserve(indices_.size());
  for (const auto& mi : indices_) mult_.push_back(mi.multiplicity());
  const std::size_t total = ipow(n, m);
  full_to_canon_.resize(total);
  std::vector<int> idx(m);
  for (std::size_t f = 0; f < total; ++f) {
    unflatten(f, n, m, idx.data());
    std::sort(idx.begin(), idx.end());
    auto it = std::lower_bound(indices_.begin(), indices_.end(), idx,
                               [](const MultiIndex& a, const std::vector<int>& b) { return a.entries < b; });
    full_to_canon_[f] = static_cast<std::size_t>(it - indices_.begin());
  }
}

std::size_t SymBasis::position(std::span<const int> entries) const {
  require(static_cast<int>(entries.size()) == m_, "SymBasis::position: rank mismatch");
  std::size_t f = 0;
  for (int e : entries) {
    require(e >= 0 && e < n_, "SymBasis::position: axis label out of range");
    f = f * n_ + e;
  }
  return full_to_canon_[f];
}

const SymBasis& sym_basis(int n, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<SymBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, m}];
  if (!slot) slot = std::make_unique<SymBasis>(n, m);
  return *slot;
}

std::size_t sym_dim(int n, int m) {
  require(n >= 1 && m >= 0, "sym_dim: need n >= 1 and m >= 0");
  // C(n+m-1, m) by the multiplicative formula; exact in double for desk sizes.
  double r = 1.0;
  for (int k = 1; k <= m; ++k) r = r * (n - 1 + k) / k;
  return static_cast<std::size_t>(std::llround(r));
}

FullTensor FullTensor::zero(int n, int m) { return FullTensor{n, m, CVec(ipow(n, m), 0.0)}; }

std::size_t FullTensor::flat(std::span<const int> idx) const {
  std::size_t f = 0;
  for (int e : idx) f = f * n + e;
  return f;
}

SymTensor SymTensor::zero(int n, int m) { return SymTensor{n, m, CVec(sym_dim(n, m), 0.0)}; }

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  require(n == o.n && m == o.m, "SymTensor: shape mismatch");
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += o.c[k];
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  require(n == o.n && m == o.m, "SymTensor: shape mismatch");
  for (std::size_t k = 0; k < c.size(); ++k) c[k] -= o.c[k];
  return *this;
}

SymTensor& SymTensor::operator*=(cplx s) {
  for (auto& v : c) v *= s;
  return *this;
}

double SymTensor::norm() const {
  const auto& b = basis();
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += b.multiplicity(k) * std::norm(c[k]);
  return std::sqrt(s);
}

SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
SymTensor operator*(cplx s, SymTensor a) { return a *= s; }

FullTensor expand(const SymTensor& t) {
  FullTensor f = FullTensor::zero(t.n, t.m);
  const auto& b = t.basis();
  std::vector<int> idx(t.m);
  for (std::size_t k = 0; k < f.data.size(); ++k) {
    unflatten(k, t.n, t.m, idx.data());
    f.data[k] = t.c[b.position(idx)];
  }
  return f;
}

SymTensor symmetrize(const FullTensor& full) {
  require(full.n >= 1 && full.m >= 0 && full.data.size() == ipow(full.n, full.m),
          "symmetrize: array shape does not match rank/dimension");
  SymTensor t = SymTensor::zero(full.n, full.m);
  const auto& b = t.basis();
  std::vector<int> idx(full.m);
  for (std::size_t k = 0; k < full.data.size(); ++k) {
    unflatten(k, full.n, full.m, idx.data());
    t.c[b.position(idx)] += full.data[k];
  }
  for (std::size_t k = 0; k < t.c.size(); ++k) t.c[k] /= b.multiplicity(k);
  return t;
}

RVec power_weights(int m, std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  const auto& b = sym_basis(n, m);
  RVec w(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    double p = b.multiplicity(k);
    for (int e : b.index(k).entries) p *= v[e];
    w[k] = p;
  }
  return w;
}

cplx contract_power(const SymTensor& t, std::span<const double> v) {
  require(static_cast<int>(v.size()) == t.n, "contract_power: dimension mismatch");
  const auto& b = t.basis();
  cplx s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    double p = b.multiplicity(k);
    for (int e : b.index(k).entries) p *= v[e];
    s += p * t.c[k];
  }
  return s;
}

SymTensor vector_power(std::span<const double> v, int m) {
  require(m >= 0, "vector_power: negative rank");
  const int n = static_cast<int>(v.size());
  SymTensor t = SymTensor::zero(n, m);
  const auto& b = t.basis();
  for (std::size_t k = 0; k < b.size(); ++k) {
    double p = 1.0;
    for (int e : b.index(k).entries) p *= v[e];
    t.c[k] = p;
  }
  return t;
}

namespace {
RVec epsilon_matrix(std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  double yy = 0.0;
  for (double a : y) yy += a * a;
  require(yy > 0.0, "epsilon tensor: y must be nonzero");
  RVec p(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p[i * n + j] = (i == j ? 1.0 : 0.0) - y[i] * y[j] / yy;
  return p;
}
}  // namespace

SymTensor epsilon_tensor(std::span<const double> y) {
  const RVec p = epsilon_matrix(y);
  const int n = static_cast<int>(y.size());
  SymTensor t = SymTensor::zero(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const int e[2] = {i, j};
      t.at(e) = p[i * n + j];
    }
  return t;
}

SymTensor apply_each_slot(const SymTensor& t, std::span<const double> p) {
  const int n = t.n;
  require(static_cast<int>(p.size()) == n * n, "apply_each_slot: matrix shape mismatch");
  FullTensor cur = expand(t);
  std::vector<int> idx(t.m);
  for (int slot = 0; slot < t.m; ++slot) {
    FullTensor next = FullTensor::zero(n, t.m);
    for (std::size_t f = 0; f < cur.data.size(); ++f) {
      if (cur.data[f] == 0.0) continue;
      unflatten(f, n, t.m, idx.data());
      const int j = idx[slot];
      for (int i = 0; i < n; ++i) {
        const double pij = p[i * n + j];
        if (pij == 0.0) continue;
        idx[slot] = i;
        next.data[next.flat(idx)] += pij * cur.data[f];
      }
      idx[slot] = j;
    }
    cur = std::move(next);
  }
  // The result is symmetric, so reading canonical entries suffices.
  SymTensor out = SymTensor::zero(n, t.m);
  const auto& b = out.basis();
  for (std::size_t k = 0; k < b.size(); ++k) out.c[k] = cur.data[cur.flat(b.index(k).entries)];
  return out;
}

SymTensor tangential_project(const SymTensor& t, std::span<const double> y) {
  require(static_cast<int>(y.size()) == t.n, "tangential_project: dimension mismatch");
  return apply_each_slot(t, epsilon_matrix(y));
}

SymTensor contract_first(const SymTensor& t, std::span<const double> y) {
  require(t.m >= 1, "contract_first: rank must be positive");
  require(static_cast<int>(y.size()) == t.n, "contract_first: dimension mismatch");
  SymTensor out = SymTensor::zero(t.n, t.m - 1);
  const auto& b = out.basis();
  std::vector<int> idx(t.m);
  for (std::size_t k = 0; k < b.size(); ++k) {
    std::copy(b.index(k).entries.begin(), b.index(k).entries.end(), idx.begin() + 1);
    cplx s = 0.0;
    for (int p = 0; p < t.n; ++p) {
      idx[0] = p;
      s += y[p] * t.at(idx);
    }
    out.c[k] = s;
  }
  return out;
}

cplx power_contract_pair(const SymTensor& a, const SymTensor& b, std::span<const double> kern) {
  require(a.n == b.n && a.m == b.m, "power_contract_pair: dimension/rank mismatch");
  const int n = a.n;
  const int m = a.m;
  require(static_cast<int>(kern.size()) == n * n, "power_contract_pair: kernel shape mismatch");
  if (m == 0) return a.c[0] * std::conj(b.c[0]);
  const FullTensor fa = expand(a);
  const FullTensor fb = expand(b);
  const auto& ms = matchings(2 * m);
  const std::size_t half = fa.data.size();
  std::vector<int> s(2 * m);
  cplx total = 0.0;
  for (const auto& mt : ms) {
    cplx acc = 0.0;
    for (std::size_t fi = 0; fi < half; ++fi) {
      if (fa.data[fi] == 0.0) continue;
      unflatten(fi, n, m, s.data());
      for (std::size_t fj = 0; fj < half; ++fj) {
        if (fb.data[fj] == 0.0) continue;
        unflatten(fj, n, m, s.data() + m);
        double w = 1.0;
        for (const auto& [p, q] : mt) {
          w *= kern[s[p] * n + s[q]];
          if (w == 0.0) break;
        }
        if (w != 0.0) acc += w * fa.data[fi] * std::conj(fb.data[fj]);
      }
    }
    total += acc;
  }
  return total / static_cast<double>(ms.size());
}

cplx power_contract_pair(const SymTensor& a, const SymTensor& b, Kernel kernel,
                         std::span<const double> y) {
  const int n = a.n;
  if (kernel == Kernel::delta) {
    RVec k(n * n, 0.0);
    for (int i = 0; i < n; ++i) k[i * n + i] = 1.0;
    return power_contract_pair(a, b, k);
  }
  require(static_cast<int>(y.size()) == n, "power_contract_pair: epsilon kernel needs y in R^n");
  return power_contract_pair(a, b, epsilon_matrix(y));
}

}  // namespace tensorray

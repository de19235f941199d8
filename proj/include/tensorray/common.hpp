#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace tensorray {

using cplx = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2Pi = 2.5066282746310002;

/// Raised for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

inline double dot(const RVec& a, const RVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const RVec& a) { return dot(a, a); }

/// |S^{d-1}|, the area of the unit sphere in R^d.
double sphere_area(int d);

}  // namespace tensorray

#include "fracjump/clifford.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fracjump/errors.hpp"

namespace fracjump {

namespace {

void check_dimension(int n) {
  if (n < 1 || n > kMaxCliffordDim) {
    throw ParameterError("Clifford dimension must be in [1, " +
                         std::to_string(kMaxCliffordDim) + "], got " +
                         std::to_string(n));
  }
}

void check_same(const Multivector& a, const Multivector& b) {
  if (a.dimension() != b.dimension()) {
    throw ParameterError("Clifford dimension mismatch: " +
                         std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()));
  }
}

}  // namespace

Multivector::Multivector(int n) : n_(n) {
  check_dimension(n);
  coeffs_.assign(std::size_t{1} << n, 0.0);
}

Multivector::Multivector(int n, std::vector<double> coeffs)
    : n_(n), coeffs_(std::move(coeffs)) {
  check_dimension(n);
  if (coeffs_.size() != (std::size_t{1} << n)) {
    throw ParameterError("Multivector of Cl(" + std::to_string(n) + ") needs " +
                         std::to_string(1u << n) + " coefficients");
  }
}

Multivector Multivector::scalar(int n, double value) {
  Multivector m(n);
  m.coeffs_[0] = value;
  return m;
}

Multivector Multivector::blade(int n, std::uint32_t mask, double value) {
  Multivector m(n);
  if (mask >= m.coeffs_.size()) {
    throw ParameterError("blade mask out of range for Cl(" + std::to_string(n) + ")");
  }
  m.coeffs_[mask] = value;
  return m;
}

Multivector& Multivector::operator+=(const Multivector& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Multivector& Multivector::operator-=(const Multivector& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Multivector& Multivector::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

bool Multivector::is_finite() const noexcept {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

Multivector Paravector::embed() const {
  const int n = dimension();
  Multivector m(n);
  m[0] = x[0];
  for (int i = 1; i <= n; ++i) m[std::size_t{1} << (i - 1)] = x[i];
  return m;
}

int blade_grade(std::uint32_t mask) noexcept { return std::popcount(mask); }

int blade_product_sign(std::uint32_t a, std::uint32_t b) noexcept {
  // Moving each generator of b leftwards past the higher generators of a
  // costs one swap each; every shared generator then squares to -1.
  int swaps = 0;
  for (std::uint32_t t = a >> 1; t != 0; t >>= 1) swaps += std::popcount(t & b);
  swaps += std::popcount(a & b);
  return (swaps & 1) ? -1 : 1;
}

Multivector geometric_product(const Multivector& a, const Multivector& b) {
  check_same(a, b);
  const std::size_t size = a.size();
  Multivector out(a.dimension());
  for (std::uint32_t i = 0; i < size; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (std::uint32_t j = 0; j < size; ++j) {
      const double bj = b[j];
      if (bj == 0.0) continue;
      out[i ^ j] += blade_product_sign(i, j) * ai * bj;
    }
  }
  return out;
}

Multivector conjugate(const Multivector& a) {
  Multivector out = a;
  for (std::uint32_t m = 0; m < a.size(); ++m) {
    const int k = blade_grade(m);
    if (((k * (k + 1)) / 2) & 1) out[m] = -out[m];
  }
  return out;
}

double norm(const Multivector& a) {
  double s = 0.0;
  for (double c : a.coeffs()) s += c * c;
  return std::sqrt(s);
}

double sphere_area(int n) {
  if (n < 1) throw ParameterError("sphere_area needs n >= 1");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::exp(h * std::log(std::numbers::pi) - std::lgamma(h));
}

Multivector fundamental_solution(const Paravector& x) {
  const int n = x.dimension();
  double r2 = 0.0;
  for (double c : x.x) r2 += c * c;
  if (r2 == 0.0) throw SingularityError("fundamental solution evaluated at x = 0");
  const double r = std::sqrt(r2);
  const double scale = 1.0 / (sphere_area(n) * std::pow(r, n + 1));
  Multivector out(n);
  out[0] = x.x[0] * scale;
  for (int i = 1; i <= n; ++i) out[std::size_t{1} << (i - 1)] = -x.x[i] * scale;
  return out;
}

Multivector cauchy_riemann(const CliffordFn& u, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be positive");
  const std::size_t dim = x.size();
  if (dim < 2) throw ParameterError("cauchy_riemann needs a point of R^(n+1), n >= 1");
  const int n = static_cast<int>(dim) - 1;
  std::vector<double> p(x.begin(), x.end());
  Multivector out(n);
  for (std::size_t i = 0; i < dim; ++i) {
    p[i] = x[i] + h;
    Multivector diff = u(p);
    p[i] = x[i] - h;
    diff -= u(p);
    p[i] = x[i];
    diff *= 0.5 / h;
    if (i == 0) {
      out += diff;
    } else {
      out += geometric_product(Multivector::blade(n, 1u << (i - 1)), diff);
    }
  }
  return out;
}

}  // namespace fracjump

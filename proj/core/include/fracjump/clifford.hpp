#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fracjump {

inline constexpr int kMaxCliffordDim = 8;

// Element of the real Clifford algebra Cl(n) with generators e_1..e_n,
// e_i e_j + e_j e_i = -2 delta_ij. Coefficient index A is a bitmask over
// {1..n}: bit (i-1) set means e_i occurs in the blade e_A; index 0 is the
// scalar unit e_0 = 1.
class Multivector {
 public:
  Multivector() = default;
  // Zero element of Cl(n).
  explicit Multivector(int n);
  Multivector(int n, std::vector<double> coeffs);

  static Multivector scalar(int n, double value);
  // Single basis blade e_A with coefficient `value`.
  static Multivector blade(int n, std::uint32_t mask, double value = 1.0);

  int dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::span<double> coeffs() noexcept { return coeffs_; }
  double operator[](std::size_t mask) const { return coeffs_[mask]; }
  double& operator[](std::size_t mask) { return coeffs_[mask]; }

  Multivector& operator+=(const Multivector& o);
  Multivector& operator-=(const Multivector& o);
  Multivector& operator*=(double s);

  friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
  friend Multivector operator*(Multivector a, double s) { return a *= s; }
  friend Multivector operator*(double s, Multivector a) { return a *= s; }
  friend Multivector operator-(Multivector a) { return a *= -1.0; }

  bool is_finite() const noexcept;

 private:
  int n_ = 0;
  std::vector<double> coeffs_;
};

// Point x = x_0 + x_1 e_1 + ... + x_n e_n of R^(n+1) inside Cl(n).
struct Paravector {
  std::vector<double> x;  // n+1 components

  int dimension() const noexcept { return static_cast<int>(x.size()) - 1; }
  Multivector embed() const;
};

int blade_grade(std::uint32_t mask) noexcept;

// Sign of e_A e_B written as +/- e_{A xor B}.
int blade_product_sign(std::uint32_t a, std::uint32_t b) noexcept;

Multivector geometric_product(const Multivector& a, const Multivector& b);
Multivector conjugate(const Multivector& a);
double norm(const Multivector& a);

// Area of the unit sphere in R^(n+1).
double sphere_area(int n);

// E(x) = conj(x) / (sigma_n |x|^(n+1)); throws SingularityError at x = 0.
Multivector fundamental_solution(const Paravector& x);

using CliffordFn = std::function<Multivector(std::span<const double>)>;

// Central-difference D u(x) = sum_i e_i (u(x + h e_i) - u(x - h e_i)) / 2h.
Multivector cauchy_riemann(const CliffordFn& u, std::span<const double> x, double h);

}  // namespace fracjump

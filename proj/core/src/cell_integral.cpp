#include "fracjump/cell_integral.hpp"

#include <cmath>

#include "fracjump/errors.hpp"

namespace fracjump {

namespace {

// v * log(w + r) with the removable cases handled; r = sqrt(a^2 + v^2 + w^2).
double vlog(double v, double w, double a) {
  if (v == 0.0) return 0.0;
  const double r = std::sqrt(a * a + v * v + w * w);
  // w + r loses precision for w < 0; rewrite as (a^2 + v^2) / (r - w).
  const double s = w >= 0.0 ? w + r : (a * a + v * v) / (r - w);
  return v * std::log(s);
}

// Antiderivative of 1 / sqrt(a^2 + v^2 + w^2) in v and w.
double g(double a, double v, double w) {
  double out = vlog(v, w, a) + vlog(w, v, a);
  if (a != 0.0 && v != 0.0 && w != 0.0) {
    const double r = std::sqrt(a * a + v * v + w * w);
    out -= a * std::atan(v * w / (a * r));
  }
  return out;
}

// Integral of 1/r over the rectangle [v0, v1] x [w0, w1] at normal offset a.
double rect_inverse_r(double a, double v0, double v1, double w0, double w1) {
  return g(a, v1, w1) - g(a, v0, w1) - g(a, v1, w0) + g(a, v0, w0);
}

}  // namespace

void gauss_rule(int order, double* nodes, double* weights) {
  switch (order) {
    case 1:
      nodes[0] = 0.0;
      weights[0] = 2.0;
      return;
    case 2: {
      const double t = 1.0 / std::sqrt(3.0);
      nodes[0] = -t;
      nodes[1] = t;
      weights[0] = weights[1] = 1.0;
      return;
    }
    case 3: {
      const double t = std::sqrt(0.6);
      nodes[0] = -t;
      nodes[1] = 0.0;
      nodes[2] = t;
      weights[0] = weights[2] = 5.0 / 9.0;
      weights[1] = 8.0 / 9.0;
      return;
    }
    default:
      throw ParameterError("Gauss order must be 1, 2 or 3");
  }
}

std::array<double, 3> box_kernel_integral_3d(const Box& b, const Point& x) {
  // Integrating (y_i - x_i)/r^3 along y_i gives -1/r at the two faces.
  std::array<double, 3> k{};
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, l = (i + 2) % 3;
    const double v0 = b.lo[j] - x[j], v1 = b.hi[j] - x[j];
    const double w0 = b.lo[l] - x[l], w1 = b.hi[l] - x[l];
    const double hi = rect_inverse_r(b.hi[i] - x[i], v0, v1, w0, w1);
    const double lo = rect_inverse_r(b.lo[i] - x[i], v0, v1, w0, w1);
    k[i] = lo - hi;
  }
  return k;
}

std::array<double, kMaxGeomDim> box_kernel_gauss(const Box& b, const Point& x, int order) {
  const int d = b.dim();
  double nodes[3], weights[3];
  gauss_rule(order, nodes, weights);
  std::array<double, kMaxGeomDim> k{};
  std::array<int, kMaxGeomDim> idx{};
  double jac = 1.0;
  for (int i = 0; i < d; ++i) jac *= 0.5 * b.extent(i);
  for (;;) {
    double w = jac;
    double y[kMaxGeomDim];
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = 0.5 * (b.lo[i] + b.hi[i]) + 0.5 * b.extent(i) * nodes[idx[i]];
      y[i] = c - x[i];
      r2 += y[i] * y[i];
      w *= weights[idx[i]];
    }
    if (r2 > 0.0) {
      const double f = w / std::pow(r2, 0.5 * d);
      for (int i = 0; i < d; ++i) k[i] += f * y[i];
    }
    int i = 0;
    while (i < d && ++idx[i] == order) {
      idx[i] = 0;
      ++i;
    }
    if (i == d) break;
  }
  return k;
}

}  // namespace fracjump

#pragma once

#include <array>

#include "fracjump/geometry.hpp"

namespace fracjump {

// Gauss-Legendre nodes and weights on [-1, 1], order 1 to 3.
void gauss_rule(int order, double* nodes, double* weights);

// Exact integral over a box in R^3 of the vector kernel (y - x) / |y - x|^3,
// valid for x anywhere, including inside or on the box.
std::array<double, 3> box_kernel_integral_3d(const Box& b, const Point& x);

// Tensor Gauss-Legendre approximation of the same integral in R^d with
// `order` nodes per axis (1 = midpoint). Returns components 0..d-1.
std::array<double, kMaxGeomDim> box_kernel_gauss(const Box& b, const Point& x, int order);

}  // namespace fracjump

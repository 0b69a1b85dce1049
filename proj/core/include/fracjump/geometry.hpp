#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

namespace fracjump {

// Geometry runs in R^d for 2 <= d <= kMaxGeomDim. Coordinates beyond the
// active dimension are ignored and kept at zero.
inline constexpr int kMaxGeomDim = 8;

struct Point {
  std::array<double, kMaxGeomDim> c{};
  int dim = 0;

  Point() = default;
  explicit Point(int d) : dim(d) {}
  Point(std::initializer_list<double> xs);
  static Point from_span(std::span<const double> xs);

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }
  std::span<const double> span() const { return {c.data(), static_cast<std::size_t>(dim)}; }
};

Point operator+(Point a, const Point& b);
Point operator-(Point a, const Point& b);
Point operator*(Point a, double s);
double dot(const Point& a, const Point& b);
double norm(const Point& a);
double distance(const Point& a, const Point& b);

// Closed axis-aligned box; lo[i] == hi[i] is allowed (faces, points).
struct Box {
  Point lo;
  Point hi;

  Box() = default;
  Box(Point l, Point h) : lo(l), hi(h) {}
  static Box cube(const Point& lo, double side);

  int dim() const { return lo.dim; }
  double extent(int i) const { return hi[i] - lo[i]; }
  double max_extent() const;
  double volume() const;
  double diameter() const;
  Point center() const;
  bool contains(const Point& p) const;
  // Closed boxes share at least one point.
  bool intersects(const Box& o) const;
  bool contains(const Box& o) const;
  // Box grown by r on every side.
  Box expanded(double r) const;
};

// Gap between closed intervals [a0, a1] and [b0, b1]; zero when they meet.
inline double interval_gap(double a0, double a1, double b0, double b1) {
  if (a1 < b0) return b0 - a1;
  if (b1 < a0) return a0 - b1;
  return 0.0;
}

// Euclidean distance between two closed boxes.
double box_box_distance(const Box& a, const Box& b);
double point_box_distance(const Point& p, const Box& b);
Point clamp_to_box(const Point& p, const Box& b);

// Cube of the dyadic grid M_k: prod [c_i 2^-k, (c_i + 1) 2^-k]. Negative
// levels are coarser than the unit grid.
struct DyadicCube {
  int level = 0;
  int dim = 0;
  std::array<std::int64_t, kMaxGeomDim> corner{};

  double side() const { return std::ldexp(1.0, -level); }
  double diameter() const { return std::sqrt(static_cast<double>(dim)) * side(); }
  double volume() const { return std::pow(side(), dim); }
  Box box() const;
  Point center() const;
  DyadicCube parent() const;
  // Child number `which` in [0, 2^dim); bit i selects the upper half on axis i.
  DyadicCube child(unsigned which) const;
  int num_children() const { return 1 << dim; }

  friend bool operator==(const DyadicCube& a, const DyadicCube& b);
};

// Level-k grid cube containing p (lower-left convention on grid planes).
DyadicCube cube_containing(const Point& p, int level);

// Interiors of two grid cubes (any levels) are disjoint.
bool interiors_disjoint(const DyadicCube& a, const DyadicCube& b);

struct DyadicCubeHash {
  std::size_t operator()(const DyadicCube& q) const noexcept;
};

std::string to_string(const Point& p);

}  // namespace fracjump

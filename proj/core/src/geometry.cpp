#include "fracjump/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "fracjump/errors.hpp"

namespace fracjump {

Point::Point(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size())) {
  if (dim > kMaxGeomDim) throw ParameterError("point dimension exceeds kMaxGeomDim");
  std::copy(xs.begin(), xs.end(), c.begin());
}

Point Point::from_span(std::span<const double> xs) {
  if (xs.size() > static_cast<std::size_t>(kMaxGeomDim)) {
    throw ParameterError("point dimension exceeds kMaxGeomDim");
  }
  Point p(static_cast<int>(xs.size()));
  std::copy(xs.begin(), xs.end(), p.c.begin());
  return p;
}

Point operator+(Point a, const Point& b) {
  for (int i = 0; i < a.dim; ++i) a[i] += b[i];
  return a;
}

Point operator-(Point a, const Point& b) {
  for (int i = 0; i < a.dim; ++i) a[i] -= b[i];
  return a;
}

Point operator*(Point a, double s) {
  for (int i = 0; i < a.dim; ++i) a[i] *= s;
  return a;
}

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

double distance(const Point& a, const Point& b) { return norm(a - b); }

Box Box::cube(const Point& lo, double side) {
  Point hi = lo;
  for (int i = 0; i < lo.dim; ++i) hi[i] += side;
  return {lo, hi};
}

double Box::max_extent() const {
  double m = 0.0;
  for (int i = 0; i < dim(); ++i) m = std::max(m, extent(i));
  return m;
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= extent(i);
  return v;
}

double Box::diameter() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += extent(i) * extent(i);
  return std::sqrt(s);
}

Point Box::center() const {
  Point c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool Box::contains(const Point& p) const {
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

bool Box::intersects(const Box& o) const {
  for (int i = 0; i < dim(); ++i) {
    if (hi[i] < o.lo[i] || o.hi[i] < lo[i]) return false;
  }
  return true;
}

bool Box::contains(const Box& o) const {
  for (int i = 0; i < dim(); ++i) {
    if (o.lo[i] < lo[i] || o.hi[i] > hi[i]) return false;
  }
  return true;
}

Box Box::expanded(double r) const {
  Box b = *this;
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] -= r;
    b.hi[i] += r;
  }
  return b;
}

double box_box_distance(const Box& a, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double g = interval_gap(a.lo[i], a.hi[i], b.lo[i], b.hi[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

double point_box_distance(const Point& p, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < p.dim; ++i) {
    const double g = interval_gap(p[i], p[i], b.lo[i], b.hi[i]);
    s += g * g;
  }
  return std::sqrt(s);
}

Point clamp_to_box(const Point& p, const Box& b) {
  Point q = p;
  for (int i = 0; i < p.dim; ++i) q[i] = std::clamp(p[i], b.lo[i], b.hi[i]);
  return q;
}

Box DyadicCube::box() const {
  const double s = side();
  Box b{Point(dim), Point(dim)};
  for (int i = 0; i < dim; ++i) {
    b.lo[i] = static_cast<double>(corner[i]) * s;
    b.hi[i] = static_cast<double>(corner[i] + 1) * s;
  }
  return b;
}

Point DyadicCube::center() const {
  const double s = side();
  Point c(dim);
  for (int i = 0; i < dim; ++i) c[i] = (static_cast<double>(corner[i]) + 0.5) * s;
  return c;
}

namespace {

std::int64_t floor_div2(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

}  // namespace

DyadicCube DyadicCube::parent() const {
  DyadicCube p = *this;
  p.level = level - 1;
  for (int i = 0; i < dim; ++i) p.corner[i] = floor_div2(corner[i]);
  return p;
}

DyadicCube DyadicCube::child(unsigned which) const {
  DyadicCube c = *this;
  c.level = level + 1;
  for (int i = 0; i < dim; ++i) c.corner[i] = 2 * corner[i] + ((which >> i) & 1u);
  return c;
}

bool operator==(const DyadicCube& a, const DyadicCube& b) {
  if (a.level != b.level || a.dim != b.dim) return false;
  for (int i = 0; i < a.dim; ++i) {
    if (a.corner[i] != b.corner[i]) return false;
  }
  return true;
}

DyadicCube cube_containing(const Point& p, int level) {
  DyadicCube q;
  q.level = level;
  q.dim = p.dim;
  const double inv = std::ldexp(1.0, level);
  for (int i = 0; i < p.dim; ++i) {
    q.corner[i] = static_cast<std::int64_t>(std::floor(p[i] * inv));
  }
  return q;
}

bool interiors_disjoint(const DyadicCube& a, const DyadicCube& b) {
  // Coarsen the finer cube to the coarser level; dyadic cubes are nested or
  // have disjoint interiors.
  const DyadicCube* fine = &a;
  const DyadicCube* coarse = &b;
  if (a.level < b.level) std::swap(fine, coarse);
  DyadicCube f = *fine;
  while (f.level > coarse->level) f = f.parent();
  return !(f == *coarse);
}

std::size_t DyadicCubeHash::operator()(const DyadicCube& q) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(q.level + 1024);
  for (int i = 0; i < q.dim; ++i) {
    h ^= static_cast<std::uint64_t>(q.corner[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::string to_string(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < p.dim; ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace fracjump

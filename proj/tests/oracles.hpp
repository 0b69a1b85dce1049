#pragma once

// Brute-force reference computations shared by the test binaries. Nothing
// here calls into the library beyond its plain value types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fracjump/geometry.hpp"

namespace oracle {

using fracjump::Box;
using fracjump::Point;

inline Box box3(double x0, double x1, double y0, double y1, double z0, double z1) {
  return Box(Point{x0, y0, z0}, Point{x1, y1, z1});
}

// T = Q plus every slab R_nj up to `depth`, written straight from the
// construction: anchors 2^(-n+1) - j a_n, width a_n^alpha / 2.
inline std::vector<Box> fractal_boxes(double alpha, double beta, int depth) {
  std::vector<Box> out{box3(0, 1, -1, 0, -1, 0)};
  for (int n = 1; n <= depth; ++n) {
    const int fb = static_cast<int>(std::floor(n * beta + 1e-9));
    const double a = std::ldexp(1.0, -n - fb);
    const double c = std::pow(a, alpha) / 2.0;
    const std::int64_t count = std::int64_t{1} << fb;
    for (std::int64_t j = 0; j < count; ++j) {
      const double x = std::ldexp(1.0, -n + 1) - static_cast<double>(j) * a;
      out.push_back(box3(x - c, x, -std::ldexp(1.0, -n + 1), 0.0, 0.0, std::ldexp(1.0, -n)));
    }
  }
  return out;
}

inline bool closed_overlap(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return false;
  }
  return true;
}

inline bool inside_open(const Box& inner, const Box& outer) {
  for (int i = 0; i < inner.dim(); ++i) {
    if (!(inner.lo[i] > outer.lo[i] && inner.hi[i] < outer.hi[i])) return false;
  }
  return true;
}

inline bool point_in(const Point& p, const Box& b) {
  for (int i = 0; i < b.dim(); ++i) {
    if (p[i] < b.lo[i] || p[i] > b.hi[i]) return false;
  }
  return true;
}

// Closed level-k cubes meeting the boundary of one axis-aligned box:
// those meeting the closed box minus those inside its open interior.
inline std::uint64_t box_boundary_count(const Box& b, int k) {
  const double s = std::ldexp(1.0, -k);
  std::uint64_t meet = 1, inner = 1;
  for (int i = 0; i < b.dim(); ++i) {
    std::int64_t m = 0, n = 0;
    const auto j0 = static_cast<std::int64_t>(std::floor(b.lo[i] / s)) - 2;
    const auto j1 = static_cast<std::int64_t>(std::ceil(b.hi[i] / s)) + 2;
    for (std::int64_t j = j0; j <= j1; ++j) {
      const double lo = static_cast<double>(j) * s, hi = lo + s;
      if (hi >= b.lo[i] && lo <= b.hi[i]) ++m;
      if (lo > b.lo[i] && hi < b.hi[i]) ++n;
    }
    meet *= static_cast<std::uint64_t>(m);
    inner *= static_cast<std::uint64_t>(n);
  }
  return meet - inner;
}

// Voxel count of the fractal boundary at level k. A closed cube meets dT iff
// it meets T and is not inside int T; a cube is inside int T iff it sits in
// the open Q or in the open column below some slab (slabs are separated by
// gaps that lie outside T).
inline std::uint64_t fractal_voxel_count(const std::vector<Box>& boxes, int k) {
  const double s = std::ldexp(1.0, -k);
  const Box& q = boxes.front();
  std::vector<Box> slabs(boxes.begin() + 1, boxes.end());
  std::sort(slabs.begin(), slabs.end(), [](const Box& a, const Box& b) { return a.lo[0] < b.lo[0]; });
  double widest = 0.0;
  for (const auto& r : slabs) widest = std::max(widest, r.extent(0));
  std::uint64_t count = 0;
  const auto cells = std::int64_t{1} << k;
  for (std::int64_t ix = -1; ix <= cells; ++ix) {
    const double x0 = static_cast<double>(ix) * s, x1 = x0 + s;
    auto first = std::lower_bound(slabs.begin(), slabs.end(), x0 - widest,
                                  [](const Box& r, double v) { return r.lo[0] < v; });
    std::vector<Box> near;
    for (auto it = first; it != slabs.end() && it->lo[0] <= x1; ++it) {
      if (it->hi[0] >= x0) near.push_back(*it);
    }
    for (std::int64_t iy = -cells - 1; iy <= 0; ++iy) {
      for (std::int64_t iz = -cells - 1; iz <= cells / 2; ++iz) {
        const Box c = box3(x0, x1, static_cast<double>(iy) * s, static_cast<double>(iy + 1) * s,
                           static_cast<double>(iz) * s, static_cast<double>(iz + 1) * s);
        bool meets = closed_overlap(c, q);
        for (const auto& r : near) {
          if (meets) break;
          meets = closed_overlap(c, r);
        }
        if (!meets) continue;
        bool interior = inside_open(c, q);
        for (const auto& r : near) {
          if (interior) break;
          interior = inside_open(c, box3(r.lo[0], r.hi[0], r.lo[1], r.hi[1], -1.0, r.hi[2]));
        }
        if (!interior) ++count;
      }
    }
  }
  return count;
}

// Distance from a point inside the unit cube [0,1]^d to its boundary.
inline double unit_cube_inner_distance(const Box& b) {
  double d = 1e300;
  for (int i = 0; i < b.dim(); ++i) d = std::min({d, b.lo[i], 1.0 - b.hi[i]});
  return d;
}

// I_p over the unit cube: six pyramids, 6 * int_0^(1/2) t^-p (1 - 2t)^2 dt.
inline double unit_cube_Ip(double p) {
  const double h = 0.5;
  // expand (1 - 2t)^2 = 1 - 4t + 4t^2 and integrate term by term
  const auto term = [&](double c, double e) { return c * std::pow(h, e + 1.0 - p) / (e + 1.0 - p); };
  return 6.0 * (term(1.0, 0.0) + term(-4.0, 1.0) + term(4.0, 2.0));
}

}  // namespace oracle

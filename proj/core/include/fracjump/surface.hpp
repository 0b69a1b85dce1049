#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracjump/geometry.hpp"

namespace fracjump {

enum class SurfaceMode { fractal, boxes };

// Parametric description of a boundary surface. In fractal mode this is the
// cube Q with slabs R_nj attached to its top face for n = 1..effective_depth;
// in boxes mode the surface is the boundary of a finite union of boxes.
struct SurfaceSpec {
  int dimension = 3;
  SurfaceMode mode = SurfaceMode::fractal;
  double alpha = 1.0;
  double beta = 2.0;
  int n_max = 12;
  int effective_depth = 0;
  std::vector<Box> boxes;

  std::uint64_t rectangle_count() const;
};

// Closed-form values for the R^3 fractal family.
struct ClosedFormPrediction {
  double dim_minkowski = 0.0;
  double m_plus = 0.0;
};

inline constexpr std::uint64_t kMaxRectangles = 100'000'000;

// floor(n * beta), robust to beta values that are not exact in binary.
int floor_n_beta(int n, double beta);
std::uint64_t level_rectangle_count(int n, double beta);
// a_n = 2^(-n - floor(n beta)).
double level_spacing(int n, double beta);
// C_n = a_n^alpha / 2.
double level_width(int n, double alpha, double beta);

SurfaceSpec build_surface(double alpha, double beta, int n_max, int dimension = 3);
SurfaceSpec box_union_spec(std::vector<Box> boxes);
SurfaceSpec unit_cube_spec(int dimension = 3);
// [0,2]x[0,1]x[0,1] union [0,1]x[1,2]x[0,1].
SurfaceSpec l_shape_spec();

ClosedFormPrediction predictions(const SurfaceSpec& spec);

std::string to_json(const SurfaceSpec& spec);
SurfaceSpec surface_spec_from_json(std::string_view text);

// Axis-aligned hyperplane carrying the only piece of the surface inside a
// query box; `outward` is the side (+1/-1 along `axis`) where T is absent.
struct Plane {
  int axis = 0;
  double coord = 0.0;
  int outward = 1;
};

struct NearestPoint {
  double distance = 0.0;
  Point point;
  int face_id = -1;
  int axis = 0;
  int outward = 1;
};

struct BoundarySample {
  Point point;
  int face_id = -1;
  int axis = 0;
  int outward = 1;
};

struct FaceInfo {
  int face_id = 0;
  int axis = 0;
  int outward = 1;
  int level = 0;          // 0 for faces of the base body
  std::int64_t count = 1; // congruent copies translated along axis 0
  double area = 0.0;      // total over all copies
};

// Immutable query structure for the boundary S = dT of the body T described
// by a SurfaceSpec. All distances are exact for the (truncated) polyhedral
// body up to floating-point rounding.
class Surface {
 public:
  explicit Surface(SurfaceSpec spec);
  ~Surface();
  Surface(Surface&&) noexcept;
  Surface& operator=(Surface&&) noexcept;
  Surface(const Surface&) = delete;
  Surface& operator=(const Surface&) = delete;

  const SurfaceSpec& spec() const;
  int dim() const;
  // Bounding box of T.
  const Box& bounds() const;
  double volume() const;
  double boundary_area() const;
  std::vector<FaceInfo> faces() const;

  // Closed body T.
  bool contains(const Point& p) const;
  double distance(const Point& p) const;
  NearestPoint nearest(const Point& p) const;
  // Distance between a closed box and S; zero iff they meet.
  double box_distance(const Box& b) const;
  bool touches(const Box& b) const { return box_distance(b) == 0.0; }
  // If S restricted to `b` is a single hyperplane piece spanning all of `b`,
  // returns it.
  std::optional<Plane> local_plane(const Box& b) const;

  // Area-weighted uniform samples of S, deterministic in `seed`.
  std::vector<BoundarySample> sample_boundary(std::size_t count, std::uint64_t seed) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

using SurfacePtr = std::shared_ptr<const Surface>;
SurfacePtr make_surface(SurfaceSpec spec);

// Anchor x_nj (right end of R_nj), j = 0 .. count-1 with x_n0 = 2^(-n+1).
double anchor(int n, std::int64_t j, double beta);

// Brute-force rectangle list of a fractal spec, for testing and small depths.
std::vector<Box> enumerate_rectangles(const SurfaceSpec& spec, int max_level);

}  // namespace fracjump

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "fracjump/geometry.hpp"
#include "fracjump/surface.hpp"

namespace fracjump {

struct BoxCountSeries {
  struct Entry {
    int k = 0;
    std::uint64_t count = 0;
  };
  std::vector<Entry> entries;
};

// Number of closed level-k grid cubes meeting S.
std::uint64_t box_count(const Surface& s, int k);
BoxCountSeries box_count_series(const Surface& s, int k_min, int k_max);

struct DimensionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::vector<int> ks;
  std::vector<double> residuals;  // log2 N_k minus fitted line
  double max_abs_residual() const;
};

// Least-squares slope of log2 N_k against k over [k_min, k_max].
DimensionFit estimate_minkowski_dim(const BoxCountSeries& series, int k_min, int k_max);

double cube_distance(const DyadicCube& q, const Surface& s);

enum class Side { inner, outer, both };
const char* to_string(Side side);

// The open set decomposed: points of `box` off S, restricted to T (inner), to
// the complement of T inside the ball (outer), or unrestricted (both).
struct WhitneyRegion {
  Box box;
  Side side = Side::both;
  Point ball_center;
  double ball_radius = 0.0;  // used for Side::outer only
};

WhitneyRegion inner_region(const Surface& s);
// Complement of T clipped to the ball of twice the circumradius of bounds(T).
WhitneyRegion outer_region(const Surface& s);

struct WhitneyCell {
  int level = 0;
  double dist = 0.0;         // dist(cube, S)
  double center_dist = 0.0;  // dist(center, S)
  std::uint64_t count = 1;   // congruent cubes represented
  const DyadicCube* cube = nullptr;  // null for cells from planar shortcuts
};
using WhitneyVisitor = std::function<void(const WhitneyCell&)>;

struct WhitneyOptions {
  int k_max = 12;
  // Closed-form descent below cubes where S is a single plane.
  bool planar_shortcut = true;
};

struct WhitneyTotals {
  std::uint64_t emitted = 0;
  std::uint64_t uncovered_cubes = 0;
  double covered_volume = 0.0;
  double uncovered_volume = 0.0;  // level-k_max cubes still within one diameter of S
  int root_level = 0;
};

WhitneyTotals whitney_visit(const Surface& s, const WhitneyRegion& region, const WhitneyOptions& opt,
                            const WhitneyVisitor& visit);

// Per-level summary of a decomposition, enough to evaluate Marcinkiewicz
// sums for any p without revisiting cubes.
struct WhitneyLevelStats {
  std::uint64_t count = 0;
  std::vector<std::uint64_t> center_hist;  // log-binned center_dist / side
};

struct WhitneyStats {
  static constexpr int kBins = 512;
  static constexpr double kRatioLo = 0.25;
  static constexpr double kRatioHi = 16.0;
  int dim = 3;
  int k_max = 0;
  Side side = Side::both;
  std::map<int, WhitneyLevelStats> levels;
  WhitneyTotals totals;

  static double bin_ratio(int bin);
  static int ratio_bin(double ratio);
};

WhitneyStats whitney_stats(const Surface& s, const WhitneyRegion& region, const WhitneyOptions& opt);

struct WhitneyDecomposition {
  SurfacePtr surface;
  WhitneyRegion region;
  int k_max = 0;
  std::vector<DyadicCube> cubes;
  std::vector<double> dist;
  std::map<int, std::uint64_t> per_level;
  WhitneyTotals totals;
};

// Materialized decomposition; size grows like 2^(k_max * dim_M).
WhitneyDecomposition whitney_decompose(SurfacePtr s, const WhitneyRegion& region, int k_max);

void write_series_csv(std::ostream& os, const BoxCountSeries& series);
void write_levels_csv(std::ostream& os, const std::map<int, std::uint64_t>& per_level);

}  // namespace fracjump

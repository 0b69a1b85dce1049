#include "fracjump/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fracjump/errors.hpp"

namespace fracjump {

namespace {

bool interiors_overlap(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (!(a.lo[i] < b.hi[i] && b.lo[i] < a.hi[i])) return false;
  }
  return true;
}

// All level-k cubes whose closed box meets the closed box b (strict = false)
// or whose interior meets the interior of b (strict = true).
template <class F>
void for_each_cover(const Box& b, int k, bool strict, F&& f) {
  const int d = b.dim();
  std::array<std::int64_t, kMaxGeomDim> lo{}, hi{}, idx{};
  for (int i = 0; i < d; ++i) {
    const double l = std::ldexp(b.lo[i], k);
    const double h = std::ldexp(b.hi[i], k);
    if (strict) {
      lo[i] = static_cast<std::int64_t>(std::floor(l));
      hi[i] = static_cast<std::int64_t>(std::ceil(h)) - 1;
    } else {
      lo[i] = static_cast<std::int64_t>(std::ceil(l)) - 1;
      hi[i] = static_cast<std::int64_t>(std::floor(h));
    }
    if (hi[i] < lo[i]) return;
    idx[i] = lo[i];
  }
  for (;;) {
    DyadicCube q;
    q.level = k;
    q.dim = d;
    q.corner = idx;
    f(q);
    int i = 0;
    while (i < d && ++idx[i] > hi[i]) {
      idx[i] = lo[i];
      ++i;
    }
    if (i == d) break;
  }
}

std::uint64_t ipow2(int e) { return std::uint64_t{1} << e; }

class BoxCounter {
 public:
  BoxCounter(const Surface& s, int k) : s_(s), k_(k), d_(s.dim()) {}

  std::uint64_t run() {
    for_each_cover(s_.bounds(), 0, false, [&](const DyadicCube& q) { descend(q); });
    return total_;
  }

 private:
  void descend(const DyadicCube& q) {
    const Box b = q.box();
    if (!s_.touches(b)) return;
    if (q.level == k_) {
      ++total_;
      return;
    }
    if (auto pl = s_.local_plane(b)) {
      const int r = k_ - q.level;
      const double u = std::ldexp((pl->coord - b.lo[pl->axis]) / q.side(), r);
      const double m = std::ldexp(1.0, r);
      const std::uint64_t across = (u > 0.0 && u < m && u == std::floor(u)) ? 2 : 1;
      total_ += across * ipow2(r * (d_ - 1));
      return;
    }
    for (int c = 0; c < q.num_children(); ++c) descend(q.child(static_cast<unsigned>(c)));
  }

  const Surface& s_;
  int k_;
  int d_;
  std::uint64_t total_ = 0;
};

class WhitneyWalker {
 public:
  WhitneyWalker(const Surface& s, const WhitneyRegion& reg, const WhitneyOptions& opt, const WhitneyVisitor& visit)
      : s_(s), reg_(reg), opt_(opt), visit_(visit), d_(s.dim()) {}

  WhitneyTotals run() {
    const double ext = reg_.box.max_extent();
    const int k0 = -static_cast<int>(std::ceil(std::log2(ext)));
    tot_.root_level = k0;
    if (opt_.k_max < k0) throw ParameterError("k_max is coarser than the region");
    for_each_cover(reg_.box, k0, true, [&](const DyadicCube& q) { descend(q); });
    return tot_;
  }

 private:
  bool member(const Point& c) const {
    if (!reg_.box.contains(c)) return false;
    switch (reg_.side) {
      case Side::inner:
        return s_.contains(c);
      case Side::outer:
        return !s_.contains(c) && distance(c, reg_.ball_center) < reg_.ball_radius;
      case Side::both:
        return true;
    }
    return false;
  }

  void descend(const DyadicCube& q) {
    const Box b = q.box();
    if (!interiors_overlap(b, reg_.box)) return;
    const double diam = q.diameter();
    const double dist = s_.box_distance(b);
    if (dist >= diam) {
      const Point c = q.center();
      if (!member(c)) return;
      WhitneyCell cell;
      cell.level = q.level;
      cell.dist = dist;
      cell.center_dist = s_.distance(c);
      cell.cube = &q;
      ++tot_.emitted;
      tot_.covered_volume += q.volume();
      visit_(cell);
      return;
    }
    if (q.level >= opt_.k_max) {
      ++tot_.uncovered_cubes;
      double v = 1.0;
      for (int i = 0; i < d_; ++i) {
        v *= std::max(0.0, std::min(b.hi[i], reg_.box.hi[i]) - std::max(b.lo[i], reg_.box.lo[i]));
      }
      tot_.uncovered_volume += v;
      return;
    }
    if (opt_.planar_shortcut && planar(q, b, diam)) return;
    for (int c = 0; c < q.num_children(); ++c) descend(q.child(static_cast<unsigned>(c)));
  }

  // Inside b, S is one plane and nothing else comes within diam(b), so every
  // descendant's distance is its gap to that plane along one axis.
  bool planar(const DyadicCube& q, const Box& b, double diam) {
    const auto pl = s_.local_plane(b.expanded(diam));
    if (!pl) return false;
    const double side = q.side();
    const double t = (pl->coord - b.lo[pl->axis]) / side;
    if (t < 0.0 || t > 1.0) return false;
    if (!reg_.box.contains(b)) return false;
    if (reg_.side == Side::outer) {
      Point far = b.lo;
      for (int i = 0; i < d_; ++i) {
        far[i] = std::abs(b.lo[i] - reg_.ball_center[i]) > std::abs(b.hi[i] - reg_.ball_center[i]) ? b.lo[i] : b.hi[i];
      }
      if (!(distance(far, reg_.ball_center) < reg_.ball_radius)) return false;
    }
    // Orientation of a point at relative coordinate u: +1 on the outward side.
    int want = 0;
    if (reg_.side == Side::inner) want = -pl->outward;
    if (reg_.side == Side::outer) want = pl->outward;
    interval(q.level, 0, 0, t, want, side);
    return true;
  }

  // Sub-slab [i 2^-r, (i+1) 2^-r] of the unit cube along the plane axis.
  void interval(int level0, int r, std::int64_t i, double t, int want, double side0) {
    const double w = std::ldexp(1.0, -r);
    const double lo = static_cast<double>(i) * w;
    const double hi = lo + w;
    const double gap = interval_gap(lo, hi, t, t);
    const double diam_rel = std::sqrt(static_cast<double>(d_)) * w;
    const std::uint64_t mult = ipow2(r * (d_ - 1));
    const int level = level0 + r;
    if (gap >= diam_rel) {
      const double c = lo + 0.5 * w;
      const int orient = (c > t ? 1 : -1);
      if (want != 0 && orient != want) return;
      WhitneyCell cell;
      cell.level = level;
      cell.dist = gap * side0;
      cell.center_dist = std::abs(c - t) * side0;
      cell.count = mult;
      tot_.emitted += mult;
      const double v = std::pow(w * side0, d_);
      tot_.covered_volume += static_cast<double>(mult) * v;
      visit_(cell);
      return;
    }
    if (level >= opt_.k_max) {
      tot_.uncovered_cubes += mult;
      tot_.uncovered_volume += static_cast<double>(mult) * std::pow(w * side0, d_);
      return;
    }
    interval(level0, r + 1, 2 * i, t, want, side0);
    interval(level0, r + 1, 2 * i + 1, t, want, side0);
  }

  const Surface& s_;
  const WhitneyRegion& reg_;
  const WhitneyOptions& opt_;
  const WhitneyVisitor& visit_;
  int d_;
  WhitneyTotals tot_;
};

}  // namespace

std::uint64_t box_count(const Surface& s, int k) {
  if (k < 0) throw ParameterError("box_count level must be >= 0");
  const Box& b = s.bounds();
  for (int i = 0; i < s.dim(); ++i) {
    if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) throw ParameterError("surface is unbounded");
  }
  return BoxCounter(s, k).run();
}

BoxCountSeries box_count_series(const Surface& s, int k_min, int k_max) {
  if (k_min < 0 || k_max < k_min) throw ParameterError("invalid box-count level range");
  BoxCountSeries out;
  for (int k = k_min; k <= k_max; ++k) out.entries.push_back({k, box_count(s, k)});
  return out;
}

double DimensionFit::max_abs_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

DimensionFit estimate_minkowski_dim(const BoxCountSeries& series, int k_min, int k_max) {
  if (k_max - k_min < 3) throw ParameterError("dimension fit needs k_max - k_min >= 3");
  std::vector<double> xs, ys;
  DimensionFit fit;
  for (const auto& e : series.entries) {
    if (e.k < k_min || e.k > k_max) continue;
    if (e.count == 0) throw ParameterError("box count of zero in series");
    xs.push_back(e.k);
    ys.push_back(std::log2(static_cast<double>(e.count)));
    fit.ks.push_back(e.k);
  }
  if (xs.size() < 4) throw ParameterError("too few series points in the fit window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  fit.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

double cube_distance(const DyadicCube& q, const Surface& s) { return s.box_distance(q.box()); }

const char* to_string(Side side) {
  switch (side) {
    case Side::inner:
      return "inner";
    case Side::outer:
      return "outer";
    case Side::both:
      return "both";
  }
  return "?";
}

WhitneyRegion inner_region(const Surface& s) {
  WhitneyRegion r;
  r.box = s.bounds();
  r.side = Side::inner;
  r.ball_center = r.box.center();
  return r;
}

WhitneyRegion outer_region(const Surface& s) {
  WhitneyRegion r;
  const Box& b = s.bounds();
  r.side = Side::outer;
  r.ball_center = b.center();
  r.ball_radius = b.diameter();  // twice the circumradius
  Point lo = r.ball_center, hi = r.ball_center;
  for (int i = 0; i < s.dim(); ++i) {
    lo[i] -= r.ball_radius;
    hi[i] += r.ball_radius;
  }
  r.box = {lo, hi};
  return r;
}

WhitneyTotals whitney_visit(const Surface& s, const WhitneyRegion& region, const WhitneyOptions& opt,
                            const WhitneyVisitor& visit) {
  if (region.box.dim() != s.dim()) throw ParameterError("region dimension does not match the surface");
  for (int i = 0; i < s.dim(); ++i) {
    if (!(region.box.hi[i] > region.box.lo[i]) || !std::isfinite(region.box.hi[i] - region.box.lo[i])) {
      throw ParameterError("Whitney region must be a bounded box with positive extent");
    }
  }
  return WhitneyWalker(s, region, opt, visit).run();
}

double WhitneyStats::bin_ratio(int bin) {
  const double l0 = std::log(kRatioLo), l1 = std::log(kRatioHi);
  return std::exp(l0 + (bin + 0.5) * (l1 - l0) / kBins);
}

int WhitneyStats::ratio_bin(double ratio) {
  const double l0 = std::log(kRatioLo), l1 = std::log(kRatioHi);
  const int b = static_cast<int>(std::floor((std::log(ratio) - l0) / (l1 - l0) * kBins));
  return std::clamp(b, 0, kBins - 1);
}

WhitneyStats whitney_stats(const Surface& s, const WhitneyRegion& region, const WhitneyOptions& opt) {
  WhitneyStats st;
  st.dim = s.dim();
  st.k_max = opt.k_max;
  st.side = region.side;
  st.totals = whitney_visit(s, region, opt, [&](const WhitneyCell& c) {
    auto& lv = st.levels[c.level];
    if (lv.center_hist.empty()) lv.center_hist.assign(WhitneyStats::kBins, 0);
    lv.count += c.count;
    lv.center_hist[WhitneyStats::ratio_bin(c.center_dist / std::ldexp(1.0, -c.level))] += c.count;
  });
  return st;
}

WhitneyDecomposition whitney_decompose(SurfacePtr s, const WhitneyRegion& region, int k_max) {
  if (!s) throw ParameterError("null surface");
  WhitneyDecomposition out;
  out.surface = s;
  out.region = region;
  out.k_max = k_max;
  WhitneyOptions opt;
  opt.k_max = k_max;
  opt.planar_shortcut = false;
  out.totals = whitney_visit(*s, region, opt, [&](const WhitneyCell& c) {
    out.cubes.push_back(*c.cube);
    out.dist.push_back(c.dist);
    ++out.per_level[c.level];
  });
  return out;
}

void write_series_csv(std::ostream& os, const BoxCountSeries& series) {
  os << "k,count\n";
  for (const auto& e : series.entries) os << e.k << ',' << e.count << '\n';
}

void write_levels_csv(std::ostream& os, const std::map<int, std::uint64_t>& per_level) {
  os << "k,count\n";
  for (const auto& [k, c] : per_level) os << k << ',' << c << '\n';
}

}  // namespace fracjump

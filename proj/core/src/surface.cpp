#include "fracjump/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fracjump/errors.hpp"
#include "json.hpp"

namespace fracjump {

int floor_n_beta(int n, double beta) {
  return static_cast<int>(std::floor(static_cast<double>(n) * beta + 1e-9));
}

std::uint64_t level_rectangle_count(int n, double beta) {
  const int e = floor_n_beta(n, beta);
  if (e >= 63) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << e;
}

double level_spacing(int n, double beta) { return std::ldexp(1.0, -n - floor_n_beta(n, beta)); }

double level_width(int n, double alpha, double beta) {
  return 0.5 * std::pow(level_spacing(n, beta), alpha);
}

double anchor(int n, std::int64_t j, double beta) {
  return std::ldexp(1.0, -n + 1) - static_cast<double>(j) * level_spacing(n, beta);
}

std::uint64_t SurfaceSpec::rectangle_count() const {
  if (mode != SurfaceMode::fractal) return 0;
  std::uint64_t total = 0;
  for (int n = 1; n <= effective_depth; ++n) total += level_rectangle_count(n, beta);
  return total;
}

SurfaceSpec build_surface(double alpha, double beta, int n_max, int dimension) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 1");
  if (!(beta >= 2.0) || !std::isfinite(beta)) throw ParameterError("beta must be >= 2");
  if (n_max < 1) throw ParameterError("n_max must be >= 1");
  if (dimension < 3 || dimension > kMaxGeomDim) {
    throw ParameterError("surface dimension must be in [3, " + std::to_string(kMaxGeomDim) + "]");
  }
  SurfaceSpec spec;
  spec.dimension = dimension;
  spec.mode = SurfaceMode::fractal;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.n_max = n_max;

  // Auto-cap the depth so the total rectangle count stays under the guard.
  std::uint64_t total = 0;
  int depth = 0;
  for (int n = 1; n <= n_max; ++n) {
    const std::uint64_t c = level_rectangle_count(n, beta);
    if (c > kMaxRectangles || total + c > kMaxRectangles) break;
    total += c;
    depth = n;
  }
  if (depth == 0) throw ParameterError("rectangle count guard exceeded at level 1");
  for (int n = 1; n <= depth; ++n) {
    if (!(level_width(n, alpha, beta) < level_spacing(n, beta))) {
      throw ParameterError("rectangles of level " + std::to_string(n) + " overlap");
    }
  }
  spec.effective_depth = depth;
  return spec;
}

SurfaceSpec box_union_spec(std::vector<Box> boxes) {
  if (boxes.empty()) throw ParameterError("box union needs at least one box");
  const int d = boxes.front().dim();
  if (d < 2 || d > kMaxGeomDim) throw ParameterError("box dimension out of range");
  for (const Box& b : boxes) {
    if (b.dim() != d) throw ParameterError("boxes of mixed dimension");
    for (int i = 0; i < d; ++i) {
      if (!(b.hi[i] > b.lo[i])) throw ParameterError("boxes must have positive extent");
    }
  }
  SurfaceSpec spec;
  spec.dimension = d;
  spec.mode = SurfaceMode::boxes;
  spec.n_max = 0;
  spec.effective_depth = 0;
  spec.boxes = std::move(boxes);
  return spec;
}

SurfaceSpec unit_cube_spec(int dimension) {
  Point lo(dimension);
  return box_union_spec({Box::cube(lo, 1.0)});
}

SurfaceSpec l_shape_spec() {
  return box_union_spec({Box{Point{0, 0, 0}, Point{2, 1, 1}}, Box{Point{0, 1, 0}, Point{1, 2, 1}}});
}

ClosedFormPrediction predictions(const SurfaceSpec& spec) {
  if (spec.mode != SurfaceMode::fractal || spec.dimension != 3) {
    throw UnsupportedError("closed-form predictions exist only for the R^3 fractal family");
  }
  const double b = spec.beta;
  const double a = spec.alpha;
  return {3.0 * b / (b + 1.0), 1.0 - (b - 2.0) / (a * (b + 1.0))};
}

// ---------------------------------------------------------------------------
// JSON

std::string to_json(const SurfaceSpec& spec) {
  nlohmann::ordered_json j;
  j["dimension"] = spec.dimension;
  j["mode"] = spec.mode == SurfaceMode::fractal ? "fractal" : "boxes";
  if (spec.mode == SurfaceMode::fractal) {
    j["alpha"] = spec.alpha;
    j["beta"] = spec.beta;
    j["n_max"] = spec.n_max;
    j["effective_depth"] = spec.effective_depth;
    j["rectangle_count"] = spec.rectangle_count();
    if (spec.dimension == 3) {
      const auto pred = predictions(spec);
      j["predictions"] = {{"dim_minkowski", pred.dim_minkowski}, {"m_plus", pred.m_plus}};
    }
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const Box& b : spec.boxes) {
      arr.push_back({{"lo", std::vector<double>(b.lo.span().begin(), b.lo.span().end())},
                     {"hi", std::vector<double>(b.hi.span().begin(), b.hi.span().end())}});
    }
    j["boxes"] = arr;
  }
  return j.dump(2);
}

SurfaceSpec surface_spec_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("surface JSON: ") + e.what());
  }
  const std::string mode = j.value("mode", std::string("fractal"));
  if (mode == "fractal") {
    SurfaceSpec spec = build_surface(j.at("alpha").get<double>(), j.at("beta").get<double>(),
                                     j.at("n_max").get<int>(), j.value("dimension", 3));
    if (j.contains("effective_depth") &&
        j["effective_depth"].get<int>() != spec.effective_depth) {
      throw ParameterError("surface JSON: effective_depth does not match the rebuilt surface");
    }
    return spec;
  }
  if (mode == "boxes") {
    std::vector<Box> boxes;
    for (const auto& b : j.at("boxes")) {
      const auto lo = b.at("lo").get<std::vector<double>>();
      const auto hi = b.at("hi").get<std::vector<double>>();
      if (lo.size() != hi.size()) throw ParameterError("surface JSON: box lo/hi size mismatch");
      boxes.push_back({Point::from_span(lo), Point::from_span(hi)});
    }
    return box_union_spec(std::move(boxes));
  }
  throw ParameterError("surface JSON: unknown mode '" + mode + "'");
}

// ---------------------------------------------------------------------------
// Surface

namespace {

// A set of congruent axis-aligned faces. Copy j spans
//   axis 0: [A0 - j*step + off_lo, A0 - j*step + off_hi]
//   axis i > 0: [face.lo[i], face.hi[i]]
// and is degenerate along `axis`.
struct Family {
  int axis = 0;
  int outward = 1;
  Box face;
  double a0 = 0.0;
  double step = 0.0;
  double off_lo = 0.0;
  double off_hi = 0.0;
  std::int64_t count = 1;
  int level = 0;
  bool holed = false;

  double x_lo(std::int64_t j) const { return (a0 - static_cast<double>(j) * step) + off_lo; }
  double x_hi(std::int64_t j) const { return (a0 - static_cast<double>(j) * step) + off_hi; }
  Box copy(std::int64_t j) const {
    Box b = face;
    b.lo[0] = x_lo(j);
    b.hi[0] = x_hi(j);
    return b;
  }
  double single_area(int dim) const {
    double a = 1.0;
    for (int i = 0; i < dim; ++i) {
      if (i == axis) continue;
      a *= (i == 0) ? (off_hi - off_lo) : face.extent(i);
    }
    return a;
  }
};

struct Level {
  int n = 0;
  std::int64_t count = 0;
  double spacing = 0.0;
  double width = 0.0;
  double a0 = 0.0;
  Box rect0;  // copy j = 0
  Box bbox;
  std::size_t first_family = 0;
  std::size_t num_families = 0;

  double anchor(std::int64_t j) const { return a0 - static_cast<double>(j) * spacing; }
  Box rect(std::int64_t j) const {
    Box b = rect0;
    b.hi[0] = anchor(j);
    b.lo[0] = anchor(j) - width;
    return b;
  }
};

struct Hit {
  double gap = 0.0;
  std::int64_t j = 0;
};

std::int64_t clamp_index(double t, std::int64_t count) {
  if (!(t > 0.0)) return 0;
  if (t >= static_cast<double>(count - 1)) return count - 1;
  return static_cast<std::int64_t>(t);
}

// Copy of `f` whose axis-0 interval is closest to [b0, b1].
Hit progression_gap(const Family& f, double b0, double b1) {
  if (f.count == 1) return {interval_gap(f.x_lo(0), f.x_hi(0), b0, b1), 0};
  // Copies move left as j grows; the best copy is the last one not entirely
  // left of b0, or the one after it.
  const std::int64_t j1 = clamp_index(std::floor((f.a0 + f.off_hi - b0) / f.step), f.count);
  Hit best{std::numeric_limits<double>::infinity(), 0};
  for (std::int64_t j = std::max<std::int64_t>(0, j1 - 1); j <= std::min(f.count - 1, j1 + 2); ++j) {
    const double g = interval_gap(f.x_lo(j), f.x_hi(j), b0, b1);
    if (g < best.gap) best = {g, j};
  }
  return best;
}

// Range [first, last] of copies whose closed axis-0 interval meets [b0, b1].
std::pair<std::int64_t, std::int64_t> progression_overlap(const Family& f, double b0, double b1) {
  if (f.count == 1) {
    return interval_gap(f.x_lo(0), f.x_hi(0), b0, b1) == 0.0 ? std::pair<std::int64_t, std::int64_t>{0, 0}
                                                             : std::pair<std::int64_t, std::int64_t>{1, 0};
  }
  // last: largest j with x_hi(j) >= b0; first: smallest j with x_lo(j) <= b1.
  std::int64_t last = clamp_index(std::floor((f.a0 + f.off_hi - b0) / f.step), f.count);
  while (last + 1 < f.count && f.x_hi(last + 1) >= b0) ++last;
  while (last >= 0 && f.x_hi(last) < b0) --last;
  std::int64_t first = clamp_index(std::ceil((f.a0 + f.off_lo - b1) / f.step), f.count);
  while (first > 0 && f.x_lo(first - 1) <= b1) --first;
  while (first < f.count && f.x_lo(first) > b1) ++first;
  return {first, last};
}

// Squared distance between box b and the faces of f on axes != 0.
double fixed_gap2(const Family& f, const Box& b, int dim) {
  double s = 0.0;
  for (int i = 1; i < dim; ++i) {
    const double g = interval_gap(f.face.lo[i], f.face.hi[i], b.lo[i], b.hi[i]);
    s += g * g;
  }
  return s;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

struct Surface::Impl {
  SurfaceSpec spec;
  int dim = 3;
  Box bounds;
  double volume = 0.0;
  std::vector<Box> bodies;       // boxes whose union is T (Q only, in fractal mode)
  std::vector<Family> families;  // base families first, then per-level families
  std::size_t num_base = 0;
  std::vector<Level> levels;
  int holed = -1;                // index of the holed top face of Q
  Box top;                       // that face as a degenerate box

  void build_fractal();
  void build_boxes();

  // Level n with footprints possibly covering x, or nullptr.
  const Level* level_for_x(double x) const;
  // Open footprint (level, j) that strictly contains the in-plane part of b.
  std::optional<std::pair<const Level*, std::int64_t>> hole_containing(const Box& b) const;
  bool in_hole(const Point& p) const;
  bool any_footprint_meets(const Box& b) const;

  double holed_dist2(const Box& b, Point* nearest, const Point* query) const;
  double dist2(const Box& b, double stop_at, int* fam, std::int64_t* copy) const;
};

void Surface::Impl::build_fractal() {
  const int d = spec.dimension;
  const int L = d - 1;
  Point qlo(d), qhi(d);
  for (int i = 0; i < d; ++i) {
    qlo[i] = 0.0;
    qhi[i] = 1.0;
  }
  if (d == 3) {
    // Q = [0,1] x [-1,0] x [-1,0]
    qlo[1] = -1.0;
    qhi[1] = 0.0;
  }
  qlo[L] = -1.0;
  qhi[L] = 0.0;
  const Box q{qlo, qhi};
  bodies = {q};
  volume = q.volume();
  bounds = q;

  for (int axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Family f;
      f.axis = axis;
      f.outward = side ? 1 : -1;
      f.face = q;
      const double c = side ? q.hi[axis] : q.lo[axis];
      f.face.lo[axis] = f.face.hi[axis] = c;
      f.off_lo = f.face.lo[0];
      f.off_hi = f.face.hi[0];
      if (axis == L && side == 1) {
        f.holed = true;
        holed = static_cast<int>(families.size());
        top = f.face;
      }
      families.push_back(f);
    }
  }
  num_base = families.size();

  for (int n = 1; n <= spec.effective_depth; ++n) {
    Level lv;
    lv.n = n;
    lv.count = static_cast<std::int64_t>(level_rectangle_count(n, spec.beta));
    lv.spacing = level_spacing(n, spec.beta);
    lv.width = level_width(n, spec.alpha, spec.beta);
    lv.a0 = std::ldexp(1.0, -n + 1);
    Point lo(d), hi(d);
    const double h = std::ldexp(1.0, -n);
    for (int i = 1; i < d; ++i) {
      lo[i] = 0.0;
      hi[i] = h;
    }
    if (d == 3) {
      lo[1] = -std::ldexp(1.0, -n + 1);
      hi[1] = 0.0;
    }
    lo[0] = lv.a0 - lv.width;
    hi[0] = lv.a0;
    lv.rect0 = {lo, hi};
    lv.bbox = lv.rect0;
    lv.bbox.lo[0] = lv.anchor(lv.count - 1) - lv.width;
    lv.first_family = families.size();
    for (int axis = 0; axis < d; ++axis) {
      for (int side = 0; side < 2; ++side) {
        if (axis == L && side == 0) continue;  // attachment face on top of Q
        Family f;
        f.axis = axis;
        f.outward = side ? 1 : -1;
        f.face = lv.rect0;
        f.a0 = lv.a0;
        f.step = lv.spacing;
        f.count = lv.count;
        f.level = n;
        if (axis == 0) {
          f.off_lo = f.off_hi = side ? 0.0 : -lv.width;
        } else {
          f.off_lo = -lv.width;
          f.off_hi = 0.0;
          const double c = side ? lv.rect0.hi[axis] : lv.rect0.lo[axis];
          f.face.lo[axis] = f.face.hi[axis] = c;
        }
        families.push_back(f);
      }
    }
    lv.num_families = families.size() - lv.first_family;
    volume += static_cast<double>(lv.count) * lv.rect0.volume();
    for (int i = 0; i < d; ++i) {
      bounds.lo[i] = std::min(bounds.lo[i], lv.bbox.lo[i]);
      bounds.hi[i] = std::max(bounds.hi[i], lv.bbox.hi[i]);
    }
    levels.push_back(lv);
  }
}

void Surface::Impl::build_boxes() {
  const int d = spec.dimension;
  bodies = spec.boxes;
  bounds = bodies.front();
  for (const Box& b : bodies) {
    for (int i = 0; i < d; ++i) {
      bounds.lo[i] = std::min(bounds.lo[i], b.lo[i]);
      bounds.hi[i] = std::max(bounds.hi[i], b.hi[i]);
    }
  }
  // Coordinate-compressed cell grid; faces separate inside and outside cells.
  std::vector<std::vector<double>> coords(d);
  for (int i = 0; i < d; ++i) {
    std::set<double> s;
    for (const Box& b : bodies) {
      s.insert(b.lo[i]);
      s.insert(b.hi[i]);
    }
    coords[i].assign(s.begin(), s.end());
  }
  std::vector<std::int64_t> ncell(d), stride(d);
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) {
    ncell[i] = static_cast<std::int64_t>(coords[i].size()) - 1;
    stride[i] = total;
    total *= ncell[i];
  }
  if (total > 50'000'000) throw ParameterError("box union too complex");
  std::vector<char> inside(static_cast<std::size_t>(total), 0);
  std::vector<std::int64_t> idx(d);
  auto cell_box = [&](const std::vector<std::int64_t>& ix) {
    Box b{Point(d), Point(d)};
    for (int i = 0; i < d; ++i) {
      b.lo[i] = coords[i][ix[i]];
      b.hi[i] = coords[i][ix[i] + 1];
    }
    return b;
  };
  volume = 0.0;
  for (std::int64_t c = 0; c < total; ++c) {
    std::int64_t r = c;
    for (int i = 0; i < d; ++i) {
      idx[i] = r % ncell[i];
      r /= ncell[i];
    }
    const Box cb = cell_box(idx);
    const Point ctr = cb.center();
    for (const Box& b : bodies) {
      if (b.contains(ctr)) {
        inside[c] = 1;
        volume += cb.volume();
        break;
      }
    }
  }
  for (std::int64_t c = 0; c < total; ++c) {
    if (!inside[c]) continue;
    std::int64_t r = c;
    for (int i = 0; i < d; ++i) {
      idx[i] = r % ncell[i];
      r /= ncell[i];
    }
    const Box cb = cell_box(idx);
    for (int axis = 0; axis < d; ++axis) {
      for (int side = 0; side < 2; ++side) {
        const std::int64_t nb = idx[axis] + (side ? 1 : -1);
        const bool out = nb < 0 || nb >= ncell[axis] || !inside[c + (side ? 1 : -1) * stride[axis]];
        if (!out) continue;
        Family f;
        f.axis = axis;
        f.outward = side ? 1 : -1;
        f.face = cb;
        const double v = side ? cb.hi[axis] : cb.lo[axis];
        f.face.lo[axis] = f.face.hi[axis] = v;
        f.off_lo = f.face.lo[0];
        f.off_hi = f.face.hi[0];
        families.push_back(f);
      }
    }
  }
  num_base = families.size();
}

const Level* Surface::Impl::level_for_x(double x) const {
  if (levels.empty() || !(x > 0.0) || x > 1.0) return nullptr;
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m 2^e, m in [0.5, 1)
  // Level n spans (2^-n, 2^(-n+1)].
  const int n = (m == 0.5) ? 2 - e : 1 - e;
  if (n < 1 || n > static_cast<int>(levels.size())) return nullptr;
  return &levels[static_cast<std::size_t>(n - 1)];
}

std::optional<std::pair<const Level*, std::int64_t>> Surface::Impl::hole_containing(const Box& b) const {
  const int L = dim - 1;
  const Level* lv = level_for_x(b.hi[0]);
  if (!lv) return std::nullopt;
  const double t = std::floor((lv->a0 - b.hi[0]) / lv->spacing);
  const std::int64_t jc = clamp_index(t, lv->count);
  for (std::int64_t j = std::max<std::int64_t>(0, jc - 1); j <= std::min(lv->count - 1, jc + 1); ++j) {
    const double hi = lv->anchor(j);
    const double lo = hi - lv->width;
    if (!(b.lo[0] > lo && b.hi[0] < hi)) continue;
    bool ok = true;
    for (int i = 1; i < L; ++i) {
      if (!(b.lo[i] > lv->rect0.lo[i] && b.hi[i] < lv->rect0.hi[i])) {
        ok = false;
        break;
      }
    }
    if (ok) return std::make_pair(lv, j);
  }
  return std::nullopt;
}

bool Surface::Impl::in_hole(const Point& p) const {
  if (holed < 0) return false;
  return hole_containing(Box{p, p}).has_value();
}

bool Surface::Impl::any_footprint_meets(const Box& b) const {
  const int L = dim - 1;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const Level& lv = levels[li];
    bool meets = true;
    for (int i = 0; i < L; ++i) {
      if (interval_gap(lv.bbox.lo[i], lv.bbox.hi[i], b.lo[i], b.hi[i]) > 0.0) {
        meets = false;
        break;
      }
    }
    if (!meets) continue;
    const Family& f = families[lv.first_family];  // x_lo faces share the footprint progression
    Family fp = f;
    fp.off_lo = -lv.width;
    fp.off_hi = 0.0;
    const auto [first, last] = progression_overlap(fp, b.lo[0], b.hi[0]);
    if (first <= last) return true;
  }
  return false;
}

// Squared distance from box b to the top face of Q with the open footprints
// removed. When `nearest` is set, `query` is a point and its nearest point on
// that set is written out.
double Surface::Impl::holed_dist2(const Box& b, Point* nearest, const Point* query) const {
  const int L = dim - 1;
  const double gn = interval_gap(0.0, 0.0, b.lo[L], b.hi[L]);
  Box clip = b;
  bool empty = false;
  double in2 = 0.0;
  for (int i = 0; i < L; ++i) {
    clip.lo[i] = std::max(b.lo[i], top.lo[i]);
    clip.hi[i] = std::min(b.hi[i], top.hi[i]);
    if (clip.lo[i] > clip.hi[i]) empty = true;
    const double g = interval_gap(top.lo[i], top.hi[i], b.lo[i], b.hi[i]);
    in2 += g * g;
  }
  if (!empty) {
    in2 = 0.0;
    if (auto hole = hole_containing(clip)) {
      const auto [lv, j] = *hole;
      Box h = lv->rect(j);
      double best = std::numeric_limits<double>::infinity();
      int best_axis = 0;
      bool best_low = true;
      for (int i = 0; i < L; ++i) {
        const double dl = clip.lo[i] - h.lo[i];
        const double dh = h.hi[i] - clip.hi[i];
        if (dl < best) {
          best = dl;
          best_axis = i;
          best_low = true;
        }
        if (dh < best) {
          best = dh;
          best_axis = i;
          best_low = false;
        }
      }
      in2 = best * best;
      if (nearest) {
        Point p = *query;
        p[best_axis] = best_low ? h.lo[best_axis] : h.hi[best_axis];
        p[L] = 0.0;
        *nearest = p;
      }
      return gn * gn + in2;
    }
  }
  if (nearest) *nearest = clamp_to_box(*query, top);
  return gn * gn + in2;
}

double Surface::Impl::dist2(const Box& b, double stop_at, int* fam, std::int64_t* copy) const {
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t fi) {
    const Family& f = families[fi];
    double d2;
    std::int64_t j = 0;
    if (f.holed) {
      d2 = holed_dist2(b, nullptr, nullptr);
    } else {
      d2 = fixed_gap2(f, b, dim);
      if (d2 >= best) return;
      const Hit h = progression_gap(f, b.lo[0], b.hi[0]);
      d2 += h.gap * h.gap;
      j = h.j;
    }
    if (d2 < best) {
      best = d2;
      if (fam) *fam = static_cast<int>(fi);
      if (copy) *copy = j;
    }
  };
  for (std::size_t fi = 0; fi < num_base; ++fi) {
    consider(fi);
    if (best <= stop_at) return best;
  }
  for (const Level& lv : levels) {
    const double lb = box_box_distance(lv.bbox, b);
    if (lb * lb >= best) continue;
    for (std::size_t k = 0; k < lv.num_families; ++k) {
      consider(lv.first_family + k);
      if (best <= stop_at) return best;
    }
  }
  return best;
}

Surface::Surface(SurfaceSpec spec) : impl_(std::make_unique<Impl>()) {
  impl_->spec = std::move(spec);
  impl_->dim = impl_->spec.dimension;
  if (impl_->spec.mode == SurfaceMode::fractal) {
    if (impl_->spec.effective_depth < 1) throw ParameterError("fractal spec was not built");
    impl_->build_fractal();
  } else {
    impl_->build_boxes();
  }
}

Surface::~Surface() = default;
Surface::Surface(Surface&&) noexcept = default;
Surface& Surface::operator=(Surface&&) noexcept = default;

const SurfaceSpec& Surface::spec() const { return impl_->spec; }
int Surface::dim() const { return impl_->dim; }
const Box& Surface::bounds() const { return impl_->bounds; }
double Surface::volume() const { return impl_->volume; }

double Surface::boundary_area() const {
  double a = 0.0;
  for (const FaceInfo& f : faces()) a += f.area;
  return a;
}

std::vector<FaceInfo> Surface::faces() const {
  const Impl& m = *impl_;
  std::vector<FaceInfo> out;
  out.reserve(m.families.size());
  for (std::size_t i = 0; i < m.families.size(); ++i) {
    const Family& f = m.families[i];
    FaceInfo info;
    info.face_id = static_cast<int>(i);
    info.axis = f.axis;
    info.outward = f.outward;
    info.level = f.level;
    info.count = f.count;
    info.area = static_cast<double>(f.count) * f.single_area(m.dim);
    if (f.holed) {
      for (const Level& lv : m.levels) {
        double fp = static_cast<double>(lv.count) * lv.width;
        for (int k = 1; k < m.dim - 1; ++k) fp *= lv.rect0.extent(k);
        info.area -= fp;
      }
    }
    out.push_back(info);
  }
  return out;
}

bool Surface::contains(const Point& p) const {
  const Impl& m = *impl_;
  for (const Box& b : m.bodies) {
    if (b.contains(p)) return true;
  }
  if (const Level* lv = m.level_for_x(p[0])) {
    const double t = std::floor((lv->a0 - p[0]) / lv->spacing);
    const std::int64_t jc = clamp_index(t, lv->count);
    for (std::int64_t j = std::max<std::int64_t>(0, jc - 1); j <= std::min(lv->count - 1, jc + 1); ++j) {
      if (lv->rect(j).contains(p)) return true;
    }
  }
  return false;
}

double Surface::distance(const Point& p) const {
  return std::sqrt(impl_->dist2(Box{p, p}, -1.0, nullptr, nullptr));
}

NearestPoint Surface::nearest(const Point& p) const {
  const Impl& m = *impl_;
  int fam = -1;
  std::int64_t copy = 0;
  const double d2 = m.dist2(Box{p, p}, -1.0, &fam, &copy);
  NearestPoint out;
  out.distance = std::sqrt(d2);
  out.face_id = fam;
  const Family& f = m.families[static_cast<std::size_t>(fam)];
  out.axis = f.axis;
  out.outward = f.outward;
  if (f.holed) {
    m.holed_dist2(Box{p, p}, &out.point, &p);
  } else {
    out.point = clamp_to_box(p, f.copy(copy));
  }
  return out;
}

double Surface::box_distance(const Box& b) const {
  return std::sqrt(impl_->dist2(b, 0.0, nullptr, nullptr));
}

std::optional<Plane> Surface::local_plane(const Box& b) const {
  const Impl& m = *impl_;
  int touching = 0;
  Plane plane;
  bool covered = false;
  auto visit = [&](std::size_t fi) -> bool {
    const Family& f = m.families[fi];
    if (f.holed) {
      if (m.holed_dist2(b, nullptr, nullptr) > 0.0) return true;
      ++touching;
      covered = true;
      for (int i = 0; i < m.dim; ++i) {
        if (i == f.axis) continue;
        if (b.lo[i] < m.top.lo[i] || b.hi[i] > m.top.hi[i]) covered = false;
      }
      if (covered && m.any_footprint_meets(b)) covered = false;
      plane = {f.axis, m.top.lo[f.axis], f.outward};
      return touching <= 1;
    }
    if (fixed_gap2(f, b, m.dim) > 0.0) return true;
    const auto [first, last] = progression_overlap(f, b.lo[0], b.hi[0]);
    if (first > last) return true;
    touching += static_cast<int>(std::min<std::int64_t>(last - first + 1, 2));
    if (touching > 1) return false;
    const Box face = f.copy(first);
    covered = true;
    for (int i = 0; i < m.dim; ++i) {
      if (i == f.axis) continue;
      if (b.lo[i] < face.lo[i] || b.hi[i] > face.hi[i]) covered = false;
    }
    plane = {f.axis, face.lo[f.axis], f.outward};
    return true;
  };
  for (std::size_t fi = 0; fi < m.num_base; ++fi) {
    if (!visit(fi)) return std::nullopt;
  }
  for (const Level& lv : m.levels) {
    if (!lv.bbox.intersects(b)) continue;
    for (std::size_t k = 0; k < lv.num_families; ++k) {
      if (!visit(lv.first_family + k)) return std::nullopt;
    }
  }
  if (touching == 1 && covered) return plane;
  return std::nullopt;
}

std::vector<BoundarySample> Surface::sample_boundary(std::size_t count, std::uint64_t seed) const {
  if (count < 1) throw ParameterError("sample count must be >= 1");
  const Impl& m = *impl_;
  const auto info = faces();
  std::vector<double> cum(info.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < info.size(); ++i) {
    acc += info[i].area;
    cum[i] = acc;
  }
  std::mt19937_64 rng(seed);
  std::vector<BoundarySample> out;
  out.reserve(count);
  while (out.size() < count) {
    const double u = uniform01(rng) * acc;
    std::size_t fi = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    fi = std::min(fi, info.size() - 1);
    const Family& f = m.families[fi];
    std::int64_t j = 0;
    if (f.count > 1) {
      j = std::min<std::int64_t>(f.count - 1, static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(f.count)));
    }
    const Box face = f.copy(j);
    Point p(m.dim);
    // redraw inside the same face; restarting would under-weight holed faces
    do {
      for (int i = 0; i < m.dim; ++i) p[i] = face.lo[i] + uniform01(rng) * face.extent(i);
    } while (f.holed && m.in_hole(p));
    out.push_back({p, static_cast<int>(fi), f.axis, f.outward});
  }
  return out;
}

SurfacePtr make_surface(SurfaceSpec spec) { return std::make_shared<const Surface>(std::move(spec)); }

std::vector<Box> enumerate_rectangles(const SurfaceSpec& spec, int max_level) {
  std::vector<Box> out;
  if (spec.mode != SurfaceMode::fractal) return out;
  const int d = spec.dimension;
  const int top = std::min(max_level, spec.effective_depth);
  for (int n = 1; n <= top; ++n) {
    const auto count = static_cast<std::int64_t>(level_rectangle_count(n, spec.beta));
    const double w = level_width(n, spec.alpha, spec.beta);
    const double h = std::ldexp(1.0, -n);
    for (std::int64_t j = 0; j < count; ++j) {
      Point lo(d), hi(d);
      hi[0] = anchor(n, j, spec.beta);
      lo[0] = hi[0] - w;
      for (int i = 1; i < d; ++i) {
        lo[i] = 0.0;
        hi[i] = h;
      }
      if (d == 3) {
        lo[1] = -2.0 * h;
        hi[1] = 0.0;
      }
      out.push_back({lo, hi});
    }
  }
  return out;
}

}  // namespace fracjump

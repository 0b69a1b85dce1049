#include "fracjump/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "fracjump/cell_integral.hpp"
#include "fracjump/errors.hpp"
#include "fracjump/parallel.hpp"
#include "json.hpp"

namespace fracjump {

const char* to_string(FieldBackend b) {
  switch (b) {
    case FieldBackend::closed_form:
      return "closed-form";
    case FieldBackend::whitney_extension:
      return "whitney-extension";
    case FieldBackend::teodorescu:
      return "teodorescu";
    case FieldBackend::composite:
      return "composite";
  }
  return "?";
}

Multivector CliffordField::operator()(const Point& x) const {
  if (in_domain && !in_domain(x)) throw DomainError("field evaluated outside its domain at " + to_string(x));
  return eval(x);
}

CliffordField closed_form_field(int n, PointFn f) {
  CliffordField out;
  out.n = n;
  out.backend = FieldBackend::closed_form;
  out.eval = std::move(f);
  return out;
}

Multivector cauchy_riemann(const CliffordField& u, const Point& x, double h) {
  const CliffordFn fn = [&](std::span<const double> y) { return u(Point::from_span(y)); };
  return cauchy_riemann(fn, x.span(), h);
}

// ---------------------------------------------------------------------------
// Boundary data

int HoelderData::n() const {
  if (!values.empty()) return values.front().dimension();
  if (!samples.empty()) return samples.front().point.dim - 1;
  return 0;
}

double HoelderData::scale() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, norm(v));
  return m;
}

double estimate_hoelder_constant(const std::vector<BoundarySample>& samples, const std::vector<Multivector>& values,
                                 double nu, std::size_t max_points) {
  if (samples.size() != values.size()) throw ParameterError("sample and value counts differ");
  const std::size_t m = std::min(samples.size(), max_points);
  double c = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = distance(samples[i].point, samples[j].point);
      if (d <= 0.0) continue;
      c = std::max(c, norm(values[i] - values[j]) / std::pow(d, nu));
    }
  }
  return c;
}

HoelderData make_hoelder_data(const Surface& s, PointFn f, double nu, std::size_t count, std::uint64_t seed,
                              bool keep_closed_form) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("Hoelder exponent must lie in (0, 1]");
  HoelderData d;
  d.nu = nu;
  d.samples = s.sample_boundary(count, seed);
  d.values.reserve(d.samples.size());
  for (const auto& smp : d.samples) d.values.push_back(f(smp.point));
  d.hoelder_constant = estimate_hoelder_constant(d.samples, d.values, nu);
  if (keep_closed_form) d.closed_form = std::move(f);
  return d;
}

// ---------------------------------------------------------------------------
// Whitney extension

namespace {

class KdTree {
 public:
  explicit KdTree(std::vector<Point> pts) : pts_(std::move(pts)), idx_(pts_.size()) {
    std::iota(idx_.begin(), idx_.end(), std::size_t{0});
    if (!pts_.empty()) build(0, idx_.size(), 0);
  }

  std::size_t nearest(const Point& q) const {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, idx_.size(), 0, q, best, best_d2);
    return best;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(lo), idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    const int next = (axis + 1) % pts_.front().dim;
    build(lo, mid, next);
    build(mid + 1, hi, next);
  }

  void search(std::size_t lo, std::size_t hi, int axis, const Point& q, std::size_t& best, double& best_d2) const {
    if (lo >= hi) return;
    const std::size_t mid = (lo + hi) / 2;
    const Point& p = pts_[idx_[mid]];
    double d2 = 0.0;
    for (int i = 0; i < p.dim; ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = idx_[mid];
    }
    const int next = (axis + 1) % p.dim;
    const double diff = q[axis] - p[axis];
    if (diff < 0.0) {
      search(lo, mid, next, q, best, best_d2);
      if (diff * diff < best_d2) search(mid + 1, hi, next, q, best, best_d2);
    } else {
      search(mid + 1, hi, next, q, best, best_d2);
      if (diff * diff < best_d2) search(lo, mid, next, q, best, best_d2);
    }
  }

  std::vector<Point> pts_;
  std::vector<std::size_t> idx_;
};

// Smooth bump supported on |t| < kReach with no plateau, so the extension
// varies inside every cube and not only across its faces.
constexpr double kReach = 1.5;

double bump(double t) {
  const double u = t / kReach;
  if (u * u >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

class Extension {
 public:
  Extension(const HoelderData& data, SurfacePtr s, const WhitneyRegion& region, int root_level)
      : data_(data), s_(std::move(s)), region_(region), root_(root_level), dim_(s_->dim()) {
    std::vector<Point> pts;
    pts.reserve(data_.samples.size());
    for (const auto& smp : data_.samples) pts.push_back(smp.point);
    tree_ = std::make_unique<KdTree>(std::move(pts));
  }

  Multivector operator()(const Point& x) const {
    const double d = s_->distance(x);
    if (d == 0.0) return transfer(x);
    const double sq = std::sqrt(static_cast<double>(dim_));
    // A Whitney cube Q has diam <= dist(Q) < 4 diam; x in its 1.5-dilation
    // then sits at dist(x) in (0.75 diam, 5.5 diam).
    const int k_lo = std::max(root_, static_cast<int>(std::floor(std::log2(0.75 * sq / d))));
    const int k_hi = static_cast<int>(std::ceil(std::log2(5.5 * sq / d)));
    Multivector acc(data_.n());
    double wsum = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double side = std::ldexp(1.0, -k);
      std::array<std::int64_t, kMaxGeomDim> lo{}, cnt{};
      for (int i = 0; i < dim_; ++i) {
        const double u = std::ldexp(x[i], k);
        lo[i] = static_cast<std::int64_t>(std::floor(u - 0.5 - 0.5 * kReach));
        const auto hi = static_cast<std::int64_t>(std::ceil(u - 0.5 + 0.5 * kReach));
        cnt[i] = hi - lo[i] + 1;
        if (cnt[i] <= 0) goto next_level;
      }
      {
        std::array<std::int64_t, kMaxGeomDim> off{};
        for (;;) {
          DyadicCube q;
          q.level = k;
          q.dim = dim_;
          double w = 1.0;
          for (int i = 0; i < dim_; ++i) {
            q.corner[i] = lo[i] + off[i];
            const double c = (static_cast<double>(q.corner[i]) + 0.5) * side;
            w *= bump((x[i] - c) / (0.5 * side));
          }
          if (w > 0.0) {
            const Entry& e = lookup(q);
            if (e.whitney) {
              Multivector t = e.value;
              t *= w;
              acc += t;
              wsum += w;
            }
          }
          int i = 0;
          while (i < dim_ && ++off[i] >= cnt[i]) {
            off[i] = 0;
            ++i;
          }
          if (i == dim_) break;
        }
      }
    next_level:;
    }
    if (wsum == 0.0) return transfer(x);
    acc *= 1.0 / wsum;
    return acc;
  }

  Multivector transfer(const Point& p) const {
    if (data_.closed_form) return data_.closed_form(s_->nearest(p).point);
    return data_.values[tree_->nearest(p)];
  }

 private:
  struct Entry {
    bool whitney = false;
    Multivector value;
  };

  bool member(const Point& c) const {
    if (!region_.box.contains(c)) return false;
    switch (region_.side) {
      case Side::inner:
        return s_->contains(c);
      case Side::outer:
        return !s_->contains(c) && distance(c, region_.ball_center) < region_.ball_radius;
      case Side::both:
        return true;
    }
    return false;
  }

  Entry compute(const DyadicCube& q) const {
    Entry e;
    if (q.level < root_) return e;
    const double diam = q.diameter();
    if (s_->box_distance(q.box()) < diam) return e;
    if (q.level > root_) {
      const DyadicCube p = q.parent();
      if (s_->box_distance(p.box()) >= p.diameter()) return e;
    }
    const Point c = q.center();
    if (!member(c)) return e;
    e.whitney = true;
    e.value = transfer(c);
    return e;
  }

  const Entry& lookup(const DyadicCube& q) const {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(q);
      if (it != cache_.end()) return it->second;
    }
    Entry e = compute(q);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(q, std::move(e)).first->second;
  }

  HoelderData data_;
  SurfacePtr s_;
  WhitneyRegion region_;
  int root_;
  int dim_;
  std::unique_ptr<KdTree> tree_;
  mutable std::mutex mu_;
  mutable std::unordered_map<DyadicCube, Entry, DyadicCubeHash> cache_;
};

}  // namespace

CliffordField whitney_extend(const HoelderData& data, SurfacePtr surface, const WhitneyDecomposition& decomposition) {
  if (!surface) throw ParameterError("null surface");
  if (decomposition.cubes.empty()) throw ParameterError("empty Whitney decomposition");
  if (decomposition.surface != surface) throw ParameterError("decomposition was built for another surface");
  if (data.samples.empty() || data.values.size() != data.samples.size()) {
    throw ParameterError("boundary data must be nonempty");
  }
  if (!(data.nu > 0.0 && data.nu <= 1.0)) throw ParameterError("Hoelder exponent must lie in (0, 1]");
  if (data.n() != surface->dim() - 1) throw ParameterError("data algebra does not match the surface dimension");
  auto ext = std::make_shared<Extension>(data, surface, decomposition.region, decomposition.totals.root_level);
  CliffordField f;
  f.n = data.n();
  f.backend = FieldBackend::whitney_extension;
  f.eval = [ext](const Point& x) { return (*ext)(x); };
  return f;
}

double extension_gradient_constant(const CliffordField& ext, const Surface& s, double nu,
                                   const std::vector<Point>& probes) {
  double c = 0.0;
  for (const Point& x : probes) {
    const double d = s.distance(x);
    if (d <= 0.0) continue;
    const double g = norm(cauchy_riemann(ext, x, d / 8.0));
    c = std::max(c, g / std::pow(d, nu - 1.0));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Teodorescu transform

struct TeodorescuOperator::Acc {
  std::vector<Multivector> s;
  std::size_t cells = 0;
};

TeodorescuOperator::TeodorescuOperator(const WhitneyDecomposition& domain, CliffordField u, QuadratureConfig cfg)
    : TeodorescuOperator(domain, std::move(u), cfg, false) {}

TeodorescuOperator TeodorescuOperator::of_derivative(const WhitneyDecomposition& domain, CliffordField g,
                                                     QuadratureConfig cfg) {
  return TeodorescuOperator(domain, std::move(g), cfg, true);
}

TeodorescuOperator::TeodorescuOperator(const WhitneyDecomposition& domain, CliffordField u, QuadratureConfig cfg,
                                       bool derivative)
    : u_(std::move(u)), derivative_(derivative), cfg_(cfg) {
  if (!domain.surface) throw ParameterError("decomposition has no surface");
  if (cfg_.subdivision < 1) throw ParameterError("subdivision must be >= 1");
  if (!(cfg_.singular_edge > 0.0)) throw ParameterError("singular_edge must be > 0");
  if (!(cfg_.refine_factor >= 0.0)) throw ParameterError("refine_factor must be >= 0");
  if (cfg_.sample_order < 1 || cfg_.sample_order > 3) throw ParameterError("sample_order must be 1, 2 or 3");
  dim_ = domain.surface->dim();
  n_ = dim_ - 1;
  if (u_.n != n_) throw ParameterError("field algebra does not match the domain dimension");
  const int m = cfg_.subdivision;
  std::size_t per = 1;
  for (int i = 0; i < dim_; ++i) per *= static_cast<std::size_t>(m);
  boxes_.reserve(domain.cubes.size() * per);
  for (const DyadicCube& q : domain.cubes) {
    const Box b = q.box();
    const double h = q.side() / m;
    for (std::size_t c = 0; c < per; ++c) {
      Box sb = b;
      std::size_t r = c;
      for (int i = 0; i < dim_; ++i) {
        const auto k = static_cast<double>(r % static_cast<std::size_t>(m));
        r /= static_cast<std::size_t>(m);
        sb.lo[i] = b.lo[i] + k * h;
        sb.hi[i] = sb.lo[i] + h;
      }
      boxes_.push_back(sb);
      covered_ += sb.volume();
    }
  }
  values_.resize(boxes_.size());
  parallel_for(boxes_.size(), [&](std::size_t i) { values_[i] = average(boxes_[i]); });
}

Multivector TeodorescuOperator::face_mean(const Box& b, int axis, double coord) const {
  const int q = cfg_.sample_order;
  double nodes[3], weights[3];
  gauss_rule(q, nodes, weights);
  int total = 1;
  for (int i = 0; i < dim_ - 1; ++i) total *= q;
  Multivector out(n_);
  Point y(dim_);
  y[axis] = coord;
  for (int c = 0; c < total; ++c) {
    double w = 1.0;
    for (int i = 0, r = c; i < dim_; ++i) {
      if (i == axis) continue;
      y[i] = b.lo[i] + 0.5 * b.extent(i) * (1.0 + nodes[r % q]);
      w *= 0.5 * weights[r % q];
      r /= q;
    }
    Multivector v = u_(y);
    v *= w;
    out += v;
  }
  return out;
}

Multivector TeodorescuOperator::average(const Box& b) const {
  const int q = cfg_.sample_order;
  if (derivative_) {
    Multivector out(n_);
    for (int i = 0; i < dim_; ++i) {
      Multivector diff = face_mean(b, i, b.hi[i]) - face_mean(b, i, b.lo[i]);
      diff *= 1.0 / b.extent(i);
      out += i == 0 ? diff : geometric_product(Multivector::blade(n_, 1u << (i - 1)), diff);
    }
    return out;
  }
  if (q == 1) return u_(b.center());
  double nodes[3], weights[3];
  gauss_rule(q, nodes, weights);
  int total = 1;
  for (int i = 0; i < dim_; ++i) total *= q;
  Multivector out(n_);
  Point y(dim_);
  for (int c = 0; c < total; ++c) {
    double w = 1.0;
    for (int i = 0, r = c; i < dim_; ++i, r /= q) {
      y[i] = b.lo[i] + 0.5 * b.extent(i) * (1.0 + nodes[r % q]);
      w *= 0.5 * weights[r % q];
    }
    Multivector v = u_(y);
    v *= w;
    out += v;
  }
  return out;
}

void TeodorescuOperator::cell(const Box& b, const Multivector& u, const Point& x, const Point& focus, Acc& acc) const {
  if (++acc.cells > cfg_.max_cells) {
    double partial = 0.0;
    for (const auto& s : acc.s) partial += norm(s);
    throw QuadratureError("Teodorescu refinement budget exceeded", partial);
  }
  const double side = b.max_extent();
  const double diam = b.diameter();
  const bool analytic = cfg_.rule == SingularRule::analytic && dim_ == 3;
  const double factor = analytic ? cfg_.refine_factor : 4.0;
  if (side > cfg_.singular_edge && point_box_distance(focus, b) < factor * diam) {
    const int nc = 1 << dim_;
    for (int c = 0; c < nc; ++c) {
      Box ch = b;
      for (int i = 0; i < dim_; ++i) {
        const double mid = 0.5 * (b.lo[i] + b.hi[i]);
        if (c & (1 << i)) {
          ch.lo[i] = mid;
        } else {
          ch.hi[i] = mid;
        }
      }
      cell(ch, average(ch), x, focus, acc);
    }
    return;
  }
  const double dx = point_box_distance(x, b);
  std::array<double, kMaxGeomDim> k{};
  if (analytic && dx < 3.0 * diam) {
    const auto k3 = box_kernel_integral_3d(b, x);
    k[0] = k3[0];
    k[1] = k3[1];
    k[2] = k3[2];
  } else if (!analytic && dx == 0.0) {
    return;  // singular cell at the edge floor: dropped
  } else if (dx < 8.0 * diam) {
    k = box_kernel_gauss(b, x, 2);
  } else {
    k = box_kernel_gauss(b, x, 1);
  }
  const auto uc = u.coeffs();
  for (int i = 0; i < dim_; ++i) {
    auto sc = acc.s[static_cast<std::size_t>(i)].coeffs();
    for (std::size_t a = 0; a < uc.size(); ++a) sc[a] += k[i] * uc[a];
  }
}

Multivector TeodorescuOperator::evaluate(const Point& x, const Point& focus) const {
  Acc acc;
  acc.s.assign(static_cast<std::size_t>(dim_), Multivector(n_));
  for (std::size_t c = 0; c < boxes_.size(); ++c) cell(boxes_[c], values_[c], x, focus, acc);
  // T u = -(1/sigma_n) (S_0 - sum_i e_i S_i), S_i = sum_c K_{c,i} u_c.
  Multivector out = acc.s[0];
  for (int i = 1; i < dim_; ++i) {
    out -= geometric_product(Multivector::blade(n_, 1u << (i - 1)), acc.s[static_cast<std::size_t>(i)]);
  }
  out *= -1.0 / sphere_area(n_);
  return out;
}

Multivector TeodorescuOperator::cauchy_riemann(const Point& x, double h) const {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be > 0");
  Multivector out(n_);
  for (int i = 0; i < dim_; ++i) {
    Point xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Multivector diff = evaluate(xp, x) - evaluate(xm, x);
    diff *= 0.5 / h;
    if (i == 0) {
      out += diff;
    } else {
      out += geometric_product(Multivector::blade(n_, 1u << (i - 1)), diff);
    }
  }
  return out;
}

Multivector teodorescu(const CliffordField& u, const WhitneyDecomposition& domain, const Point& x,
                       const QuadratureConfig& cfg) {
  return TeodorescuOperator(domain, u, cfg)(x);
}

// ---------------------------------------------------------------------------
// Solvability and uniqueness

double solvability_threshold(double m_abs, int n) { return 1.0 - m_abs / static_cast<double>(n + 1); }

bool solvability_check(double nu, double m_abs, int n) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("nu must lie in (0, 1]");
  if (!(m_abs > 0.0 && m_abs <= n + 1)) throw ParameterError("m_abs must lie in (0, n+1]");
  return nu > solvability_threshold(m_abs, n);
}

UniquenessWindow uniqueness_window(double nu, double m_abs, double dim_H_lower, int n) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("nu must lie in (0, 1]");
  if (!(m_abs > 0.0 && m_abs <= n + 1)) throw ParameterError("m_abs must lie in (0, n+1]");
  if (!(dim_H_lower >= n && dim_H_lower <= n + 1)) throw ParameterError("dim_H lower bound must lie in [n, n+1]");
  UniquenessWindow w;
  w.lo = dim_H_lower - n;
  w.hi = 1.0 - (n + 1) * (1.0 - nu) / m_abs;
  w.empty = !(w.hi > w.lo);
  w.note = w.empty ? "no Hoelder class mu gives uniqueness"
                   : "solution unique among C^{0,mu} for mu in the open interval; the lower end uses the caller's "
                     "Hausdorff-dimension bound";
  return w;
}

// ---------------------------------------------------------------------------
// Jump problem

Quantiles quantiles(std::vector<double> v) {
  Quantiles q;
  q.count = v.size();
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double f) {
    const double pos = f * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] * (1.0 - t) + v[i + 1] * t : v[i];
  };
  q.median = at(0.5);
  q.p90 = at(0.9);
  q.max = v.back();
  return q;
}

namespace {

nlohmann::ordered_json quantiles_json(const Quantiles& q) {
  return {{"median", q.median}, {"p90", q.p90}, {"max", q.max}, {"count", q.count}};
}

}  // namespace

std::string JumpDiagnostics::to_json() const {
  nlohmann::ordered_json j;
  j["data_scale"] = data_scale;
  j["hoelder_constant"] = hoelder_constant;
  j["nu"] = nu;
  j["m_plus"] = m_plus;
  if (m_minus) j["m_minus"] = *m_minus;
  j["m_abs"] = m_abs;
  j["branch"] = to_string(branch);
  j["solvability_threshold"] = threshold;
  j["solvable"] = solvable;
  j["forced"] = forced;
  j["jump_residual"] = quantiles_json(jump_residual);
  j["jump_residual_relative"] = quantiles_json(jump_residual_relative);
  j["probes_skipped"] = probes_skipped;
  j["median_probe_offset"] = median_probe_offset;
  j["interior_monogenicity"] = quantiles_json(interior_monogenicity);
  j["exterior_monogenicity_relative"] = quantiles_json(exterior_monogenicity);
  j["decay"] = {{"radius", radius}, {"distances", decay_radii}, {"norms", decay_norms}, {"exponent", decay_exponent}};
  j["gradient_constant"] = gradient_constant;
  j["uncovered_volume"] = uncovered_volume;
  j["cells"] = cells;
  return j.dump(2);
}

const char* to_string(JumpBranch b) { return b == JumpBranch::inner ? "inner" : "outer"; }

namespace {

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

JumpSolution solve_jump(SurfacePtr surface, const HoelderData& data, const JumpConfig& cfg) {
  if (!surface) throw ParameterError("null surface");
  const Surface& s = *surface;
  const int dim = s.dim();
  const int n = dim - 1;
  if (cfg.k_max < 0) throw ParameterError("k_max must be >= 0");
  if (!(cfg.probe_offset > 0.0)) throw ParameterError("probe_offset must be > 0");
  if (cfg.probes < 1) throw ParameterError("need at least one probe");
  const OuterBranch& ob = cfg.outer;
  if (!(ob.r1 >= 1.0 && ob.r2 > ob.r1 && ob.ball > ob.r2 + 0.5 * (ob.r2 + 1.0))) {
    throw ParameterError("outer branch radii need 1 <= r1 < r2 and ball > (3 r2 + 1) / 2");
  }

  double m_plus = 1.0;
  if (cfg.m_plus) {
    m_plus = *cfg.m_plus;
  } else if (s.spec().mode == SurfaceMode::fractal) {
    if (dim != 3) throw ParameterError("m_plus must be supplied for fractal surfaces outside R^3");
    m_plus = predictions(s.spec()).m_plus;
  }
  if (cfg.m_minus && !(*cfg.m_minus > 0.0 && *cfg.m_minus <= n + 1)) {
    throw ParameterError("m_minus must lie in (0, n+1]");
  }

  JumpSolution sol;
  JumpDiagnostics& dg = sol.diagnostics;
  dg.nu = data.nu;
  dg.m_plus = m_plus;
  dg.m_minus = cfg.m_minus;
  dg.m_abs = std::max(m_plus, cfg.m_minus.value_or(0.0));
  dg.branch = cfg.m_minus && *cfg.m_minus > m_plus ? JumpBranch::outer : JumpBranch::inner;
  dg.threshold = solvability_threshold(dg.m_abs, n);
  dg.solvable = solvability_check(data.nu, dg.m_abs, n);
  dg.forced = !dg.solvable && cfg.force;
  if (!dg.solvable && !cfg.force) {
    throw SolvabilityError("nu = " + std::to_string(data.nu) + " does not exceed the solvability threshold " +
                           std::to_string(dg.threshold));
  }
  dg.data_scale = data.scale();
  dg.hoelder_constant = data.hoelder_constant;

  const Box& bb = s.bounds();
  const Point c = bb.center();
  dg.radius = 0.5 * bb.diameter();
  const bool inner = dg.branch == JumpBranch::inner;

  WhitneyRegion region = inner_region(s);
  if (!inner) {
    // Cubes meeting {|x - c| < r2} have centers within r2 + (r2 + 1) / 2.
    region.side = Side::outer;
    region.ball_center = c;
    region.ball_radius = ob.ball * dg.radius;
    Point lo = c, hi = c;
    for (int i = 0; i < dim; ++i) {
      lo[i] -= region.ball_radius;
      hi[i] += region.ball_radius;
    }
    region.box = {lo, hi};
  }
  const WhitneyDecomposition dec = whitney_decompose(surface, region, cfg.k_max);
  if (dec.cubes.empty()) throw ParameterError("k_max too small: no Whitney cubes on the solution side");
  dg.uncovered_volume = dec.totals.uncovered_volume;
  sol.extension = whitney_extend(data, surface, dec);

  if (inner) {
    sol.potential = sol.extension;
  } else {
    const double r1 = ob.r1 * dg.radius, r2 = ob.r2 * dg.radius;
    sol.potential.n = n;
    sol.potential.backend = FieldBackend::composite;
    sol.potential.eval = [ext = sol.extension, c, r1, r2, n](const Point& x) {
      const double w = 1.0 - smoothstep5((norm(x - c) - r1) / (r2 - r1));
      if (w == 0.0) return Multivector(n);
      Multivector v = ext(x);
      v *= w;
      return v;
    };
  }
  const CliffordField g = sol.potential;

  auto op = std::make_shared<const TeodorescuOperator>(TeodorescuOperator::of_derivative(dec, g, cfg.quad));
  sol.transform = op;
  dg.cells = op->base_cells();

  // Inner: Phi+ = g - T Dg, Phi- = -T Dg. Outer: Phi+ = T Dg, Phi- = T Dg - g.
  const double sgn = inner ? -1.0 : 1.0;
  auto plus_at = [g, op, inner, sgn](const Point& x, const Point& focus) {
    Multivector t = op->evaluate(x, focus);
    t *= sgn;
    return inner ? g(x) + t : t;
  };
  auto minus_at = [g, op, inner, sgn](const Point& x, const Point& focus) {
    Multivector t = op->evaluate(x, focus);
    t *= sgn;
    return inner ? t : t - g(x);
  };
  sol.phi_plus.n = n;
  sol.phi_plus.backend = inner ? FieldBackend::composite : FieldBackend::teodorescu;
  sol.phi_plus.eval = [plus_at](const Point& x) { return plus_at(x, x); };
  sol.phi_plus.in_domain = [surface](const Point& x) { return surface->contains(x); };
  sol.phi_minus.n = n;
  sol.phi_minus.backend = inner ? FieldBackend::teodorescu : FieldBackend::composite;
  sol.phi_minus.eval = [minus_at](const Point& x) { return minus_at(x, x); };
  sol.phi_minus.in_domain = [surface](const Point& x) { return !surface->contains(x) || surface->distance(x) == 0.0; };
  auto d_plus = [&](const Point& p, double h) {
    Multivector t = op->cauchy_riemann(p, h);
    t *= sgn;
    return inner ? cauchy_riemann(g, p, h) + t : t;
  };
  auto d_minus = [&](const Point& p, double h) {
    Multivector t = op->cauchy_riemann(p, h);
    t *= sgn;
    return inner ? t : t - cauchy_riemann(g, p, h);
  };

  // Straddling probe pairs x -/+ delta * normal.
  const auto probes = s.sample_boundary(cfg.probes, cfg.seed);
  std::vector<double> res(probes.size(), -1.0), offs(probes.size(), 0.0);
  parallel_for(probes.size(), [&](std::size_t i) {
    const BoundarySample& b = probes[i];
    double delta = cfg.probe_offset;
    for (int tries = 0; tries < 60; ++tries, delta *= 0.5) {
      Point xin = b.point, xout = b.point;
      xin[b.axis] -= delta * b.outward;
      xout[b.axis] += delta * b.outward;
      if (!s.contains(xin) || s.contains(xout)) continue;
      if (s.distance(xin) < 0.5 * delta || s.distance(xout) < 0.5 * delta) continue;
      const Multivector f = sol.extension(b.point);
      res[i] = norm(plus_at(xin, b.point) - minus_at(xout, b.point) - f);
      offs[i] = delta;
      return;
    }
  });
  std::vector<double> ok, used;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i] < 0.0) {
      ++dg.probes_skipped;
    } else {
      ok.push_back(res[i]);
      used.push_back(offs[i]);
    }
  }
  dg.jump_residual = quantiles(ok);
  if (dg.data_scale > 0.0) {
    for (double& r : ok) r /= dg.data_scale;
  }
  dg.jump_residual_relative = quantiles(ok);
  dg.median_probe_offset = quantiles(used).median;

  // Monogenicity probes inside and outside.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  auto uni = [&](double a, double b) { return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  std::vector<Point> inner_pts, outer_pts;
  for (int tries = 0; tries < 200000 && inner_pts.size() < cfg.monogenicity_probes; ++tries) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = uni(bb.lo[i], bb.hi[i]);
    if (s.contains(p) && s.distance(p) > 0.05 * dg.radius) inner_pts.push_back(p);
  }
  for (int tries = 0; tries < 200000 && outer_pts.size() < cfg.monogenicity_probes; ++tries) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = uni(bb.lo[i] - dg.radius, bb.hi[i] + dg.radius);
    if (!s.contains(p) && s.distance(p) > 0.05 * dg.radius) outer_pts.push_back(p);
  }
  std::vector<double> mono_in(inner_pts.size()), mono_out(outer_pts.size());
  parallel_for(inner_pts.size(), [&](std::size_t i) {
    const Point& p = inner_pts[i];
    const double h = std::min(1e-3, s.distance(p) / 8.0);
    mono_in[i] = norm(d_plus(p, h));
  });
  parallel_for(outer_pts.size(), [&](std::size_t i) {
    const Point& p = outer_pts[i];
    const double d = s.distance(p);
    const double v = norm(minus_at(p, p));
    mono_out[i] = v > 0.0 ? norm(d_minus(p, d / 20.0)) * d / v : 0.0;
  });
  dg.interior_monogenicity = quantiles(mono_in);
  dg.exterior_monogenicity = quantiles(mono_out);

  // Decay of Phi- along a few fixed directions.
  std::vector<Point> dirs;
  for (int a = 0; a < dim; ++a) {
    Point u(dim);
    for (int i = 0; i < dim; ++i) u[i] = (i == a ? 1.0 : 0.3 + 0.1 * i);
    dirs.push_back(u * (1.0 / norm(u)));
    dirs.push_back(u * (-1.0 / norm(u)));
  }
  for (double r : cfg.decay_radii) {
    const double dist_abs = r * dg.radius;
    std::vector<double> vals(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
      const Point x = c + dirs[i] * dist_abs;
      vals[i] = norm(minus_at(x, x));
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    dg.decay_radii.push_back(dist_abs);
    dg.decay_norms.push_back(mean / static_cast<double>(vals.size()));
  }
  if (dg.decay_norms.size() >= 2 && dg.decay_norms.front() > 0.0) {
    double mx = 0.0, my = 0.0;
    const double m = static_cast<double>(dg.decay_norms.size());
    for (std::size_t i = 0; i < dg.decay_norms.size(); ++i) {
      mx += std::log(dg.decay_radii[i]);
      my += std::log(dg.decay_norms[i]);
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < dg.decay_norms.size(); ++i) {
      const double lx = std::log(dg.decay_radii[i]) - mx;
      sxx += lx * lx;
      sxy += lx * (std::log(dg.decay_norms[i]) - my);
    }
    dg.decay_exponent = sxy / sxx;
  }

  // Gradient growth of the extension toward S along normals into its side.
  std::vector<Point> ray;
  for (std::size_t i = 0; i < std::min<std::size_t>(probes.size(), 10); ++i) {
    for (double t : {1e-1, 3e-2, 1e-2, 3e-3}) {
      Point p = probes[i].point;
      p[probes[i].axis] += (inner ? -t : t) * probes[i].outward;
      if (s.contains(p) == inner && s.distance(p) > 0.0) ray.push_back(p);
    }
  }
  dg.gradient_constant = extension_gradient_constant(sol.extension, s, data.nu, ray);
  return sol;
}

void write_slice_csv(std::ostream& os, const JumpSolution& sol, const Surface& s, int axis, double coord, int res,
                     double margin) {
  const int dim = s.dim();
  if (axis < 0 || axis >= dim) throw ParameterError("slice axis out of range");
  if (res < 2) throw ParameterError("slice resolution must be >= 2");
  int a = -1, b = -1;
  for (int i = 0; i < dim && b < 0; ++i) {
    if (i == axis) continue;
    (a < 0 ? a : b) = i;
  }
  const Box& bb = s.bounds();
  const double pad = margin * bb.max_extent();
  const int ncoef = 1 << (dim - 1);
  os << 'x' << a << ",x" << b << ",side";
  for (int k = 0; k < ncoef; ++k) os << ",c" << k;
  os << ",norm\n";
  std::vector<std::string> rows(static_cast<std::size_t>(res) * static_cast<std::size_t>(res));
  parallel_for(rows.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / res, j = static_cast<int>(idx) % res;
    Point p = bb.center();
    p[axis] = coord;
    p[a] = bb.lo[a] - pad + (bb.extent(a) + 2 * pad) * i / (res - 1);
    p[b] = bb.lo[b] - pad + (bb.extent(b) + 2 * pad) * j / (res - 1);
    const bool in = s.contains(p);
    const Multivector v = in ? sol.phi_plus.eval(p) : sol.phi_minus.eval(p);
    char buf[64];
    auto num = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.10g", x);
      return std::string(buf);
    };
    std::string row = num(p[a]) + ',' + num(p[b]) + ',' + (in ? "+" : "-");
    for (int k = 0; k < ncoef; ++k) row += ',' + num(v[static_cast<std::size_t>(k)]);
    row += ',' + num(norm(v));
    rows[idx] = std::move(row);
  });
  for (const auto& r : rows) os << r << '\n';
}

}  // namespace fracjump

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fracjump/clifford.hpp"
#include "fracjump/geometry.hpp"
#include "fracjump/grid.hpp"
#include "fracjump/surface.hpp"

namespace fracjump {

enum class FieldBackend { closed_form, whitney_extension, teodorescu, composite };
const char* to_string(FieldBackend b);

using PointFn = std::function<Multivector(const Point&)>;

// Clifford-valued field on a subset of R^(n+1).
struct CliffordField {
  int n = 2;
  FieldBackend backend = FieldBackend::closed_form;
  PointFn eval;
  std::function<bool(const Point&)> in_domain;  // empty means everywhere

  Multivector operator()(const Point& x) const;
};

CliffordField closed_form_field(int n, PointFn f);

// Central-difference D u(x) with step h.
Multivector cauchy_riemann(const CliffordField& u, const Point& x, double h);

struct HoelderData {
  std::vector<BoundarySample> samples;
  std::vector<Multivector> values;
  double nu = 1.0;
  double hoelder_constant = 0.0;
  // Exact data on S when known; lets the extension read f at the nearest
  // boundary point instead of the nearest sample.
  PointFn closed_form;

  int n() const;
  // Largest |f| over the samples.
  double scale() const;
};

// max |f(x) - f(y)| / |x - y|^nu over pairs of (at most max_points) samples.
double estimate_hoelder_constant(const std::vector<BoundarySample>& samples, const std::vector<Multivector>& values,
                                 double nu, std::size_t max_points = 1500);

HoelderData make_hoelder_data(const Surface& s, PointFn f, double nu, std::size_t count, std::uint64_t seed,
                              bool keep_closed_form = true);

// Smooth partition-of-unity extension off S built on the Whitney cubes of
// the decomposition's region (continued below its k_max as needed).
CliffordField whitney_extend(const HoelderData& data, SurfacePtr surface, const WhitneyDecomposition& decomposition);

// max |D f~(x)| / dist(x, S)^(nu - 1) over the probes.
double extension_gradient_constant(const CliffordField& ext, const Surface& s, double nu,
                                   const std::vector<Point>& probes);

enum class SingularRule { analytic, drop };

struct QuadratureConfig {
  // analytic: exact cell integrals of the kernel near the evaluation point
  // (R^3 only; other dimensions fall back to drop). drop: midpoint rule and
  // the cell containing x is discarded once its edge reaches singular_edge.
  SingularRule rule = SingularRule::analytic;
  double singular_edge = 1.0 / 64.0;
  // Cells closer to the focus than refine_factor * diameter are split.
  double refine_factor = 1.0;
  // Base cells per Whitney cube and axis.
  int subdivision = 1;
  // u is frozen per cell at its Gauss-Legendre average with this many nodes
  // per axis (1 = value at the center).
  int sample_order = 1;
  std::size_t max_cells = 2'000'000;
};

// T u(x) = -int_G E(y - x) u(y) dV(y) over the cubes of a decomposition,
// with u frozen per cell.
class TeodorescuOperator {
 public:
  TeodorescuOperator(const WhitneyDecomposition& domain, CliffordField u, QuadratureConfig cfg);
  // T(D g) with each cell frozen at the mean of D g, taken from face means
  // of g by the divergence theorem. g itself is never differentiated.
  static TeodorescuOperator of_derivative(const WhitneyDecomposition& domain, CliffordField g, QuadratureConfig cfg);

  Multivector operator()(const Point& x) const { return evaluate(x, x); }
  // Refinement follows `focus`, so stencils around one focus share cells.
  Multivector evaluate(const Point& x, const Point& focus) const;
  // Central-difference D(T u)(x) with every stencil point refined around x.
  Multivector cauchy_riemann(const Point& x, double h) const;

  int n() const { return n_; }
  std::size_t base_cells() const { return boxes_.size(); }
  double covered_volume() const { return covered_; }

 private:
  struct Acc;
  TeodorescuOperator(const WhitneyDecomposition& domain, CliffordField u, QuadratureConfig cfg, bool derivative);
  Multivector average(const Box& b) const;
  Multivector face_mean(const Box& b, int axis, double coord) const;
  void cell(const Box& b, const Multivector& u, const Point& x, const Point& focus, Acc& acc) const;

  int n_ = 2;
  int dim_ = 3;
  CliffordField u_;  // the potential g when derivative_
  bool derivative_ = false;
  QuadratureConfig cfg_;
  std::vector<Box> boxes_;
  std::vector<Multivector> values_;
  double covered_ = 0.0;
};

Multivector teodorescu(const CliffordField& u, const WhitneyDecomposition& domain, const Point& x,
                       const QuadratureConfig& cfg);

// nu > 1 - m_abs / (n + 1).
bool solvability_check(double nu, double m_abs, int n);
double solvability_threshold(double m_abs, int n);

struct UniquenessWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
  std::string note;
};

// Open interval (dim_H_lower - n, 1 - (n+1)(1 - nu)/m_abs).
UniquenessWindow uniqueness_window(double nu, double m_abs, double dim_H_lower, int n);

// Radii in units of the circumradius R of bounds(T). The cutoff w is 1 for
// |x - c| <= r1, 0 for |x - c| >= r2 (the support K), and the complement is
// decomposed inside the ball of radius `ball`.
struct OuterBranch {
  double r1 = 1.1;
  double r2 = 1.6;
  double ball = 4.0;
};

enum class JumpBranch { inner, outer };
const char* to_string(JumpBranch b);

struct JumpConfig {
  int k_max = 6;
  QuadratureConfig quad;
  double probe_offset = 1e-3;
  std::size_t probes = 200;
  std::uint64_t seed = 7;
  std::size_t monogenicity_probes = 20;
  std::vector<double> decay_radii = {5.0, 10.0, 20.0};
  bool force = false;
  // Inner exponent m+; defaults to the closed form for fractal surfaces in
  // R^3 and to 1 for box unions.
  std::optional<double> m_plus;
  // Outer exponent m-; when it exceeds m+ the solution is built on the
  // clipped complement instead of the interior.
  std::optional<double> m_minus;
  OuterBranch outer;
};

struct Quantiles {
  double median = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};
Quantiles quantiles(std::vector<double> v);

struct JumpDiagnostics {
  double data_scale = 0.0;
  double hoelder_constant = 0.0;
  double nu = 1.0;
  double m_plus = 0.0;
  std::optional<double> m_minus;
  double m_abs = 0.0;
  JumpBranch branch = JumpBranch::inner;
  double threshold = 0.0;
  bool solvable = true;
  bool forced = false;
  Quantiles jump_residual;           // |Phi+(x_in) - Phi-(x_out) - f(x)|
  Quantiles jump_residual_relative;  // divided by data_scale
  std::size_t probes_skipped = 0;
  double median_probe_offset = 0.0;
  Quantiles interior_monogenicity;   // |D Phi+| at interior probes
  Quantiles exterior_monogenicity;   // |D Phi-| dist / |Phi-| at exterior probes
  std::vector<double> decay_radii;   // absolute |x - center|
  std::vector<double> decay_norms;
  double decay_exponent = 0.0;
  double radius = 0.0;               // circumradius of bounds(T)
  double gradient_constant = 0.0;
  double uncovered_volume = 0.0;
  std::size_t cells = 0;

  std::string to_json() const;
};

struct JumpSolution {
  CliffordField phi_plus;
  CliffordField phi_minus;
  CliffordField extension;  // of the data into the side the branch uses
  CliffordField potential;  // g = f~ (inner) or w f~ (outer); Phi+ - Phi- = g on S
  std::shared_ptr<const TeodorescuOperator> transform;
  JumpDiagnostics diagnostics;
};

JumpSolution solve_jump(SurfacePtr surface, const HoelderData& data, const JumpConfig& cfg);

// Phi = Phi+ on T and Phi- off T, sampled on the plane x_axis = coord over
// the bounds of the surface (extended by `margin`), res x res points.
void write_slice_csv(std::ostream& os, const JumpSolution& sol, const Surface& s, int axis, double coord, int res,
                     double margin = 0.25);

}  // namespace fracjump

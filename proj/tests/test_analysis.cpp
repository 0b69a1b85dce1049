#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fracjump/analysis.hpp"
#include "fracjump/cell_integral.hpp"
#include "fracjump/errors.hpp"
#include "json.hpp"

using namespace fracjump;

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_m.
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(m), 0.0);
  w.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// int_B (y - x)/|y - x|^3 dV = int_dB -n/|y - x| dA by the divergence theorem,
// with grad_y(-1/|y - x|) = (y - x)/|y - x|^3. Each face integral is smooth
// when x stays away from the faces.
std::array<double, 3> kernel_by_faces(const Box& b, const Point& x) {
  std::vector<double> gx, gw;
  gauss_legendre(10, gx, gw);
  const int panels = 8;
  std::array<double, 3> out{};
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const double c = side ? b.hi[axis] : b.lo[axis];
      const double hu = b.extent(u) / panels, hv = b.extent(v) / panels;
      double acc = 0.0;
      for (int pu = 0; pu < panels; ++pu) {
        for (int pv = 0; pv < panels; ++pv) {
          for (std::size_t i = 0; i < gx.size(); ++i) {
            for (std::size_t j = 0; j < gx.size(); ++j) {
              Point y(3);
              y[axis] = c;
              y[u] = b.lo[u] + hu * (pu + 0.5 + 0.5 * gx[i]);
              y[v] = b.lo[v] + hv * (pv + 0.5 + 0.5 * gx[j]);
              acc += gw[i] * gw[j] * 0.25 * hu * hv / distance(y, x);
            }
          }
        }
      }
      out[static_cast<std::size_t>(axis)] += side ? -acc : acc;
    }
  }
  return out;
}

// Cauchy integral over the faces of the unit cube, int E(y - x) n(y) f(y) dS,
// by tensor Gauss on P x P panels per face. Outside the cube it equals
// Phi- = -T(D f~); inside it equals Phi+.
Multivector cube_cauchy_integral(const PointFn& f, const Point& x) {
  std::vector<double> gx, gw;
  gauss_legendre(3, gx, gw);
  const int panels = 48;
  Multivector acc(2);
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Multivector n = axis == 0 ? Multivector::scalar(2, 1.0) : Multivector::blade(2, 1u << (axis - 1));
      if (side == 0) n *= -1.0;
      for (int pu = 0; pu < panels; ++pu) {
        for (int pv = 0; pv < panels; ++pv) {
          for (std::size_t i = 0; i < gx.size(); ++i) {
            for (std::size_t j = 0; j < gx.size(); ++j) {
              Point y(3);
              y[axis] = side;
              y[u] = (pu + 0.5 + 0.5 * gx[i]) / panels;
              y[v] = (pv + 0.5 + 0.5 * gx[j]) / panels;
              const auto e = fundamental_solution(Paravector{{y[0] - x[0], y[1] - x[1], y[2] - x[2]}});
              Multivector t = geometric_product(geometric_product(e, n), f(y));
              t *= gw[i] * gw[j] * 0.25 / (panels * panels);
              acc += t;
            }
          }
        }
      }
    }
  }
  return acc;
}

Multivector smooth_u(const Point& y) {
  Multivector m(2);
  m[0] = std::sin(y[0]) + y[1] * y[2];
  m[1] = std::cos(y[1]) * y[0];
  m[2] = y[2] * y[2] - y[0];
  m[3] = std::exp(0.5 * y[1]);
  return m;
}

}  // namespace

TEST_CASE("solvability threshold") {
  const double m = 0.9751861042183623;
  CHECK(solvability_threshold(m, 2) == doctest::Approx(0.6749379652605458).epsilon(1e-14));
  CHECK(solvability_check(0.7, m, 2));
  CHECK_FALSE(solvability_check(0.6, m, 2));
  CHECK_FALSE(solvability_check(solvability_threshold(m, 2), m, 2));
  CHECK(solvability_threshold(1.0, 2) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(solvability_check(0.0, m, 2), ParameterError);
  CHECK_THROWS_AS(solvability_check(1.1, m, 2), ParameterError);
  CHECK_THROWS_AS(solvability_check(0.7, 0.0, 2), ParameterError);
  CHECK_THROWS_AS(solvability_check(0.7, 3.5, 2), ParameterError);
}

TEST_CASE("uniqueness window") {
  const double m = 0.9751861042183623;
  const auto w = uniqueness_window(0.8, m, 2.0, 2);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == doctest::Approx(0.38473).epsilon(1e-4));
  CHECK_FALSE(w.empty);
  CHECK(uniqueness_window(0.8, 0.9752, 2.0, 2).hi == doctest::Approx(0.384742).epsilon(1e-5));
  CHECK(uniqueness_window(0.5, m, 2.0, 2).empty);
  CHECK(uniqueness_window(0.8, m, 2.5, 2).empty);
  CHECK_THROWS_AS(uniqueness_window(0.8, m, 1.5, 2), ParameterError);
}

TEST_CASE("quantiles") {
  const auto q = quantiles({3.0, 1.0, 2.0, 4.0});
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.p90 == doctest::Approx(3.7));
  CHECK(q.max == 4.0);
  CHECK(q.count == 4);
  CHECK(quantiles({}).count == 0);
  CHECK(quantiles({5.0}).median == 5.0);
}

TEST_CASE("fields respect their domain") {
  auto f = closed_form_field(2, [](const Point&) { return Multivector::scalar(2, 1.0); });
  f.in_domain = [](const Point& x) { return x[0] > 0.0; };
  CHECK(f(Point{1.0, 0.0, 0.0})[0] == 1.0);
  CHECK_THROWS_AS(f(Point{-1.0, 0.0, 0.0}), DomainError);
  CHECK(std::string(to_string(FieldBackend::teodorescu)) == "teodorescu");
}

TEST_CASE("exact box kernel against Gauss rules") {
  const Box b(Point{0.0, 0.0, 0.0}, Point{1.0, 0.5, 0.75});
  for (const Point& x : {Point{2.0, 0.3, 0.1}, Point{-0.4, -0.2, 1.3}, Point{0.5, 0.25, 2.0}}) {
    const auto e = box_kernel_integral_3d(b, x);
    std::array<double, 3> g{};
    const int m = 4;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const Point lo{b.lo[0] + b.extent(0) * i / m, b.lo[1] + b.extent(1) * j / m, b.lo[2] + b.extent(2) * k / m};
          const Point hi{lo[0] + b.extent(0) / m, lo[1] + b.extent(1) / m, lo[2] + b.extent(2) / m};
          const auto part = box_kernel_gauss(Box(lo, hi), x, 3);
          for (int a = 0; a < 3; ++a) g[a] += part[a];
        }
      }
    }
    for (int i = 0; i < 3; ++i) CHECK(e[i] == doctest::Approx(g[i]).epsilon(1e-6));
  }
  for (const Point& x : {Point{0.5, 0.25, 0.375}, Point{0.35, 0.2, 0.4}}) {
    const auto e = box_kernel_integral_3d(b, x);
    const auto f = kernel_by_faces(b, x);
    for (int i = 0; i < 3; ++i) CHECK(e[i] == doctest::Approx(f[i]).scale(1.0).epsilon(1e-8));
  }
  // symmetric about the center: the field vanishes there
  const auto c = box_kernel_integral_3d(b, Point{0.5, 0.25, 0.375});
  for (double v : c) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("Teodorescu transform of zero is zero") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 4);
  const auto zero = closed_form_field(2, [](const Point&) { return Multivector(2); });
  const TeodorescuOperator t(dec, zero, {});
  for (const Point& x : {Point{0.5, 0.5, 0.5}, Point{0.1, 0.9, 0.3}, Point{3.0, 0.0, 0.0}}) CHECK(norm(t(x)) == 0.0);
}

TEST_CASE("D T u = u inside the unit cube") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 5);
  QuadratureConfig cfg;
  cfg.singular_edge = 1.0 / 32.0;
  const TeodorescuOperator t(dec, closed_form_field(2, smooth_u), cfg);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  std::vector<double> rel;
  for (int i = 0; i < 5; ++i) {
    const Point x{u(rng), u(rng), u(rng)};
    const auto d = t.cauchy_riemann(x, 1e-3);
    rel.push_back(norm(d - smooth_u(x)) / norm(smooth_u(x)));
  }
  CHECK(quantiles(rel).median <= 0.05);
}

TEST_CASE("Teodorescu output decays like |x|^-n outside") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 3);
  const auto one = closed_form_field(2, [](const Point&) { return Multivector::scalar(2, 1.0); });
  const TeodorescuOperator t(dec, one, {});
  const double a = norm(t(Point{10.5, 0.5, 0.5})), b = norm(t(Point{20.5, 0.5, 0.5}));
  CHECK(std::log2(a / b) == doctest::Approx(2.0).epsilon(0.02));
  // far away the transform of 1 is E(x - c) times the covered volume
  const Point far{100.5, 0.5, 0.5};
  const auto e = fundamental_solution(Paravector{{100.0, 0.0, 0.0}});
  CHECK(norm(t(far) - e * t.covered_volume()) <= 1e-3 * norm(e));
}

TEST_CASE("Whitney extension of simple data") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 5);
  const Multivector c = Multivector::scalar(2, 2.5) + Multivector::blade(2, 0b11, -1.0);
  const auto cdata = make_hoelder_data(*s, [&](const Point&) { return c; }, 1.0, 500, 1);
  const auto ext = whitney_extend(cdata, s, dec);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point p{u(rng), u(rng), u(rng)};
    CHECK(norm(ext(p) - c) <= 1e-12);
  }

  const PointFn coord = [](const Point& y) { return Multivector::scalar(2, y[0] + 2.0 * y[2]); };
  const auto xdata = make_hoelder_data(*s, coord, 1.0, 500, 2, false);
  const auto xext = whitney_extend(xdata, s, dec);
  for (const auto& smp : xdata.samples) CHECK(norm(xext(smp.point) - coord(smp.point)) <= 1e-14);

  CHECK_THROWS_AS(make_hoelder_data(*s, coord, 0.0, 10, 1), ParameterError);
  HoelderData empty;
  CHECK_THROWS_AS(whitney_extend(empty, s, dec), ParameterError);
  CHECK_THROWS_AS(whitney_extend(cdata, nullptr, dec), ParameterError);
}

TEST_CASE("extension gradient grows no faster than dist^(nu - 1)") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 10);
  const double nu = 0.6;
  const Point q{0.5, 0.5, 1.0};
  const PointFn f = [&](const Point& y) { return Multivector::scalar(2, std::pow(distance(y, q), nu)); };
  const auto data = make_hoelder_data(*s, f, nu, 2000, 3);
  const auto ext = whitney_extend(data, s, dec);
  std::vector<double> grads, dists;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    const Point p{0.5 + 0.37 * t, 0.5, 1.0 - t};
    grads.push_back(norm(cauchy_riemann(ext, p, t / 8.0)));
    dists.push_back(t);
  }
  const double slope = std::log(grads.back() / grads.front()) / std::log(dists.back() / dists.front());
  MESSAGE("log |D f~| / log dist slope = " << slope);
  CHECK(slope >= nu - 1.0 - 0.1);
  const double g = extension_gradient_constant(ext, *s, nu, {Point{0.5, 0.5, 0.9}, Point{0.5, 0.5, 0.99}});
  CHECK(std::isfinite(g));
  CHECK(g > 0.0);
}

TEST_CASE("jump problem with constant data is exact") {
  const auto s = make_surface(unit_cube_spec());
  JumpConfig cfg;
  cfg.k_max = 4;
  cfg.probes = 40;
  for (double v : {0.0, 1.75}) {
    const auto data = make_hoelder_data(*s, [&](const Point&) { return Multivector::scalar(2, v); }, 1.0, 300, 5);
    const auto sol = solve_jump(s, data, cfg);
    const auto& dg = sol.diagnostics;
    CHECK(dg.jump_residual.max <= 1e-3 * std::max(1.0, v));
    CHECK(dg.probes_skipped == 0);
    CHECK(norm(sol.phi_minus(Point{2.0, 2.0, 2.0})) <= 1e-12);
    CHECK(norm(sol.phi_plus(Point{0.5, 0.5, 0.5}) - Multivector::scalar(2, v)) <= 1e-12);
    CHECK_THROWS_AS(sol.phi_plus(Point{2.0, 2.0, 2.0}), DomainError);
    CHECK_THROWS_AS(sol.phi_minus(Point{0.5, 0.5, 0.5}), DomainError);
  }
}

TEST_CASE("jump problem refuses data below the threshold") {
  const auto s = make_surface(unit_cube_spec());
  const auto data = make_hoelder_data(*s, [](const Point& y) { return Multivector::scalar(2, y[0]); }, 0.5, 200, 5);
  JumpConfig cfg;
  cfg.k_max = 3;
  cfg.probes = 10;
  cfg.monogenicity_probes = 2;
  CHECK_THROWS_AS(solve_jump(s, data, cfg), SolvabilityError);
  cfg.force = true;
  const auto sol = solve_jump(s, data, cfg);
  CHECK(sol.diagnostics.forced);
  CHECK_FALSE(sol.diagnostics.solvable);
  CHECK(sol.diagnostics.threshold == doctest::Approx(2.0 / 3.0));

  const auto s4 = make_surface(build_surface(1.3, 2.1, 3, 4));
  const auto d4 = make_hoelder_data(*s4, [](const Point&) { return Multivector(3); }, 0.9, 50, 1);
  JumpConfig c4;
  c4.k_max = 2;
  CHECK_THROWS_AS(solve_jump(s4, d4, c4), ParameterError);
}

TEST_CASE("jump problem on the unit cube with Hoelder data") {
  const auto s = make_surface(unit_cube_spec());
  const Point q{1.0, 0.4, 0.3};
  const auto data = make_hoelder_data(
      *s, [&](const Point& y) { return Multivector::scalar(2, std::pow(distance(y, q), 0.99)); }, 0.99, 2000, 11);
  JumpConfig cfg;
  cfg.k_max = 5;
  cfg.probes = 40;
  cfg.monogenicity_probes = 4;
  const auto sol = solve_jump(s, data, cfg);
  const auto& dg = sol.diagnostics;
  CHECK(dg.solvable);
  CHECK(dg.jump_residual_relative.median <= 5e-2);
  CHECK(dg.decay_exponent == doctest::Approx(-2.0).epsilon(0.15));
  CHECK(dg.exterior_monogenicity.median <= 0.05);

  const auto j = nlohmann::json::parse(dg.to_json());
  CHECK(j["solvable"] == true);
  CHECK(j["jump_residual"]["count"] == dg.jump_residual.count);
  CHECK(j["decay"]["norms"].size() == 3);

  std::ostringstream os;
  write_slice_csv(os, sol, *s, 2, 0.5, 4);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x0,x1,side,c0,c1,c2,c3,norm");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 16);
  CHECK_THROWS_AS(write_slice_csv(os, sol, *s, 3, 0.5, 4), ParameterError);
}

TEST_CASE("jump solution on the unit cube matches the Cauchy integral") {
  const auto s = make_surface(unit_cube_spec());
  const Point q{1.0, 0.4, 0.3};
  const PointFn f = [&](const Point& y) {
    Multivector m(2);
    m[0] = std::pow(distance(y, q), 0.99);
    m[3] = 0.5 * y[1];
    return m;
  };
  const auto data = make_hoelder_data(*s, f, 0.99, 2000, 1);
  const std::vector<Point> outside = {{1.5, 0.5, 0.5}, {3.0, 2.0, 1.0}, {-0.3, 0.2, 0.9}, {0.5, 1.2, 0.5}};
  std::vector<double> prev;
  for (int k : {5, 6}) {
    JumpConfig cfg;
    cfg.k_max = k;
    cfg.probes = 10;
    cfg.monogenicity_probes = 2;
    const auto sol = solve_jump(s, data, cfg);
    std::vector<double> err;
    for (const auto& x : outside) {
      const auto c = cube_cauchy_integral(f, x);
      err.push_back(norm(sol.phi_minus(x) - c) / norm(c));
    }
    MESSAGE("k_max = " << k << ": exterior errors " << err[0] << " " << err[1] << " " << err[2] << " " << err[3]);
    // the Whitney domain stops one cube layer short of S, an O(2^-k) error
    for (std::size_t i = 0; i < err.size(); ++i) {
      CHECK(err[i] <= std::ldexp(8.0, -k));
      if (!prev.empty()) CHECK(err[i] < prev[i]);
    }
    prev = err;
    if (k == 5) {
      for (const Point& x : {Point{0.5, 0.5, 0.5}, Point{0.2, 0.7, 0.1}}) {
        const auto c = cube_cauchy_integral(f, x);
        CHECK(norm(sol.phi_plus(x) - c) <= 0.1 * norm(c));
      }
    }
  }
}

TEST_CASE("outer branch on the unit cube matches the Cauchy integral") {
  const auto s = make_surface(unit_cube_spec());
  const Point q{1.0, 0.4, 0.3};
  const PointFn f = [&](const Point& y) {
    Multivector m(2);
    m[0] = std::pow(distance(y, q), 0.99);
    m[3] = 0.5 * y[1];
    return m;
  };
  const auto data = make_hoelder_data(*s, f, 0.99, 2000, 1);
  // beyond the support of the cutoff, where Phi- = T(D g) alone
  const std::vector<Point> outside = {{-1.2, 0.5, 0.5}, {0.5, 0.5, 2.2}, {2.5, 2.5, -1.0}};
  std::vector<double> prev;
  for (int k : {4, 5}) {
    JumpConfig cfg;
    cfg.k_max = k;
    cfg.probes = 20;
    cfg.monogenicity_probes = 2;
    cfg.m_minus = 2.5;
    const auto sol = solve_jump(s, data, cfg);
    const auto& dg = sol.diagnostics;
    CHECK(dg.branch == JumpBranch::outer);
    CHECK(dg.m_abs == 2.5);
    CHECK(dg.jump_residual_relative.median <= 5e-3);
    CHECK(dg.decay_exponent == doctest::Approx(-2.0).epsilon(0.15));
    std::vector<double> err;
    for (const auto& x : outside) {
      const auto c = cube_cauchy_integral(f, x);
      err.push_back(norm(sol.phi_minus(x) - c) / norm(c));
    }
    MESSAGE("k_max = " << k << ": exterior errors " << err[0] << " " << err[1] << " " << err[2]);
    for (std::size_t i = 0; i < err.size(); ++i) {
      CHECK(err[i] <= std::ldexp(12.0, -k));
      if (!prev.empty()) CHECK(err[i] < 0.6 * prev[i]);
    }
    prev = err;
    for (const Point& x : {Point{0.5, 0.5, 0.5}, Point{0.2, 0.7, 0.1}}) {
      const auto c = cube_cauchy_integral(f, x);
      CHECK(norm(sol.phi_plus(x) - c) <= 0.1 * norm(c));
    }
  }
}

TEST_CASE("outer branch selection and parameters") {
  const auto s = make_surface(unit_cube_spec());
  const auto data = make_hoelder_data(*s, [](const Point& y) { return Multivector::scalar(2, y[0]); }, 1.0, 200, 5);
  JumpConfig cfg;
  cfg.k_max = 3;
  cfg.probes = 5;
  cfg.monogenicity_probes = 2;
  cfg.m_minus = 1.0;
  CHECK(solve_jump(s, data, cfg).diagnostics.branch == JumpBranch::inner);
  cfg.m_minus = 3.5;
  CHECK_THROWS_AS(solve_jump(s, data, cfg), ParameterError);
  cfg.m_minus = 2.0;
  cfg.outer.ball = 2.0;
  CHECK_THROWS_AS(solve_jump(s, data, cfg), ParameterError);
  cfg.outer = OuterBranch{};
  const auto sol = solve_jump(s, data, cfg);
  CHECK(sol.diagnostics.branch == JumpBranch::outer);
  const auto j = nlohmann::json::parse(sol.diagnostics.to_json());
  CHECK(j["branch"] == "outer");
  CHECK(j["m_minus"] == 2.0);
  // g vanishes off the cutoff support
  CHECK(norm(sol.potential(Point{0.5, 0.5, 3.0})) == 0.0);
  CHECK(norm(sol.potential(Point{1.0, 0.5, 0.5}) - Multivector::scalar(2, 1.0)) <= 1e-12);
}

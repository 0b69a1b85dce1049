#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "doctest.h"
#include "fracjump/errors.hpp"
#include "fracjump/grid.hpp"
#include "oracles.hpp"

using namespace fracjump;

TEST_CASE("dyadic cube basics") {
  DyadicCube q;
  q.level = 3;
  q.dim = 3;
  q.corner = {1, -2, 5};
  CHECK(q.side() == 0.125);
  CHECK(q.diameter() == doctest::Approx(std::sqrt(3.0) * 0.125));
  CHECK(q.volume() == doctest::Approx(std::pow(0.125, 3)));
  const Box b = q.box();
  CHECK(b.lo[1] == -0.25);
  CHECK(b.hi[2] == 0.75);
  const DyadicCube p = q.parent();
  CHECK(p.level == 2);
  CHECK(p.corner[0] == 0);
  CHECK(p.corner[1] == -1);
  CHECK(p.corner[2] == 2);
  bool found = false;
  for (int c = 0; c < p.num_children(); ++c) found = found || p.child(static_cast<unsigned>(c)) == q;
  CHECK(found);
  CHECK(cube_containing(q.center(), 3) == q);
  CHECK_FALSE(interiors_disjoint(p, q));
  DyadicCube r = q;
  r.corner[0] = 2;
  CHECK(interiors_disjoint(q, r));
}

TEST_CASE("cube distance") {
  const Surface cube(unit_cube_spec());
  DyadicCube q;
  q.level = 1;
  q.dim = 3;
  q.corner = {4, 0, 0};  // [2, 2.5] x [0, 0.5] x [0, 0.5]
  CHECK(cube_distance(q, cube) == doctest::Approx(1.0));
  q.corner = {1, 1, 1};  // touches the corner (1,1,1)
  CHECK(cube_distance(q, cube) == 0.0);
  q.level = 2;
  q.corner = {1, 1, 1};  // [1/4, 1/2]^3, gap 1/4 to the faces at 0
  CHECK(cube_distance(q, cube) == doctest::Approx(0.25));
}

TEST_CASE("box counts of box boundaries match the exact formula") {
  const Box generic = oracle::box3(0.1234, 0.8123, -0.3377, 0.4411, 0.2071, 0.9319);
  const Surface g(box_union_spec({generic}));
  const Surface u(unit_cube_spec());
  for (int k = 0; k <= 7; ++k) {
    CHECK(box_count(g, k) == oracle::box_boundary_count(generic, k));
    CHECK(box_count(u, k) == oracle::box_boundary_count(oracle::box3(0, 1, 0, 1, 0, 1), k));
  }
  // A thin box over [delta, 1 - delta]^2 in general position acts as a flat
  // square: both large faces share one column of cubes, 4^k of them.
  const double d = 0.0137;
  const Box thin = oracle::box3(0.30001, 0.30002, d, 1 - d, d, 1 - d);
  const Surface t(box_union_spec({thin}));
  for (int k = 2; k <= 6; ++k) {
    const auto n = box_count(t, k);
    CHECK(n == oracle::box_boundary_count(thin, k));
    CHECK(n == (std::uint64_t{1} << (2 * k)));
  }
}

TEST_CASE("box count of a fractal surface matches brute-force voxels") {
  const auto spec = build_surface(1.3, 2.1, 7);
  const Surface s(spec);
  const auto boxes = oracle::fractal_boxes(1.3, 2.1, 7);
  for (int k : {3, 5, 6}) CHECK(box_count(s, k) == oracle::fractal_voxel_count(boxes, k));
}

TEST_CASE("box count series is monotone and bounded") {
  const Surface s(build_surface(1.0, 2.5, 10));
  const auto series = box_count_series(s, 0, 8);
  REQUIRE(series.entries.size() == 9);
  for (std::size_t i = 1; i < series.entries.size(); ++i) {
    CHECK(series.entries[i].count >= series.entries[i - 1].count);
    CHECK(series.entries[i].count <= 8 * series.entries[i - 1].count);
  }
}

TEST_CASE("dimension regression") {
  BoxCountSeries two, three;
  for (int k = 0; k <= 10; ++k) {
    two.entries.push_back({k, std::uint64_t{1} << (2 * k)});
    three.entries.push_back({k, std::uint64_t{1} << (3 * k)});
  }
  const auto f2 = estimate_minkowski_dim(two, 4, 10);
  CHECK(f2.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f2.max_abs_residual() < 1e-9);
  CHECK(f2.ks.size() == 7);
  CHECK(estimate_minkowski_dim(three, 2, 8).slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_minkowski_dim(two, 4, 6), ParameterError);
  BoxCountSeries sparse;
  sparse.entries = {{4, 10}, {10, 1000}};
  CHECK_THROWS_AS(estimate_minkowski_dim(sparse, 4, 10), ParameterError);

  const Surface u(unit_cube_spec());
  const auto fit = estimate_minkowski_dim(box_count_series(u, 4, 10), 4, 10);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fit.slope >= 0.0);
  CHECK(fit.slope <= 3.0);
}

TEST_CASE("Whitney cubes of the unit cube satisfy the Whitney inequality exactly") {
  const auto s = make_surface(unit_cube_spec());
  const auto dec = whitney_decompose(s, inner_region(*s), 8);
  REQUIRE(!dec.cubes.empty());
  std::unordered_set<DyadicCube, DyadicCubeHash> all(dec.cubes.begin(), dec.cubes.end());
  double vol = 0.0;
  std::size_t bad = 0, overlap = 0, outside = 0;
  for (std::size_t i = 0; i < dec.cubes.size(); ++i) {
    const DyadicCube& q = dec.cubes[i];
    const Box b = q.box();
    const double d = oracle::unit_cube_inner_distance(b);
    if (d < 0.0) ++outside;
    if (std::abs(d - dec.dist[i]) > 1e-15) ++bad;
    if (!(q.diameter() <= d && d <= 4.0 * q.diameter())) ++bad;
    for (DyadicCube a = q; a.level > dec.totals.root_level;) {
      a = a.parent();
      if (all.count(a)) ++overlap;
    }
    vol += q.volume();
  }
  CHECK(bad == 0);
  CHECK(overlap == 0);
  CHECK(outside == 0);
  CHECK(vol + dec.totals.uncovered_volume == doctest::Approx(1.0).epsilon(1e-12));
  std::uint64_t sum = 0;
  for (const auto& [k, w] : dec.per_level) sum += w;
  CHECK(sum == dec.cubes.size());
}

TEST_CASE("planar shortcut reproduces plain Whitney counts") {
  for (const auto& spec : {unit_cube_spec(), l_shape_spec(), build_surface(1.3, 2.1, 6)}) {
    const Surface s(spec);
    WhitneyOptions fast, slow;
    fast.k_max = slow.k_max = 7;
    slow.planar_shortcut = false;
    for (const auto& reg : {inner_region(s), outer_region(s)}) {
      const auto a = whitney_stats(s, reg, fast);
      const auto b = whitney_stats(s, reg, slow);
      REQUIRE(a.levels.size() == b.levels.size());
      for (const auto& [k, lv] : a.levels) {
        CHECK(lv.count == b.levels.at(k).count);
        CHECK(lv.center_hist == b.levels.at(k).center_hist);
      }
      CHECK(a.totals.uncovered_volume == doctest::Approx(b.totals.uncovered_volume).epsilon(1e-12));
    }
  }
}

TEST_CASE("flat faces give w_k ~ 4^k") {
  const Surface s(unit_cube_spec());
  WhitneyOptions opt;
  opt.k_max = 12;
  const auto st = whitney_stats(s, inner_region(s), opt);
  BoxCountSeries w;
  for (const auto& [k, lv] : st.levels) w.entries.push_back({k, lv.count});
  CHECK(estimate_minkowski_dim(w, 6, 12).slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Whitney counts are controlled by box counts") {
  // a level-k Whitney cube lies within 4 diam of S, so w_k = O(N_k)
  for (const auto& spec : {build_surface(1.3, 2.1, 12), build_surface(1.0, 2.5, 12), unit_cube_spec()}) {
    const Surface s(spec);
    WhitneyOptions opt;
    opt.k_max = 9;
    const auto st = whitney_stats(s, inner_region(s), opt);
    for (const auto& [k, lv] : st.levels) {
      if (k < 3) continue;
      CHECK(lv.count <= 2 * box_count(s, k));
    }
  }
}

TEST_CASE("outer region stays inside its ball") {
  const Surface s(l_shape_spec());
  const auto reg = outer_region(s);
  WhitneyOptions opt;
  opt.k_max = 6;
  opt.planar_shortcut = false;
  std::size_t bad = 0;
  whitney_visit(s, reg, opt, [&](const WhitneyCell& c) {
    const Point m = c.cube->center();
    if (s.contains(m) || distance(m, reg.ball_center) >= reg.ball_radius) ++bad;
    if (c.dist < c.cube->diameter() || c.dist > 4.0 * c.cube->diameter()) ++bad;
  });
  CHECK(bad == 0);
}

TEST_CASE("series CSV") {
  BoxCountSeries s;
  s.entries = {{4, 100}, {5, 400}};
  std::ostringstream os;
  write_series_csv(os, s);
  CHECK(os.str() == "k,count\n4,100\n5,400\n");
  std::ostringstream ls;
  write_levels_csv(ls, {{2, 7}, {3, 9}});
  CHECK(ls.str() == "k,count\n2,7\n3,9\n");
}

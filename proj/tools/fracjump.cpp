#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracjump/analysis.hpp"
#include "fracjump/errors.hpp"
#include "fracjump/grid.hpp"
#include "fracjump/marcinkiewicz.hpp"
#include "fracjump/surface.hpp"
#include "json.hpp"
#include "json_config.hpp"

namespace fj = fracjump;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kBadInput = 2, kRefused = 3, kNumerical = 4 };

struct SurfaceArgs {
  std::string file;
  std::string shape = "fractal";
  double alpha = 1.0;
  double beta = 2.0;
  int nmax = 12;
  int dim = 3;
};

void add_surface_flags(CLI::App* cmd, SurfaceArgs& a) {
  cmd->add_option("--surface", a.file, "SurfaceSpec JSON written by `surface`")->check(CLI::ExistingFile);
  cmd->add_option("--shape", a.shape, "fractal, cube or lshape")
      ->check(CLI::IsMember({"fractal", "cube", "lshape"}))
      ->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "slab width exponent (>= 1)")->capture_default_str();
  cmd->add_option("--beta", a.beta, "slab count exponent (>= 2)")->capture_default_str();
  cmd->add_option("--nmax", a.nmax, "truncation level N_max")->capture_default_str();
  cmd->add_option("--dim", a.dim, "ambient dimension n+1")->capture_default_str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fj::ParameterError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fj::SurfaceSpec resolve_spec(const SurfaceArgs& a) {
  if (!a.file.empty()) return fj::surface_spec_from_json(slurp(a.file));
  if (a.shape == "cube") return fj::unit_cube_spec(a.dim);
  if (a.shape == "lshape") {
    if (a.dim != 3) throw fj::ParameterError("the L-shape is defined in R^3 only");
    return fj::l_shape_spec();
  }
  return fj::build_surface(a.alpha, a.beta, a.nmax, a.dim);
}

std::optional<fj::ClosedFormPrediction> closed_form(const fj::SurfaceSpec& spec) {
  if (spec.mode != fj::SurfaceMode::fractal || spec.dimension != 3) return std::nullopt;
  return fj::predictions(spec);
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw fj::ParameterError("cannot write " + path);
  out << text;
}

template <class F>
void write_stream(const std::string& path, F&& f) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw fj::ParameterError("cannot write " + path);
  f(out);
}

ojson parse(const std::string& s) { return ojson::parse(s); }

void describe(const fj::Surface& s) {
  const auto& spec = s.spec();
  if (spec.mode == fj::SurfaceMode::fractal) {
    std::printf("fractal surface alpha=%g beta=%g N_max=%d depth=%d rectangles=%llu\n", spec.alpha, spec.beta,
                spec.n_max, spec.effective_depth, static_cast<unsigned long long>(spec.rectangle_count()));
  } else {
    std::printf("box union of %zu boxes in R^%d\n", spec.boxes.size(), spec.dimension);
  }
}

// ---------------------------------------------------------------------------

struct SurfaceCmd {
  SurfaceArgs s;
  std::string out;
  std::string samples_out;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
};

int run_surface(const SurfaceCmd& c) {
  const fj::SurfaceSpec spec = resolve_spec(c.s);
  const auto surface = fj::make_surface(spec);
  describe(*surface);
  if (auto p = closed_form(spec)) {
    std::printf("closed form: dim_M = %.4f  m+ = %.4f\n", p->dim_minkowski, p->m_plus);
  }
  const std::string text = fj::to_json(spec);
  if (c.out.empty()) {
    std::cout << text << '\n';
  } else {
    write_file(c.out, text + "\n");
  }
  write_stream(c.samples_out, [&](std::ostream& os) {
    const auto pts = surface->sample_boundary(c.samples, c.seed);
    os << "x0";
    for (int i = 1; i < spec.dimension; ++i) os << ",x" << i;
    os << ",face,axis,outward\n";
    os.precision(17);
    for (const auto& p : pts) {
      for (int i = 0; i < spec.dimension; ++i) os << (i ? "," : "") << p.point[i];
      os << ',' << p.face_id << ',' << p.axis << ',' << p.outward << '\n';
    }
  });
  return kOk;
}

// ---------------------------------------------------------------------------

struct DimensionCmd {
  SurfaceArgs s;
  int k_min = 4;
  int k_max = 10;
  std::string csv;
  std::string out;
  std::optional<double> tolerance;
};

int run_dimension(const DimensionCmd& c) {
  if (c.k_min < 0 || c.k_max - c.k_min < 3) throw fj::ParameterError("need k_min >= 0 and k_max - k_min >= 3");
  const fj::SurfaceSpec spec = resolve_spec(c.s);
  const auto surface = fj::make_surface(spec);
  describe(*surface);
  const auto series = fj::box_count_series(*surface, c.k_min, c.k_max);
  const auto fit = fj::estimate_minkowski_dim(series, c.k_min, c.k_max);
  const auto pred = closed_form(spec);
  std::printf("dim_M estimate = %.4f +/- %.4f (max residual %.4f)", fit.slope, fit.slope_stderr,
              fit.max_abs_residual());
  if (pred) std::printf("  closed form = %.4f", pred->dim_minkowski);
  std::printf("\n");

  ojson j;
  j["surface"] = parse(fj::to_json(spec));
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  auto counts = ojson::array();
  for (const auto& e : series.entries) counts.push_back({{"k", e.k}, {"count", e.count}});
  j["counts"] = counts;
  j["estimate"] = fit.slope;
  j["stderr"] = fit.slope_stderr;
  j["max_residual"] = fit.max_abs_residual();
  if (pred) j["closed_form"] = pred->dim_minkowski;
  bool ok = true;
  if (c.tolerance) {
    const double target = pred ? pred->dim_minkowski : static_cast<double>(spec.dimension - 1);
    ok = std::abs(fit.slope - target) <= *c.tolerance;
    j["tolerance"] = *c.tolerance;
    j["pass"] = ok;
    std::printf("check |estimate - %.4f| <= %g: %s\n", target, *c.tolerance, ok ? "pass" : "FAIL");
  }
  write_file(c.out, j.dump(2) + "\n");
  write_stream(c.csv, [&](std::ostream& os) { fj::write_series_csv(os, series); });
  return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct MarcinkiewiczCmd {
  SurfaceArgs s;
  int k_max = 12;
  double precision = 0.02;
  std::string side = "inner";
  int dim_k_min = 4;
  int dim_k_max = 10;
  bool theorem = false;
  std::optional<double> tolerance;
  std::string trace;
  std::string out;
};

struct MarcinkiewiczResult {
  fj::ExponentEstimate est;
  fj::DimensionFit fit;
  std::optional<fj::InequalityReport> ineq;
  ojson json;
  bool ok = true;
};

MarcinkiewiczResult marcinkiewicz(const fj::SurfaceSpec& spec, const MarcinkiewiczCmd& c) {
  const auto surface = fj::make_surface(spec);
  fj::ExponentOptions opt;
  opt.k_max = c.k_max;
  opt.precision = c.precision;
  opt.inner = c.side != "outer";
  opt.outer = c.side != "inner";
  MarcinkiewiczResult r;
  r.est = fj::estimate_exponent(*surface, opt);
  const auto pred = closed_form(spec);
  ojson& j = r.json;
  j["surface"] = parse(fj::to_json(spec));
  j["k_max"] = c.k_max;
  j["precision"] = c.precision;
  j["side"] = c.side;
  if (opt.inner) {
    j["m_plus"] = r.est.m_plus;
    j["inner_inconclusive"] = r.est.inner.inconclusive;
  }
  if (opt.outer) {
    j["m_minus"] = r.est.m_minus;
    j["outer_inconclusive"] = r.est.outer.inconclusive;
  }
  j["m_abs"] = r.est.m_abs;
  if (pred) j["closed_form_m_plus"] = pred->m_plus;
  if (c.tolerance && opt.inner) {
    const double target = pred ? pred->m_plus : 1.0;
    const bool ok = std::abs(r.est.m_plus - target) <= *c.tolerance;
    j["tolerance"] = *c.tolerance;
    j["pass"] = ok;
    r.ok = r.ok && ok;
  }
  if (c.theorem) {
    const auto series = fj::box_count_series(*surface, c.dim_k_min, c.dim_k_max);
    r.fit = fj::estimate_minkowski_dim(series, c.dim_k_min, c.dim_k_max);
    r.ineq = fj::check_theorem_inequality(r.est, r.fit.slope, r.fit.slope_stderr, spec.dimension - 1);
    ojson t;
    t["dim_estimate"] = r.fit.slope;
    t["dim_stderr"] = r.fit.slope_stderr;
    t["bound"] = r.ineq->bound;
    t["combined_error"] = r.ineq->combined_error;
    t["holds"] = r.ineq->holds;
    t["strict"] = r.ineq->strict;
    if (pred) {
      const double gap = pred->m_plus - (spec.dimension - pred->dim_minkowski);
      t["closed_form_gap"] = gap;
      t["closed_form_strict"] = gap > 0.0;
    }
    j["theorem"] = t;
    r.ok = r.ok && r.ineq->holds;
  }
  return r;
}

int run_marcinkiewicz(const MarcinkiewiczCmd& c) {
  const fj::SurfaceSpec spec = resolve_spec(c.s);
  describe(*fj::make_surface(spec));
  auto r = marcinkiewicz(spec, c);
  const auto pred = closed_form(spec);
  if (r.est.inner.computed) {
    std::printf("m+ estimate = %.4f +/- %.4f (%d inconclusive)", r.est.m_plus, c.precision, r.est.inner.inconclusive);
    if (pred) std::printf("  closed form = %.4f", pred->m_plus);
    std::printf("\n");
  }
  if (r.est.outer.computed) std::printf("m- estimate = %.4f +/- %.4f\n", r.est.m_minus, c.precision);
  if (r.ineq) {
    std::printf("inequality m_abs >= (n+1) - dim: %.4f vs %.4f (+/- %.4f): %s%s\n", r.ineq->m_abs, r.ineq->bound,
                r.ineq->combined_error, r.ineq->holds ? "holds" : "VIOLATED",
                r.ineq->strict ? ", strict" : "");
  }
  write_file(c.out, r.json.dump(2) + "\n");
  write_stream(c.trace, [&](std::ostream& os) {
    std::vector<fj::BisectionStep> all = r.est.inner.trace;
    all.insert(all.end(), r.est.outer.trace.begin(), r.est.outer.trace.end());
    fj::write_trace_csv(os, all);
  });
  return r.ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct JumpCmd {
  SurfaceArgs s;
  std::string data = "holder";
  double nu = 0.99;
  double value = 1.0;
  std::vector<double> q;
  std::size_t samples = 2000;
  std::uint64_t seed = 7;
  int k_max = 6;
  std::size_t probes = 200;
  double probe_offset = 1e-3;
  double singular_edge = 1.0 / 64.0;
  int subdivision = 1;
  int sample_order = 1;
  std::string rule = "analytic";
  std::optional<double> m_plus;
  std::optional<double> m_minus;
  bool force = false;
  std::optional<double> tolerance;
  std::string out;
  std::string slice;
  int slice_axis = 2;
  std::optional<double> slice_coord;
  int slice_res = 41;
};

int run_jump(const JumpCmd& c) {
  const fj::SurfaceSpec spec = resolve_spec(c.s);
  const auto surface = fj::make_surface(spec);
  describe(*surface);
  const int n = spec.dimension - 1;
  if (c.samples < 2) throw fj::ParameterError("need at least 2 boundary samples");

  fj::Point q = surface->bounds().hi;
  if (!c.q.empty()) {
    if (static_cast<int>(c.q.size()) != spec.dimension) throw fj::ParameterError("--q needs one value per axis");
    for (int i = 0; i < spec.dimension; ++i) q[i] = c.q[static_cast<std::size_t>(i)];
  } else {
    q = surface->nearest(surface->bounds().hi).point;
  }
  fj::PointFn f;
  if (c.data == "zero") {
    f = [n](const fj::Point&) { return fj::Multivector(n); };
  } else if (c.data == "const") {
    f = [n, v = c.value](const fj::Point&) { return fj::Multivector::scalar(n, v); };
  } else if (c.data == "coord") {
    f = [n](const fj::Point& x) { return fj::Multivector::scalar(n, x[0]); };
  } else {
    f = [n, q, nu = c.nu](const fj::Point& x) { return fj::Multivector::scalar(n, std::pow(fj::distance(x, q), nu)); };
  }
  const double nu = c.data == "holder" ? c.nu : 1.0;
  const auto data = fj::make_hoelder_data(*surface, f, nu, c.samples, c.seed);

  fj::JumpConfig cfg;
  cfg.k_max = c.k_max;
  cfg.probes = c.probes;
  cfg.probe_offset = c.probe_offset;
  cfg.seed = c.seed;
  cfg.force = c.force;
  cfg.m_plus = c.m_plus;
  cfg.m_minus = c.m_minus;
  cfg.quad.singular_edge = c.singular_edge;
  cfg.quad.subdivision = c.subdivision;
  cfg.quad.sample_order = c.sample_order;
  cfg.quad.rule = c.rule == "drop" ? fj::SingularRule::drop : fj::SingularRule::analytic;
  const auto sol = fj::solve_jump(surface, data, cfg);
  const auto& d = sol.diagnostics;
  std::printf("branch %s, m_abs %.4f, threshold %.4f\n", fj::to_string(d.branch), d.m_abs, d.threshold);
  std::printf("jump residual / data scale: median %.3e  p90 %.3e  (%zu probes, %zu skipped)\n",
              d.jump_residual_relative.median, d.jump_residual_relative.p90, d.jump_residual_relative.count,
              d.probes_skipped);
  std::printf("decay exponent %.3f (expected %d)\n", d.decay_exponent, -n);

  ojson j = parse(d.to_json());
  j["surface"] = parse(fj::to_json(spec));
  j["data"] = c.data;
  bool ok = true;
  if (c.tolerance) {
    ok = d.jump_residual_relative.median <= *c.tolerance;
    j["tolerance"] = *c.tolerance;
    j["pass"] = ok;
  }
  write_file(c.out, j.dump(2) + "\n");
  write_stream(c.slice, [&](std::ostream& os) {
    const double coord = c.slice_coord ? *c.slice_coord : surface->bounds().center()[c.slice_axis];
    fj::write_slice_csv(os, sol, *surface, c.slice_axis, coord, c.slice_res);
  });
  return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

struct ReportCmd {
  std::vector<double> alphas = {1.0, 1.3, 2.0};
  std::vector<double> betas = {2.0, 2.1, 2.5};
  int nmax = 12;
  MarcinkiewiczCmd m;
  std::string out;
  std::string csv;
};

int run_report(const ReportCmd& c) {
  MarcinkiewiczCmd mc = c.m;
  mc.theorem = true;
  ojson rows = ojson::array();
  std::ostringstream csv;
  csv << "alpha,beta,dim_estimate,dim_closed,m_plus,m_closed,bound,holds,strict\n";
  bool ok = true;
  for (double a : c.alphas) {
    for (double b : c.betas) {
      const auto spec = fj::build_surface(a, b, c.nmax);
      auto r = marcinkiewicz(spec, mc);
      const auto pred = fj::predictions(spec);
      std::printf("alpha=%.2f beta=%.2f  dim %.4f (%.4f)  m+ %.4f (%.4f)  %s\n", a, b, r.fit.slope,
                  pred.dim_minkowski, r.est.m_plus, pred.m_plus, r.ineq->holds ? "holds" : "VIOLATED");
      csv << a << ',' << b << ',' << r.fit.slope << ',' << pred.dim_minkowski << ',' << r.est.m_plus << ','
          << pred.m_plus << ',' << r.ineq->bound << ',' << r.ineq->holds << ',' << r.ineq->strict << '\n';
      rows.push_back(r.json);
      ok = ok && r.ok;
    }
  }
  ojson j;
  j["rows"] = rows;
  j["all_hold"] = ok;
  write_file(c.out, j.dump(2) + "\n");
  write_file(c.csv, csv.str());
  return ok ? kOk : kCheckFailed;
}

void add_marcinkiewicz_flags(CLI::App* cmd, MarcinkiewiczCmd& m) {
  cmd->add_option("--kmax", m.k_max, "finest Whitney level")->capture_default_str();
  cmd->add_option("--precision", m.precision, "bisection half-width (>= 0.01)")->capture_default_str();
  cmd->add_option("--dim-kmin", m.dim_k_min, "box-counting fit range start")->capture_default_str();
  cmd->add_option("--dim-kmax", m.dim_k_max, "box-counting fit range end")->capture_default_str();
  cmd->add_option("--tolerance", m.tolerance, "fail unless |m+ - closed form| <= tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractal surfaces, Marcinkiewicz exponents and Clifford jump problems", "fracjump"};
  app.require_subcommand(1);

  SurfaceCmd sc;
  auto* surface = app.add_subcommand("surface", "build a surface and write its spec and boundary samples");
  add_surface_flags(surface, sc.s);
  surface->add_option("-o,--out", sc.out, "spec JSON path (stdout if empty)");
  surface->add_option("--samples-out", sc.samples_out, "boundary sample CSV path");
  surface->add_option("--samples", sc.samples, "number of boundary samples")->capture_default_str();
  surface->add_option("--seed", sc.seed, "sampling seed")->capture_default_str();

  DimensionCmd dc;
  auto* dimension = app.add_subcommand("dimension", "box-counting Minkowski dimension");
  add_surface_flags(dimension, dc.s);
  dimension->add_option("--kmin", dc.k_min, "first level of the fit")->capture_default_str();
  dimension->add_option("--kmax", dc.k_max, "last level of the fit")->capture_default_str();
  dimension->add_option("--csv", dc.csv, "write k,count series");
  dimension->add_option("-o,--out", dc.out, "JSON report path");
  dimension->add_option("--tolerance", dc.tolerance, "fail unless |estimate - closed form| <= tolerance");

  MarcinkiewiczCmd mc;
  auto* marc = app.add_subcommand("marcinkiewicz", "Marcinkiewicz exponent by bisection on I_p");
  add_surface_flags(marc, mc.s);
  add_marcinkiewicz_flags(marc, mc);
  marc->add_option("--side", mc.side, "inner, outer or both")
      ->check(CLI::IsMember({"inner", "outer", "both"}))
      ->capture_default_str();
  marc->add_flag("--theorem", mc.theorem, "also estimate dim_M and check m_abs >= (n+1) - dim_M");
  marc->add_option("--trace", mc.trace, "bisection trace CSV path");
  marc->add_option("-o,--out", mc.out, "JSON report path");

  JumpCmd jc;
  auto* jump = app.add_subcommand("jump", "solve the jump problem Phi+ - Phi- = f on S");
  add_surface_flags(jump, jc.s);
  jump->add_option("--data", jc.data, "holder (|x-q|^nu), const, zero or coord (x0)")
      ->check(CLI::IsMember({"holder", "const", "zero", "coord"}))
      ->capture_default_str();
  jump->add_option("--nu", jc.nu, "Hoelder exponent of the data")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  jump->add_option("--value", jc.value, "constant for --data const")->capture_default_str();
  jump->add_option("--q", jc.q, "centre q of |x-q|^nu (default: a point of S)")->delimiter(',');
  jump->add_option("--samples", jc.samples, "boundary samples carrying the data")->capture_default_str();
  jump->add_option("--seed", jc.seed, "seed for samples and probes")->capture_default_str();
  jump->add_option("--kmax", jc.k_max, "finest Whitney level of the domain")->capture_default_str();
  jump->add_option("--probes", jc.probes, "straddle probe pairs")->capture_default_str();
  jump->add_option("--probe-offset", jc.probe_offset, "initial probe offset delta")->capture_default_str();
  jump->add_option("--singular-edge", jc.singular_edge, "smallest refined cell edge")->capture_default_str();
  jump->add_option("--subdivision", jc.subdivision, "quadrature cells per Whitney cube and axis")
      ->capture_default_str();
  jump->add_option("--sample-order", jc.sample_order, "Gauss nodes per axis for cell averages")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  jump->add_option("--rule", jc.rule, "analytic or drop")
      ->check(CLI::IsMember({"analytic", "drop"}))
      ->capture_default_str();
  jump->add_option("--m-plus", jc.m_plus, "inner Marcinkiewicz exponent (default: closed form, or 1 for boxes)");
  jump->add_option("--m-minus", jc.m_minus, "outer exponent; above m-plus the outer branch is solved");
  jump->add_flag("--force", jc.force, "solve even when nu is below the solvability threshold");
  jump->add_option("--tolerance", jc.tolerance, "fail unless median residual / data scale <= tolerance");
  jump->add_option("-o,--out", jc.out, "JSON diagnostics path");
  jump->add_option("--slice", jc.slice, "plane-slice CSV of Phi");
  jump->add_option("--slice-axis", jc.slice_axis, "axis normal to the slice")->capture_default_str();
  jump->add_option("--slice-coord", jc.slice_coord, "slice position (default: centre of the bounds)");
  jump->add_option("--slice-res", jc.slice_res, "slice grid points per side")->capture_default_str();

  ReportCmd rc;
  auto* report = app.add_subcommand("report", "dimension, exponent and inequality over an (alpha, beta) grid");
  report->add_option("--alphas", rc.alphas, "alpha values")->delimiter(',')->capture_default_str();
  report->add_option("--betas", rc.betas, "beta values")->delimiter(',')->capture_default_str();
  report->add_option("--nmax", rc.nmax, "truncation level")->capture_default_str();
  add_marcinkiewicz_flags(report, rc.m);
  report->add_option("-o,--out", rc.out, "JSON report path");
  report->add_option("--csv", rc.csv, "summary CSV path");

  app.config_formatter(std::make_shared<fj::cli::JsonConfig>(
      std::vector<std::string>{"surface", "dimension", "marcinkiewicz", "jump", "report"}));
  app.set_config("--config", "", "JSON file with flag values (command-line flags win)");

  // --config belongs to the top-level app; accept it after the subcommand too.
  std::vector<std::string> args;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      args.push_back(a);
      args.push_back(argv[++i]);
    } else if (a.rfind("--config=", 0) == 0) {
      args.push_back(a);
    } else {
      rest.push_back(a);
    }
  }
  args.insert(args.end(), rest.begin(), rest.end());
  std::reverse(args.begin(), args.end());

  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (surface->parsed()) return run_surface(sc);
    if (dimension->parsed()) return run_dimension(dc);
    if (marc->parsed()) return run_marcinkiewicz(mc);
    if (jump->parsed()) return run_jump(jc);
    if (report->parsed()) return run_report(rc);
  } catch (const fj::SolvabilityError& e) {
    std::cerr << "refused: " << e.what() << " (pass --force to solve anyway)\n";
    return kRefused;
  } catch (const fj::ParameterError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kBadInput;
  } catch (const fj::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kBadInput;
}

#include "fracjump/marcinkiewicz.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fracjump/errors.hpp"
#include "json.hpp"

namespace fracjump {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged:
      return "converged";
    case Verdict::diverged:
      return "diverged";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string DivergenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["p"] = p;
  j["side"] = to_string(side);
  j["k_max"] = k_max;
  auto levels = nlohmann::ordered_json::array();
  for (const auto& [k, lo] : lower) {
    levels.push_back({{"k", k}, {"lower", lo}, {"upper", upper.at(k)}, {"midpoint", midpoint.at(k)}});
  }
  j["levels"] = levels;
  j["tail_ratio"] = tail_ratio;
  j["uncovered_volume"] = uncovered_volume;
  j["verdict"] = to_string(verdict);
  if (verdict == Verdict::converged) {
    j["value"] = value;
    j["error_bound"] = error_bound;
  }
  return j.dump(2);
}

DivergenceReport integral_Ip(const WhitneyStats& stats, double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("p must be a finite value >= 0");
  DivergenceReport r;
  r.p = p;
  r.side = stats.side;
  r.k_max = stats.k_max;
  r.uncovered_volume = stats.totals.uncovered_volume;
  const int d = stats.dim;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  double sum_lo = 0.0, sum_up = 0.0, sum_mid = 0.0;
  for (const auto& [k, lv] : stats.levels) {
    const double side = std::ldexp(1.0, -k);
    const double vol = std::pow(side, d);
    const double diam = sqrt_d * side;
    const double w = static_cast<double>(lv.count);
    const double lo = w * vol * std::pow(4.0 * diam, -p);
    const double up = w * vol * std::pow(diam, -p);
    double mid = 0.0;
    for (int b = 0; b < WhitneyStats::kBins; ++b) {
      if (lv.center_hist[b] == 0) continue;
      mid += static_cast<double>(lv.center_hist[b]) * vol * std::pow(WhitneyStats::bin_ratio(b) * side, -p);
    }
    r.lower[k] = lo;
    r.upper[k] = up;
    r.midpoint[k] = mid;
    sum_lo += lo;
    sum_up += up;
    sum_mid += mid;
  }

  if (r.upper.size() < static_cast<std::size_t>(kTailLevels)) {
    r.verdict = Verdict::inconclusive;
    return r;
  }
  std::vector<double> ks, lu, ll;
  for (auto it = std::prev(r.upper.end(), kTailLevels); it != r.upper.end(); ++it) {
    ks.push_back(it->first);
    lu.push_back(it->second);
    ll.push_back(r.lower.at(it->first));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < kTailLevels; ++i) {
    mx += ks[i];
    my += std::log(lu[i]);
  }
  mx /= kTailLevels;
  my /= kTailLevels;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < kTailLevels; ++i) {
    sxx += (ks[i] - mx) * (ks[i] - mx);
    sxy += (ks[i] - mx) * (std::log(lu[i]) - my);
  }
  r.tail_ratio = std::exp(sxy / sxx);

  bool nondecreasing = true;
  for (int i = 1; i < kTailLevels; ++i) {
    if (ll[i] < ll[i - 1]) nondecreasing = false;
  }

  if (r.tail_ratio < kConvergedRatio) {
    const double g = r.tail_ratio / (1.0 - r.tail_ratio);
    const double tail_up = lu.back() * g, tail_lo = ll.back() * g;
    const double tail_mid = r.midpoint.rbegin()->second * g;
    r.verdict = Verdict::converged;
    r.value = sum_mid + tail_mid;
    r.error_bound = std::max(sum_up - sum_mid, sum_mid - sum_lo) + std::max(tail_up - tail_mid, tail_mid - tail_lo);
  } else if (nondecreasing) {
    r.verdict = Verdict::diverged;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  return r;
}

DivergenceReport integral_Ip(const Surface& s, Side side, double p, int k_max) {
  if (!(p >= 0.0)) throw ParameterError("p must be >= 0");
  if (side == Side::both) throw ParameterError("I_p needs the inner or the outer side");
  WhitneyOptions opt;
  opt.k_max = k_max;
  const WhitneyRegion reg = side == Side::inner ? inner_region(s) : outer_region(s);
  return integral_Ip(whitney_stats(s, reg, opt), p);
}

SideEstimate bisect_exponent(const WhitneyStats& stats, double precision, int max_evaluations) {
  if (!(precision >= 1e-2)) throw ParameterError("precision must be >= 1e-2");
  if (max_evaluations < 3) throw ParameterError("bisection needs at least 3 evaluations");
  SideEstimate out;
  out.computed = true;
  double lo = 0.0, hi = static_cast<double>(stats.dim);
  int it = 0;
  auto eval = [&](double p) {
    DivergenceReport r = integral_Ip(stats, p);
    ++out.evaluations;
    if (r.verdict == Verdict::inconclusive) ++out.inconclusive;
    out.trace.push_back({it++, lo, hi, p, r.verdict});
    const Verdict v = r.verdict;
    out.reports.push_back(std::move(r));
    return v;
  };
  // Endpoints: I_0 is a volume; at p = dim every shell around S diverges.
  if (eval(hi) != Verdict::diverged) {
    out.m = hi;
    return out;
  }
  if (eval(lo) == Verdict::diverged) {
    out.m = lo;
    return out;
  }
  while (hi - lo > 2.0 * precision && out.evaluations < max_evaluations) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) == Verdict::diverged) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.m = 0.5 * (lo + hi);
  return out;
}

ExponentEstimate estimate_exponent(const Surface& s, const ExponentOptions& opt) {
  if (!(opt.precision >= 1e-2)) throw ParameterError("precision must be >= 1e-2");
  if (!opt.inner && !opt.outer) throw ParameterError("estimate_exponent needs at least one side");
  ExponentEstimate e;
  e.precision = opt.precision;
  WhitneyOptions wopt;
  wopt.k_max = opt.k_max;
  if (opt.inner) {
    e.inner = bisect_exponent(whitney_stats(s, inner_region(s), wopt), opt.precision, opt.max_evaluations);
    e.m_plus = e.inner.m;
  }
  if (opt.outer) {
    e.outer = bisect_exponent(whitney_stats(s, outer_region(s), wopt), opt.precision, opt.max_evaluations);
    e.m_minus = e.outer.m;
  }
  e.m_abs = std::max(opt.inner ? e.m_plus : 0.0, opt.outer ? e.m_minus : 0.0);
  return e;
}

InequalityReport check_theorem_inequality(double m_abs, double m_error, double dim_estimate, double dim_error,
                                          int n) {
  InequalityReport r;
  r.m_abs = m_abs;
  r.bound = static_cast<double>(n + 1) - dim_estimate;
  r.combined_error = std::abs(m_error) + std::abs(dim_error);
  r.holds = m_abs >= r.bound - r.combined_error;
  r.strict = m_abs - r.bound > r.combined_error;
  r.estimator_failure = !r.holds;
  return r;
}

InequalityReport check_theorem_inequality(const ExponentEstimate& e, double dim_estimate, double dim_error, int n) {
  return check_theorem_inequality(e.m_abs, e.precision, dim_estimate, dim_error, n);
}

void write_trace_csv(std::ostream& os, const std::vector<BisectionStep>& trace) {
  os << "iteration,p_low,p_high,p,verdict\n";
  for (const auto& s : trace) {
    os << s.iteration << ',' << s.p_low << ',' << s.p_high << ',' << s.p << ',' << to_string(s.verdict) << '\n';
  }
}

}  // namespace fracjump

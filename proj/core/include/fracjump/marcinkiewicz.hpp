#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fracjump/grid.hpp"
#include "fracjump/surface.hpp"

namespace fracjump {

enum class Verdict { converged, diverged, inconclusive };
const char* to_string(Verdict v);

struct DivergenceReport {
  double p = 0.0;
  Side side = Side::inner;
  int k_max = 0;
  // Per-level sums of vol * (4 diam)^-p, vol * diam^-p and the midpoint rule.
  std::map<int, double> lower;
  std::map<int, double> upper;
  std::map<int, double> midpoint;
  double tail_ratio = 0.0;  // geometric ratio fitted to the last upper sums
  Verdict verdict = Verdict::inconclusive;
  double value = 0.0;        // meaningful when converged
  double error_bound = 0.0;  // idem
  double uncovered_volume = 0.0;

  std::string to_json() const;
};

inline constexpr int kTailLevels = 4;
inline constexpr double kConvergedRatio = 0.9;

// I_p from precomputed Whitney statistics.
DivergenceReport integral_Ip(const WhitneyStats& stats, double p);
DivergenceReport integral_Ip(const Surface& s, Side side, double p, int k_max);

struct BisectionStep {
  int iteration = 0;
  double p_low = 0.0;
  double p_high = 0.0;
  double p = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

struct SideEstimate {
  bool computed = false;
  double m = 0.0;
  int inconclusive = 0;
  int evaluations = 0;
  std::vector<BisectionStep> trace;
  std::vector<DivergenceReport> reports;
};

struct ExponentEstimate {
  double m_plus = 0.0;
  double m_minus = 0.0;
  double m_abs = 0.0;
  double precision = 0.0;
  SideEstimate inner;
  SideEstimate outer;
};

struct ExponentOptions {
  double precision = 0.02;
  int k_max = 12;
  bool inner = true;
  bool outer = true;
  int max_evaluations = 20;
};

// Bisection over p in [0, dim] on the divergence verdict. Inconclusive
// verdicts count as not diverged and are tallied.
SideEstimate bisect_exponent(const WhitneyStats& stats, double precision, int max_evaluations);
ExponentEstimate estimate_exponent(const Surface& s, const ExponentOptions& opt);

struct InequalityReport {
  double m_abs = 0.0;
  double bound = 0.0;         // (n+1) - dim
  double combined_error = 0.0;
  bool holds = false;         // m_abs >= bound within the combined error
  bool strict = false;        // gap exceeds the combined error
  bool estimator_failure = false;
};

// Compare an exponent estimate against (n+1) - dim for a surface in R^(n+1).
InequalityReport check_theorem_inequality(double m_abs, double m_error, double dim_estimate, double dim_error,
                                          int n);
InequalityReport check_theorem_inequality(const ExponentEstimate& e, double dim_estimate, double dim_error, int n);

void write_trace_csv(std::ostream& os, const std::vector<BisectionStep>& trace);

}  // namespace fracjump

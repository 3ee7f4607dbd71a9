#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "margins/distributions.hpp"
#include "margins/errors.hpp"

namespace margins {

// Coverage below this is treated as "no predictions left": accuracy becomes
// an explicit undefined marker rather than a 0/0 artifact.
inline constexpr double kUndefinedCoverage = 1e-15;

// Grid-certification floor: "for all tau" claims are checked only where at
// least this much probability mass is still predicted on.
inline constexpr double kCoverageFloor = 1e-12;

struct ThresholdGrid {
  std::vector<double> taus;  // starts at 0, strictly increasing

  explicit ThresholdGrid(std::vector<double> ts) : taus(std::move(ts)) {
    if (taus.empty() || taus.front() != 0.0)
      throw InvalidParameter("threshold grid: must start at 0");
    for (std::size_t i = 1; i < taus.size(); ++i) {
      if (!(taus[i] > taus[i - 1]) || !std::isfinite(taus[i]))
        throw InvalidParameter("threshold grid: must be finite and strictly increasing");
    }
  }

  static ThresholdGrid uniform(double tau_max, std::size_t points) {
    if (points < 2) throw InvalidParameter("threshold grid: needs at least 2 points");
    if (!(tau_max > 0.0) || !std::isfinite(tau_max))
      throw InvalidParameter("threshold grid: tau_max must be positive and finite");
    std::vector<double> ts(points);
    for (std::size_t i = 0; i < points; ++i)
      ts[i] = tau_max * static_cast<double>(i) / static_cast<double>(points - 1);
    ts[0] = 0.0;
    return ThresholdGrid(std::move(ts));
  }

  // Default placement: out to |center| + 8 scales for parametric laws (beyond
  // that, coverage underflows and accuracy is noise), out to the largest
  // margin magnitude for empirical ones.
  static ThresholdGrid for_distribution(const MarginDistribution& dist,
                                        std::size_t points = 512) {
    double tau_max;
    if (const auto* e = dist.get_if<EmpiricalDistribution>()) {
      tau_max = std::max(std::abs(e->margins.front()), std::abs(e->margins.back()));
      if (tau_max == 0.0) tau_max = 1.0;
    } else {
      tau_max = std::abs(center(dist)) + 8.0 * scale_hint(dist);
    }
    return uniform(tau_max, points);
  }

  std::size_t size() const { return taus.size(); }
};

struct CurvePoint {
  double tau = 0.0;
  double coverage = 0.0;
  std::optional<double> accuracy;  // empty when coverage has vanished
};

namespace detail {

struct KeptMass {
  double correct;
  double incorrect;
};

// Mass still predicted on at threshold tau, split by correctness. Correct
// predictions carry margin +c and are kept when c >= tau; incorrect ones
// carry -c, kept when c >= tau, i.e. margin <= -tau. At tau = 0 the incorrect
// side takes the strict half so a margin atom at exactly 0 is counted once
// (as correct) and full coverage stays exactly 1.
inline KeptMass kept_mass(const MarginDistribution& dist, double tau) {
  if (tau < 0.0 || std::isnan(tau)) throw NegativeThreshold("threshold must be >= 0");
  const double correct = upper_mass(dist, tau);
  const double incorrect =
      tau == 0.0 ? strict_lower_mass(dist, 0.0) : cdf(dist, -tau);
  return {correct, incorrect};
}

}  // namespace detail

inline double coverage(const MarginDistribution& dist, double tau) {
  const auto m = detail::kept_mass(dist, tau);
  return std::min(1.0, m.correct + m.incorrect);
}

inline std::optional<double> selective_accuracy(const MarginDistribution& dist, double tau) {
  const auto m = detail::kept_mass(dist, tau);
  const double cov = m.correct + m.incorrect;
  if (cov < kUndefinedCoverage) return std::nullopt;
  return std::clamp(m.correct / cov, 0.0, 1.0);
}

inline std::vector<CurvePoint> accuracy_coverage_curve(const MarginDistribution& dist,
                                                       const ThresholdGrid& grid) {
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double tau : grid.taus) {
    CurvePoint p;
    p.tau = tau;
    const auto m = detail::kept_mass(dist, tau);
    const double cov = m.correct + m.incorrect;
    p.coverage = std::min(1.0, cov);
    if (cov >= kUndefinedCoverage) p.accuracy = std::clamp(m.correct / cov, 0.0, 1.0);
    out.push_back(p);
  }
  return out;
}

// d/dtau of selective accuracy, in closed form from the density.
inline double accuracy_derivative(const MarginDistribution& dist, double tau) {
  if (!has_density(dist))
    throw DensityUnavailable("accuracy derivative needs a density");
  const auto m = detail::kept_mass(dist, tau);
  const double cov = m.correct + m.incorrect;
  if (cov < kUndefinedCoverage) throw ZeroCoverage("no coverage left at this threshold");
  const double num = pdf(dist, -tau) * m.correct - pdf(dist, tau) * m.incorrect;
  return num / (cov * cov);
}

enum class MassOrdering { LeftDominates, RightDominates, Balanced };

inline std::string mass_ordering_name(MassOrdering o) {
  switch (o) {
    case MassOrdering::LeftDominates: return "left-dominates";
    case MassOrdering::RightDominates: return "right-dominates";
    default: return "balanced";
  }
}

// Compares the relative density of abstention on the incorrect side,
// f(-tau)/F(-tau), against the correct side, f(tau)/(1 - F(tau)). Left
// dominance is equivalent to a nonnegative accuracy derivative at tau.
inline MassOrdering monotonicity_condition(const MarginDistribution& dist, double tau,
                                           double tol = 1e-9) {
  if (tau < 0.0 || std::isnan(tau)) throw NegativeThreshold("threshold must be >= 0");
  if (!has_density(dist))
    throw DensityUnavailable("monotonicity condition needs a density");
  const double below = cdf(dist, -tau);
  const double above = survival(dist, tau);
  if (below < 1e-300 || above < 1e-300)
    throw DegenerateTail("tail mass underflowed; ratios are meaningless here");
  const double left = pdf(dist, -tau) / below;
  const double right = pdf(dist, tau) / above;
  if (left > right + tol) return MassOrdering::LeftDominates;
  if (right > left + tol) return MassOrdering::RightDominates;
  return MassOrdering::Balanced;
}

enum class MonotoneLabel { Increasing, Decreasing, Mixed };

inline std::string monotone_label_name(MonotoneLabel l) {
  switch (l) {
    case MonotoneLabel::Increasing: return "increasing";
    case MonotoneLabel::Decreasing: return "decreasing";
    default: return "mixed";
  }
}

// Both one-sided certificates, probed on a grid. A constant curve satisfies
// both; label() then reports "increasing", keeping a single-word answer
// available without losing the two-sided information.
struct MonotonicityVerdict {
  bool nondecreasing = true;
  bool nonincreasing = true;
  double min_derivative = 0.0;
  double max_derivative = 0.0;

  MonotoneLabel label() const {
    if (nondecreasing) return MonotoneLabel::Increasing;
    if (nonincreasing) return MonotoneLabel::Decreasing;
    return MonotoneLabel::Mixed;
  }
};

inline MonotonicityVerdict classify_monotonicity(const MarginDistribution& dist,
                                                 const ThresholdGrid& grid,
                                                 double slack = 1e-9) {
  if (!has_density(dist))
    throw DensityUnavailable("monotonicity classification needs a density");
  MonotonicityVerdict v;
  bool first = true;
  for (double tau : grid.taus) {
    if (coverage(dist, tau) <= kCoverageFloor) continue;
    const double d = accuracy_derivative(dist, tau);
    // density blowups of reparametrized distributions (e.g. a cube map's
    // pinch at 0) make the tau-derivative meaningless at isolated points
    // without affecting the curve itself
    if (!std::isfinite(d)) continue;
    if (first) {
      v.min_derivative = v.max_derivative = d;
      first = false;
    } else {
      v.min_derivative = std::min(v.min_derivative, d);
      v.max_derivative = std::max(v.max_derivative, d);
    }
    if (d < -slack) v.nondecreasing = false;
    if (d > slack) v.nonincreasing = false;
  }
  return v;
}

// Descriptive verdict from already-computed curve points; the only
// monotonicity statement available for empirical data, which has no density.
inline MonotonicityVerdict classify_curve_points(const std::vector<CurvePoint>& points,
                                                 double slack = 1e-9) {
  MonotonicityVerdict v;
  std::optional<double> prev;
  for (const auto& p : points) {
    if (!p.accuracy) continue;
    if (prev) {
      const double step = *p.accuracy - *prev;
      v.min_derivative = std::min(v.min_derivative, step);
      v.max_derivative = std::max(v.max_derivative, step);
      if (step < -slack) v.nondecreasing = false;
      if (step > slack) v.nonincreasing = false;
    }
    prev = p.accuracy;
  }
  return v;
}

}  // namespace margins

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "margins/distributions.hpp"
#include "margins/errors.hpp"
#include "margins/numeric.hpp"

namespace margins {

// Below this the CDF's floating-point representation (or its quadrature) no
// longer supports meaningful log differences; probe grids truncate here and
// the report says where.
inline constexpr double kLogProbeFloor = 1e-280;

enum class ShapeProperty { LeftLogConcaveCdf, LogConcaveDensity };
enum class ShapeVerdict { Holds, Fails };

// How is_left_log_concave certifies: second central differences of log F, or
// the equivalent monotone nonincrease of f/F along the grid.
enum class ConcavityRoute { LogSecondDifference, DensityCdfRatio };

struct ShapeReport {
  ShapeProperty property;
  ShapeVerdict verdict = ShapeVerdict::Holds;
  std::optional<double> witness;  // grid point of the worst violation, when failing
  double max_violation = 0.0;     // largest observed violation statistic
  double anchor = 0.0;            // location the probe range was built around
  double probe_lo = 0.0;          // actual probed range, after any truncation
  double probe_hi = 0.0;
  std::size_t points_used = 0;

  bool holds() const { return verdict == ShapeVerdict::Holds; }
};

inline std::string shape_property_name(ShapeProperty p) {
  return p == ShapeProperty::LeftLogConcaveCdf ? "left-log-concave-cdf" : "log-concave-density";
}

namespace detail {

inline bool cdf_needs_quadrature(const MarginDistribution& dist) {
  return std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SkewSymmetric>) return d.alpha != 0.0;
        else if constexpr (std::is_same_v<T, OddMonotoneTransformed>)
          return cdf_needs_quadrature(*d.inner);
        else if constexpr (std::is_same_v<T, ShiftedDistribution>)
          return cdf_needs_quadrature(*d.inner);
        else return false;
      },
      dist.node);
}

// CDF on an ascending grid. Closed-form families evaluate pointwise; a
// quadrature-backed CDF instead accumulates panel integrals from far below
// the support so every value keeps relative accuracy, which pointwise
// absolute-tolerance integration cannot give deep in a tail.
inline std::vector<double> cdf_on_grid(const MarginDistribution& dist,
                                       const std::vector<double>& xs) {
  if (xs.empty()) return {};
  return std::visit(
      [&](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SkewSymmetric>) {
          if (d.alpha == 0.0 || !cdf_needs_quadrature(dist)) {
            std::vector<double> out(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) out[i] = cdf(dist, xs[i]);
            return out;
          }
          const double origin = d.mu - 24.0 * d.scale;
          const double top = d.mu + kSkewRange * d.scale;
          std::vector<double> grid;
          grid.reserve(xs.size() + 1);
          grid.push_back(origin);
          for (double x : xs) grid.push_back(std::clamp(x, origin, top));
          auto cum = cumulative_integral([&](double t) { return skew_pdf(d, t); }, grid);
          std::vector<double> out(xs.size());
          for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = xs[i] >= top ? 1.0 : std::min(1.0, cum[i + 1]);
          return out;
        } else if constexpr (std::is_same_v<T, OddMonotoneTransformed>) {
          std::vector<double> inner_xs(xs.size());
          std::vector<double> out(xs.size());
          const double lo = d.map.sup_lo();
          const double hi = d.map.sup_hi();
          // Map into the inner variable; points outside a bounded image are
          // resolved directly to 0/1 and excluded from the inner pass by
          // pinning them at the inner grid ends.
          for (std::size_t i = 0; i < xs.size(); ++i)
            inner_xs[i] = d.map.inverse(std::clamp(xs[i], std::nextafter(lo, hi), std::nextafter(hi, lo)));
          auto inner_f = cdf_on_grid(*d.inner, inner_xs);
          for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i] <= lo) out[i] = 0.0;
            else if (xs[i] >= hi) out[i] = 1.0;
            else out[i] = inner_f[i];
          }
          return out;
        } else if constexpr (std::is_same_v<T, ShiftedDistribution>) {
          std::vector<double> inner_xs(xs.size());
          for (std::size_t i = 0; i < xs.size(); ++i) inner_xs[i] = xs[i] - d.offset;
          return cdf_on_grid(*d.inner, inner_xs);
        } else {
          std::vector<double> out(xs.size());
          for (std::size_t i = 0; i < xs.size(); ++i) out[i] = cdf(dist, xs[i]);
          return out;
        }
      },
      dist.node);
}

}  // namespace detail

// Anchor for the left-tail probe: the distribution mean, except that the
// skew family anchors at its center parameter, which is how translated
// members of that family are compared.
inline double concavity_anchor(const MarginDistribution& dist) {
  if (const auto* s = dist.get_if<SkewSymmetric>()) return s->mu;
  return mean(dist);
}

// Certifies concavity of log F on (-inf, anchor], numerically, on a grid of
// `points` values spanning [anchor - 10*scale, anchor]. Points where F sits
// below the probe floor are dropped (the report's probe_lo shows the cut).
inline ShapeReport is_left_log_concave(const MarginDistribution& dist,
                                       std::size_t points = 2048, double tol = 1e-9,
                                       ConcavityRoute route = ConcavityRoute::LogSecondDifference) {
  if (!has_density(dist))
    throw DensityUnavailable("left-log-concavity probe needs a density");
  if (points < 3) throw InvalidParameter("left-log-concavity probe needs at least 3 points");
  ShapeReport rep;
  rep.property = ShapeProperty::LeftLogConcaveCdf;
  rep.anchor = concavity_anchor(dist);
  const double s = scale_hint(dist);
  const double lo = rep.anchor - 10.0 * s;
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i)
    xs[i] = lo + (rep.anchor - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  const std::vector<double> F = detail::cdf_on_grid(dist, xs);

  std::size_t first = 0;
  while (first < points && !(F[first] >= kLogProbeFloor)) ++first;
  if (points - first < 3)
    throw DegenerateTail("CDF underflows over the whole probe range");
  rep.probe_lo = xs[first];
  rep.probe_hi = xs.back();
  rep.points_used = points - first;

  double worst = -std::numeric_limits<double>::infinity();
  std::optional<double> worst_at;
  if (route == ConcavityRoute::LogSecondDifference) {
    for (std::size_t i = first + 1; i + 1 < points; ++i) {
      const double d2 = std::log(F[i - 1]) - 2.0 * std::log(F[i]) + std::log(F[i + 1]);
      if (d2 > worst) {
        worst = d2;
        worst_at = xs[i];
      }
    }
  } else {
    double prev = pdf(dist, xs[first]) / F[first];
    for (std::size_t i = first + 1; i < points; ++i) {
      const double r = pdf(dist, xs[i]) / F[i];
      if (r - prev > worst) {
        worst = r - prev;
        worst_at = xs[i];
      }
      prev = r;
    }
  }
  rep.max_violation = worst;
  if (worst > tol) {
    rep.verdict = ShapeVerdict::Fails;
    rep.witness = worst_at;
  }
  return rep;
}

// Certifies concavity of log f on [center - 8*scale, center + 8*scale].
inline ShapeReport is_log_concave_density(const MarginDistribution& dist,
                                          std::size_t points = 2048, double tol = 1e-9) {
  if (!has_density(dist))
    throw DensityUnavailable("density log-concavity probe needs a density");
  if (points < 3) throw InvalidParameter("density probe needs at least 3 points");
  ShapeReport rep;
  rep.property = ShapeProperty::LogConcaveDensity;
  rep.anchor = center(dist);
  const double s = scale_hint(dist);
  rep.probe_lo = rep.anchor - 8.0 * s;
  rep.probe_hi = rep.anchor + 8.0 * s;
  rep.points_used = points;
  std::vector<double> logf(points);
  std::vector<double> xs(points);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = rep.probe_lo +
            (rep.probe_hi - rep.probe_lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double f = pdf(dist, xs[i]);
    if (!(f > 0.0) || !std::isfinite(f))
      throw NonpositiveDensity("density must be strictly positive on the probe range");
    logf[i] = std::log(f);
  }
  double worst = -std::numeric_limits<double>::infinity();
  std::optional<double> worst_at;
  for (std::size_t i = 1; i + 1 < points; ++i) {
    const double d2 = logf[i - 1] - 2.0 * logf[i] + logf[i + 1];
    if (d2 > worst) {
      worst = d2;
      worst_at = xs[i];
    }
  }
  rep.max_violation = worst;
  if (worst > tol) {
    rep.verdict = ShapeVerdict::Fails;
    rep.witness = worst_at;
  }
  return rep;
}

// Standardized third central moment. Population convention (divisor n) for
// samples; adaptive quadrature of the moments otherwise.
inline double skewness(const MarginDistribution& dist) {
  if (const auto* e = dist.get_if<EmpiricalDistribution>()) {
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < e->margins.size(); ++i)
      if (e->margins[i] != e->margins[i - 1]) ++distinct;
    if (distinct < 3)
      throw DegenerateSample("skewness needs at least 3 distinct sample points");
  }
  const double m1 = mean(dist);
  const double m2 = expectation(dist, [&](double x) { return (x - m1) * (x - m1); });
  if (!(m2 > 1e-15)) throw DegenerateSample("skewness undefined: variance too small");
  const double m3 =
      expectation(dist, [&](double x) { return (x - m1) * (x - m1) * (x - m1); });
  return m3 / std::pow(m2, 1.5);
}

inline double skewness(const std::vector<double>& sample) {
  return skewness(MarginDistribution(EmpiricalDistribution(sample)));
}

}  // namespace margins

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "margins/concavity.hpp"
#include "margins/distributions.hpp"
#include "margins/errors.hpp"
#include "margins/selective.hpp"

namespace margins {

// Two-group decomposition of a margin distribution: the average law is
// p * worst + (1-p) * others. Construction records whether the intended
// ordering (worst strictly less accurate at full coverage) actually holds;
// sweeps turn violations into "excluded" cells rather than errors.
struct GroupMixture {
  double p = 0.5;
  MarginDistribution worst;
  MarginDistribution others;
  double worst_fc_accuracy = 0.0;
  double others_fc_accuracy = 0.0;
  bool ordering_ok = false;

  GroupMixture(double p_in, MarginDistribution worst_in, MarginDistribution others_in)
      : p(p_in), worst(std::move(worst_in)), others(std::move(others_in)) {
    if (!(p > 0.0) || !(p < 1.0)) throw InvalidParameter("p must lie in (0,1)");
    worst_fc_accuracy = *selective_accuracy(worst, 0.0);
    others_fc_accuracy = *selective_accuracy(others, 0.0);
    ordering_ok = worst_fc_accuracy < others_fc_accuracy;
  }
};

enum class GroupSide { Worst, Others, Average };

namespace detail {

struct MixtureMasses {
  double cw = 0.0, iw = 0.0;  // worst kept-correct / kept-incorrect mass
  double co = 0.0, io = 0.0;  // others
  double c = 0.0, i = 0.0;    // p-weighted averages
};

inline MixtureMasses mixture_masses(const GroupMixture& gm, double tau) {
  const KeptMass w = kept_mass(gm.worst, tau);
  const KeptMass o = kept_mass(gm.others, tau);
  MixtureMasses m;
  m.cw = w.correct;
  m.iw = w.incorrect;
  m.co = o.correct;
  m.io = o.incorrect;
  m.c = gm.p * m.cw + (1.0 - gm.p) * m.co;
  m.i = gm.p * m.iw + (1.0 - gm.p) * m.io;
  return m;
}

// IF_wg(0)/CF_wg(0), the multiplier that turns I(tau)/C(tau) into the
// reference's incorrect-to-correct odds on the worst group. Zero when the
// classifier makes no mistakes at all.
inline double reference_ratio(const GroupMixture& gm) {
  const MixtureMasses m0 = mixture_masses(gm, 0.0);
  if (!(m0.cw > 0.0)) throw ZeroMass("worst group has no correct mass at full coverage");
  if (!(m0.i > 0.0)) return 0.0;
  return (m0.iw * m0.c) / (m0.cw * m0.i);
}

}  // namespace detail

// Selective accuracy of one side of the decomposition, or of the p-weighted
// average law.
inline std::optional<double> group_selective_accuracy(const GroupMixture& gm, GroupSide which,
                                                      double tau) {
  if (which == GroupSide::Worst) return selective_accuracy(gm.worst, tau);
  if (which == GroupSide::Others) return selective_accuracy(gm.others, tau);
  const auto m = detail::mixture_masses(gm, tau);
  const double cov = m.c + m.i;
  if (!(cov > kUndefinedCoverage)) return std::nullopt;
  return std::clamp(m.c / cov, 0.0, 1.0);
}

// Worst-group share of the kept-correct mass and of the kept-incorrect mass.
// The two shares sum to 1 with the others-side complements.
inline std::pair<double, double> cf_if(const GroupMixture& gm, double tau) {
  const auto m = detail::mixture_masses(gm, tau);
  if (!(m.c > 0.0)) throw ZeroMass("no kept correct mass");
  if (!(m.i > 0.0)) throw ZeroMass("no kept incorrect mass");
  return {gm.p * m.cw / m.c, gm.p * m.iw / m.i};
}

// Closed-form accuracy of the group-agnostic reference on the worst group:
// 1 / (1 + (IF_wg(0)/CF_wg(0)) * I(tau)/C(tau)). At tau = 0 this reduces to
// the worst group's own full-coverage accuracy.
inline double reference_accuracy(const GroupMixture& gm, double tau) {
  const double ratio = detail::reference_ratio(gm);
  const auto m = detail::mixture_masses(gm, tau);
  if (!(m.c > 0.0)) throw ZeroMass("no kept correct mass");
  return m.c / (m.c + ratio * m.i);
}

enum class NecessaryCondition { Satisfied, Violated, NotApplicable };

inline const char* necessary_condition_name(NecessaryCondition c) {
  switch (c) {
    case NecessaryCondition::Satisfied: return "satisfied";
    case NecessaryCondition::Violated: return "violated";
    default: return "not_applicable";
  }
}

// Density-ratio test that any mixture outperforming the group-agnostic
// reference everywhere must pass: f_others(0)/f_wg(0) <= (1 - A_others(0)) /
// (1 - A_wg(0)). Hypotheses (worst above chance, strictly below others,
// others below perfect) are checked with a strictness margin so boundary
// parameters come back not-applicable instead of an arbitrary verdict.
inline NecessaryCondition necessary_condition(const GroupMixture& gm, double strictness = 1e-12) {
  if (!has_density(gm.worst) || !has_density(gm.others))
    throw DensityUnavailable("necessary condition needs densities for both components");
  const double aw = gm.worst_fc_accuracy;
  const double ao = gm.others_fc_accuracy;
  if (aw <= 0.5 + strictness) return NecessaryCondition::NotApplicable;
  if (ao <= aw + strictness) return NecessaryCondition::NotApplicable;
  if (ao >= 1.0 - strictness) return NecessaryCondition::NotApplicable;
  const double fw = pdf(gm.worst, 0.0);
  if (!(fw > 0.0)) return NecessaryCondition::NotApplicable;
  const double lhs = pdf(gm.others, 0.0) / fw;
  const double rhs = (1.0 - ao) / (1.0 - aw);
  return lhs <= rhs + strictness ? NecessaryCondition::Satisfied : NecessaryCondition::Violated;
}

enum class OutperformVerdict { Outperforms, UnderperformsSomewhere, Excluded };

inline const char* outperform_verdict_name(OutperformVerdict v) {
  switch (v) {
    case OutperformVerdict::Outperforms: return "outperforms";
    case OutperformVerdict::UnderperformsSomewhere: return "underperforms";
    default: return "excluded";
  }
}

struct OutperformReport {
  OutperformVerdict verdict = OutperformVerdict::Excluded;
  double max_gap = 0.0;                     // max over the grid of reference - worst
  std::optional<double> witness_tau;        // threshold attaining that max
};

// Grid-certified comparison of the worst group's selective accuracy against
// the group-agnostic reference. Thresholds whose worst-group or average
// coverage has decayed below the floor carry no comparable mass and are
// skipped. A mixture whose "worst" group is actually the stronger one is
// reported excluded; exact ties pass through, where equality everywhere
// counts as outperforming.
inline OutperformReport outperforms_reference(const GroupMixture& gm, const ThresholdGrid& grid,
                                              double tol = 1e-9) {
  OutperformReport rep;
  const double ratio = detail::reference_ratio(gm);
  double max_gap = -std::numeric_limits<double>::infinity();
  for (double tau : grid.taus) {
    const auto m = detail::mixture_masses(gm, tau);
    const double cov_w = m.cw + m.iw;
    const double cov_avg = m.c + m.i;
    if (!(cov_w > kCoverageFloor) || !(cov_avg > kCoverageFloor)) continue;
    if (!(m.c > 0.0)) continue;
    const double worst_acc = m.cw / cov_w;
    const double ref_acc = m.c / (m.c + ratio * m.i);
    const double gap = ref_acc - worst_acc;
    if (gap > max_gap) {
      max_gap = gap;
      rep.witness_tau = tau;
    }
  }
  if (max_gap == -std::numeric_limits<double>::infinity()) {
    max_gap = 0.0;
    rep.witness_tau.reset();
  }
  rep.max_gap = max_gap;
  if (gm.worst_fc_accuracy > gm.others_fc_accuracy) {
    rep.verdict = OutperformVerdict::Excluded;
  } else {
    rep.verdict = max_gap <= tol ? OutperformVerdict::Outperforms
                                 : OutperformVerdict::UnderperformsSomewhere;
  }
  return rep;
}

namespace detail {

inline MarginDistribution affine_scaled_copy(const MarginDistribution& dist, double mu_w,
                                             double mu_o, double v) {
  if (const auto* g = dist.get_if<Gaussian>())
    return Gaussian(mu_o + (g->mu - mu_w) / v, g->sigma / v);
  if (const auto* m = dist.get_if<TwoGaussianMixture>())
    return TwoGaussianMixture(m->weight, mu_o + (m->mu1 - mu_w) / v, m->sigma1 / v,
                              mu_o + (m->mu2 - mu_w) / v, m->sigma2 / v);
  if (const auto* s = dist.get_if<SkewSymmetric>())
    return SkewSymmetric(s->base_h, s->base_G, s->alpha, mu_o + (s->mu - mu_w) / v,
                         s->scale / v);
  throw InvalidParameter(
      "scaled pair requires a Gaussian, mixture, or skew-symmetric worst component");
}

}  // namespace detail

// A worst component plus an affine image of it: others is worst shifted
// right by d and tightened by the scale factor v (density
// f_o(x) = v * f_wg(v (x - mu_o) + mu_wg), means mu_o = mu_wg + d).
struct TranslatedScaledPair {
  MarginDistribution worst;
  double d = 0.0;
  double v = 1.0;
  MarginDistribution others;
  double mu_worst = 0.0;
  double mu_others = 0.0;

  TranslatedScaledPair(MarginDistribution worst_in, double shift, double scale_factor)
      : worst(std::move(worst_in)), d(shift), v(scale_factor), others(Gaussian(0.0, 1.0)) {
    if (!std::isfinite(d)) throw InvalidParameter("shift must be finite");
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter("scale factor must be positive");
    mu_worst = mean(worst);
    mu_others = mu_worst + d;
    others = detail::affine_scaled_copy(worst, mu_worst, mu_others, v);
  }
};

struct ScalingReport {
  double v = 1.0;
  double d = 0.0;
  OutperformVerdict verdict = OutperformVerdict::Excluded;
  double max_gap = 0.0;
  std::optional<double> witness_tau;  // threshold where the reference wins, if any
};

// Consequence check for scaled pairs: outperforming everywhere forces v < 1
// when the worst density is log-concave, so for v >= 1 a witness threshold
// with reference strictly ahead must exist and is located on the grid. For
// v < 1 the verdict is reported without any assertion (the condition is only
// necessary).
inline ScalingReport scaling_check(const TranslatedScaledPair& pair, const ThresholdGrid& grid,
                                   double p = 0.5, double tol = 1e-9) {
  const ShapeReport shape = is_log_concave_density(pair.worst);
  if (!shape.holds()) throw NotLogConcave("worst component density is not log-concave");
  GroupMixture gm(p, pair.worst, pair.others);
  const OutperformReport rep = outperforms_reference(gm, grid, tol);
  ScalingReport out;
  out.v = pair.v;
  out.d = pair.d;
  out.verdict = rep.verdict;
  out.max_gap = rep.max_gap;
  if (rep.max_gap > 1e-12) out.witness_tau = rep.witness_tau;
  return out;
}

}  // namespace margins

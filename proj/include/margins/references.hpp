#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "margins/errors.hpp"
#include "margins/numeric.hpp"
#include "margins/selective.hpp"

namespace margins {

// One model prediction. `confidence` is the abstention score; the prediction
// is kept at threshold tau when confidence >= tau.
struct LabeledExample {
  std::string id;
  std::string group;
  bool correct = false;
  double confidence = 0.0;
  double weight = 1.0;
};

// Per-group correct/incorrect kept masses as functions of the threshold,
// with group shares p_g taken from the data (or overridden). Masses are
// within-group fractions, so C_g(0) + I_g(0) = 1 for every group.
class CountTable {
 public:
  explicit CountTable(const std::vector<LabeledExample>& samples,
                      const std::map<std::string, double>* group_weights = nullptr) {
    if (samples.empty()) throw EmptyInput("no examples");
    for (const auto& s : samples) {
      if (!(s.confidence >= 0.0) || !std::isfinite(s.confidence))
        throw InvalidParameter("confidence must be finite and >= 0");
      if (!(s.weight > 0.0) || !std::isfinite(s.weight))
        throw InvalidParameter("weight must be finite and > 0");
      index_of(s.group);
    }
    std::sort(names_.begin(), names_.end());
    index_.clear();
    for (std::size_t g = 0; g < names_.size(); ++g) index_[names_[g]] = g;
    groups_.assign(names_.size(), {});
    for (const auto& s : samples) {
      auto& grp = groups_[index_[s.group]];
      (s.correct ? grp.correct : grp.incorrect).entries.push_back({s.confidence, s.weight});
      grp.mass += s.weight;
    }
    double total = 0.0;
    for (const auto& g : groups_) total += g.mass;
    for (auto& g : groups_) {
      finalize(g.correct);
      finalize(g.incorrect);
      g.share = g.mass / total;
    }
    if (group_weights) {
      if (group_weights->size() != names_.size())
        throw WeightMismatch("group weights must cover exactly the groups present");
      double sum = 0.0;
      for (std::size_t g = 0; g < names_.size(); ++g) {
        auto it = group_weights->find(names_[g]);
        if (it == group_weights->end())
          throw WeightMismatch("missing weight for group " + names_[g]);
        if (!(it->second > 0.0) || !std::isfinite(it->second))
          throw WeightMismatch("group weight must be finite and > 0");
        groups_[g].share = it->second;
        sum += it->second;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw WeightMismatch("group weights must sum to 1");
    }
  }

  const std::vector<std::string>& groups() const { return names_; }
  std::size_t group_count() const { return names_.size(); }

  double group_share(std::size_t g) const { return groups_[g].share; }
  double group_mass(std::size_t g) const { return groups_[g].mass; }

  // C_g(tau): within-group fraction of mass that is correct and still kept.
  double correct_frac(std::size_t g, double tau) const {
    return kept(groups_[g].correct, tau) / groups_[g].mass;
  }
  // I_g(tau): within-group fraction that is incorrect and still kept.
  double incorrect_frac(std::size_t g, double tau) const {
    return kept(groups_[g].incorrect, tau) / groups_[g].mass;
  }

  // C(tau), I(tau): share-weighted averages across groups.
  double avg_correct(double tau) const {
    double v = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g)
      v += groups_[g].share * correct_frac(g, tau);
    return v;
  }
  double avg_incorrect(double tau) const {
    double v = 0.0;
    for (std::size_t g = 0; g < groups_.size(); ++g)
      v += groups_[g].share * incorrect_frac(g, tau);
    return v;
  }

  // The thresholds at which empirical curves can change: every distinct
  // confidence, preceded by 0.
  ThresholdGrid natural_grid() const {
    std::vector<double> taus{0.0};
    for (const auto& g : groups_) {
      for (const auto& e : g.correct.entries) taus.push_back(e.first);
      for (const auto& e : g.incorrect.entries) taus.push_back(e.first);
    }
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    return ThresholdGrid(std::move(taus));
  }

 private:
  struct Series {
    std::vector<std::pair<double, double>> entries;  // (confidence, weight) ascending
    std::vector<double> suffix;                      // suffix[i] = mass with index >= i
  };
  struct Group {
    Series correct;
    Series incorrect;
    double mass = 0.0;
    double share = 0.0;
  };

  static void finalize(Series& s) {
    std::sort(s.entries.begin(), s.entries.end());
    s.suffix.assign(s.entries.size() + 1, 0.0);
    for (std::size_t i = s.entries.size(); i-- > 0;)
      s.suffix[i] = s.suffix[i + 1] + s.entries[i].second;
  }

  static double kept(const Series& s, double tau) {
    auto it = std::lower_bound(s.entries.begin(), s.entries.end(),
                               std::make_pair(tau, -std::numeric_limits<double>::infinity()));
    return s.suffix[static_cast<std::size_t>(it - s.entries.begin())];
  }

  std::size_t index_of(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    names_.push_back(name);
    index_[name] = names_.size() - 1;
    return names_.size() - 1;
  }

  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<Group> groups_;
};

// Values for one output series across a threshold grid; empty optionals mark
// thresholds where the quantity is undefined (no mass left to divide by).
using Series = std::vector<std::optional<double>>;

struct GroupCurve {
  std::string group;  // group label, or "average"
  std::vector<CurvePoint> points;
  Series reference_accuracy;
  Series robinhood_accuracy;
};

// Accuracy the group-agnostic reference attains on each group, in
// expectation: it keeps the same total numbers of correct and incorrect
// predictions but spreads them across examples with no regard for groups.
inline std::vector<Series> group_agnostic_reference(const CountTable& table,
                                                    const ThresholdGrid& grid) {
  const double C0 = table.avg_correct(0.0);
  const double I0 = table.avg_incorrect(0.0);
  if (C0 + I0 <= 0.0) throw NoPredictions("no mass at full coverage");
  std::vector<Series> out(table.group_count(), Series(grid.size()));
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double tau = grid.taus[t];
    const double Ct = table.avg_correct(tau);
    const double It = table.avg_incorrect(tau);
    for (std::size_t g = 0; g < table.group_count(); ++g) {
      const double cg0 = table.correct_frac(g, 0.0);
      const double ig0 = table.incorrect_frac(g, 0.0);
      if (cg0 + ig0 <= 0.0) continue;  // group carries no mass: undefined
      const double num = C0 > 0.0 ? cg0 * Ct / C0 : 0.0;
      const double den = I0 > 0.0 ? ig0 * It / I0 : 0.0;
      if (num + den <= 0.0) continue;  // nothing kept at this threshold
      out[g][t] = num / (num + den);
    }
  }
  return out;
}

struct MonteCarloReference {
  std::vector<std::string> groups;
  Series accuracy;                 // ratio of mean kept-correct to mean kept-total
  std::vector<double> std_error;   // delta-method standard error of that ratio
  std::uint64_t trials = 0;
};

// Sampling oracle for the expectation form: each trial keeps |C_tau| of the
// correct and |I_tau| of the incorrect examples uniformly at random; counts
// are averaged across trials before the accuracy ratio is formed, which is
// what the expectation form is the limit of. Requires unit weights (subset
// sizes are counts). Trial t draws from an independent stream derived from
// (seed, t), so any parallel schedule reproduces the same result.
inline MonteCarloReference group_agnostic_monte_carlo(
    const std::vector<LabeledExample>& samples, double tau, std::uint64_t trials,
    std::uint64_t seed) {
  if (trials < 1) throw InvalidParameter("monte carlo needs at least 1 trial");
  if (samples.empty()) throw EmptyInput("no examples");
  for (const auto& s : samples)
    if (s.weight != 1.0)
      throw InvalidParameter("monte carlo reference requires unit weights");

  CountTable table(samples);
  const std::size_t G = table.group_count();
  std::map<std::string, std::size_t> gindex;
  for (std::size_t g = 0; g < G; ++g) gindex[table.groups()[g]] = g;

  std::vector<std::size_t> correct_groups, incorrect_groups;
  std::size_t kept_correct = 0, kept_incorrect = 0;
  for (const auto& s : samples) {
    (s.correct ? correct_groups : incorrect_groups).push_back(gindex[s.group]);
    if (s.confidence >= tau) (s.correct ? kept_correct : kept_incorrect)++;
  }

  std::vector<double> sum_x(G, 0.0), sum_x2(G, 0.0), sum_y(G, 0.0), sum_y2(G, 0.0);
  std::vector<std::uint32_t> x(G), y(G);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto rng = seeded_stream(seed, t);
    std::fill(x.begin(), x.end(), 0u);
    std::fill(y.begin(), y.end(), 0u);
    auto draw = [&](const std::vector<std::size_t>& pool, std::size_t take,
                    std::vector<std::uint32_t>& hits) {
      std::size_t need = take;
      std::size_t left = pool.size();
      for (std::size_t i = 0; i < pool.size() && need > 0; ++i, --left) {
        if (uniform01(rng) * static_cast<double>(left) < static_cast<double>(need)) {
          hits[pool[i]]++;
          --need;
        }
      }
    };
    draw(correct_groups, kept_correct, x);
    draw(incorrect_groups, kept_incorrect, y);
    for (std::size_t g = 0; g < G; ++g) {
      sum_x[g] += x[g];
      sum_x2[g] += static_cast<double>(x[g]) * x[g];
      sum_y[g] += y[g];
      sum_y2[g] += static_cast<double>(y[g]) * y[g];
    }
  }

  MonteCarloReference out;
  out.groups = table.groups();
  out.accuracy.resize(G);
  out.std_error.assign(G, 0.0);
  out.trials = trials;
  const double T = static_cast<double>(trials);
  for (std::size_t g = 0; g < G; ++g) {
    const double xb = sum_x[g] / T;
    const double yb = sum_y[g] / T;
    if (xb + yb <= 0.0) continue;
    out.accuracy[g] = xb / (xb + yb);
    if (trials > 1) {
      const double vx = std::max(0.0, (sum_x2[g] - T * xb * xb) / (T - 1.0)) / T;
      const double vy = std::max(0.0, (sum_y2[g] - T * yb * yb) / (T - 1.0)) / T;
      const double den = (xb + yb) * (xb + yb);
      out.std_error[g] = std::sqrt(yb * yb * vx + xb * xb * vy) / den;
    }
  }
  return out;
}

struct RobinHoodResult {
  std::vector<std::string> groups;
  // [tau][group] kept masses after reallocation; accuracies derived from them.
  std::vector<std::vector<double>> kept_correct;
  std::vector<std::vector<double>> kept_incorrect;

  std::optional<double> accuracy(std::size_t tau_idx, std::size_t g) const {
    const double kc = kept_correct[tau_idx][g];
    const double ki = kept_incorrect[tau_idx][g];
    if (kc + ki <= 0.0) return std::nullopt;
    return kc / (kc + ki);
  }
  // Best-minus-worst group accuracy among groups that still predict.
  std::optional<double> disparity(std::size_t tau_idx) const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (auto a = accuracy(tau_idx, g)) {
        lo = std::min(lo, *a);
        hi = std::max(hi, *a);
        any = true;
      }
    }
    if (!any) return std::nullopt;
    return hi - lo;
  }
};

// The reallocation reference computed by the upward sweep: walking thresholds
// from 0, each newly abstained incorrect example is charged to the group with
// the lowest current accuracy and each abstained correct example to the group
// with the highest, recomputing accuracies after every single deduction. When
// the extreme group has no mass of the needed kind left, the next most
// extreme group pays. Ties pick the lexicographically smallest group label.
inline RobinHoodResult robin_hood_greedy(const std::vector<LabeledExample>& samples,
                                         const ThresholdGrid& grid) {
  CountTable table(samples);  // validates input, supplies group order
  const std::size_t G = table.group_count();
  std::map<std::string, std::size_t> gindex;
  for (std::size_t g = 0; g < G; ++g) gindex[table.groups()[g]] = g;

  struct Event {
    double confidence;
    std::size_t group;
    bool correct;
    double weight;
  };
  std::vector<Event> events;
  events.reserve(samples.size());
  std::vector<double> kc(G, 0.0), ki(G, 0.0);
  for (const auto& s : samples) {
    const std::size_t g = gindex[s.group];
    events.push_back({s.confidence, g, s.correct, s.weight});
    (s.correct ? kc : ki)[g] += s.weight;
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.confidence != b.confidence) return a.confidence < b.confidence;
    if (a.group != b.group) return a.group < b.group;
    return a.correct < b.correct;
  });

  auto pick = [&](const std::vector<double>& pool, bool want_lowest) -> std::size_t {
    std::size_t best = G;
    double best_acc = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      if (!(pool[g] > 0.0)) continue;
      const double kept = kc[g] + ki[g];
      const double acc = kept > 0.0 ? kc[g] / kept : (want_lowest ? 1.0 : 0.0);
      if (best == G || (want_lowest ? acc < best_acc : acc > best_acc)) {
        best = g;
        best_acc = acc;
      }
    }
    return best;
  };

  RobinHoodResult out;
  out.groups = table.groups();
  out.kept_correct.reserve(grid.size());
  out.kept_incorrect.reserve(grid.size());
  std::size_t next_event = 0;
  for (double tau : grid.taus) {
    while (next_event < events.size() && events[next_event].confidence < tau) {
      const Event& e = events[next_event++];
      double remaining = e.weight;
      auto& pool = e.correct ? kc : ki;
      while (remaining > 0.0) {
        const std::size_t g = pick(pool, /*want_lowest=*/!e.correct);
        if (g == G) break;  // pool exhausted by earlier rounding; nothing to charge
        const double take = std::min(remaining, pool[g]);
        pool[g] -= take;
        remaining -= take;
        if (pool[g] < 1e-15) pool[g] = 0.0;
        if (remaining < 1e-15) remaining = 0.0;
      }
    }
    out.kept_correct.push_back(kc);
    out.kept_incorrect.push_back(ki);
  }
  return out;
}

struct BruteForceAllocation {
  std::vector<std::string> groups;
  std::vector<int> kept_correct;
  std::vector<int> kept_incorrect;
  double disparity = 0.0;

  std::optional<double> accuracy(std::size_t g) const {
    const int kept = kept_correct[g] + kept_incorrect[g];
    if (kept == 0) return std::nullopt;
    return static_cast<double>(kept_correct[g]) / kept;
  }
};

// Exact minimum-disparity allocation by enumeration over per-group kept
// counts. Guarded to small instances; requires unit weights so subset sizes
// are plain counts. Ties prefer the allocation with the best worst-group
// accuracy, then the lexicographically smallest count vector.
inline BruteForceAllocation robin_hood_brute_force(const std::vector<LabeledExample>& samples,
                                                   double tau) {
  if (samples.size() > 20)
    throw TooLarge("brute-force reference is limited to 20 examples");
  for (const auto& s : samples)
    if (s.weight != 1.0)
      throw InvalidParameter("brute-force reference requires unit weights");

  CountTable table(samples);
  const std::size_t G = table.group_count();
  std::map<std::string, std::size_t> gindex;
  for (std::size_t g = 0; g < G; ++g) gindex[table.groups()[g]] = g;

  std::vector<int> cap_c(G, 0), cap_i(G, 0);
  int keep_c = 0, keep_i = 0;
  for (const auto& s : samples) {
    const std::size_t g = gindex[s.group];
    (s.correct ? cap_c : cap_i)[g]++;
    if (s.confidence >= tau) (s.correct ? keep_c : keep_i)++;
  }

  std::vector<int> kc(G, 0), ki(G, 0);
  BruteForceAllocation best;
  best.groups = table.groups();
  bool have_best = false;
  double best_disp = 0.0, best_worst = 0.0;

  auto consider = [&]() {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < G; ++g) {
      const int kept = kc[g] + ki[g];
      if (kept == 0) continue;
      const double acc = static_cast<double>(kc[g]) / kept;
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
    const bool any = hi >= lo;
    const double disp = any ? hi - lo : 0.0;
    const double worst = any ? lo : 1.0;
    bool better = false;
    if (!have_best) {
      better = true;
    } else if (disp != best_disp) {
      better = disp < best_disp;
    } else if (worst != best_worst) {
      better = worst > best_worst;
    } else {
      for (std::size_t g = 0; g < G; ++g) {
        if (kc[g] != best.kept_correct[g]) {
          better = kc[g] < best.kept_correct[g];
          break;
        }
        if (ki[g] != best.kept_incorrect[g]) {
          better = ki[g] < best.kept_incorrect[g];
          break;
        }
      }
    }
    if (better) {
      have_best = true;
      best_disp = disp;
      best_worst = worst;
      best.kept_correct = kc;
      best.kept_incorrect = ki;
      best.disparity = disp;
    }
  };

  auto enumerate_incorrect = [&](auto&& self, std::size_t g, int left) -> void {
    if (g + 1 == G) {
      if (left <= cap_i[g]) {
        ki[g] = left;
        consider();
      }
      return;
    }
    for (int take = 0; take <= std::min(cap_i[g], left); ++take) {
      ki[g] = take;
      self(self, g + 1, left - take);
    }
  };
  auto enumerate_correct = [&](auto&& self, std::size_t g, int left) -> void {
    if (g + 1 == G) {
      if (left <= cap_c[g]) {
        kc[g] = left;
        enumerate_incorrect(enumerate_incorrect, 0, keep_i);
      }
      return;
    }
    for (int take = 0; take <= std::min(cap_c[g], left); ++take) {
      kc[g] = take;
      self(self, g + 1, left - take);
    }
  };
  enumerate_correct(enumerate_correct, 0, keep_c);
  return best;
}

// True/false positive rates of the predict-vs-abstain decision: the kept
// fraction of correct mass and of incorrect mass.
inline std::pair<double, double> tpr_fpr(const CountTable& table, double tau,
                                         const std::optional<std::string>& group = std::nullopt) {
  double c0, i0, ct, it;
  if (group) {
    const auto& names = table.groups();
    auto pos = std::find(names.begin(), names.end(), *group);
    if (pos == names.end()) throw UndefinedRate("unknown group: " + *group);
    const auto g = static_cast<std::size_t>(pos - names.begin());
    c0 = table.correct_frac(g, 0.0);
    i0 = table.incorrect_frac(g, 0.0);
    ct = table.correct_frac(g, tau);
    it = table.incorrect_frac(g, tau);
  } else {
    c0 = table.avg_correct(0.0);
    i0 = table.avg_incorrect(0.0);
    ct = table.avg_correct(tau);
    it = table.avg_incorrect(tau);
  }
  if (!(c0 > 0.0)) throw UndefinedRate("no correct mass at full coverage");
  if (!(i0 > 0.0)) throw UndefinedRate("no incorrect mass at full coverage");
  return {ct / c0, it / i0};
}

struct EqualizedOddsRow {
  double tau = 0.0;
  bool reference_holds = true;   // implied reference rates equal across groups
  double reference_gap = 0.0;    // largest cross-group deviation seen for it
  double actual_tpr_gap = 0.0;   // largest cross-group TPR gap of the classifier
  double actual_fpr_gap = 0.0;
};

// The group-agnostic reference keeps C_g(0) * C(tau)/C(0) correct mass in
// group g, so its per-group TPR is C(tau)/C(0) for every group; this check
// recomputes the rates per group and reports the numerical gap, alongside the
// actual classifier's cross-group rate gaps.
inline std::vector<EqualizedOddsRow> equalized_odds_check(const CountTable& table,
                                                          const ThresholdGrid& grid,
                                                          double tol = 1e-12) {
  const std::size_t G = table.group_count();
  for (std::size_t g = 0; g < G; ++g) {
    if (!(table.correct_frac(g, 0.0) > 0.0))
      throw UndefinedRate("group " + table.groups()[g] + " has no correct mass");
    if (!(table.incorrect_frac(g, 0.0) > 0.0))
      throw UndefinedRate("group " + table.groups()[g] + " has no incorrect mass");
  }
  const double C0 = table.avg_correct(0.0);
  const double I0 = table.avg_incorrect(0.0);
  std::vector<EqualizedOddsRow> rows;
  rows.reserve(grid.size());
  for (double tau : grid.taus) {
    EqualizedOddsRow row;
    row.tau = tau;
    const double rc = table.avg_correct(tau) / C0;
    const double ri = table.avg_incorrect(tau) / I0;
    double tpr_lo = 1.0, tpr_hi = 0.0, fpr_lo = 1.0, fpr_hi = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const double cg0 = table.correct_frac(g, 0.0);
      const double ig0 = table.incorrect_frac(g, 0.0);
      const double ref_tpr = cg0 * rc / cg0;
      const double ref_fpr = ig0 * ri / ig0;
      row.reference_gap =
          std::max({row.reference_gap, std::abs(ref_tpr - rc), std::abs(ref_fpr - ri)});
      const double tpr = table.correct_frac(g, tau) / cg0;
      const double fpr = table.incorrect_frac(g, tau) / ig0;
      tpr_lo = std::min(tpr_lo, tpr);
      tpr_hi = std::max(tpr_hi, tpr);
      fpr_lo = std::min(fpr_lo, fpr);
      fpr_hi = std::max(fpr_hi, fpr);
    }
    row.reference_holds = row.reference_gap <= tol;
    row.actual_tpr_gap = std::max(0.0, tpr_hi - tpr_lo);
    row.actual_fpr_gap = std::max(0.0, fpr_hi - fpr_lo);
    rows.push_back(row);
  }
  return rows;
}

// Full empirical evaluation: per-group accuracy-coverage curves plus the two
// reference columns, and an "average" series. Averages use group shares from
// the data unless explicit group weights reweight them.
inline std::vector<GroupCurve> empirical_curves(
    const std::vector<LabeledExample>& samples, const ThresholdGrid& grid,
    const std::map<std::string, double>* group_weights = nullptr) {
  CountTable table(samples, group_weights);
  const std::size_t G = table.group_count();
  const auto reference = group_agnostic_reference(table, grid);
  const auto robinhood = robin_hood_greedy(samples, grid);

  std::vector<GroupCurve> out;
  out.reserve(G + 1);
  for (std::size_t g = 0; g < G; ++g) {
    GroupCurve curve;
    curve.group = table.groups()[g];
    curve.reference_accuracy = reference[g];
    curve.points.reserve(grid.size());
    curve.robinhood_accuracy.resize(grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const double tau = grid.taus[t];
      CurvePoint p;
      p.tau = tau;
      const double c = table.correct_frac(g, tau);
      const double i = table.incorrect_frac(g, tau);
      p.coverage = c + i;
      if (c + i > 0.0) p.accuracy = c / (c + i);
      curve.points.push_back(p);
      curve.robinhood_accuracy[t] = robinhood.accuracy(t, g);
    }
    out.push_back(std::move(curve));
  }

  GroupCurve avg;
  avg.group = "average";
  avg.points.reserve(grid.size());
  avg.reference_accuracy.resize(grid.size());
  avg.robinhood_accuracy.resize(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double tau = grid.taus[t];
    CurvePoint p;
    p.tau = tau;
    const double c = table.avg_correct(tau);
    const double i = table.avg_incorrect(tau);
    p.coverage = c + i;
    if (c + i > 0.0) p.accuracy = c / (c + i);
    avg.points.push_back(p);
    avg.reference_accuracy[t] = p.accuracy;
    double rh_c = 0.0, rh_i = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      rh_c += table.group_share(g) * robinhood.kept_correct[t][g] / table.group_mass(g);
      rh_i += table.group_share(g) * robinhood.kept_incorrect[t][g] / table.group_mass(g);
    }
    if (rh_c + rh_i > 0.0) avg.robinhood_accuracy[t] = rh_c / (rh_c + rh_i);
  }
  out.push_back(std::move(avg));
  return out;
}

}  // namespace margins

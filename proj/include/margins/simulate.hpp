#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "margins/distributions.hpp"
#include "margins/errors.hpp"
#include "margins/group_analysis.hpp"
#include "margins/numeric.hpp"
#include "margins/selective.hpp"

namespace margins {

// Gaussian worst-group parameter sweep against a fixed reference group.
// Defaults cover mean 0..1.5 by sigma 0.2..2.2 against N(1,1) at equal group
// mass, fine enough that the verdict regions are stable under refinement.
struct SweepSpec {
  std::vector<double> worst_means = linspace(0.0, 1.5, 61);
  std::vector<double> worst_sigmas = linspace(0.2, 2.2, 41);
  double other_mean = 1.0;
  double other_sigma = 1.0;
  double p = 0.5;
  std::size_t tau_points = 512;
  std::optional<double> tau_max;  // default spans every cell's 8-sigma reach
  double tol = 1e-9;
};

// Mean-vs-mean variant with both sigmas pinned to a common value.
struct MeansSweepSpec {
  std::vector<double> worst_means = linspace(0.0, 1.5, 61);
  std::vector<double> other_means = linspace(0.0, 1.5, 61);
  double sigma = 1.0;
  double p = 0.5;
  std::size_t tau_points = 512;
  std::optional<double> tau_max;
  double tol = 1e-9;
};

enum class SweepKind { SigmaSweep, MeansSweep };

struct SweepCell {
  double worst_mean = 0.0;
  double second = 0.0;  // worst_sigma, or other_mean for the means sweep
  OutperformVerdict verdict = OutperformVerdict::Excluded;
  NecessaryCondition nc = NecessaryCondition::NotApplicable;
  double max_gap = 0.0;
  bool near_boundary = false;  // toleranced verdict within 1e-6 of flipping
};

struct SweepReport {
  SweepKind kind = SweepKind::SigmaSweep;
  std::size_t rows = 0;  // worst_means count; cells stored mean-major
  std::size_t cols = 0;
  std::vector<SweepCell> cells;
  double tau_max = 0.0;
  std::size_t tau_points = 0;

  const SweepCell& at(std::size_t row, std::size_t col) const {
    return cells[row * cols + col];
  }
};

namespace detail {

inline SweepCell evaluate_cell(double worst_mean, double second, const Gaussian& worst,
                               const Gaussian& other, double p, const ThresholdGrid& grid,
                               double tol) {
  GroupMixture gm(p, worst, other);
  const OutperformReport rep = outperforms_reference(gm, grid, tol);
  SweepCell cell;
  cell.worst_mean = worst_mean;
  cell.second = second;
  cell.max_gap = rep.max_gap;
  cell.nc = necessary_condition(gm);
  // whole-grid exclusion rule: ties count as excluded, not only reversals
  cell.verdict = gm.ordering_ok ? rep.verdict : OutperformVerdict::Excluded;
  cell.near_boundary = gm.ordering_ok && std::abs(rep.max_gap - tol) <= 1e-6;
  return cell;
}

inline void validate_axis(const std::vector<double>& axis, bool positive, const char* what) {
  if (axis.empty()) throw InvalidParameter(std::string(what) + " grid is empty");
  for (double v : axis) {
    if (!std::isfinite(v) || (positive && !(v > 0.0)))
      throw InvalidParameter(std::string(what) + " grid has an invalid entry");
  }
}

}  // namespace detail

inline SweepReport run_sweep(const SweepSpec& spec) {
  detail::validate_axis(spec.worst_means, false, "worst mean");
  detail::validate_axis(spec.worst_sigmas, true, "worst sigma");
  if (!(spec.other_sigma > 0.0)) throw InvalidParameter("other sigma must be positive");
  if (!std::isfinite(spec.other_mean)) throw InvalidParameter("other mean must be finite");
  if (!(spec.p > 0.0) || !(spec.p < 1.0)) throw InvalidParameter("p must lie in (0,1)");
  if (spec.tau_points < 2) throw InvalidParameter("tau grid needs at least 2 points");

  double reach = std::abs(spec.other_mean) + 8.0 * spec.other_sigma;
  double max_sigma = 0.0, max_abs_mean = 0.0;
  for (double s : spec.worst_sigmas) max_sigma = std::max(max_sigma, s);
  for (double m : spec.worst_means) max_abs_mean = std::max(max_abs_mean, std::abs(m));
  reach = std::max(reach, max_abs_mean + 8.0 * max_sigma);
  const double tau_max = spec.tau_max.value_or(reach);

  const ThresholdGrid grid = ThresholdGrid::uniform(tau_max, spec.tau_points);
  const Gaussian other(spec.other_mean, spec.other_sigma);

  SweepReport report;
  report.kind = SweepKind::SigmaSweep;
  report.rows = spec.worst_means.size();
  report.cols = spec.worst_sigmas.size();
  report.tau_max = tau_max;
  report.tau_points = spec.tau_points;
  report.cells.reserve(report.rows * report.cols);
  for (double mu : spec.worst_means)
    for (double sigma : spec.worst_sigmas)
      report.cells.push_back(
          detail::evaluate_cell(mu, sigma, Gaussian(mu, sigma), other, spec.p, grid, spec.tol));
  return report;
}

inline SweepReport run_means_sweep(const MeansSweepSpec& spec) {
  detail::validate_axis(spec.worst_means, false, "worst mean");
  detail::validate_axis(spec.other_means, false, "other mean");
  if (!(spec.sigma > 0.0)) throw InvalidParameter("sigma must be positive");
  if (!(spec.p > 0.0) || !(spec.p < 1.0)) throw InvalidParameter("p must lie in (0,1)");
  if (spec.tau_points < 2) throw InvalidParameter("tau grid needs at least 2 points");

  double max_abs_mean = 0.0;
  for (double m : spec.worst_means) max_abs_mean = std::max(max_abs_mean, std::abs(m));
  for (double m : spec.other_means) max_abs_mean = std::max(max_abs_mean, std::abs(m));
  const double tau_max = spec.tau_max.value_or(max_abs_mean + 8.0 * spec.sigma);

  const ThresholdGrid grid = ThresholdGrid::uniform(tau_max, spec.tau_points);

  SweepReport report;
  report.kind = SweepKind::MeansSweep;
  report.rows = spec.worst_means.size();
  report.cols = spec.other_means.size();
  report.tau_max = tau_max;
  report.tau_points = spec.tau_points;
  report.cells.reserve(report.rows * report.cols);
  for (double wm : spec.worst_means)
    for (double om : spec.other_means)
      report.cells.push_back(detail::evaluate_cell(wm, om, Gaussian(wm, spec.sigma),
                                                   Gaussian(om, spec.sigma), spec.p, grid,
                                                   spec.tol));
  return report;
}

namespace detail {

inline std::string region_map_csv(const SweepReport& report) {
  std::string out = report.kind == SweepKind::SigmaSweep
                        ? "worst_mean,worst_sigma,verdict,necessary_condition,max_gap\n"
                        : "worst_mean,other_mean,verdict,necessary_condition,max_gap\n";
  for (const auto& cell : report.cells) {
    out += format_double(cell.worst_mean);
    out += ',';
    out += format_double(cell.second);
    out += ',';
    out += outperform_verdict_name(cell.verdict);
    out += ',';
    out += necessary_condition_name(cell.nc);
    out += ',';
    out += format_double(cell.max_gap);
    out += '\n';
  }
  return out;
}

inline std::string region_map_svg(const SweepReport& report) {
  const double cell_px = 12.0;
  const double margin_left = 70.0, margin_bottom = 50.0, margin_top = 20.0, margin_right = 20.0;
  const double plot_w = cell_px * static_cast<double>(report.cols);
  const double plot_h = cell_px * static_cast<double>(report.rows);
  const double width = margin_left + plot_w + margin_right;
  const double height = margin_top + plot_h + margin_bottom;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
         "\" height=\"" + format_double(height) + "\" viewBox=\"0 0 " + format_double(width) +
         " " + format_double(height) + "\">\n";
  svg +=
      "<defs><pattern id=\"nc\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
      "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" "
      "stroke=\"#1a237e\" stroke-width=\"1.2\"/></pattern></defs>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t r = 0; r < report.rows; ++r) {
    for (std::size_t c = 0; c < report.cols; ++c) {
      const SweepCell& cell = report.at(r, c);
      const char* fill = "#ececec";
      if (cell.verdict == OutperformVerdict::Outperforms) fill = "#2e7d32";
      else if (cell.verdict == OutperformVerdict::UnderperformsSomewhere) fill = "#c62828";
      const double x = margin_left + cell_px * static_cast<double>(c);
      // rows ascend upward: first worst_mean at the bottom
      const double y = margin_top + plot_h - cell_px * static_cast<double>(r + 1);
      auto rect = [&](const char* paint) {
        svg += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" width=\"" +
               format_double(cell_px) + "\" height=\"" + format_double(cell_px) + "\" fill=\"" +
               std::string(paint) + "\"/>\n";
      };
      rect(fill);
      if (cell.nc == NecessaryCondition::Satisfied) rect("url(#nc)");
    }
  }

  const char* x_label = report.kind == SweepKind::SigmaSweep ? "worst sigma" : "other mean";
  auto text = [&](double x, double y, const std::string& s, const char* anchor) {
    svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" + anchor + "\">" + s +
           "</text>\n";
  };
  text(margin_left, margin_top + plot_h + 16.0, format_double(report.at(0, 0).second), "middle");
  text(margin_left + plot_w, margin_top + plot_h + 16.0,
       format_double(report.at(0, report.cols - 1).second), "middle");
  text(margin_left + plot_w / 2.0, margin_top + plot_h + 34.0, x_label, "middle");
  text(margin_left - 6.0, margin_top + plot_h, format_double(report.at(0, 0).worst_mean), "end");
  text(margin_left - 6.0, margin_top + 10.0,
       format_double(report.at(report.rows - 1, 0).worst_mean), "end");
  text(margin_left - 40.0, margin_top + plot_h / 2.0, "worst mean", "middle");
  svg += "</svg>\n";
  return svg;
}

}  // namespace detail

// Serializes a sweep report: "csv" rows are the contract surface and are
// byte-stable for identical reports; "svg" draws the verdict regions with
// necessary-condition hatching.
inline std::string render_region_map(const SweepReport& report, std::string_view format) {
  if (report.cells.empty()) throw EmptyInput("sweep report has no cells");
  if (format == "csv") return detail::region_map_csv(report);
  if (format == "svg") return detail::region_map_svg(report);
  throw UnsupportedFormat("region map supports csv and svg, not " + std::string(format));
}

}  // namespace margins

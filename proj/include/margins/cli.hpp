#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "margins/concavity.hpp"
#include "margins/distributions.hpp"
#include "margins/errors.hpp"
#include "margins/grammar.hpp"
#include "margins/group_analysis.hpp"
#include "margins/ingest.hpp"
#include "margins/numeric.hpp"
#include "margins/references.hpp"
#include "margins/selective.hpp"
#include "margins/simulate.hpp"
#include "margins/svg.hpp"

namespace margins {

inline constexpr const char* kToolName = "margins";
inline constexpr const char* kToolVersion = "0.3.0";

struct RunConfig {
  std::string out_dir = ".";
  std::size_t tau_points = 512;
  std::optional<double> tau_max;
  std::map<std::string, double> group_weights;
  std::uint64_t seed = 0;
  std::set<std::string> formats = {"csv", "json"};
  bool strict = false;
  // simulate knobs
  bool means_sweep = false;
  double other_mean = 1.0;
  double other_sigma = 1.0;
  double p = 0.5;
  double sigma = 1.0;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw Error("cannot read " + path);
  return data;
}

// Buffers artifacts until the command has fully succeeded, then writes them
// in one pass; a failed write removes everything written so far, so failures
// never leave partial output behind.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

  void add(std::string name, std::string bytes) {
    files_.emplace_back(std::move(name), std::move(bytes));
  }

  void commit() const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    std::vector<fs::path> written;
    for (const auto& [name, bytes] : files_) {
      const fs::path path = fs::path(dir_) / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (out) out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      out.flush();
      if (!out) {
        for (const auto& p : written) fs::remove(p, ec);
        throw Error("cannot write " + path.string());
      }
      written.push_back(path);
    }
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

inline std::set<std::string> parse_formats(const std::string& text) {
  std::set<std::string> formats;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      const std::string item = text.substr(start, i - start);
      start = i + 1;
      if (item.empty()) continue;
      if (item != "csv" && item != "json" && item != "svg")
        throw UnsupportedFormat("unknown format: " + item + " (use csv, json, svg)");
      formats.insert(item);
    }
  }
  if (formats.empty()) throw UnsupportedFormat("no output format selected");
  return formats;
}

inline std::map<std::string, double> parse_group_weights(const std::string& text) {
  std::map<std::string, double> weights;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i != text.size() && text[i] != ',') continue;
    const std::string item = text.substr(start, i - start);
    start = i + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw WeightMismatch("group weight must look like name=value: " + item);
    double value = 0.0;
    if (!parse_real(std::string_view(item).substr(eq + 1), value))
      throw WeightMismatch("cannot parse weight in: " + item);
    if (!weights.emplace(item.substr(0, eq), value).second)
      throw WeightMismatch("duplicate group in weights: " + item.substr(0, eq));
  }
  if (weights.empty()) throw WeightMismatch("empty group weight list");
  return weights;
}

// Axis syntax for sweep grids: "lo:hi:count" or an explicit comma list.
inline std::vector<double> parse_axis(const std::string& text) {
  const std::size_t c1 = text.find(':');
  if (c1 != std::string::npos) {
    const std::size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
      throw InvalidParameter("axis range must be lo:hi:count: " + text);
    double lo = 0.0, hi = 0.0;
    if (!parse_real(std::string_view(text).substr(0, c1), lo) ||
        !parse_real(std::string_view(text).substr(c1 + 1, c2 - c1 - 1), hi))
      throw InvalidParameter("cannot parse axis bounds: " + text);
    int count = 0;
    if (!parse_int(std::string_view(text).substr(c2 + 1), count) || count < 1)
      throw InvalidParameter("axis count must be a positive integer: " + text);
    return linspace(lo, hi, static_cast<std::size_t>(count));
  }
  std::vector<double> values;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i != text.size() && text[i] != ',') continue;
    const std::string item = text.substr(start, i - start);
    start = i + 1;
    if (item.empty()) continue;
    double v = 0.0;
    if (!parse_real(item, v)) throw InvalidParameter("cannot parse axis value: " + item);
    values.push_back(v);
  }
  if (values.empty()) throw InvalidParameter("empty axis: " + text);
  return values;
}

inline LogFormat detect_log_format(const std::string& path, std::string_view source,
                                   const std::string& requested) {
  if (requested == "csv") return LogFormat::Csv;
  if (requested == "jsonl") return LogFormat::Jsonl;
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() &&
           std::string_view(path).substr(path.size() - suffix.size()) == suffix;
  };
  if (ends_with(".jsonl") || ends_with(".ndjson")) return LogFormat::Jsonl;
  if (ends_with(".csv")) return LogFormat::Csv;
  for (char c : source) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '{' ? LogFormat::Jsonl : LogFormat::Csv;
  }
  return LogFormat::Csv;
}

inline ordered_json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline ordered_json tool_block() {
  return ordered_json{{"name", kToolName}, {"version", kToolVersion}};
}

inline ordered_json common_config(const RunConfig& cfg) {
  ordered_json j;
  j["out"] = cfg.out_dir;
  j["formats"] = std::vector<std::string>(cfg.formats.begin(), cfg.formats.end());
  j["seed"] = cfg.seed;
  j["strict"] = cfg.strict;
  return j;
}

inline ordered_json shape_block(const ShapeReport& report) {
  ordered_json j;
  j["holds"] = report.holds();
  j["max_violation"] = report.max_violation;
  j["witness"] = opt_json(report.witness);
  j["probe_lo"] = report.probe_lo;
  j["probe_hi"] = report.probe_hi;
  j["points_used"] = report.points_used;
  return j;
}

inline ordered_json monotonicity_block(const MonotonicityVerdict& verdict) {
  ordered_json j;
  j["label"] = monotone_label_name(verdict.label());
  j["nondecreasing"] = verdict.nondecreasing;
  j["nonincreasing"] = verdict.nonincreasing;
  j["min_derivative"] = verdict.min_derivative;
  j["max_derivative"] = verdict.max_derivative;
  return j;
}

inline ChartSeries curve_chart_series(const std::string& label, const std::string& color,
                                      const std::vector<CurvePoint>& points) {
  ChartSeries series;
  series.label = label;
  series.color = color;
  series.segments.emplace_back();
  for (const auto& p : points) {
    if (p.accuracy) {
      series.segments.back().emplace_back(p.coverage, *p.accuracy);
    } else if (!series.segments.back().empty()) {
      series.segments.emplace_back();
    }
  }
  return series;
}

inline int cmd_analyze(const RunConfig& cfg, const std::string& input,
                       const std::string& log_format) {
  const std::string source = read_file(input);
  const LogFormat fmt = detect_log_format(input, source, log_format);
  const IngestResult ingest = parse_records(source, fmt, cfg.strict);
  if (ingest.examples.empty()) throw EmptyInput("no usable rows in " + input);

  const std::map<std::string, double>* weights =
      cfg.group_weights.empty() ? nullptr : &cfg.group_weights;
  const CountTable table(ingest.examples, weights);
  const ThresholdGrid grid = table.natural_grid();
  const std::vector<GroupCurve> curves = empirical_curves(ingest.examples, grid, weights);
  const GroupCurve& average = curves.back();

  std::string csv =
      "tau,avg_coverage,avg_accuracy,group,group_coverage,group_accuracy,"
      "reference_accuracy,robinhood_accuracy\n";
  for (std::size_t t = 0; t < grid.size(); ++t) {
    for (const auto& curve : curves) {
      csv += format_double(grid.taus[t]);
      csv += ',';
      csv += format_double(average.points[t].coverage);
      csv += ',';
      csv += opt_cell(average.points[t].accuracy);
      csv += ',';
      csv += curve.group;
      csv += ',';
      csv += format_double(curve.points[t].coverage);
      csv += ',';
      csv += opt_cell(curve.points[t].accuracy);
      csv += ',';
      csv += opt_cell(curve.reference_accuracy[t]);
      csv += ',';
      csv += opt_cell(curve.robinhood_accuracy[t]);
      csv += '\n';
    }
  }

  ordered_json summary;
  summary["tool"] = tool_block();
  summary["command"] = "analyze";
  ordered_json config = common_config(cfg);
  config["input"] = input;
  config["log_format"] = fmt == LogFormat::Csv ? "csv" : "jsonl";
  config["group_weights"] =
      cfg.group_weights.empty() ? ordered_json(nullptr) : ordered_json(cfg.group_weights);
  summary["config"] = config;
  summary["rows"] = ordered_json{{"parsed", ingest.examples.size()},
                                 {"skipped", ingest.skipped}};
  if (!ingest.row_errors.empty()) {
    ordered_json errors = ordered_json::array();
    for (const auto& e : ingest.row_errors)
      errors.push_back(ordered_json{{"line", e.line}, {"message", e.message}});
    summary["row_errors"] = errors;
  }
  summary["tau_grid"] =
      ordered_json{{"points", grid.size()}, {"max", grid.taus.back()}};

  std::string worst_group;
  double worst_accuracy = 2.0;
  ordered_json groups;
  for (std::size_t g = 0; g < table.group_count(); ++g) {
    const std::string& name = table.groups()[g];
    const GroupCurve& curve = curves[g];
    const std::optional<double> fc = curve.points.front().accuracy;
    ordered_json entry;
    entry["mass"] = table.group_mass(g);
    entry["share"] = table.group_share(g);
    entry["full_coverage_accuracy"] = opt_json(fc);
    try {
      entry["skewness"] = skewness(MarginDistribution(ingest.group_distributions.at(name)));
    } catch (const DegenerateSample&) {
      entry["skewness"] = nullptr;
    }
    entry["monotonicity"] = monotone_label_name(classify_curve_points(curve.points).label());
    groups[name] = entry;
    if (fc && *fc < worst_accuracy) {
      worst_accuracy = *fc;
      worst_group = name;
    }
  }
  summary["groups"] = groups;
  summary["worst_group"] = worst_group;  // ties resolve to the first label in order
  summary["average"] = ordered_json{
      {"full_coverage_accuracy", opt_json(average.points.front().accuracy)},
      {"monotonicity", monotone_label_name(classify_curve_points(average.points).label())}};

  try {
    const auto odds = equalized_odds_check(table, grid);
    double ref_gap = 0.0, tpr_gap = 0.0, fpr_gap = 0.0;
    bool holds = true;
    for (const auto& row : odds) {
      ref_gap = std::max(ref_gap, row.reference_gap);
      tpr_gap = std::max(tpr_gap, row.actual_tpr_gap);
      fpr_gap = std::max(fpr_gap, row.actual_fpr_gap);
      holds = holds && row.reference_holds;
    }
    summary["equalized_odds"] = ordered_json{{"reference_holds", holds},
                                             {"max_reference_gap", ref_gap},
                                             {"max_actual_tpr_gap", tpr_gap},
                                             {"max_actual_fpr_gap", fpr_gap}};
  } catch (const UndefinedRate& e) {
    summary["equalized_odds"] = ordered_json{{"reference_holds", nullptr},
                                             {"reason", e.what()}};
  }

  OutputSet out(cfg.out_dir);
  if (cfg.formats.count("csv")) {
    out.add("curves.csv", csv);
    out.add("records.csv", export_records_csv(ingest.examples));
  }
  if (cfg.formats.count("json")) out.add("summary.json", summary.dump(2) + "\n");
  if (cfg.formats.count("svg")) {
    std::vector<ChartSeries> series;
    for (std::size_t i = 0; i < curves.size(); ++i)
      series.push_back(
          curve_chart_series(curves[i].group, chart_color(i), curves[i].points));
    out.add("accuracy_coverage.svg",
            line_chart_svg("selective accuracy by group", "coverage", "accuracy", series));
  }
  out.commit();
  return 0;
}

inline int cmd_simulate(const RunConfig& cfg, const std::string& worst_means,
                        const std::string& worst_sigmas, const std::string& other_means) {
  SweepReport report;
  ordered_json spec_echo;
  if (cfg.means_sweep) {
    MeansSweepSpec spec;
    if (!worst_means.empty()) spec.worst_means = parse_axis(worst_means);
    if (!other_means.empty()) spec.other_means = parse_axis(other_means);
    spec.sigma = cfg.sigma;
    spec.p = cfg.p;
    spec.tau_points = cfg.tau_points;
    spec.tau_max = cfg.tau_max;
    report = run_means_sweep(spec);
    spec_echo = ordered_json{{"mode", "means"},
                             {"worst_means", spec.worst_means.size()},
                             {"other_means", spec.other_means.size()},
                             {"sigma", spec.sigma},
                             {"p", spec.p}};
  } else {
    SweepSpec spec;
    if (!worst_means.empty()) spec.worst_means = parse_axis(worst_means);
    if (!worst_sigmas.empty()) spec.worst_sigmas = parse_axis(worst_sigmas);
    spec.other_mean = cfg.other_mean;
    spec.other_sigma = cfg.other_sigma;
    spec.p = cfg.p;
    spec.tau_points = cfg.tau_points;
    spec.tau_max = cfg.tau_max;
    report = run_sweep(spec);
    spec_echo = ordered_json{{"mode", "sigma"},
                             {"worst_means", spec.worst_means.size()},
                             {"worst_sigmas", spec.worst_sigmas.size()},
                             {"other_mean", spec.other_mean},
                             {"other_sigma", spec.other_sigma},
                             {"p", spec.p}};
  }

  std::size_t outperform = 0, underperform = 0, excluded = 0, satisfied = 0, boundary = 0;
  double largest_gap = 0.0;
  for (const auto& cell : report.cells) {
    switch (cell.verdict) {
      case OutperformVerdict::Outperforms: ++outperform; break;
      case OutperformVerdict::UnderperformsSomewhere: ++underperform; break;
      default: ++excluded; break;
    }
    if (cell.nc == NecessaryCondition::Satisfied) ++satisfied;
    if (cell.near_boundary) ++boundary;
    largest_gap = std::max(largest_gap, cell.max_gap);
  }

  ordered_json summary;
  summary["tool"] = tool_block();
  summary["command"] = "simulate";
  ordered_json config = common_config(cfg);
  config["sweep"] = spec_echo;
  config["tau_points"] = report.tau_points;
  config["tau_max"] = report.tau_max;
  summary["config"] = config;
  summary["cells"] = ordered_json{{"total", report.cells.size()},
                                  {"outperforms", outperform},
                                  {"underperforms", underperform},
                                  {"excluded", excluded},
                                  {"necessary_condition_satisfied", satisfied},
                                  {"near_boundary", boundary}};
  summary["largest_max_gap"] = largest_gap;

  OutputSet out(cfg.out_dir);
  if (cfg.formats.count("csv")) out.add("sweep.csv", render_region_map(report, "csv"));
  if (cfg.formats.count("json")) out.add("summary.json", summary.dump(2) + "\n");
  if (cfg.formats.count("svg")) out.add("region_map.svg", render_region_map(report, "svg"));
  out.commit();
  return 0;
}

inline ThresholdGrid grid_for(const RunConfig& cfg, const MarginDistribution& dist) {
  if (cfg.tau_max) return ThresholdGrid::uniform(*cfg.tau_max, cfg.tau_points);
  return ThresholdGrid::for_distribution(dist, cfg.tau_points);
}

inline int cmd_check_dist(const RunConfig& cfg, const std::string& spec) {
  const MarginDistribution dist = parse_distribution_spec(spec);
  const ThresholdGrid grid = grid_for(cfg, dist);

  ordered_json report;
  report["tool"] = tool_block();
  report["command"] = "check-dist";
  ordered_json config = common_config(cfg);
  config["spec"] = spec;
  config["tau_points"] = grid.size();
  config["tau_max"] = grid.taus.back();
  report["config"] = config;
  report["distribution"] = describe(dist);
  report["left_log_concave_cdf"] = shape_block(is_left_log_concave(dist));
  report["log_concave_density"] = shape_block(is_log_concave_density(dist));
  report["skewness"] = skewness(dist);
  report["monotonicity"] = monotonicity_block(classify_monotonicity(dist, grid));
  report["full_coverage_accuracy"] = opt_json(selective_accuracy(dist, 0.0));

  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  OutputSet out(cfg.out_dir);
  out.add("report.json", text);
  out.commit();
  return 0;
}

inline int cmd_curve(const RunConfig& cfg, const std::string& spec) {
  const MarginDistribution dist = parse_distribution_spec(spec);
  const ThresholdGrid grid = grid_for(cfg, dist);
  const std::vector<CurvePoint> points = accuracy_coverage_curve(dist, grid);

  std::string csv = "tau,coverage,accuracy\n";
  for (const auto& p : points) {
    csv += format_double(p.tau);
    csv += ',';
    csv += format_double(p.coverage);
    csv += ',';
    csv += opt_cell(p.accuracy);
    csv += '\n';
  }

  OutputSet out(cfg.out_dir);
  if (cfg.formats.count("csv")) out.add("curve.csv", csv);
  if (cfg.formats.count("json")) {
    ordered_json summary;
    summary["tool"] = tool_block();
    summary["command"] = "curve";
    ordered_json config = common_config(cfg);
    config["spec"] = spec;
    config["tau_points"] = grid.size();
    config["tau_max"] = grid.taus.back();
    summary["config"] = config;
    summary["distribution"] = describe(dist);
    summary["full_coverage_accuracy"] = opt_json(points.front().accuracy);
    out.add("summary.json", summary.dump(2) + "\n");
  }
  if (cfg.formats.count("svg")) {
    out.add("curve.svg",
            line_chart_svg(describe(dist), "coverage", "accuracy",
                           {curve_chart_series("accuracy", chart_color(0), points)}));
  }
  out.commit();
  return 0;
}

inline bool is_usage_error(const Error& e) {
  return dynamic_cast<const GrammarError*>(&e) != nullptr ||
         dynamic_cast<const SchemaError*>(&e) != nullptr ||
         dynamic_cast<const ParseError*>(&e) != nullptr ||
         dynamic_cast<const EmptyFile*>(&e) != nullptr ||
         dynamic_cast<const UnknownTransform*>(&e) != nullptr ||
         dynamic_cast<const WeightMismatch*>(&e) != nullptr ||
         dynamic_cast<const UnsupportedFormat*>(&e) != nullptr;
}

}  // namespace detail

// Full command-line front end as an in-process call: parses args (without the
// program name), runs one command, writes artifacts. Exit contract: 0 success,
// 1 runtime or I/O failure, 2 usage or input-parse failure.
inline int run_cli(const std::vector<std::string>& args) {
  RunConfig cfg;
  std::string formats_str = "csv,json";
  std::string weights_str;
  std::string log_format = "auto";
  std::string input;
  std::string spec;
  std::string worst_means_str, worst_sigmas_str, other_means_str;
  double tau_max_value = 0.0;

  CLI::App app{"Confidence-threshold selective prediction: per-group curves, references, sweeps",
               kToolName};
  app.require_subcommand(1);

  CLI::App* analyze =
      app.add_subcommand("analyze", "Per-group accuracy-coverage curves from a prediction log");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Sweep Gaussian worst-group parameters against a fixed group");
  CLI::App* check =
      app.add_subcommand("check-dist", "Certify shape properties of a margin distribution");
  CLI::App* curve =
      app.add_subcommand("curve", "Accuracy-coverage table for a parametric distribution");

  for (CLI::App* cmd : {analyze, simulate, check, curve}) {
    cmd->add_option("--tau-points", cfg.tau_points, "number of grid thresholds")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
    cmd->add_option("--tau-max", tau_max_value, "largest threshold in the grid")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.seed, "seed echoed into summaries");
    cmd->add_option("--format", formats_str, "outputs to write: comma list of csv,json,svg");
    cmd->add_flag("--strict", cfg.strict, "abort on the first malformed row");
    cmd->add_option("--out", cfg.out_dir, "output directory");
  }

  analyze->add_option("input", input, "prediction log (CSV or JSONL)")->required();
  analyze->add_option("--group-weights", weights_str, "override group shares: g=w,...");
  analyze->add_option("--log-format", log_format, "input format")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));

  simulate->add_flag("--means-sweep", cfg.means_sweep,
                     "sweep worst vs other means at a fixed sigma");
  simulate->add_option("--worst-means", worst_means_str, "axis: lo:hi:count or comma list");
  simulate->add_option("--worst-sigmas", worst_sigmas_str, "axis for the sigma sweep");
  simulate->add_option("--other-means", other_means_str, "axis for the means sweep");
  simulate->add_option("--other-mean", cfg.other_mean, "fixed group mean");
  simulate->add_option("--other-sigma", cfg.other_sigma, "fixed group sigma");
  simulate->add_option("--p", cfg.p, "worst-group mass in (0,1)");
  simulate->add_option("--sigma", cfg.sigma, "shared sigma for the means sweep");

  check->add_option("spec", spec, "distribution spec, e.g. mix2(0.5,-2,1,2,1)")->required();
  curve->add_option("spec", spec, "distribution spec, e.g. gaussian(1,1)|cube")->required();

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back(kToolName);
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.formats = detail::parse_formats(formats_str);
    if (!weights_str.empty()) cfg.group_weights = detail::parse_group_weights(weights_str);
    for (CLI::App* cmd : {analyze, simulate, check, curve})
      if (cmd->parsed() && cmd->count("--tau-max") > 0) cfg.tau_max = tau_max_value;
    if (analyze->parsed()) return detail::cmd_analyze(cfg, input, log_format);
    if (simulate->parsed())
      return detail::cmd_simulate(cfg, worst_means_str, worst_sigmas_str, other_means_str);
    if (check->parsed()) return detail::cmd_check_dist(cfg, spec);
    return detail::cmd_curve(cfg, spec);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return detail::is_usage_error(e) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace margins

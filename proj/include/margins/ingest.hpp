#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "margins/distributions.hpp"
#include "margins/errors.hpp"
#include "margins/numeric.hpp"
#include "margins/references.hpp"

namespace margins {

// Softmax-response confidence: log-odds of the top class against the rest,
// rebalanced so the k-class floor p_max = 1/k maps to 0. A saturated p_max = 1
// has infinite log-odds and is capped.
inline double sr_confidence(double p_max, int k, double cap = 30.0) {
  if (k < 2) throw InvalidParameter("k must be at least 2");
  if (!(p_max >= 1.0 / k)) throw OutOfRange("p_max below the 1/k floor");
  if (!(p_max <= 1.0)) throw OutOfRange("p_max above 1");
  if (p_max == 1.0) return cap;
  const double c = 0.5 * std::log(p_max / (1.0 - p_max)) + 0.5 * std::log(static_cast<double>(k - 1));
  return std::max(0.0, c);
}

// Signed margin: the confidence, negated on incorrect predictions.
inline double margin(double confidence, bool correct) {
  if (!(confidence >= 0.0)) throw NegativeConfidence("confidence must be >= 0");
  return correct ? confidence : -confidence;
}

enum class LogFormat { Csv, Jsonl };

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<LabeledExample> examples;
  std::map<std::string, EmpiricalDistribution> group_distributions;
  std::map<std::string, double> group_mass;
  std::vector<RowError> row_errors;
  std::size_t skipped = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

// One record with every recognized field in string-or-number form, assembled
// either from a CSV row or a JSONL object before common validation.
struct RawFields {
  std::optional<std::string> group, id, label, pred;
  std::optional<std::string> correct_raw;  // "0"/"1"
  std::optional<double> margin, confidence, p_max, weight;
  std::optional<int> k;
};

// Shared validation: resolve correctness, then the confidence source, into a
// LabeledExample. Returns an error message instead on bad rows.
inline std::optional<std::string> resolve_record(const RawFields& r, LabeledExample& out) {
  if (!r.group || r.group->empty()) return "missing group";

  bool correct = false;
  const bool has_flag = r.correct_raw.has_value();
  const bool has_pair = r.label.has_value() || r.pred.has_value();
  if (has_flag && has_pair) return "both correct flag and label/pred present";
  if (has_flag) {
    if (*r.correct_raw == "1") correct = true;
    else if (*r.correct_raw == "0") correct = false;
    else return "correct must be 0 or 1";
  } else if (r.label && r.pred) {
    correct = *r.label == *r.pred;
  } else if (has_pair) {
    return "label and pred must appear together";
  } else {
    return "no correctness source (need correct, or label and pred)";
  }

  int sources = 0;
  sources += r.margin.has_value();
  sources += r.confidence.has_value();
  sources += r.p_max.has_value();
  if (sources != 1) return "need exactly one of margin, confidence, p_max";
  if (r.k && !r.p_max) return "k is only meaningful with p_max";

  double confidence_value = 0.0;
  if (r.margin) {
    if (!std::isfinite(*r.margin)) return "margin must be finite";
    if (*r.margin > 0.0 && !correct) return "positive margin contradicts correct=0";
    if (*r.margin < 0.0 && correct) return "negative margin contradicts correct=1";
    confidence_value = std::abs(*r.margin);
  } else if (r.confidence) {
    if (!(*r.confidence >= 0.0) || !std::isfinite(*r.confidence))
      return "confidence must be finite and >= 0";
    confidence_value = *r.confidence;
  } else {
    if (!r.k) return "p_max requires k";
    try {
      confidence_value = sr_confidence(*r.p_max, *r.k);
    } catch (const Error& e) {
      return e.what();
    }
  }

  double weight = 1.0;
  if (r.weight) {
    if (!(*r.weight > 0.0) || !std::isfinite(*r.weight)) return "weight must be finite and > 0";
    weight = *r.weight;
  }

  out.id = r.id.value_or("");
  out.group = *r.group;
  out.correct = correct;
  out.confidence = confidence_value;
  out.weight = weight;
  return std::nullopt;
}

inline void parse_csv(std::string_view source, bool strict, IngestResult& result) {
  std::size_t pos = 0, line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= source.size()) return false;
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    line = source.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view header;
  while (next_line(header) && trim(header).empty()) {
  }
  if (trim(header).empty()) throw EmptyFile("no CSV header");

  const auto names = split_csv_line(header);
  std::map<std::string_view, std::size_t> cols;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!cols.emplace(names[i], i).second)
      throw SchemaError("duplicate column: " + std::string(names[i]));
  }
  auto col = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = cols.find(name);
    if (it == cols.end()) return std::nullopt;
    return it->second;
  };

  const auto c_group = col("group");
  if (!c_group) throw SchemaError("missing required column: group");
  const auto c_correct = col("correct");
  const auto c_label = col("label");
  const auto c_pred = col("pred");
  if (c_correct && (c_label || c_pred))
    throw SchemaError("use either correct or label+pred, not both");
  if (!c_correct && !(c_label && c_pred))
    throw SchemaError("need a correctness source: correct, or label and pred");
  const auto c_margin = col("margin");
  const auto c_conf = col("confidence");
  const auto c_pmax = col("p_max");
  const auto c_k = col("k");
  const int sources = int(c_margin.has_value()) + int(c_conf.has_value()) + int(c_pmax.has_value());
  if (sources != 1)
    throw SchemaError("need exactly one confidence source column: margin, confidence, or p_max");
  if (c_pmax && !c_k) throw SchemaError("p_max requires a k column");
  if (c_k && !c_pmax) throw SchemaError("k requires a p_max column");
  const auto c_weight = col("weight");
  const auto c_id = col("id");

  bool any_rows = false;
  std::string_view line;
  while (next_line(line)) {
    if (trim(line).empty()) continue;
    any_rows = true;
    const auto fields = split_csv_line(line);
    auto fail = [&](const std::string& msg) {
      if (strict) throw ParseError(line_no, msg);
      result.row_errors.push_back({line_no, msg});
      ++result.skipped;
    };
    if (fields.size() != names.size()) {
      fail("expected " + std::to_string(names.size()) + " fields, got " +
           std::to_string(fields.size()));
      continue;
    }
    auto cell = [&](std::optional<std::size_t> c) -> std::string_view {
      return c ? fields[*c] : std::string_view{};
    };

    RawFields raw;
    if (!cell(c_group).empty()) raw.group = std::string(cell(c_group));
    if (c_id && !cell(c_id).empty()) raw.id = std::string(cell(c_id));
    if (c_correct && !cell(c_correct).empty()) raw.correct_raw = std::string(cell(c_correct));
    if (c_label && !cell(c_label).empty()) raw.label = std::string(cell(c_label));
    if (c_pred && !cell(c_pred).empty()) raw.pred = std::string(cell(c_pred));

    bool bad_number = false;
    auto read_real = [&](std::optional<std::size_t> c, std::optional<double>& slot,
                         std::string_view what) {
      const auto text = cell(c);
      if (text.empty()) return;
      double v;
      if (!parse_real(text, v)) {
        fail("cannot parse " + std::string(what) + ": " + std::string(text));
        bad_number = true;
        return;
      }
      slot = v;
    };
    read_real(c_margin, raw.margin, "margin");
    if (bad_number) continue;
    read_real(c_conf, raw.confidence, "confidence");
    if (bad_number) continue;
    read_real(c_pmax, raw.p_max, "p_max");
    if (bad_number) continue;
    read_real(c_weight, raw.weight, "weight");
    if (bad_number) continue;
    if (c_k && !cell(c_k).empty()) {
      int v;
      if (!parse_int(cell(c_k), v)) {
        fail("cannot parse k: " + std::string(cell(c_k)));
        continue;
      }
      raw.k = v;
    }

    LabeledExample example;
    if (auto err = resolve_record(raw, example)) {
      fail(*err);
      continue;
    }
    result.examples.push_back(std::move(example));
  }
  if (!any_rows) throw EmptyFile("CSV has a header but no data rows");
}

inline void parse_jsonl(std::string_view source, bool strict, IngestResult& result) {
  std::size_t pos = 0, line_no = 0;
  bool any_rows = false;
  while (pos < source.size()) {
    std::size_t end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    const std::string_view line = trim(source.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    any_rows = true;

    auto fail = [&](const std::string& msg) {
      if (strict) throw ParseError(line_no, msg);
      result.row_errors.push_back({line_no, msg});
      ++result.skipped;
    };

    const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      fail("invalid JSON object");
      continue;
    }

    RawFields raw;
    bool bad = false;
    auto as_text = [&](const nlohmann::json& v) -> std::string {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    auto read_real = [&](const char* key, std::optional<double>& slot) {
      auto it = j.find(key);
      if (it == j.end()) return;
      if (!it->is_number()) {
        fail(std::string(key) + " must be a number");
        bad = true;
        return;
      }
      slot = it->get<double>();
    };

    if (auto it = j.find("group"); it != j.end()) {
      if (!it->is_string()) {
        fail("group must be a string");
        continue;
      }
      raw.group = it->get<std::string>();
    }
    if (auto it = j.find("id"); it != j.end()) raw.id = as_text(*it);
    if (auto it = j.find("correct"); it != j.end()) {
      if (it->is_boolean()) {
        raw.correct_raw = it->get<bool>() ? "1" : "0";
      } else if (it->is_number_integer() || it->is_number_unsigned()) {
        raw.correct_raw = std::to_string(it->get<long long>());
      } else {
        fail("correct must be a boolean or 0/1");
        continue;
      }
    }
    if (auto it = j.find("label"); it != j.end()) raw.label = as_text(*it);
    if (auto it = j.find("pred"); it != j.end()) raw.pred = as_text(*it);
    read_real("margin", raw.margin);
    if (bad) continue;
    read_real("confidence", raw.confidence);
    if (bad) continue;
    read_real("p_max", raw.p_max);
    if (bad) continue;
    read_real("weight", raw.weight);
    if (bad) continue;
    if (auto it = j.find("k"); it != j.end()) {
      if (!it->is_number_integer() && !it->is_number_unsigned()) {
        fail("k must be an integer");
        continue;
      }
      raw.k = it->get<int>();
    }

    LabeledExample example;
    if (auto err = resolve_record(raw, example)) {
      fail(*err);
      continue;
    }
    result.examples.push_back(std::move(example));
  }
  if (!any_rows) throw EmptyFile("no JSONL rows");
}

}  // namespace detail

// Parses a prediction log into labeled examples and per-group empirical
// margin distributions. Bad rows are reported with their line numbers and
// skipped; in strict mode the first bad row aborts the parse.
inline IngestResult parse_records(std::string_view source, LogFormat format,
                                  bool strict = false) {
  IngestResult result;
  if (format == LogFormat::Csv) {
    detail::parse_csv(source, strict, result);
  } else {
    detail::parse_jsonl(source, strict, result);
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_group;
  for (const auto& e : result.examples) {
    auto& [margins, weights] = per_group[e.group];
    margins.push_back(margin(e.confidence, e.correct));
    weights.push_back(e.weight);
    result.group_mass[e.group] += e.weight;
  }
  for (auto& [name, data] : per_group) {
    auto& [margins, weights] = data;
    const double mass = result.group_mass[name];
    for (double& w : weights) w /= mass;
    result.group_distributions.emplace(name,
                                       EmpiricalDistribution(std::move(margins), std::move(weights)));
  }
  return result;
}

// Canonical record export; margins survive a write/parse round trip
// bit-for-bit because shortest round-trip formatting is used.
inline std::string export_records_csv(const std::vector<LabeledExample>& examples) {
  std::string out = "id,group,correct,margin,weight\n";
  for (const auto& e : examples) {
    out += e.id;
    out += ',';
    out += e.group;
    out += ',';
    out += e.correct ? '1' : '0';
    out += ',';
    out += format_double(margin(e.confidence, e.correct));
    out += ',';
    out += format_double(e.weight);
    out += '\n';
  }
  return out;
}

}  // namespace margins

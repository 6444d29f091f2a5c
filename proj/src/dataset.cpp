// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "optsyn/interval.hpp"
#include "optsyn/objectives.hpp"

namespace optsyn::dataset {

using nlohmann::json;

std::size_t Dataset::total_steps() const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.features.size();
  return n;
}

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
}

Example parse_example(const json& obj, TaskKind kind, const std::string& source,
                      std::size_t line) {
  if (!obj.is_object()) fail(source, line, "expected a JSON object");
  if (!obj.contains("features") || !obj["features"].is_array()) {
    fail(source, line, "missing \"features\" array");
  }
  Example ex;
  for (const auto& row : obj["features"]) {
    if (!row.is_array()) fail(source, line, "feature rows must be arrays of numbers");
    std::vector<double> v;
    for (const auto& x : row) {
      if (!x.is_number()) fail(source, line, "feature values must be numbers");
      v.push_back(x.get<double>());
    }
    ex.features.push_back(std::move(v));
  }
  if (kind == TaskKind::Labeling) {
    if (!obj.contains("labels") || !obj["labels"].is_array()) {
      fail(source, line, "labeling task requires a \"labels\" array");
    }
    for (const auto& b : obj["labels"]) {
      if (!b.is_boolean()) fail(source, line, "labels must be booleans");
      ex.step_labels.push_back(b.get<bool>());
    }
    if (ex.step_labels.size() != ex.features.size()) {
      fail(source, line,
           "labels length (" + std::to_string(ex.step_labels.size()) +
               ") does not match features length (" + std::to_string(ex.features.size()) + ")");
    }
  } else {
    if (!obj.contains("label") || !obj["label"].is_boolean()) {
      fail(source, line, "query task requires a boolean \"label\"");
    }
    ex.sequence_label = obj["label"].get<bool>();
  }
  return ex;
}

}  // namespace

Dataset parse_jsonl(std::istream& in, TaskKind kind, const std::string& source_name) {
  Dataset data;
  data.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(source_name, line_no, std::string("JSON parse error: ") + e.what());
    }
    Example ex = parse_example(obj, kind, source_name, line_no);
    for (const auto& row : ex.features) {
      if (data.feature_dim == 0) data.feature_dim = row.size();
      if (row.size() != data.feature_dim) {
        fail(source_name, line_no,
             "inconsistent feature dimension (" + std::to_string(row.size()) + " vs " +
                 std::to_string(data.feature_dim) + ")");
      }
    }
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) {
    throw std::runtime_error(source_name + ": empty dataset");
  }
  return data;
}

Dataset load_dataset(const std::string& path, TaskKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_jsonl(in, kind, path);
}

void write_jsonl(const Dataset& data, std::ostream& out) {
  for (const auto& ex : data.examples) {
    json obj;
    obj["features"] = ex.features;
    if (data.kind == TaskKind::Labeling) {
      obj["labels"] = std::vector<bool>(ex.step_labels.begin(), ex.step_labels.end());
    } else {
      obj["label"] = ex.sequence_label;
    }
    out << obj.dump() << "\n";
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  write_jsonl(data, out);
}

std::string NormalizationParams::to_json() const {
  json arr = json::array();
  for (const auto& d : dims) {
    arr.push_back({{"min", d.min}, {"max", d.max}, {"constant", d.constant}});
  }
  return json{{"dims", arr}}.dump();
}

NormalizationParams NormalizationParams::from_json(const std::string& text) {
  json obj = json::parse(text);
  NormalizationParams params;
  for (const auto& d : obj.at("dims")) {
    params.dims.push_back({d.at("min").get<double>(), d.at("max").get<double>(),
                           d.at("constant").get<bool>()});
  }
  return params;
}

std::pair<Dataset, NormalizationParams> normalize(const Dataset& data) {
  NormalizationParams params;
  params.dims.resize(data.feature_dim);
  for (auto& d : params.dims) {
    d.min = std::numeric_limits<double>::infinity();
    d.max = -std::numeric_limits<double>::infinity();
  }
  for (const auto& ex : data.examples) {
    for (const auto& row : ex.features) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        params.dims[j].min = std::min(params.dims[j].min, row[j]);
        params.dims[j].max = std::max(params.dims[j].max, row[j]);
      }
    }
  }
  for (auto& d : params.dims) d.constant = !(d.min < d.max);
  return {apply_normalization(data, params), params};
}

Dataset apply_normalization(const Dataset& data, const NormalizationParams& params) {
  if (params.dims.size() != data.feature_dim) {
    throw std::invalid_argument("normalization parameters do not match feature dimension");
  }
  Dataset out = data;
  for (auto& ex : out.examples) {
    for (auto& row : ex.features) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        const auto& d = params.dims[j];
        if (d.constant) continue;
        row[j] = 2.0 * (row[j] - d.min) / (d.max - d.min) - 1.0;
      }
    }
  }
  return out;
}

Dataset invert_normalization(const Dataset& data, const NormalizationParams& params) {
  if (params.dims.size() != data.feature_dim) {
    throw std::invalid_argument("normalization parameters do not match feature dimension");
  }
  Dataset out = data;
  for (auto& ex : out.examples) {
    for (auto& row : ex.features) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        const auto& d = params.dims[j];
        if (d.constant) continue;
        row[j] = (row[j] + 1.0) / 2.0 * (d.max - d.min) + d.min;
      }
    }
  }
  return out;
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

int SplitMix64::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
}

namespace {

double segment_max(const Trajectory& x, std::size_t i, std::size_t j, int feature) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t t = i; t < j; ++t) m = std::max(m, x[t][static_cast<std::size_t>(feature)]);
  return m;
}

bool eval_planted_seq(const Trajectory& x, int feature, double a, double b) {
  std::size_t n = x.size();
  for (std::size_t k = 0; k <= n; ++k) {
    if (segment_max(x, 0, k, feature) >= a && segment_max(x, k, n, feature) >= b) return true;
  }
  return false;
}

SyntheticResult generate_labeling(const SyntheticSpec& spec, SplitMix64& rng) {
  SyntheticResult out;
  out.data.kind = TaskKind::Labeling;
  out.data.feature_dim = static_cast<std::size_t>(spec.feature_dim);

  std::vector<Trajectory> trajs;
  for (int i = 0; i < spec.num_examples; ++i) {
    Trajectory x;
    for (int t = 0; t < spec.length; ++t) {
      std::vector<double> row;
      for (int j = 0; j < spec.feature_dim; ++j) row.push_back(rng.uniform(-1.0, 1.0));
      x.push_back(std::move(row));
    }
    trajs.push_back(std::move(x));
  }

  int feature = rng.uniform_int(0, spec.feature_dim - 1);
  double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  // Place the offset in a gap between realized flip points so the planted
  // program labels every step with a nonzero margin and both labels occur.
  std::vector<double> flips;
  for (const auto& x : trajs) {
    for (const auto& row : x) flips.push_back(-sign * row[static_cast<std::size_t>(feature)]);
  }
  std::sort(flips.begin(), flips.end());
  flips.erase(std::unique(flips.begin(), flips.end()), flips.end());
  double offset = 0.0;
  if (flips.size() < 2) {
    offset = flips.empty() ? 0.0 : flips[0] + 0.1;
  } else {
    std::size_t lo = std::max<std::size_t>(1, flips.size() / 4);
    std::size_t hi = std::max(lo, flips.size() - 1 - flips.size() / 4);
    std::size_t k = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(lo), static_cast<int>(hi)));
    offset = (flips[k - 1] + flips[k]) / 2.0;
  }
  offset = std::clamp(offset, -0.999, 0.999);

  std::int64_t kept = 0, total = 0;
  for (auto& x : trajs) {
    Example ex;
    ex.features = std::move(x);
    for (const auto& row : ex.features) {
      bool label = sign * row[static_cast<std::size_t>(feature)] + offset >= 0.0;
      bool flip = spec.label_noise > 0.0 && rng.uniform01() < spec.label_noise;
      ex.step_labels.push_back(flip ? !label : label);
      kept += !flip;
      ++total;
    }
    out.data.examples.push_back(std::move(ex));
  }
  out.planted_program = "map(" + format_number(sign) + "*z" + std::to_string(feature + 1) +
                        " + " + format_number(offset) + ")";
  out.planted_objective = static_cast<double>(kept) / static_cast<double>(total);
  return out;
}

SyntheticResult generate_query(const SyntheticSpec& spec, SplitMix64& rng) {
  SyntheticResult out;
  out.data.kind = TaskKind::Query;
  out.data.feature_dim = static_cast<std::size_t>(spec.feature_dim);

  std::vector<Trajectory> trajs;
  for (int i = 0; i < spec.num_examples; ++i) {
    Trajectory x;
    for (int t = 0; t < spec.length; ++t) {
      std::vector<double> row;
      for (int j = 0; j < spec.feature_dim; ++j) row.push_back(rng.uniform(0.0, 1.0));
      x.push_back(std::move(row));
    }
    trajs.push_back(std::move(x));
  }

  int feature = rng.uniform_int(0, spec.feature_dim - 1);
  std::vector<double> maxima;
  for (const auto& x : trajs) maxima.push_back(segment_max(x, 0, x.size(), feature));
  std::vector<double> sorted = maxima;
  std::sort(sorted.begin(), sorted.end());

  // Prefer a two-predicate sequencing query; fall back to a single threshold
  // at the median if the labels degenerate.
  std::string planted;
  std::vector<bool> labels;
  const double qa[] = {0.65, 0.5, 0.75};
  bool found = false;
  for (double q : qa) {
    double a = sorted[static_cast<std::size_t>(q * (sorted.size() - 1))];
    double b = sorted[static_cast<std::size_t>(0.3 * (sorted.size() - 1))] * 0.8;
    labels.clear();
    for (const auto& x : trajs) labels.push_back(eval_planted_seq(x, feature, a, b));
    bool any_pos = std::find(labels.begin(), labels.end(), true) != labels.end();
    bool any_neg = std::find(labels.begin(), labels.end(), false) != labels.end();
    if (any_pos && any_neg) {
      planted = "(max" + std::to_string(feature) + " >= " + format_number(a) + ") ; (max" +
                std::to_string(feature) + " >= " + format_number(b) + ")";
      found = true;
      break;
    }
  }
  if (!found) {
    double mid = sorted.size() >= 2
                     ? (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / 2.0
                     : sorted[0];
    labels.clear();
    for (double m : maxima) labels.push_back(m >= mid);
    planted = "(max" + std::to_string(feature) + " >= " + format_number(mid) + ")";
  }

  objectives::OutcomeSet outcomes;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    Example ex;
    ex.features = std::move(trajs[i]);
    bool label = labels[i];
    bool flip = spec.label_noise > 0.0 && rng.uniform01() < spec.label_noise;
    ex.sequence_label = flip ? !label : label;
    outcomes.push_back({label, ex.sequence_label});
    out.data.examples.push_back(std::move(ex));
  }
  out.planted_program = planted;
  out.planted_objective = objectives::f1(outcomes);
  return out;
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_examples <= 0 || spec.length <= 0 || spec.feature_dim <= 0) {
    throw std::invalid_argument("synthetic spec sizes must be positive");
  }
  SplitMix64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  if (spec.kind == TaskKind::Labeling) return generate_labeling(spec, rng);
  return generate_query(spec, rng);
}

}  // namespace optsyn::dataset

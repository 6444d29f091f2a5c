// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace optsyn::oracle {

namespace {

std::vector<double> grid_points(const GridSpec& grid) {
  if (grid.steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(grid.steps));
  for (int i = 0; i < grid.steps; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(grid.steps - 1);
    pts.push_back(grid.lo + t * (grid.hi - grid.lo));
  }
  return pts;
}

std::uint64_t pow_guarded(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

// Odometer over `slots` positions, each ranging over its own value list.
bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& sizes) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (++idx[i] < sizes[i]) return true;
    idx[i] = 0;
  }
  return false;
}

}  // namespace

GridResult grid_optimum_threshold(const dataset::Dataset& data,
                                  const objectives::ObjectiveSpec& objective, int feature,
                                  const GridSpec& grid) {
  if (data.kind != dataset::TaskKind::Labeling) {
    throw std::invalid_argument("threshold oracle expects a labeling dataset");
  }
  std::vector<double> pts = grid_points(grid);
  GridResult result;
  bool first = true;
  for (double theta : pts) {
    objectives::OutcomeSet outcomes;
    for (const auto& ex : data.examples) {
      for (std::size_t t = 0; t < ex.features.size(); ++t) {
        outcomes.push_back({ex.features[t][static_cast<std::size_t>(feature)] <= theta,
                            static_cast<bool>(ex.step_labels[t])});
      }
    }
    double v = objective.concrete(outcomes);
    ++result.candidates;
    if (first || v > result.value) {
      first = false;
      result.value = v;
      result.program = "map(d <= " + format_number(theta) + ")";
    }
  }
  return result;
}

GridResult grid_optimum_near(const dataset::Dataset& data,
                             const objectives::ObjectiveSpec& objective,
                             const near::SpaceOptions& options, const GridSpec& grid) {
  if (data.kind != dataset::TaskKind::Labeling) {
    throw std::invalid_argument("near oracle expects a labeling dataset");
  }
  near::SpaceOptions opts = options;
  opts.n_features = static_cast<int>(data.feature_dim);
  std::vector<near::LlPtr> shapes = near::enumerate_programs(opts);
  if (shapes.empty()) throw std::invalid_argument("near oracle: empty program space");
  std::vector<double> pts = grid_points(grid);

  std::uint64_t total = 0;
  for (const auto& shape : shapes) {
    std::size_t slots = near::collect_coefficients(*shape).size();
    total += pow_guarded(pts.size(), slots, kMaxCandidates);
    if (total > kMaxCandidates) {
      throw std::invalid_argument("near oracle: grid exceeds the candidate budget");
    }
  }

  GridResult result;
  bool first = true;
  for (const auto& shape : shapes) {
    std::size_t slots = near::collect_coefficients(*shape).size();
    std::vector<std::size_t> idx(slots, 0);
    std::vector<std::size_t> sizes(slots, pts.size());
    do {
      near::LlPtr prog = shape;
      for (std::size_t s = 0; s < slots; ++s) {
        prog = near::replace_coefficient(
            prog, static_cast<int>(s),
            near::Coeff{RealInterval::singleton(pts[idx[s]]), 0});
      }
      objectives::OutcomeSet outcomes;
      for (const auto& ex : data.examples) {
        std::vector<double> vals = near::eval_ll(*prog, ex.features);
        for (std::size_t t = 0; t < vals.size(); ++t) {
          outcomes.push_back({vals[t] >= 0.0, static_cast<bool>(ex.step_labels[t])});
        }
      }
      double v = objective.concrete(outcomes);
      ++result.candidates;
      if (first || v > result.value) {
        first = false;
        result.value = v;
        result.program = near::to_text(*prog);
      }
    } while (slots > 0 && advance(idx, sizes));
  }
  return result;
}

GridResult grid_optimum_quivr(const dataset::Dataset& data,
                              const objectives::ObjectiveSpec& objective,
                              const quivr::PredicateLibrary& lib,
                              const quivr::SpaceOptions& options, const GridSpec& grid,
                              bool realized_thresholds) {
  if (data.kind != dataset::TaskKind::Query) {
    throw std::invalid_argument("quivr oracle expects a query dataset");
  }
  quivr::ScoreCache cache(lib, data);
  std::vector<std::vector<double>> per_pred_points(lib.predcs().size());
  for (std::size_t p = 0; p < lib.predcs().size(); ++p) {
    if (realized_thresholds) {
      std::vector<double> pts = cache.realized_scores(static_cast<int>(p));
      double above = pts.empty() ? 1.0 : pts.back() + 1.0;
      pts.push_back(above);
      per_pred_points[p] = std::move(pts);
    } else {
      per_pred_points[p] = grid_points(grid);
    }
  }
  std::vector<RealInterval> dummy_boxes(lib.predcs().size(), RealInterval(0.0, 1.0));
  std::vector<quivr::QueryPtr> shapes = quivr::enumerate_queries(lib, dummy_boxes, options);

  std::uint64_t total = 0;
  for (const auto& shape : shapes) {
    std::vector<const quivr::Query*> params = quivr::collect_param_nodes(*shape);
    std::uint64_t combos = 1;
    for (const auto* node : params) {
      std::uint64_t n = per_pred_points[static_cast<std::size_t>(node->pred)].size();
      if (n == 0 || combos > kMaxCandidates / n) {
        combos = kMaxCandidates + 1;
        break;
      }
      combos *= n;
    }
    total += combos;
    if (total > kMaxCandidates) {
      throw std::invalid_argument("quivr oracle: grid exceeds the candidate budget");
    }
  }

  GridResult result;
  bool first = true;
  for (const auto& shape : shapes) {
    std::vector<const quivr::Query*> params = quivr::collect_param_nodes(*shape);
    std::size_t slots = params.size();
    std::vector<std::size_t> sizes;
    for (const auto* node : params) {
      sizes.push_back(per_pred_points[static_cast<std::size_t>(node->pred)].size());
    }
    std::vector<std::size_t> idx(slots, 0);
    do {
      quivr::QueryPtr prog = shape;
      for (std::size_t s = 0; s < slots; ++s) {
        double c = per_pred_points[static_cast<std::size_t>(params[s]->pred)][idx[s]];
        prog = quivr::replace_box(prog, static_cast<int>(s), RealInterval::singleton(c), 0);
      }
      objectives::OutcomeSet outcomes;
      for (std::size_t e = 0; e < data.examples.size(); ++e) {
        bool pred = quivr::eval_query(lib, *prog, data.examples[e].features);
        outcomes.push_back({pred, data.examples[e].sequence_label});
      }
      double v = objective.concrete(outcomes);
      ++result.candidates;
      if (first || v > result.value) {
        first = false;
        result.value = v;
        result.program = quivr::to_text(lib, *prog);
      }
    } while (slots > 0 && advance(idx, sizes));
  }
  return result;
}

std::pair<double, double> enumerate_resolutions(const objectives::AbstractOutcomeSet& w,
                                                const objectives::ObjectiveSpec& objective) {
  std::vector<std::size_t> undetermined;
  objectives::OutcomeSet base;
  base.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!w[i].prediction.is_singleton()) undetermined.push_back(i);
    base.push_back({w[i].prediction.lo(), w[i].label});
  }
  if (undetermined.size() > 20) {
    throw std::invalid_argument("enumerate_resolutions: more than 20 undetermined predictions");
  }
  double lo = 0.0, hi = 0.0;
  std::uint64_t count = std::uint64_t{1} << undetermined.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    objectives::OutcomeSet resolved = base;
    for (std::size_t b = 0; b < undetermined.size(); ++b) {
      resolved[undetermined[b]].prediction = (mask >> b) & 1;
    }
    double v = objective.concrete(resolved);
    if (mask == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

}  // namespace optsyn::oracle

// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Independent brute-force references: grid search over discretized program
// spaces and exhaustive resolution enumeration for abstract objectives.
// Oracles are exact or absent: requests that would evaluate more than
// kMaxCandidates programs are rejected rather than truncated.

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "optsyn/dataset.hpp"
#include "optsyn/near.hpp"
#include "optsyn/objectives.hpp"
#include "optsyn/quivr.hpp"

namespace optsyn::oracle {

inline constexpr std::uint64_t kMaxCandidates = 1'000'000;

struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  int steps = 2;  // grid points per constant, endpoints included
};

struct GridResult {
  std::string program;
  double value = 0.0;
  std::uint64_t candidates = 0;
};

// map(d <= theta) over one feature, theta on the grid.
GridResult grid_optimum_threshold(const dataset::Dataset& data,
                                  const objectives::ObjectiveSpec& objective, int feature,
                                  const GridSpec& grid);

// Every program shape within the cost bound, each coefficient on the grid.
GridResult grid_optimum_near(const dataset::Dataset& data,
                             const objectives::ObjectiveSpec& objective,
                             const near::SpaceOptions& options, const GridSpec& grid);

// Every query shape within the predicate bounds. With `realized_thresholds`
// each threshold slot ranges over the realized segment scores of its
// predicate plus one value above the maximum (these are exactly the points
// where any label can change); otherwise the uniform grid is used.
GridResult grid_optimum_quivr(const dataset::Dataset& data,
                              const objectives::ObjectiveSpec& objective,
                              const quivr::PredicateLibrary& lib,
                              const quivr::SpaceOptions& options, const GridSpec& grid,
                              bool realized_thresholds);

// Exact (min, max) of the concrete objective over all 2^u resolutions of the
// undetermined predictions; u must be at most 20.
std::pair<double, double> enumerate_resolutions(const objectives::AbstractOutcomeSet& w,
                                                const objectives::ObjectiveSpec& objective);

}  // namespace optsyn::oracle

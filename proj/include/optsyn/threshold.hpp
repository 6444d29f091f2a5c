// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// One-parameter threshold space: programs map(d <= t) labelling each step of
// a trajectory by comparing one feature against a threshold constrained to a
// box. Small enough to trace by hand; used for golden tests and scaling
// sanity runs.

#pragma once

#include <memory>

#include "optsyn/dataset.hpp"
#include "optsyn/objectives.hpp"
#include "optsyn/search.hpp"

namespace optsyn::toy {

struct ThresholdNode final : search::ProgramNode {
  RealInterval box;
  int depth = 0;

  ThresholdNode(RealInterval b, int d) : box(b), depth(d) {}
};

class ThresholdSpace final : public search::Space {
 public:
  struct Options {
    double lo = 0.0;
    double hi = 1.0;
    int feature = 0;
    int max_split_depth = 60;
  };

  ThresholdSpace(dataset::Dataset data, objectives::ObjectiveSpec objective, Options options);

  search::NodePtr root() const override;
  std::vector<search::NodePtr> children(const search::NodePtr& node) const override;
  RealInterval abstract_objective(const search::NodePtr& node) const override;
  bool has_structural_holes(const search::NodePtr&) const override { return false; }
  bool is_concrete(const search::NodePtr& node) const override;
  search::NodePtr midpoint_witness(const search::NodePtr& node) const override;
  double concrete_objective(const search::NodePtr& node) const override;
  objectives::OutcomeSet concrete_outcomes(const search::NodePtr& node) const override;
  std::string describe(const search::NodePtr& node) const override;
  std::size_t dataset_size() const override { return data_.examples.size(); }

 private:
  dataset::Dataset data_;
  objectives::ObjectiveSpec objective_;
  Options options_;
};

}  // namespace optsyn::toy

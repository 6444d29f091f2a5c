// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/threshold.hpp"

#include <stdexcept>

namespace optsyn::toy {

using search::NodePtr;

namespace {

const ThresholdNode& as_node(const NodePtr& p) {
  return dynamic_cast<const ThresholdNode&>(*p);
}

}  // namespace

ThresholdSpace::ThresholdSpace(dataset::Dataset data, objectives::ObjectiveSpec objective,
                               Options options)
    : data_(std::move(data)), objective_(std::move(objective)), options_(options) {
  if (data_.kind != dataset::TaskKind::Labeling) {
    throw std::invalid_argument("ThresholdSpace expects a labeling dataset");
  }
  if (data_.examples.empty()) throw std::invalid_argument("ThresholdSpace: empty dataset");
  if (options_.feature < 0 || static_cast<std::size_t>(options_.feature) >= data_.feature_dim) {
    throw std::invalid_argument("ThresholdSpace: feature index out of range");
  }
}

NodePtr ThresholdSpace::root() const {
  return std::make_shared<ThresholdNode>(RealInterval(options_.lo, options_.hi), 0);
}

std::vector<NodePtr> ThresholdSpace::children(const NodePtr& node) const {
  const auto& n = as_node(node);
  if (n.box.is_singleton() || n.depth >= options_.max_split_depth) return {};
  auto [left, right] = split_interval(n.box);
  return {std::make_shared<ThresholdNode>(left, n.depth + 1),
          std::make_shared<ThresholdNode>(right, n.depth + 1)};
}

RealInterval ThresholdSpace::abstract_objective(const NodePtr& node) const {
  const auto& n = as_node(node);
  objectives::AbstractOutcomeSet outcomes;
  for (const auto& ex : data_.examples) {
    for (std::size_t t = 0; t < ex.features.size(); ++t) {
      double d = ex.features[t][static_cast<std::size_t>(options_.feature)];
      outcomes.emplace_back(threshold_leq(d, n.box), ex.step_labels[t]);
    }
  }
  return objective_.abstract(outcomes);
}

bool ThresholdSpace::is_concrete(const NodePtr& node) const {
  return as_node(node).box.is_singleton();
}

NodePtr ThresholdSpace::midpoint_witness(const NodePtr& node) const {
  const auto& n = as_node(node);
  if (n.box.is_singleton()) return node;
  double mid = n.box.lo() / 2.0 + n.box.hi() / 2.0;
  return std::make_shared<ThresholdNode>(RealInterval::singleton(mid), n.depth);
}

objectives::OutcomeSet ThresholdSpace::concrete_outcomes(const NodePtr& node) const {
  const auto& n = as_node(node);
  if (!n.box.is_singleton()) {
    throw std::invalid_argument("concrete_outcomes on a non-concrete node");
  }
  double theta = n.box.lo();
  objectives::OutcomeSet outcomes;
  for (const auto& ex : data_.examples) {
    for (std::size_t t = 0; t < ex.features.size(); ++t) {
      double d = ex.features[t][static_cast<std::size_t>(options_.feature)];
      outcomes.push_back({d <= theta, static_cast<bool>(ex.step_labels[t])});
    }
  }
  return outcomes;
}

double ThresholdSpace::concrete_objective(const NodePtr& node) const {
  return objective_.concrete(concrete_outcomes(node));
}

std::string ThresholdSpace::describe(const NodePtr& node) const {
  return "map(d <= " + to_string(as_node(node).box) + ")";
}

}  // namespace optsyn::toy

// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory-query DSL: sequencing and conjunction over domain predicates,
// labelling a whole trajectory with one Boolean. `q1 ; q2` matches iff some
// split point satisfies q1 on the prefix and q2 on the suffix; evaluation is
// a dynamic program over a triangular table of segments. Parameterized
// predicates compare a real-valued segment score against a threshold whose
// hole carries an interval constraint; the abstract semantics runs the same
// dynamic program over Boolean intervals.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "optsyn/dataset.hpp"
#include "optsyn/interval.hpp"
#include "optsyn/objectives.hpp"
#include "optsyn/search.hpp"

namespace optsyn::quivr {

using dataset::Trajectory;

class PredicateLibrary {
 public:
  using Segment0Fn = std::function<bool(const Trajectory&, std::size_t, std::size_t)>;
  using ScoreFn = std::function<double(const Trajectory&, std::size_t, std::size_t)>;

  struct Pred0 {
    std::string name;
    Segment0Fn fn;
  };
  struct PredC {
    std::string name;
    ScoreFn fn;
  };

  void add_pred0(std::string name, Segment0Fn fn);
  void add_predc(std::string name, ScoreFn fn);

  // Constant-true plus per-feature max/min/avg score predicates. Empty
  // segments score -inf for max/avg and +inf for min, so `true` is the
  // sequencing identity while score thresholds reject empty prefixes.
  static PredicateLibrary standard(int n_features);

  const std::vector<Pred0>& pred0s() const { return pred0s_; }
  const std::vector<PredC>& predcs() const { return predcs_; }
  int find_pred0(const std::string& name) const;
  int find_predc(const std::string& name) const;

 private:
  std::vector<Pred0> pred0s_;
  std::vector<PredC> predcs_;
};

double predicate_score(const PredicateLibrary& lib, const std::string& name,
                       const Trajectory& traj, std::size_t begin, std::size_t end);
double predicate_score(const PredicateLibrary& lib, const std::string& name,
                       const Trajectory& traj);

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

struct Query {
  enum class Kind : std::uint8_t { Pred0, PredC, Seq, And, Hole };
  Kind kind = Kind::Hole;
  int pred = -1;                       // library index
  RealInterval box{0.0, 0.0};         // PredC threshold constraint
  int splits = 0;
  QueryPtr left, right;
};

QueryPtr make_pred0(int index);
QueryPtr make_predc(int index, RealInterval box, int splits = 0);
QueryPtr make_seq(QueryPtr l, QueryPtr r);
QueryPtr make_and(QueryPtr l, QueryPtr r);
QueryPtr make_hole();

int count_predicates(const Query& q);        // holes count as one future predicate
int count_param_predicates(const Query& q);  // PredC nodes only
bool has_structural_holes(const Query& q);
bool is_concrete(const Query& q);

bool eval_query(const PredicateLibrary& lib, const Query& q, const Trajectory& x);
BoolInterval abs_eval_query(const PredicateLibrary& lib, const Query& q, const Trajectory& x);

struct SpaceOptions {
  int max_predicates = 3;
  int max_param_predicates = 2;
  int max_split_depth = 30;
  double range_padding = 1e-6;
};

// Leftmost structural hole expands to every grammar production within the
// predicate bounds (fresh thresholds get the per-predicate initial box);
// otherwise the widest threshold box splits at its midpoint.
std::vector<QueryPtr> children(const QueryPtr& q, const PredicateLibrary& lib,
                               const std::vector<RealInterval>& initial_boxes,
                               const SpaceOptions& options);

// All hole-free query shapes within the bounds, thresholds left as boxes.
std::vector<QueryPtr> enumerate_queries(const PredicateLibrary& lib,
                                        const std::vector<RealInterval>& initial_boxes,
                                        const SpaceOptions& options);

std::vector<const Query*> collect_param_nodes(const Query& q);
QueryPtr replace_box(const QueryPtr& q, int index, RealInterval box, int splits);
QueryPtr midpoint_instantiation(const QueryPtr& q);

std::string to_text(const PredicateLibrary& lib, const Query& q);
QueryPtr parse_query(const std::string& text, const PredicateLibrary& lib);

// Precomputed segment scores for every (parameterized predicate, example).
class ScoreCache {
 public:
  ScoreCache(const PredicateLibrary& lib, const dataset::Dataset& data);

  double score(int pred, std::size_t example, std::size_t i, std::size_t j) const;
  // Over nonempty segments of the whole dataset (empty-segment scores are
  // constant w.r.t. any finite threshold).
  std::vector<double> realized_scores(int pred) const;

 private:
  std::vector<std::vector<std::vector<double>>> tables_;  // [pred][example][cell]
  std::vector<std::size_t> lengths_;
};

struct QuivrNode final : search::ProgramNode {
  QueryPtr query;
  explicit QuivrNode(QueryPtr q) : query(std::move(q)) {}
};

class QuivrSpace final : public search::Space {
 public:
  QuivrSpace(dataset::Dataset data, objectives::ObjectiveSpec objective, PredicateLibrary lib,
             SpaceOptions options);

  search::NodePtr root() const override;
  std::vector<search::NodePtr> children(const search::NodePtr& node) const override;
  RealInterval abstract_objective(const search::NodePtr& node) const override;
  bool has_structural_holes(const search::NodePtr& node) const override;
  bool is_concrete(const search::NodePtr& node) const override;
  search::NodePtr midpoint_witness(const search::NodePtr& node) const override;
  double concrete_objective(const search::NodePtr& node) const override;
  objectives::OutcomeSet concrete_outcomes(const search::NodePtr& node) const override;
  std::string describe(const search::NodePtr& node) const override;
  std::size_t dataset_size() const override { return data_.examples.size(); }

  const std::vector<RealInterval>& initial_boxes() const { return initial_boxes_; }
  const PredicateLibrary& library() const { return lib_; }
  search::NodePtr wrap(QueryPtr q) const;

 private:
  dataset::Dataset data_;
  objectives::ObjectiveSpec objective_;
  PredicateLibrary lib_;
  SpaceOptions options_;
  ScoreCache cache_;
  std::vector<RealInterval> initial_boxes_;
};

}  // namespace optsyn::quivr

// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Best-first (A*) and breadth-first enumeration over a space of generalized
// partial programs. Each node denotes a set of concrete programs; the space
// supplies an interval-valued abstract objective whose upper endpoint is an
// admissible heuristic. Search certifies an epsilon bracket around the best
// attainable objective value and returns a concrete program achieving the
// certified lower bound.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optsyn/interval.hpp"
#include "optsyn/objectives.hpp"

namespace optsyn::search {

struct ProgramNode {
  virtual ~ProgramNode() = default;
};
using NodePtr = std::shared_ptr<const ProgramNode>;

// A space of generalized partial programs. Requirements:
//   - the concretizations of children(n) collectively cover the
//     concretization of n, which is never empty;
//   - abstract_objective(n) contains the concrete objective of every program
//     n denotes, and is exact (a singleton) on concrete programs;
//   - all operations are pure, so they may be called concurrently.
class Space {
 public:
  virtual ~Space() = default;

  virtual NodePtr root() const = 0;
  virtual std::vector<NodePtr> children(const NodePtr& node) const = 0;
  virtual RealInterval abstract_objective(const NodePtr& node) const = 0;
  virtual bool has_structural_holes(const NodePtr& node) const = 0;
  virtual bool is_concrete(const NodePtr& node) const = 0;
  // Concrete program obtained by fixing every constant box at its midpoint;
  // null while structural holes remain.
  virtual NodePtr midpoint_witness(const NodePtr& node) const = 0;
  virtual double concrete_objective(const NodePtr& node) const = 0;
  // (prediction, label) pairs of a concrete program on the bound dataset;
  // lets callers re-derive the objective value independently of the cache.
  virtual objectives::OutcomeSet concrete_outcomes(const NodePtr& node) const = 0;
  virtual std::string describe(const NodePtr& node) const = 0;
  virtual std::size_t dataset_size() const = 0;
};

enum class Algorithm { AStar, Bfs };

// How the per-node objective lower bound is obtained: the abstract
// interval's lower endpoint, or concrete evaluation of the midpoint
// instantiation when the node has no structural holes (better and cheap).
enum class LowerBoundMode { AbstractEndpoint, MidpointEval };

enum class StopReason { Converged, ExpansionBudget, TimeBudget, SpaceExhausted };
enum class CertificateSource { None, MidpointWitness, AbstractLower };

struct SearchNode {
  NodePtr program;
  double upper = 0.0;
  double lower = 0.0;
  std::uint64_t seq = 0;
  bool witnessed = false;  // lower came from a midpoint evaluation
};

// (max of node lowers, max of node uppers) over a nonempty frontier.
std::pair<double, double> frontier_bounds(std::span<const SearchNode> frontier);

struct Budget {
  double max_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t max_expansions = std::numeric_limits<std::uint64_t>::max();
};

struct SearchOptions {
  Algorithm algorithm = Algorithm::AStar;
  double epsilon = 0.0;
  LowerBoundMode lower_bound = LowerBoundMode::MidpointEval;
  Budget budget;
  int workers = 1;
  // Progress rows are appended at these wall-clock offsets, every
  // `progress_every_expansions` pops (0 = off), and at exit.
  std::vector<double> progress_checkpoints_s;
  std::uint64_t progress_every_expansions = 0;
  std::function<void(const SearchNode&)> on_expand;
  std::function<void(const SearchNode&)> on_push;
};

struct ProgressPoint {
  double time_s = 0.0;
  double best_lower = 0.0;
  double frontier_upper = 0.0;
  std::uint64_t nodes_expanded = 0;
};

struct SynthesisResult {
  std::string best_program;
  NodePtr best_node;  // concrete program node backing best_program
  double certified_lower = -std::numeric_limits<double>::infinity();
  double certified_upper = std::numeric_limits<double>::infinity();
  double epsilon_used = 0.0;
  std::uint64_t nodes_expanded = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  StopReason stop_reason = StopReason::Converged;
  LowerBoundMode lower_bound_mode = LowerBoundMode::MidpointEval;
  CertificateSource certificate_source = CertificateSource::None;
  RealInterval root_bounds = RealInterval(0.0, 0.0);
  bool root_degenerate = false;
  std::vector<ProgressPoint> progress;
};

SynthesisResult synthesize(const Space& space, const SearchOptions& options);
SynthesisResult astar_synthesize(const Space& space, SearchOptions options = {});
SynthesisResult bfs_synthesize(const Space& space, SearchOptions options = {});

// CSV sink: time_s,best_lower,frontier_upper,nodes_expanded.
void write_progress_csv(std::ostream& out, std::span<const ProgressPoint> progress);

const char* to_string(StopReason r);
const char* to_string(Algorithm a);
const char* to_string(LowerBoundMode m);
const char* to_string(CertificateSource s);

}  // namespace optsyn::search

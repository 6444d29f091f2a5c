// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "optsyn/dataset.hpp"
#include "optsyn/objectives.hpp"
#include "optsyn/oracle.hpp"
#include "optsyn/search.hpp"
#include "optsyn/threshold.hpp"

using namespace optsyn;
using search::NodePtr;

namespace {

// The two-frame mouse-distance example: x = (101, 65), labels (f, t).
dataset::Dataset golden_data() {
  dataset::Dataset data;
  data.kind = dataset::TaskKind::Labeling;
  data.feature_dim = 1;
  dataset::Example ex;
  ex.features = {{101.0}, {65.0}};
  ex.step_labels = {false, true};
  data.examples.push_back(ex);
  return data;
}

toy::ThresholdSpace golden_space(int max_depth = 60) {
  return toy::ThresholdSpace(golden_data(), objectives::make_objective("accuracy"),
                             {0.0, 100.0, 0, max_depth});
}

// A finite space over an explicit program set: every node carries the ids it
// denotes, children split the id set in half, the objective of id i is
// values[i]. Bounds are the exact min/max over the denoted set.
struct SetNode final : search::ProgramNode {
  std::vector<int> ids;
  explicit SetNode(std::vector<int> v) : ids(std::move(v)) {}
};

class SetSpace final : public search::Space {
 public:
  explicit SetSpace(std::vector<double> values) : values_(std::move(values)) {}

  NodePtr root() const override {
    std::vector<int> all;
    for (std::size_t i = 0; i < values_.size(); ++i) all.push_back(static_cast<int>(i));
    return std::make_shared<SetNode>(all);
  }

  std::vector<NodePtr> children(const NodePtr& node) const override {
    const auto& ids = static_cast<const SetNode&>(*node).ids;
    if (ids.size() <= 1) return {};
    std::size_t half = ids.size() / 2;
    return {std::make_shared<SetNode>(std::vector<int>(ids.begin(), ids.begin() + half)),
            std::make_shared<SetNode>(std::vector<int>(ids.begin() + half, ids.end()))};
  }

  RealInterval abstract_objective(const NodePtr& node) const override {
    const auto& ids = static_cast<const SetNode&>(*node).ids;
    double lo = values_[static_cast<std::size_t>(ids.front())], hi = lo;
    for (int i : ids) {
      lo = std::min(lo, values_[static_cast<std::size_t>(i)]);
      hi = std::max(hi, values_[static_cast<std::size_t>(i)]);
    }
    return RealInterval(lo, hi);
  }

  bool has_structural_holes(const NodePtr&) const override { return false; }
  bool is_concrete(const NodePtr& node) const override {
    return static_cast<const SetNode&>(*node).ids.size() == 1;
  }

  NodePtr midpoint_witness(const NodePtr& node) const override {
    const auto& ids = static_cast<const SetNode&>(*node).ids;
    return std::make_shared<SetNode>(std::vector<int>{ids[ids.size() / 2]});
  }

  double concrete_objective(const NodePtr& node) const override {
    const auto& ids = static_cast<const SetNode&>(*node).ids;
    REQUIRE(ids.size() == 1);
    return values_[static_cast<std::size_t>(ids.front())];
  }

  objectives::OutcomeSet concrete_outcomes(const NodePtr&) const override { return {}; }

  std::string describe(const NodePtr& node) const override {
    const auto& ids = static_cast<const SetNode&>(*node).ids;
    std::string s = "{";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(ids[i]);
    }
    return s + "}";
  }

  std::size_t dataset_size() const override { return 1; }

 private:
  std::vector<double> values_;
};

}  // namespace

TEST_CASE("golden trace: abstract lower bounds reproduce the two-expansion run") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.lower_bound = search::LowerBoundMode::AbstractEndpoint;
  std::vector<std::string> expanded;
  std::vector<std::pair<std::string, RealInterval>> pushed;
  opt.on_expand = [&](const search::SearchNode& n) { expanded.push_back(space.describe(n.program)); };
  opt.on_push = [&](const search::SearchNode& n) {
    pushed.emplace_back(space.describe(n.program), RealInterval(n.lower, n.upper));
  };
  search::SynthesisResult r = search::astar_synthesize(space, opt);

  CHECK(r.converged);
  CHECK(r.nodes_expanded == 2);
  REQUIRE(expanded.size() == 2);
  CHECK(expanded[0] == "map(d <= [0,100])");
  CHECK(expanded[1] == "map(d <= [50,100])");

  REQUIRE(pushed.size() == 5);
  CHECK(pushed[0] == std::pair<std::string, RealInterval>{"map(d <= [0,100])", {0.5, 1.0}});
  CHECK(pushed[1] == std::pair<std::string, RealInterval>{"map(d <= [0,50])", {0.5, 0.5}});
  CHECK(pushed[2] == std::pair<std::string, RealInterval>{"map(d <= [50,100])", {0.5, 1.0}});
  CHECK(pushed[3] == std::pair<std::string, RealInterval>{"map(d <= [50,75])", {0.5, 1.0}});
  CHECK(pushed[4] == std::pair<std::string, RealInterval>{"map(d <= [75,100])", {1.0, 1.0}});

  CHECK(r.certified_lower == 1.0);
  CHECK(r.certified_upper == 1.0);
  CHECK(r.best_program == "map(d <= 87.5)");
  CHECK(r.certificate_source == search::CertificateSource::AbstractLower);
}

TEST_CASE("midpoint lower bounds certify earlier") {
  auto space = golden_space();
  search::SearchOptions opt;  // midpoint mode is the default
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  CHECK(r.converged);
  CHECK(r.certified_lower == 1.0);
  CHECK(r.certified_upper == 1.0);
  CHECK(r.nodes_expanded <= 2);
  CHECK(r.certificate_source == search::CertificateSource::MidpointWitness);
}

TEST_CASE("concrete root returns immediately") {
  toy::ThresholdSpace space(golden_data(), objectives::make_objective("accuracy"),
                            {75.0, 75.0, 0, 60});
  search::SynthesisResult r = search::astar_synthesize(space, {});
  CHECK(r.converged);
  CHECK(r.nodes_expanded == 0);
  CHECK(r.root_degenerate);
  CHECK(r.best_program == "map(d <= 75)");
  CHECK(r.certified_lower == 1.0);
}

TEST_CASE("zero expansion budget reports root bounds without converging") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.budget.max_expansions = 0;
  search::SynthesisResult r = search::bfs_synthesize(space, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == search::StopReason::ExpansionBudget);
  CHECK(r.nodes_expanded == 0);
  CHECK(r.certified_upper == 1.0);
  CHECK(r.certified_lower == 0.5);  // midpoint of [0,100] labels both frames f
  CHECK(r.root_bounds == RealInterval(0.5, 1.0));
}

TEST_CASE("zero time budget stops immediately") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.budget.max_seconds = 0.0;
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == search::StopReason::TimeBudget);
}

TEST_CASE("bfs certifies the same value with at least as many expansions") {
  auto space = golden_space();
  for (auto mode : {search::LowerBoundMode::AbstractEndpoint, search::LowerBoundMode::MidpointEval}) {
    search::SearchOptions opt;
    opt.lower_bound = mode;
    search::SynthesisResult a = search::astar_synthesize(space, opt);
    search::SynthesisResult b = search::bfs_synthesize(space, opt);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.certified_lower == b.certified_lower);
    CHECK(b.nodes_expanded >= a.nodes_expanded);
  }
}

TEST_CASE("astar value matches the discretized grid oracle") {
  auto space = golden_space();
  search::SynthesisResult r = search::astar_synthesize(space, {});
  oracle::GridResult g = oracle::grid_optimum_threshold(
      golden_data(), objectives::make_objective("accuracy"), 0, {0.0, 100.0, 101});
  CHECK(g.value == 1.0);
  CHECK(g.program == "map(d <= 65)");  // first maximizer in enumeration order
  CHECK(r.certified_lower == g.value);
}

TEST_CASE("frontier_bounds") {
  auto node = [](double lo, double hi) {
    search::SearchNode n;
    n.lower = lo;
    n.upper = hi;
    return n;
  };
  std::vector<search::SearchNode> f1 = {node(0.5, 1.0), node(1.0, 1.0), node(0.5, 0.5)};
  CHECK(search::frontier_bounds(f1) == std::pair<double, double>{1.0, 1.0});
  std::vector<search::SearchNode> f2 = {node(0.0, 1.0)};
  CHECK(search::frontier_bounds(f2) == std::pair<double, double>{0.0, 1.0});
  std::vector<search::SearchNode> f3 = {node(0.2, 0.6), node(0.4, 0.5)};
  CHECK(search::frontier_bounds(f3) == std::pair<double, double>{0.4, 0.6});
  CHECK_THROWS_AS(search::frontier_bounds({}), std::invalid_argument);
}

TEST_CASE("identical runs expand identically") {
  auto space = golden_space();
  auto trace = [&] {
    search::SearchOptions opt;
    std::vector<std::string> seen;
    opt.on_expand = [&](const search::SearchNode& n) {
      seen.push_back(space.describe(n.program) + "#" + std::to_string(n.seq));
    };
    search::astar_synthesize(space, opt);
    return seen;
  };
  CHECK(trace() == trace());
}

TEST_CASE("worker pool does not change the result") {
  auto space = golden_space();
  search::SearchOptions opt;
  search::SynthesisResult a = search::astar_synthesize(space, opt);
  opt.workers = 4;
  search::SynthesisResult b = search::astar_synthesize(space, opt);
  CHECK(a.best_program == b.best_program);
  CHECK(a.nodes_expanded == b.nodes_expanded);
  CHECK(a.certified_lower == b.certified_lower);
}

TEST_CASE("astar pops by upper bound with lower-bound and FIFO tie-breaks") {
  // children of the root: {0,1} bounds [0.3,0.9], {2,3} bounds [0.1,0.9];
  // equal uppers, so the larger lower bound goes first
  SetSpace space({0.3, 0.9, 0.1, 0.9});
  search::SearchOptions opt;
  opt.lower_bound = search::LowerBoundMode::AbstractEndpoint;
  std::vector<std::string> expanded;
  opt.on_expand = [&](const search::SearchNode& n) { expanded.push_back(space.describe(n.program)); };
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  CHECK(r.converged);
  CHECK(r.certified_lower == 0.9);
  REQUIRE(expanded.size() >= 2);
  CHECK(expanded[0] == "{0,1,2,3}");
  CHECK(expanded[1] == "{0,1}");

  // equal uppers and lowers: insertion order decides
  SetSpace tie({0.1, 0.5, 0.1, 0.5});
  std::vector<std::string> order;
  search::SearchOptions opt2;
  opt2.lower_bound = search::LowerBoundMode::AbstractEndpoint;
  opt2.on_expand = [&](const search::SearchNode& n) { order.push_back(tie.describe(n.program)); };
  search::SynthesisResult r2 = search::astar_synthesize(tie, opt2);
  CHECK(r2.converged);
  REQUIRE(order.size() >= 2);
  CHECK(order[0] == "{0,1,2,3}");
  CHECK(order[1] == "{0,1}");
}

TEST_CASE("coverage invariant: the frontier always covers the root") {
  SetSpace space({0.4, 0.1, 0.8, 0.2, 0.3, 0.7, 0.05, 0.6});
  search::SearchOptions opt;
  opt.lower_bound = search::LowerBoundMode::AbstractEndpoint;
  opt.epsilon = 0.0;

  // Mirror the frontier through the hooks: a popped node leaves the frontier
  // only if it has children (the engine freezes childless leaves).
  std::map<const search::ProgramNode*, std::vector<int>> frontier;
  auto union_size_check = [&] {
    std::set<int> u;
    for (const auto& [_, ids] : frontier) u.insert(ids.begin(), ids.end());
    CHECK(u.size() == 8);
  };
  opt.on_push = [&](const search::SearchNode& n) {
    frontier[n.program.get()] = static_cast<const SetNode&>(*n.program).ids;
  };
  opt.on_expand = [&](const search::SearchNode& n) {
    union_size_check();  // boundary before this expansion completes
    if (!space.children(n.program).empty()) frontier.erase(n.program.get());
  };
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  CHECK(r.converged);
  union_size_check();
  CHECK(r.certified_lower == 0.8);
}

TEST_CASE("anytime progress rows are sound and monotone") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.lower_bound = search::LowerBoundMode::AbstractEndpoint;
  opt.progress_every_expansions = 1;
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  REQUIRE(!r.progress.empty());
  double prev = -1.0;
  for (const auto& p : r.progress) {
    CHECK(p.best_lower >= prev);
    prev = p.best_lower;
    CHECK(p.frontier_upper >= 1.0);  // the optimum is 1.0; the bound never dips below it
    CHECK(p.best_lower <= p.frontier_upper);
  }
}

TEST_CASE("epsilon relaxes the certificate") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.epsilon = 0.5;
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  CHECK(r.converged);
  CHECK(r.nodes_expanded == 0);
  CHECK(r.certified_upper - r.certified_lower <= 0.5);
  CHECK(r.epsilon_used == 0.5);
}

TEST_CASE("split depth exhaustion returns an honest non-certificate") {
  dataset::Dataset data;
  data.kind = dataset::TaskKind::Labeling;
  data.feature_dim = 1;
  dataset::Example ex;
  ex.features = {{0.0}, {1e-9}};
  ex.step_labels = {true, false};
  data.examples.push_back(ex);
  toy::ThresholdSpace space(data, objectives::make_objective("accuracy"), {0.0, 100.0, 0, 3});
  search::SynthesisResult r = search::astar_synthesize(space, {});
  CHECK_FALSE(r.converged);
  CHECK(r.stop_reason == search::StopReason::SpaceExhausted);
  CHECK(r.certified_upper == 1.0);
  CHECK(r.certified_lower == 0.5);
}

TEST_CASE("progress CSV shape") {
  auto space = golden_space();
  search::SearchOptions opt;
  opt.progress_every_expansions = 1;
  search::SynthesisResult r = search::astar_synthesize(space, opt);
  std::ostringstream out;
  search::write_progress_csv(out, r.progress);
  std::string csv = out.str();
  CHECK(csv.rfind("time_s,best_lower,frontier_upper,nodes_expanded\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(r.progress.size()) + 1);
}

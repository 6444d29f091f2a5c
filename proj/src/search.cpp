// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/search.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <future>
#include <ostream>
#include <set>
#include <stdexcept>

namespace optsyn::search {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Pop order: greatest upper bound, then greatest lower bound, then FIFO.
bool heap_less(const SearchNode& a, const SearchNode& b) {
  if (a.upper != b.upper) return a.upper < b.upper;
  if (a.lower != b.lower) return a.lower < b.lower;
  return a.seq > b.seq;
}

struct NodeEval {
  RealInterval bounds = RealInterval(0.0, 0.0);
  NodePtr witness;       // midpoint instantiation, when evaluated
  double witness_value = 0.0;
};

class Engine {
 public:
  Engine(const Space& space, const SearchOptions& opt) : space_(space), opt_(opt) {}

  SynthesisResult run() {
    start_ = Clock::now();
    checkpoints_ = opt_.progress_checkpoints_s;
    std::sort(checkpoints_.begin(), checkpoints_.end());

    SynthesisResult result;
    result.epsilon_used = opt_.epsilon;
    result.lower_bound_mode = opt_.lower_bound;

    if (space_.dataset_size() == 0) {
      throw std::invalid_argument("synthesize: empty dataset");
    }

    NodePtr root = space_.root();
    push_node(root, evaluate(root));
    result.root_bounds = RealInterval(frontier_.front().lower, frontier_.front().upper);
    result.root_degenerate =
        result.root_bounds.hi() - result.root_bounds.lo() <= opt_.epsilon;

    StopReason reason = StopReason::SpaceExhausted;
    while (!frontier_empty()) {
      maybe_log_time_progress();

      auto [gl, gu] = current_bounds();
      if (gu - gl <= opt_.epsilon) {
        reason = StopReason::Converged;
        break;
      }
      if (expansions_ >= opt_.budget.max_expansions) {
        reason = StopReason::ExpansionBudget;
        break;
      }
      if (seconds_since(start_) >= opt_.budget.max_seconds) {
        reason = StopReason::TimeBudget;
        break;
      }

      SearchNode node = pop_best();
      ++expansions_;
      if (opt_.on_expand) opt_.on_expand(node);
      if (opt_.progress_every_expansions != 0 &&
          expansions_ % opt_.progress_every_expansions == 0) {
        log_progress();
      }

      std::vector<NodePtr> kids = space_.children(node.program);
      if (kids.empty()) {
        // Leaf (concrete program or depth-capped box): keep it in the
        // frontier bounds, it just cannot be refined further.
        frozen_.push_back(node);
        continue;
      }
      remove_bounds(node);
      push_children(kids);
    }

    finalize(result, reason);
    return result;
  }

 private:
  bool frontier_empty() const {
    if (opt_.algorithm == Algorithm::AStar) return frontier_.empty();
    return bfs_head_ >= frontier_.size();
  }

  std::pair<double, double> current_bounds() const {
    double gu = *uppers_.rbegin();
    double gl = *lowers_.rbegin();
    if (has_best_witness_) gl = std::max(gl, best_witness_value_);
    return {gl, gu};
  }

  NodeEval evaluate(const NodePtr& p) const {
    NodeEval ev;
    ev.bounds = space_.abstract_objective(p);
    if (opt_.lower_bound == LowerBoundMode::MidpointEval) {
      ev.witness = space_.midpoint_witness(p);
      if (ev.witness) ev.witness_value = space_.concrete_objective(ev.witness);
    }
    return ev;
  }

  void push_node(const NodePtr& p, const NodeEval& ev) {
    SearchNode node;
    node.program = p;
    node.upper = ev.bounds.hi();
    node.seq = next_seq_++;
    if (ev.witness) {
      node.witnessed = true;
      node.lower = std::min(ev.witness_value, node.upper);
      if (!has_best_witness_ || ev.witness_value > best_witness_value_) {
        has_best_witness_ = true;
        best_witness_value_ = ev.witness_value;
        best_witness_ = ev.witness;
      }
    } else {
      node.lower = ev.bounds.lo();
    }
    uppers_.insert(node.upper);
    lowers_.insert(node.lower);
    if (opt_.on_push) opt_.on_push(node);
    if (opt_.algorithm == Algorithm::AStar) {
      frontier_.push_back(node);
      std::push_heap(frontier_.begin(), frontier_.end(), heap_less);
    } else {
      frontier_.push_back(node);  // FIFO: pop from the front
    }
  }

  void push_children(const std::vector<NodePtr>& kids) {
    std::vector<NodeEval> evals(kids.size());
    int workers = std::max(1, opt_.workers);
    if (workers > 1 && kids.size() > 1) {
      std::vector<std::future<void>> tasks;
      std::size_t stride = static_cast<std::size_t>(workers);
      for (std::size_t w = 0; w < stride; ++w) {
        tasks.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t i = w; i < kids.size(); i += stride) {
            evals[i] = evaluate(kids[i]);
          }
        }));
      }
      for (auto& t : tasks) t.get();
    } else {
      for (std::size_t i = 0; i < kids.size(); ++i) evals[i] = evaluate(kids[i]);
    }
    // Merge in child order so runs are reproducible regardless of workers.
    for (std::size_t i = 0; i < kids.size(); ++i) push_node(kids[i], evals[i]);
  }

  SearchNode pop_best() {
    if (opt_.algorithm == Algorithm::AStar) {
      std::pop_heap(frontier_.begin(), frontier_.end(), heap_less);
      SearchNode node = frontier_.back();
      frontier_.pop_back();
      return node;
    }
    return frontier_[bfs_head_++];
  }

  void remove_bounds(const SearchNode& node) {
    uppers_.erase(uppers_.find(node.upper));
    lowers_.erase(lowers_.find(node.lower));
  }

  void log_progress() {
    auto [gl, gu] = current_bounds();
    logged_best_lower_ = std::max(logged_best_lower_, gl);
    progress_.push_back({seconds_since(start_), logged_best_lower_, gu, expansions_});
  }

  void maybe_log_time_progress() {
    double t = seconds_since(start_);
    while (next_checkpoint_ < checkpoints_.size() && checkpoints_[next_checkpoint_] <= t) {
      log_progress();
      ++next_checkpoint_;
    }
  }

  // Deterministic argmax-lower frontier node (largest lower bound; prefer a
  // midpoint-witnessed node, then the oldest).
  const SearchNode* certificate_node() const {
    const SearchNode* best = nullptr;
    auto consider = [&](const SearchNode& n) {
      if (!best || n.lower > best->lower ||
          (n.lower == best->lower && (n.witnessed > best->witnessed ||
                                      (n.witnessed == best->witnessed && n.seq < best->seq)))) {
        best = &n;
      }
    };
    std::size_t begin = opt_.algorithm == Algorithm::AStar ? 0 : bfs_head_;
    for (std::size_t i = begin; i < frontier_.size(); ++i) consider(frontier_[i]);
    for (const auto& n : frozen_) consider(n);
    return best;
  }

  // Walk down from a node with structural holes until a midpoint witness
  // exists. Every program denoted by the starting node scores at least its
  // lower bound, so any completion certifies it.
  NodePtr resolve_witness(NodePtr node) const {
    for (int guard = 0; guard < 4096; ++guard) {
      NodePtr w = space_.midpoint_witness(node);
      if (w) return w;
      std::vector<NodePtr> kids = space_.children(node);
      if (kids.empty()) {
        throw std::logic_error("node without witness has no children");
      }
      NodePtr pick = kids.front();
      double pick_upper = space_.abstract_objective(pick).hi();
      for (std::size_t i = 1; i < kids.size(); ++i) {
        double u = space_.abstract_objective(kids[i]).hi();
        if (u > pick_upper) {
          pick = kids[i];
          pick_upper = u;
        }
      }
      node = pick;
    }
    throw std::logic_error("witness resolution did not terminate");
  }

  void finalize(SynthesisResult& result, StopReason reason) {
    double gl = -std::numeric_limits<double>::infinity();
    double gu = std::numeric_limits<double>::infinity();
    if (!uppers_.empty()) {
      auto [l, u] = current_bounds();
      gl = l;
      gu = u;
    }
    result.converged = reason == StopReason::Converged ||
                       (reason == StopReason::SpaceExhausted && gu - gl <= opt_.epsilon);
    result.stop_reason = result.converged ? StopReason::Converged : reason;
    result.nodes_expanded = expansions_;
    result.certified_upper = gu;

    const SearchNode* cert = certificate_node();
    NodePtr witness;
    CertificateSource source = CertificateSource::None;
    if (cert) {
      witness = cert->witnessed ? space_.midpoint_witness(cert->program)
                                : resolve_witness(cert->program);
      source = cert->witnessed ? CertificateSource::MidpointWitness
                               : CertificateSource::AbstractLower;
    }
    double witness_value =
        witness ? space_.concrete_objective(witness) : -std::numeric_limits<double>::infinity();
    if (has_best_witness_ && best_witness_value_ > witness_value) {
      witness = best_witness_;
      witness_value = space_.concrete_objective(best_witness_);  // recomputed, not cached
      source = CertificateSource::MidpointWitness;
    }
    if (witness) {
      result.best_node = witness;
      result.best_program = space_.describe(witness);
      result.certified_lower = witness_value;
      result.certificate_source = source;
    } else {
      result.certified_lower = gl;
    }
    log_progress();
    result.progress = std::move(progress_);
    result.wall_time_s = seconds_since(start_);
  }

  const Space& space_;
  const SearchOptions& opt_;
  Clock::time_point start_;

  std::vector<SearchNode> frontier_;  // heap (A*) or FIFO tail from bfs_head_ (BFS)
  std::size_t bfs_head_ = 0;
  std::vector<SearchNode> frozen_;    // popped leaves, still part of the bounds
  std::multiset<double> uppers_;
  std::multiset<double> lowers_;

  std::uint64_t next_seq_ = 0;
  std::uint64_t expansions_ = 0;
  bool has_best_witness_ = false;
  double best_witness_value_ = 0.0;
  NodePtr best_witness_;

  std::vector<double> checkpoints_;
  std::size_t next_checkpoint_ = 0;
  double logged_best_lower_ = -std::numeric_limits<double>::infinity();
  std::vector<ProgressPoint> progress_;
};

}  // namespace

std::pair<double, double> frontier_bounds(std::span<const SearchNode> frontier) {
  if (frontier.empty()) throw std::invalid_argument("frontier_bounds: empty frontier");
  double gl = frontier[0].lower, gu = frontier[0].upper;
  for (const auto& n : frontier) {
    gl = std::max(gl, n.lower);
    gu = std::max(gu, n.upper);
  }
  return {gl, gu};
}

SynthesisResult synthesize(const Space& space, const SearchOptions& options) {
  Engine engine(space, options);
  return engine.run();
}

SynthesisResult astar_synthesize(const Space& space, SearchOptions options) {
  options.algorithm = Algorithm::AStar;
  return synthesize(space, options);
}

SynthesisResult bfs_synthesize(const Space& space, SearchOptions options) {
  options.algorithm = Algorithm::Bfs;
  return synthesize(space, options);
}

void write_progress_csv(std::ostream& out, std::span<const ProgressPoint> progress) {
  out << "time_s,best_lower,frontier_upper,nodes_expanded\n";
  for (const auto& p : progress) {
    out << format_number(p.time_s) << "," << format_number(p.best_lower) << ","
        << format_number(p.frontier_upper) << "," << p.nodes_expanded << "\n";
  }
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::ExpansionBudget: return "expansion_budget";
    case StopReason::TimeBudget: return "time_budget";
    case StopReason::SpaceExhausted: return "space_exhausted";
  }
  return "unknown";
}

const char* to_string(Algorithm a) {
  return a == Algorithm::AStar ? "astar" : "bfs";
}

const char* to_string(LowerBoundMode m) {
  return m == LowerBoundMode::MidpointEval ? "midpoint" : "abstract";
}

const char* to_string(CertificateSource s) {
  switch (s) {
    case CertificateSource::None: return "none";
    case CertificateSource::MidpointWitness: return "midpoint_witness";
    case CertificateSource::AbstractLower: return "abstract_lower";
  }
  return "unknown";
}

}  // namespace optsyn::search

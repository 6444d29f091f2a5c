// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/quivr.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <stdexcept>

namespace optsyn::quivr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void PredicateLibrary::add_pred0(std::string name, Segment0Fn fn) {
  pred0s_.push_back({std::move(name), std::move(fn)});
}

void PredicateLibrary::add_predc(std::string name, ScoreFn fn) {
  predcs_.push_back({std::move(name), std::move(fn)});
}

PredicateLibrary PredicateLibrary::standard(int n_features) {
  PredicateLibrary lib;
  lib.add_pred0("true", [](const Trajectory&, std::size_t, std::size_t) { return true; });
  for (int j = 0; j < n_features; ++j) {
    auto jj = static_cast<std::size_t>(j);
    lib.add_predc("max" + std::to_string(j),
                  [jj](const Trajectory& x, std::size_t i, std::size_t k) {
                    double m = -kInf;
                    for (std::size_t t = i; t < k; ++t) m = std::max(m, x[t][jj]);
                    return m;
                  });
    lib.add_predc("min" + std::to_string(j),
                  [jj](const Trajectory& x, std::size_t i, std::size_t k) {
                    double m = kInf;
                    for (std::size_t t = i; t < k; ++t) m = std::min(m, x[t][jj]);
                    return m;
                  });
    lib.add_predc("avg" + std::to_string(j),
                  [jj](const Trajectory& x, std::size_t i, std::size_t k) {
                    if (i == k) return -kInf;
                    double s = 0.0;
                    for (std::size_t t = i; t < k; ++t) s += x[t][jj];
                    return s / static_cast<double>(k - i);
                  });
  }
  return lib;
}

int PredicateLibrary::find_pred0(const std::string& name) const {
  for (std::size_t i = 0; i < pred0s_.size(); ++i) {
    if (pred0s_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int PredicateLibrary::find_predc(const std::string& name) const {
  for (std::size_t i = 0; i < predcs_.size(); ++i) {
    if (predcs_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

double predicate_score(const PredicateLibrary& lib, const std::string& name,
                       const Trajectory& traj, std::size_t begin, std::size_t end) {
  int idx = lib.find_predc(name);
  if (idx < 0) throw std::invalid_argument("unknown score predicate: " + name);
  return lib.predcs()[static_cast<std::size_t>(idx)].fn(traj, begin, end);
}

double predicate_score(const PredicateLibrary& lib, const std::string& name,
                       const Trajectory& traj) {
  return predicate_score(lib, name, traj, 0, traj.size());
}

QueryPtr make_pred0(int index) {
  auto q = std::make_shared<Query>();
  q->kind = Query::Kind::Pred0;
  q->pred = index;
  return q;
}

QueryPtr make_predc(int index, RealInterval box, int splits) {
  auto q = std::make_shared<Query>();
  q->kind = Query::Kind::PredC;
  q->pred = index;
  q->box = box;
  q->splits = splits;
  return q;
}

QueryPtr make_seq(QueryPtr l, QueryPtr r) {
  auto q = std::make_shared<Query>();
  q->kind = Query::Kind::Seq;
  q->left = std::move(l);
  q->right = std::move(r);
  return q;
}

QueryPtr make_and(QueryPtr l, QueryPtr r) {
  auto q = std::make_shared<Query>();
  q->kind = Query::Kind::And;
  q->left = std::move(l);
  q->right = std::move(r);
  return q;
}

QueryPtr make_hole() { return std::make_shared<Query>(); }

int count_predicates(const Query& q) {
  switch (q.kind) {
    case Query::Kind::Pred0:
    case Query::Kind::PredC:
    case Query::Kind::Hole:
      return 1;
    case Query::Kind::Seq:
    case Query::Kind::And:
      return count_predicates(*q.left) + count_predicates(*q.right);
  }
  return 1;
}

int count_param_predicates(const Query& q) {
  switch (q.kind) {
    case Query::Kind::PredC:
      return 1;
    case Query::Kind::Seq:
    case Query::Kind::And:
      return count_param_predicates(*q.left) + count_param_predicates(*q.right);
    default:
      return 0;
  }
}

bool has_structural_holes(const Query& q) {
  switch (q.kind) {
    case Query::Kind::Hole:
      return true;
    case Query::Kind::Seq:
    case Query::Kind::And:
      return has_structural_holes(*q.left) || has_structural_holes(*q.right);
    default:
      return false;
  }
}

bool is_concrete(const Query& q) {
  switch (q.kind) {
    case Query::Kind::Hole:
      return false;
    case Query::Kind::Pred0:
      return true;
    case Query::Kind::PredC:
      return q.box.is_singleton();
    case Query::Kind::Seq:
    case Query::Kind::And:
      return is_concrete(*q.left) && is_concrete(*q.right);
  }
  return false;
}

// ---- evaluation ---------------------------------------------------------------

namespace {

using ScoreSource = std::function<double(int pred, std::size_t i, std::size_t j)>;

// Triangular table over 0 <= i <= j <= n.
template <typename V>
struct SegTable {
  std::size_t n = 0;
  std::vector<V> cells;

  SegTable(std::size_t n_, V init) : n(n_), cells((n_ + 1) * (n_ + 1), init) {}
  V& at(std::size_t i, std::size_t j) { return cells[i * (n + 1) + j]; }
  const V& at(std::size_t i, std::size_t j) const { return cells[i * (n + 1) + j]; }
};

// Shared driver for the concrete and abstract dynamic programs; the
// per-predicate leaf evaluation differs, everything else is the same shape.
template <typename V, typename LeafPred0, typename LeafPredC, typename AndFn, typename OrFn>
SegTable<V> run_dp(const Query& q, std::size_t n, V bottom, V unknown, LeafPred0 leaf0,
                   LeafPredC leafc, AndFn and_fn, OrFn or_fn, bool allow_holes) {
  switch (q.kind) {
    case Query::Kind::Pred0: {
      SegTable<V> t(n, bottom);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) t.at(i, j) = leaf0(q, i, j);
      }
      return t;
    }
    case Query::Kind::PredC: {
      SegTable<V> t(n, bottom);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) t.at(i, j) = leafc(q, i, j);
      }
      return t;
    }
    case Query::Kind::And: {
      SegTable<V> l = run_dp(*q.left, n, bottom, unknown, leaf0, leafc, and_fn, or_fn, allow_holes);
      SegTable<V> r = run_dp(*q.right, n, bottom, unknown, leaf0, leafc, and_fn, or_fn, allow_holes);
      SegTable<V> t(n, bottom);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) t.at(i, j) = and_fn(l.at(i, j), r.at(i, j));
      }
      return t;
    }
    case Query::Kind::Seq: {
      SegTable<V> l = run_dp(*q.left, n, bottom, unknown, leaf0, leafc, and_fn, or_fn, allow_holes);
      SegTable<V> r = run_dp(*q.right, n, bottom, unknown, leaf0, leafc, and_fn, or_fn, allow_holes);
      SegTable<V> t(n, bottom);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) {
          V acc = bottom;
          for (std::size_t k = i; k <= j; ++k) {
            acc = or_fn(acc, and_fn(l.at(i, k), r.at(k, j)));
          }
          t.at(i, j) = acc;
        }
      }
      return t;
    }
    case Query::Kind::Hole: {
      if (!allow_holes) throw std::invalid_argument("query is not concrete");
      SegTable<V> t(n, unknown);
      return t;
    }
  }
  throw std::logic_error("unreachable query kind");
}

bool eval_with_scores(const PredicateLibrary& lib, const Query& q, const Trajectory& x,
                      const ScoreSource& score) {
  std::size_t n = x.size();
  auto leaf0 = [&](const Query& node, std::size_t i, std::size_t j) -> char {
    return lib.pred0s()[static_cast<std::size_t>(node.pred)].fn(x, i, j);
  };
  auto leafc = [&](const Query& node, std::size_t i, std::size_t j) -> char {
    if (!node.box.is_singleton()) throw std::invalid_argument("query is not concrete");
    return score(node.pred, i, j) >= node.box.lo();
  };
  SegTable<char> t = run_dp<char>(
      q, n, 0, 1, leaf0, leafc, [](char a, char b) -> char { return a && b; },
      [](char a, char b) -> char { return a || b; }, false);
  return t.at(0, n);
}

BoolInterval abs_eval_with_scores(const PredicateLibrary& lib, const Query& q,
                                  const Trajectory& x, const ScoreSource& score) {
  std::size_t n = x.size();
  BoolInterval bottom(false, false);
  BoolInterval unknown(false, true);
  auto leaf0 = [&](const Query& node, std::size_t i, std::size_t j) {
    return BoolInterval::singleton(lib.pred0s()[static_cast<std::size_t>(node.pred)].fn(x, i, j));
  };
  auto leafc = [&](const Query& node, std::size_t i, std::size_t j) {
    return threshold_geq(score(node.pred, i, j), node.box);
  };
  SegTable<BoolInterval> t = run_dp<BoolInterval>(
      q, n, bottom, unknown, leaf0, leafc,
      [](const BoolInterval& a, const BoolInterval& b) { return bool_and(a, b); },
      [](const BoolInterval& a, const BoolInterval& b) { return bool_or(a, b); }, true);
  return t.at(0, n);
}

ScoreSource direct_scores(const PredicateLibrary& lib, const Trajectory& x) {
  return [&lib, &x](int pred, std::size_t i, std::size_t j) {
    return lib.predcs()[static_cast<std::size_t>(pred)].fn(x, i, j);
  };
}

}  // namespace

bool eval_query(const PredicateLibrary& lib, const Query& q, const Trajectory& x) {
  return eval_with_scores(lib, q, x, direct_scores(lib, x));
}

BoolInterval abs_eval_query(const PredicateLibrary& lib, const Query& q, const Trajectory& x) {
  return abs_eval_with_scores(lib, q, x, direct_scores(lib, x));
}

// ---- children -----------------------------------------------------------------

namespace {

QueryPtr substitute_hole(const QueryPtr& q, bool& done, const QueryPtr& repl) {
  if (done) return q;
  switch (q->kind) {
    case Query::Kind::Hole:
      done = true;
      return repl;
    case Query::Kind::Seq:
    case Query::Kind::And: {
      QueryPtr l = substitute_hole(q->left, done, repl);
      if (done) {
        return q->kind == Query::Kind::Seq ? make_seq(std::move(l), q->right)
                                           : make_and(std::move(l), q->right);
      }
      QueryPtr r = substitute_hole(q->right, done, repl);
      if (done) {
        return q->kind == Query::Kind::Seq ? make_seq(q->left, std::move(r))
                                           : make_and(q->left, std::move(r));
      }
      return q;
    }
    default:
      return q;
  }
}

void collect_param_nodes_rec(const Query& q, std::vector<const Query*>& out) {
  switch (q.kind) {
    case Query::Kind::PredC:
      out.push_back(&q);
      return;
    case Query::Kind::Seq:
    case Query::Kind::And:
      collect_param_nodes_rec(*q.left, out);
      collect_param_nodes_rec(*q.right, out);
      return;
    default:
      return;
  }
}

QueryPtr replace_box_rec(const QueryPtr& q, int& index, const RealInterval& box, int splits) {
  switch (q->kind) {
    case Query::Kind::PredC: {
      if (index-- == 0) return make_predc(q->pred, box, splits);
      return q;
    }
    case Query::Kind::Seq:
    case Query::Kind::And: {
      QueryPtr l = replace_box_rec(q->left, index, box, splits);
      QueryPtr r = replace_box_rec(q->right, index, box, splits);
      if (l == q->left && r == q->right) return q;
      return q->kind == Query::Kind::Seq ? make_seq(std::move(l), std::move(r))
                                         : make_and(std::move(l), std::move(r));
    }
    default:
      return q;
  }
}

}  // namespace

std::vector<const Query*> collect_param_nodes(const Query& q) {
  std::vector<const Query*> out;
  collect_param_nodes_rec(q, out);
  return out;
}

QueryPtr replace_box(const QueryPtr& q, int index, RealInterval box, int splits) {
  int k = index;
  return replace_box_rec(q, k, box, splits);
}

QueryPtr midpoint_instantiation(const QueryPtr& q) {
  QueryPtr out = q;
  std::vector<const Query*> params = collect_param_nodes(*q);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const RealInterval& box = params[i]->box;
    if (box.is_singleton()) continue;
    double mid = box.lo() / 2.0 + box.hi() / 2.0;
    out = replace_box(out, static_cast<int>(i), RealInterval::singleton(mid), params[i]->splits);
  }
  return out;
}

std::vector<QueryPtr> children(const QueryPtr& q, const PredicateLibrary& lib,
                               const std::vector<RealInterval>& initial_boxes,
                               const SpaceOptions& options) {
  std::vector<QueryPtr> out;
  if (has_structural_holes(*q)) {
    int preds = count_predicates(*q);
    int params = count_param_predicates(*q);
    for (std::size_t i = 0; i < lib.pred0s().size(); ++i) {
      bool done = false;
      out.push_back(substitute_hole(q, done, make_pred0(static_cast<int>(i))));
    }
    if (params + 1 <= options.max_param_predicates) {
      for (std::size_t i = 0; i < lib.predcs().size(); ++i) {
        bool done = false;
        out.push_back(substitute_hole(q, done, make_predc(static_cast<int>(i), initial_boxes[i])));
      }
    }
    if (preds + 1 <= options.max_predicates) {
      bool done = false;
      out.push_back(substitute_hole(q, done, make_seq(make_hole(), make_hole())));
      done = false;
      out.push_back(substitute_hole(q, done, make_and(make_hole(), make_hole())));
    }
    return out;
  }
  // No structural holes: split the widest refinable threshold box.
  std::vector<const Query*> params = collect_param_nodes(*q);
  int best = -1;
  double best_width = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->splits >= options.max_split_depth) continue;
    double width = params[i]->box.hi() - params[i]->box.lo();
    if (width > best_width) {
      best_width = width;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) return {};
  const Query* target = params[static_cast<std::size_t>(best)];
  auto [left, right] = split_interval(target->box);
  out.push_back(replace_box(q, best, left, target->splits + 1));
  out.push_back(replace_box(q, best, right, target->splits + 1));
  return out;
}

std::vector<QueryPtr> enumerate_queries(const PredicateLibrary& lib,
                                        const std::vector<RealInterval>& initial_boxes,
                                        const SpaceOptions& options) {
  // exact[k] = query shapes with exactly k predicate slots
  std::vector<std::vector<QueryPtr>> exact(static_cast<std::size_t>(options.max_predicates) + 1);
  for (std::size_t i = 0; i < lib.pred0s().size(); ++i) {
    exact[1].push_back(make_pred0(static_cast<int>(i)));
  }
  if (options.max_param_predicates >= 1) {
    for (std::size_t i = 0; i < lib.predcs().size(); ++i) {
      exact[1].push_back(make_predc(static_cast<int>(i), initial_boxes[i]));
    }
  }
  for (int k = 2; k <= options.max_predicates; ++k) {
    for (int kl = 1; kl < k; ++kl) {
      for (const auto& l : exact[static_cast<std::size_t>(kl)]) {
        for (const auto& r : exact[static_cast<std::size_t>(k - kl)]) {
          if (count_param_predicates(*l) + count_param_predicates(*r) >
              options.max_param_predicates) {
            continue;
          }
          exact[static_cast<std::size_t>(k)].push_back(make_seq(l, r));
          exact[static_cast<std::size_t>(k)].push_back(make_and(l, r));
        }
      }
    }
  }
  std::vector<QueryPtr> out;
  for (const auto& bucket : exact) {
    out.insert(out.end(), bucket.begin(), bucket.end());
  }
  return out;
}

// ---- text form ------------------------------------------------------------------

namespace {

std::string to_text_rec(const PredicateLibrary& lib, const Query& q) {
  switch (q.kind) {
    case Query::Kind::Pred0:
      return lib.pred0s()[static_cast<std::size_t>(q.pred)].name;
    case Query::Kind::PredC:
      return "(" + lib.predcs()[static_cast<std::size_t>(q.pred)].name + " >= " +
             to_string(q.box) + ")";
    case Query::Kind::Seq:
    case Query::Kind::And: {
      auto wrap = [&](const Query& c) {
        std::string t = to_text_rec(lib, c);
        if (c.kind == Query::Kind::Seq || c.kind == Query::Kind::And) return "(" + t + ")";
        return t;
      };
      const char* op = q.kind == Query::Kind::Seq ? " ; " : " & ";
      return wrap(*q.left) + op + wrap(*q.right);
    }
    case Query::Kind::Hole:
      return "?q";
  }
  return "?q";
}

struct QCursor {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool eat_geq() {
    skip_ws();
    if (pos + 1 < s.size() && s[pos] == '>' && s[pos + 1] == '=') {
      pos += 2;
      return true;
    }
    return false;
  }
  std::string word() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
      ++pos;
    }
    if (start == pos) fail("expected an identifier");
    return std::string(s.substr(start, pos - start));
  }
  double number() {
    skip_ws();
    double v = 0.0;
    auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (res.ec != std::errc()) fail("expected a number");
    pos = static_cast<std::size_t>(res.ptr - s.data());
    return v;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("query parse error at position " + std::to_string(pos) + ": " + msg);
  }
};

RealInterval parse_threshold(QCursor& cur) {
  if (cur.eat('[')) {
    double lo = cur.number();
    cur.expect(',');
    double hi = cur.number();
    cur.expect(']');
    return RealInterval(lo, hi);
  }
  return RealInterval::singleton(cur.number());
}

QueryPtr parse_seq_level(QCursor& cur, const PredicateLibrary& lib);

QueryPtr parse_atom_level(QCursor& cur, const PredicateLibrary& lib) {
  if (cur.eat('?')) {
    if (cur.word() != "q") cur.fail("expected ?q");
    return make_hole();
  }
  if (cur.eat('(')) {
    QueryPtr q = parse_seq_level(cur, lib);
    cur.expect(')');
    return q;
  }
  std::string name = cur.word();
  if (cur.eat_geq()) {
    int idx = lib.find_predc(name);
    if (idx < 0) cur.fail("unknown score predicate '" + name + "'");
    return make_predc(idx, parse_threshold(cur));
  }
  int idx0 = lib.find_pred0(name);
  if (idx0 >= 0) return make_pred0(idx0);
  int idxc = lib.find_predc(name);
  if (idxc >= 0) cur.fail("score predicate '" + name + "' needs '>= threshold'");
  cur.fail("unknown predicate '" + name + "'");
}

QueryPtr parse_conj_level(QCursor& cur, const PredicateLibrary& lib) {
  QueryPtr q = parse_atom_level(cur, lib);
  while (cur.eat('&')) q = make_and(q, parse_atom_level(cur, lib));
  return q;
}

QueryPtr parse_seq_level(QCursor& cur, const PredicateLibrary& lib) {
  QueryPtr q = parse_conj_level(cur, lib);
  while (cur.eat(';')) q = make_seq(q, parse_conj_level(cur, lib));
  return q;
}

}  // namespace

std::string to_text(const PredicateLibrary& lib, const Query& q) {
  return to_text_rec(lib, q);
}

QueryPtr parse_query(const std::string& text, const PredicateLibrary& lib) {
  QCursor cur{text};
  QueryPtr q = parse_seq_level(cur, lib);
  if (!cur.at_end()) cur.fail("trailing input");
  return q;
}

// ---- score cache ----------------------------------------------------------------

ScoreCache::ScoreCache(const PredicateLibrary& lib, const dataset::Dataset& data) {
  tables_.resize(lib.predcs().size());
  for (const auto& ex : data.examples) lengths_.push_back(ex.features.size());
  for (std::size_t p = 0; p < lib.predcs().size(); ++p) {
    tables_[p].resize(data.examples.size());
    for (std::size_t e = 0; e < data.examples.size(); ++e) {
      const Trajectory& x = data.examples[e].features;
      std::size_t n = x.size();
      tables_[p][e].assign((n + 1) * (n + 1), 0.0);
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) {
          tables_[p][e][i * (n + 1) + j] = lib.predcs()[p].fn(x, i, j);
        }
      }
    }
  }
}

double ScoreCache::score(int pred, std::size_t example, std::size_t i, std::size_t j) const {
  std::size_t n = lengths_[example];
  return tables_[static_cast<std::size_t>(pred)][example][i * (n + 1) + j];
}

std::vector<double> ScoreCache::realized_scores(int pred) const {
  std::vector<double> out;
  for (std::size_t e = 0; e < lengths_.size(); ++e) {
    std::size_t n = lengths_[e];
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = i + 1; j <= n; ++j) {
        out.push_back(score(pred, e, i, j));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- search space binding ---------------------------------------------------------

namespace {

const QuivrNode& as_quivr(const search::NodePtr& p) {
  return dynamic_cast<const QuivrNode&>(*p);
}

}  // namespace

QuivrSpace::QuivrSpace(dataset::Dataset data, objectives::ObjectiveSpec objective,
                       PredicateLibrary lib, SpaceOptions options)
    : data_(std::move(data)),
      objective_(std::move(objective)),
      lib_(std::move(lib)),
      options_(options),
      cache_(lib_, data_) {
  if (data_.kind != dataset::TaskKind::Query) {
    throw std::invalid_argument("QuivrSpace expects a query dataset");
  }
  if (data_.examples.empty()) throw std::invalid_argument("QuivrSpace: empty dataset");
  if (options_.max_predicates < 1) {
    throw std::invalid_argument("QuivrSpace: predicate bound too small");
  }
  for (std::size_t p = 0; p < lib_.predcs().size(); ++p) {
    std::vector<double> scores = cache_.realized_scores(static_cast<int>(p));
    double lo = scores.empty() ? 0.0 : scores.front();
    double hi = scores.empty() ? 0.0 : scores.back();
    initial_boxes_.push_back(
        RealInterval(lo - options_.range_padding, hi + options_.range_padding));
  }
}

search::NodePtr QuivrSpace::wrap(QueryPtr q) const {
  return std::make_shared<QuivrNode>(std::move(q));
}

search::NodePtr QuivrSpace::root() const { return wrap(make_hole()); }

std::vector<search::NodePtr> QuivrSpace::children(const search::NodePtr& node) const {
  std::vector<search::NodePtr> out;
  for (auto& kid : quivr::children(as_quivr(node).query, lib_, initial_boxes_, options_)) {
    out.push_back(wrap(std::move(kid)));
  }
  return out;
}

RealInterval QuivrSpace::abstract_objective(const search::NodePtr& node) const {
  const QueryPtr& q = as_quivr(node).query;
  objectives::AbstractOutcomeSet outcomes;
  outcomes.reserve(data_.examples.size());
  for (std::size_t e = 0; e < data_.examples.size(); ++e) {
    auto score = [this, e](int pred, std::size_t i, std::size_t j) {
      return cache_.score(pred, e, i, j);
    };
    BoolInterval pred = abs_eval_with_scores(lib_, *q, data_.examples[e].features, score);
    outcomes.emplace_back(pred, data_.examples[e].sequence_label);
  }
  return objective_.abstract(outcomes);
}

bool QuivrSpace::has_structural_holes(const search::NodePtr& node) const {
  return quivr::has_structural_holes(*as_quivr(node).query);
}

bool QuivrSpace::is_concrete(const search::NodePtr& node) const {
  return quivr::is_concrete(*as_quivr(node).query);
}

search::NodePtr QuivrSpace::midpoint_witness(const search::NodePtr& node) const {
  const QueryPtr& q = as_quivr(node).query;
  if (quivr::has_structural_holes(*q)) return nullptr;
  return wrap(midpoint_instantiation(q));
}

objectives::OutcomeSet QuivrSpace::concrete_outcomes(const search::NodePtr& node) const {
  const QueryPtr& q = as_quivr(node).query;
  objectives::OutcomeSet outcomes;
  outcomes.reserve(data_.examples.size());
  for (std::size_t e = 0; e < data_.examples.size(); ++e) {
    auto score = [this, e](int pred, std::size_t i, std::size_t j) {
      return cache_.score(pred, e, i, j);
    };
    bool pred = eval_with_scores(lib_, *q, data_.examples[e].features, score);
    outcomes.push_back({pred, data_.examples[e].sequence_label});
  }
  return outcomes;
}

double QuivrSpace::concrete_objective(const search::NodePtr& node) const {
  return objective_.concrete(concrete_outcomes(node));
}

std::string QuivrSpace::describe(const search::NodePtr& node) const {
  return to_text(lib_, *as_quivr(node).query);
}

}  // namespace optsyn::quivr

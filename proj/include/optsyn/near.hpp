// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory-labeling DSL: list combinators (map / mapprefix / fold / ite)
// whose bodies are polynomials in normalized sum-of-products form over the
// per-step features z1..zn, the fold state zf, and indicator variables
// ind(p) = 1 if p >= 0 else 0. A program maps a trajectory to one real per
// step; labels are the signs (>= 0) of those reals.
//
// Real-valued coefficients are constant holes carrying interval constraints
// (subsets of [-1,1]); the search space refines them by midpoint splitting.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "optsyn/dataset.hpp"
#include "optsyn/interval.hpp"
#include "optsyn/objectives.hpp"
#include "optsyn/search.hpp"

namespace optsyn::near {

using dataset::Trajectory;

struct Poly;

struct Atom {
  enum class Kind : std::uint8_t { Feature, FoldState, Indicator };
  Kind kind = Kind::Feature;
  int feature = 0;  // zero-based; z1 is feature 0
  std::shared_ptr<const Poly> body;

  static Atom make_feature(int i);
  static Atom make_fold_state();
  static Atom make_indicator(Poly body);
};

struct Coeff {
  RealInterval box = RealInterval(-1.0, 1.0);
  int splits = 0;

  bool concrete() const { return box.is_singleton(); }
  double value() const { return box.lo(); }
};

struct Monomial {
  Coeff coeff;
  std::vector<Atom> atoms;  // kept in canonical order
};

struct Poly {
  std::vector<Monomial> monomials;
};

struct LvExpr;
struct LlExpr;
using LvPtr = std::shared_ptr<const LvExpr>;
using LlPtr = std::shared_ptr<const LlExpr>;

struct LvExpr {
  enum class Kind : std::uint8_t { Fold, Ite, Hole };
  Kind kind = Kind::Hole;
  Poly body;                    // Fold
  LvPtr cond, then_br, else_br; // Ite
};

struct LlExpr {
  enum class Kind : std::uint8_t { Map, MapPrefix, Ite, Hole };
  Kind kind = Kind::Hole;
  Poly body;                    // Map
  LvPtr lv;                     // MapPrefix
  LvPtr cond;                   // Ite
  LlPtr then_br, else_br;
};

LlPtr make_map(Poly body);
LlPtr make_mapprefix(LvPtr lv);
LlPtr make_ll_ite(LvPtr cond, LlPtr t, LlPtr e);
LlPtr make_ll_hole();
LvPtr make_fold(Poly body);
LvPtr make_lv_ite(LvPtr cond, LvPtr t, LvPtr e);
LvPtr make_lv_hole();

// Structure-only total order (boxes ignored); drives canonical form.
int compare_atoms(const Atom& a, const Atom& b);
int compare_polys(const Poly& a, const Poly& b);

// ---- concrete semantics ----------------------------------------------------

double eval_vv(const Poly& e, std::span<const double> v, double s);
double eval_lv(const LvExpr& e, const Trajectory& traj);
std::vector<double> eval_ll(const LlExpr& e, const Trajectory& traj);
std::vector<bool> threshold_labels(std::span<const double> r);  // r[t] >= 0

// ---- abstract semantics over constant boxes --------------------------------

RealInterval abs_eval_vv(const Poly& e, std::span<const double> v, const RealInterval& s);
RealInterval abs_eval_lv(const LvExpr& e, const Trajectory& traj);
std::vector<RealInterval> abs_eval_ll(const LlExpr& e, const Trajectory& traj);

// ---- search space ----------------------------------------------------------

// ite / map / mapprefix cost 1, fold costs 0, each monomial costs 1, each
// atom costs 1; an indicator atom additionally pays its body's cost.
// Structural holes count the cheapest completion.
int structural_cost(const Poly& e);
int structural_cost(const LvExpr& e);
int structural_cost(const LlExpr& e);

bool has_structural_holes(const LlExpr& e);
bool is_concrete(const LlExpr& e);  // no holes and all coefficients fixed

struct SpaceOptions {
  int cost_bound = 4;
  int n_features = 1;
  int max_split_depth = 30;
};

// One refinement step: expand the leftmost structural hole by each grammar
// production that still fits the cost bound; otherwise split the widest
// coefficient box (ties to the lowest hole index) at its midpoint.
std::vector<LlPtr> children(const LlPtr& node, const SpaceOptions& options);

// All hole-free program shapes within the cost bound, coefficients left as
// [-1,1] boxes; canonical enumeration order.
std::vector<LlPtr> enumerate_programs(const SpaceOptions& options);
std::vector<Poly> enumerate_polynomials(int max_cost, int n_features);

std::vector<Coeff> collect_coefficients(const LlExpr& e);
LlPtr replace_coefficient(const LlPtr& e, int index, const Coeff& repl);
LlPtr midpoint_instantiation(const LlPtr& e);

// ---- text form -------------------------------------------------------------

std::string to_text(const Poly& e);
std::string to_text(const LvExpr& e);
std::string to_text(const LlExpr& e);
LlPtr parse_program(const std::string& text);

// ---- search::Space binding -------------------------------------------------

struct NearNode final : search::ProgramNode {
  LlPtr expr;
  explicit NearNode(LlPtr e) : expr(std::move(e)) {}
};

class NearSpace final : public search::Space {
 public:
  // Expects features already normalized into [-1,1].
  NearSpace(dataset::Dataset data, objectives::ObjectiveSpec objective, SpaceOptions options);

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

  search::NodePtr wrap(LlPtr expr) const;

 private:
  dataset::Dataset data_;
  objectives::ObjectiveSpec objective_;
  SpaceOptions options_;
};

}  // namespace optsyn::near

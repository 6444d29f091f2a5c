// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/near.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace optsyn::near {

namespace {

constexpr int kMinLvCost = 1;  // fold over a constant monomial
constexpr int kMinLlCost = 2;  // map over a constant monomial

[[noreturn]] void not_concrete() {
  throw std::invalid_argument("expression is not concrete");
}

}  // namespace

Atom Atom::make_feature(int i) {
  Atom a;
  a.kind = Kind::Feature;
  a.feature = i;
  return a;
}

Atom Atom::make_fold_state() {
  Atom a;
  a.kind = Kind::FoldState;
  return a;
}

Atom Atom::make_indicator(Poly body) {
  Atom a;
  a.kind = Kind::Indicator;
  a.body = std::make_shared<const Poly>(std::move(body));
  return a;
}

LlPtr make_map(Poly body) {
  auto e = std::make_shared<LlExpr>();
  e->kind = LlExpr::Kind::Map;
  e->body = std::move(body);
  return e;
}

LlPtr make_mapprefix(LvPtr lv) {
  auto e = std::make_shared<LlExpr>();
  e->kind = LlExpr::Kind::MapPrefix;
  e->lv = std::move(lv);
  return e;
}

LlPtr make_ll_ite(LvPtr cond, LlPtr t, LlPtr e2) {
  auto e = std::make_shared<LlExpr>();
  e->kind = LlExpr::Kind::Ite;
  e->cond = std::move(cond);
  e->then_br = std::move(t);
  e->else_br = std::move(e2);
  return e;
}

LlPtr make_ll_hole() {
  auto e = std::make_shared<LlExpr>();
  e->kind = LlExpr::Kind::Hole;
  return e;
}

LvPtr make_fold(Poly body) {
  auto e = std::make_shared<LvExpr>();
  e->kind = LvExpr::Kind::Fold;
  e->body = std::move(body);
  return e;
}

LvPtr make_lv_ite(LvPtr cond, LvPtr t, LvPtr e2) {
  auto e = std::make_shared<LvExpr>();
  e->kind = LvExpr::Kind::Ite;
  e->cond = std::move(cond);
  e->then_br = std::move(t);
  e->else_br = std::move(e2);
  return e;
}

LvPtr make_lv_hole() {
  auto e = std::make_shared<LvExpr>();
  e->kind = LvExpr::Kind::Hole;
  return e;
}

// ---- canonical order --------------------------------------------------------

int compare_atoms(const Atom& a, const Atom& b) {
  int ra = static_cast<int>(a.kind), rb = static_cast<int>(b.kind);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a.kind == Atom::Kind::Feature) {
    if (a.feature != b.feature) return a.feature < b.feature ? -1 : 1;
    return 0;
  }
  if (a.kind == Atom::Kind::Indicator) return compare_polys(*a.body, *b.body);
  return 0;
}

namespace {

// Constant (atom-less) monomials sort last, like the constant term of a
// polynomial; otherwise lexicographic over atoms.
int compare_monomials(const Monomial& a, const Monomial& b) {
  int ra = a.atoms.empty() ? 1 : 0, rb = b.atoms.empty() ? 1 : 0;
  if (ra != rb) return ra < rb ? -1 : 1;
  std::size_t n = std::min(a.atoms.size(), b.atoms.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_atoms(a.atoms[i], b.atoms[i])) return c;
  }
  if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size() ? -1 : 1;
  return 0;
}

}  // namespace

int compare_polys(const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.monomials.size(), b.monomials.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_monomials(a.monomials[i], b.monomials[i])) return c;
  }
  if (a.monomials.size() != b.monomials.size()) {
    return a.monomials.size() < b.monomials.size() ? -1 : 1;
  }
  return 0;
}

// ---- concrete semantics -----------------------------------------------------

double eval_vv(const Poly& e, std::span<const double> v, double s) {
  double sum = 0.0;
  for (const auto& m : e.monomials) {
    if (!m.coeff.concrete()) not_concrete();
    double prod = m.coeff.value();
    for (const auto& a : m.atoms) {
      switch (a.kind) {
        case Atom::Kind::Feature:
          if (a.feature < 0 || static_cast<std::size_t>(a.feature) >= v.size()) {
            throw std::out_of_range("feature index z" + std::to_string(a.feature + 1) +
                                    " out of range for dimension " + std::to_string(v.size()));
          }
          prod *= v[static_cast<std::size_t>(a.feature)];
          break;
        case Atom::Kind::FoldState:
          prod *= s;
          break;
        case Atom::Kind::Indicator:
          prod *= eval_vv(*a.body, v, s) >= 0.0 ? 1.0 : 0.0;
          break;
      }
    }
    sum += prod;
  }
  return sum;
}

namespace {

double eval_lv_prefix(const LvExpr& e, const Trajectory& traj, std::size_t n) {
  switch (e.kind) {
    case LvExpr::Kind::Fold: {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s = eval_vv(e.body, traj[t], s);
      return s;
    }
    case LvExpr::Kind::Ite:
      return eval_lv_prefix(*e.cond, traj, n) >= 0.0 ? eval_lv_prefix(*e.then_br, traj, n)
                                                     : eval_lv_prefix(*e.else_br, traj, n);
    case LvExpr::Kind::Hole:
      not_concrete();
  }
  not_concrete();
}

}  // namespace

double eval_lv(const LvExpr& e, const Trajectory& traj) {
  return eval_lv_prefix(e, traj, traj.size());
}

std::vector<double> eval_ll(const LlExpr& e, const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  switch (e.kind) {
    case LlExpr::Kind::Map:
      for (const auto& v : traj) out.push_back(eval_vv(e.body, v, 0.0));
      return out;
    case LlExpr::Kind::MapPrefix:
      if (e.lv->kind == LvExpr::Kind::Fold) {
        // fold over prefix t+1 extends the fold over prefix t
        double s = 0.0;
        for (const auto& v : traj) {
          s = eval_vv(e.lv->body, v, s);
          out.push_back(s);
        }
      } else {
        for (std::size_t t = 1; t <= traj.size(); ++t) {
          out.push_back(eval_lv_prefix(*e.lv, traj, t));
        }
      }
      return out;
    case LlExpr::Kind::Ite:
      return eval_lv(*e.cond, traj) >= 0.0 ? eval_ll(*e.then_br, traj)
                                           : eval_ll(*e.else_br, traj);
    case LlExpr::Kind::Hole:
      not_concrete();
  }
  not_concrete();
}

std::vector<bool> threshold_labels(std::span<const double> r) {
  std::vector<bool> labels;
  labels.reserve(r.size());
  for (double v : r) labels.push_back(v >= 0.0);
  return labels;
}

// ---- abstract semantics -----------------------------------------------------

RealInterval abs_eval_vv(const Poly& e, std::span<const double> v, const RealInterval& s) {
  RealInterval sum(0.0, 0.0);
  for (const auto& m : e.monomials) {
    RealInterval prod = m.coeff.box;
    for (const auto& a : m.atoms) {
      switch (a.kind) {
        case Atom::Kind::Feature: {
          if (a.feature < 0 || static_cast<std::size_t>(a.feature) >= v.size()) {
            throw std::out_of_range("feature index z" + std::to_string(a.feature + 1) +
                                    " out of range for dimension " + std::to_string(v.size()));
          }
          double x = v[static_cast<std::size_t>(a.feature)];
          prod = mul(prod, RealInterval::singleton(x));
          break;
        }
        case Atom::Kind::FoldState:
          prod = mul(prod, s);
          break;
        case Atom::Kind::Indicator:
          prod = mul(prod, interval_indicator(geq_zero(abs_eval_vv(*a.body, v, s))));
          break;
      }
    }
    sum = add(sum, prod);
  }
  return sum;
}

namespace {

// ite(c, a, b) through the indicator encoding 1[c>=0]*a + 1[c<0]*b.
RealInterval abs_ite(const BoolInterval& cond, const RealInterval& t, const RealInterval& e) {
  return add(mul(interval_indicator(cond), t),
             mul(interval_indicator(bool_not(cond)), e));
}

RealInterval abs_eval_lv_prefix(const LvExpr& e, const Trajectory& traj, std::size_t n) {
  switch (e.kind) {
    case LvExpr::Kind::Fold: {
      RealInterval s(0.0, 0.0);
      for (std::size_t t = 0; t < n; ++t) s = abs_eval_vv(e.body, traj[t], s);
      return s;
    }
    case LvExpr::Kind::Ite: {
      BoolInterval c = geq_zero(abs_eval_lv_prefix(*e.cond, traj, n));
      return abs_ite(c, abs_eval_lv_prefix(*e.then_br, traj, n),
                     abs_eval_lv_prefix(*e.else_br, traj, n));
    }
    case LvExpr::Kind::Hole:
      return RealInterval::top();
  }
  return RealInterval::top();
}

}  // namespace

RealInterval abs_eval_lv(const LvExpr& e, const Trajectory& traj) {
  return abs_eval_lv_prefix(e, traj, traj.size());
}

std::vector<RealInterval> abs_eval_ll(const LlExpr& e, const Trajectory& traj) {
  std::vector<RealInterval> out;
  out.reserve(traj.size());
  switch (e.kind) {
    case LlExpr::Kind::Map:
      for (const auto& v : traj) out.push_back(abs_eval_vv(e.body, v, RealInterval(0.0, 0.0)));
      return out;
    case LlExpr::Kind::MapPrefix:
      if (e.lv->kind == LvExpr::Kind::Fold) {
        RealInterval s(0.0, 0.0);
        for (const auto& v : traj) {
          s = abs_eval_vv(e.lv->body, v, s);
          out.push_back(s);
        }
      } else {
        for (std::size_t t = 1; t <= traj.size(); ++t) {
          out.push_back(abs_eval_lv_prefix(*e.lv, traj, t));
        }
      }
      return out;
    case LlExpr::Kind::Ite: {
      BoolInterval c = geq_zero(abs_eval_lv(*e.cond, traj));
      std::vector<RealInterval> t = abs_eval_ll(*e.then_br, traj);
      std::vector<RealInterval> f = abs_eval_ll(*e.else_br, traj);
      for (std::size_t i = 0; i < traj.size(); ++i) out.push_back(abs_ite(c, t[i], f[i]));
      return out;
    }
    case LlExpr::Kind::Hole:
      out.assign(traj.size(), RealInterval::top());
      return out;
  }
  return out;
}

// ---- structural cost ----------------------------------------------------------

int structural_cost(const Poly& e) {
  int cost = 0;
  for (const auto& m : e.monomials) {
    cost += 1;
    for (const auto& a : m.atoms) {
      cost += 1;
      if (a.kind == Atom::Kind::Indicator) cost += structural_cost(*a.body);
    }
  }
  return cost;
}

int structural_cost(const LvExpr& e) {
  switch (e.kind) {
    case LvExpr::Kind::Fold:
      return structural_cost(e.body);
    case LvExpr::Kind::Ite:
      return 1 + structural_cost(*e.cond) + structural_cost(*e.then_br) +
             structural_cost(*e.else_br);
    case LvExpr::Kind::Hole:
      return kMinLvCost;
  }
  return kMinLvCost;
}

int structural_cost(const LlExpr& e) {
  switch (e.kind) {
    case LlExpr::Kind::Map:
      return 1 + structural_cost(e.body);
    case LlExpr::Kind::MapPrefix:
      return 1 + structural_cost(*e.lv);
    case LlExpr::Kind::Ite:
      return 1 + structural_cost(*e.cond) + structural_cost(*e.then_br) +
             structural_cost(*e.else_br);
    case LlExpr::Kind::Hole:
      return kMinLlCost;
  }
  return kMinLlCost;
}

// ---- holes and coefficients ---------------------------------------------------

namespace {

bool lv_has_holes(const LvExpr& e) {
  switch (e.kind) {
    case LvExpr::Kind::Fold:
      return false;
    case LvExpr::Kind::Ite:
      return lv_has_holes(*e.cond) || lv_has_holes(*e.then_br) || lv_has_holes(*e.else_br);
    case LvExpr::Kind::Hole:
      return true;
  }
  return false;
}

}  // namespace

bool has_structural_holes(const LlExpr& e) {
  switch (e.kind) {
    case LlExpr::Kind::Map:
      return false;
    case LlExpr::Kind::MapPrefix:
      return lv_has_holes(*e.lv);
    case LlExpr::Kind::Ite:
      return lv_has_holes(*e.cond) || has_structural_holes(*e.then_br) ||
             has_structural_holes(*e.else_br);
    case LlExpr::Kind::Hole:
      return true;
  }
  return true;
}

namespace {

void collect_poly(const Poly& e, std::vector<Coeff>& out) {
  for (const auto& m : e.monomials) {
    out.push_back(m.coeff);
    for (const auto& a : m.atoms) {
      if (a.kind == Atom::Kind::Indicator) collect_poly(*a.body, out);
    }
  }
}

void collect_lv(const LvExpr& e, std::vector<Coeff>& out) {
  switch (e.kind) {
    case LvExpr::Kind::Fold:
      collect_poly(e.body, out);
      return;
    case LvExpr::Kind::Ite:
      collect_lv(*e.cond, out);
      collect_lv(*e.then_br, out);
      collect_lv(*e.else_br, out);
      return;
    case LvExpr::Kind::Hole:
      return;
  }
}

Poly replace_in_poly(const Poly& e, int& index, const Coeff& repl) {
  Poly out;
  for (const auto& m : e.monomials) {
    Monomial nm;
    nm.coeff = index == 0 ? repl : m.coeff;
    --index;
    for (const auto& a : m.atoms) {
      if (a.kind == Atom::Kind::Indicator) {
        Atom na;
        na.kind = Atom::Kind::Indicator;
        na.body = std::make_shared<const Poly>(replace_in_poly(*a.body, index, repl));
        nm.atoms.push_back(std::move(na));
      } else {
        nm.atoms.push_back(a);
      }
    }
    out.monomials.push_back(std::move(nm));
  }
  return out;
}

LvPtr replace_in_lv(const LvPtr& e, int& index, const Coeff& repl) {
  switch (e->kind) {
    case LvExpr::Kind::Fold:
      return make_fold(replace_in_poly(e->body, index, repl));
    case LvExpr::Kind::Ite: {
      LvPtr c = replace_in_lv(e->cond, index, repl);
      LvPtr t = replace_in_lv(e->then_br, index, repl);
      LvPtr f = replace_in_lv(e->else_br, index, repl);
      return make_lv_ite(std::move(c), std::move(t), std::move(f));
    }
    case LvExpr::Kind::Hole:
      return e;
  }
  return e;
}

LlPtr replace_in_ll(const LlPtr& e, int& index, const Coeff& repl) {
  switch (e->kind) {
    case LlExpr::Kind::Map:
      return make_map(replace_in_poly(e->body, index, repl));
    case LlExpr::Kind::MapPrefix:
      return make_mapprefix(replace_in_lv(e->lv, index, repl));
    case LlExpr::Kind::Ite: {
      LvPtr c = replace_in_lv(e->cond, index, repl);
      LlPtr t = replace_in_ll(e->then_br, index, repl);
      LlPtr f = replace_in_ll(e->else_br, index, repl);
      return make_ll_ite(std::move(c), std::move(t), std::move(f));
    }
    case LlExpr::Kind::Hole:
      return e;
  }
  return e;
}

}  // namespace

std::vector<Coeff> collect_coefficients(const LlExpr& e) {
  std::vector<Coeff> out;
  switch (e.kind) {
    case LlExpr::Kind::Map:
      collect_poly(e.body, out);
      break;
    case LlExpr::Kind::MapPrefix:
      collect_lv(*e.lv, out);
      break;
    case LlExpr::Kind::Ite:
      collect_lv(*e.cond, out);
      {
        auto t = collect_coefficients(*e.then_br);
        out.insert(out.end(), t.begin(), t.end());
        auto f = collect_coefficients(*e.else_br);
        out.insert(out.end(), f.begin(), f.end());
      }
      break;
    case LlExpr::Kind::Hole:
      break;
  }
  return out;
}

LlPtr replace_coefficient(const LlPtr& e, int index, const Coeff& repl) {
  int k = index;
  return replace_in_ll(e, k, repl);
}

bool is_concrete(const LlExpr& e) {
  if (has_structural_holes(e)) return false;
  for (const auto& c : collect_coefficients(e)) {
    if (!c.concrete()) return false;
  }
  return true;
}

LlPtr midpoint_instantiation(const LlPtr& e) {
  LlPtr out = e;
  std::vector<Coeff> coeffs = collect_coefficients(*e);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].concrete()) continue;
    double mid = coeffs[i].box.lo() / 2.0 + coeffs[i].box.hi() / 2.0;
    Coeff repl{RealInterval::singleton(mid), coeffs[i].splits};
    out = replace_coefficient(out, static_cast<int>(i), repl);
  }
  return out;
}

// ---- enumeration --------------------------------------------------------------

namespace {

int monomial_cost(const Monomial& m) {
  int cost = 1;
  for (const auto& a : m.atoms) {
    cost += 1;
    if (a.kind == Atom::Kind::Indicator) cost += structural_cost(*a.body);
  }
  return cost;
}

int atom_cost(const Atom& a) {
  return a.kind == Atom::Kind::Indicator ? 1 + structural_cost(*a.body) : 1;
}

std::vector<Atom> atom_alphabet(int max_atom_cost, int n_features) {
  std::vector<Atom> atoms;
  for (int i = 0; i < n_features; ++i) atoms.push_back(Atom::make_feature(i));
  atoms.push_back(Atom::make_fold_state());
  if (max_atom_cost >= 2) {
    for (const auto& body : enumerate_polynomials(max_atom_cost - 1, n_features)) {
      atoms.push_back(Atom::make_indicator(body));
    }
  }
  return atoms;
}

// All monomials of cost <= budget, atoms nondecreasing in canonical order.
void grow_monomials(const std::vector<Atom>& alphabet, std::size_t first, Monomial current,
                    int budget, std::vector<Monomial>& out) {
  out.push_back(current);
  for (std::size_t i = first; i < alphabet.size(); ++i) {
    int cost = atom_cost(alphabet[i]);
    if (cost > budget) continue;
    Monomial next = current;
    next.atoms.push_back(alphabet[i]);
    grow_monomials(alphabet, i, std::move(next), budget - cost, out);
  }
}

void grow_polys(const std::vector<Monomial>& pool, std::size_t first, Poly current, int budget,
                std::vector<Poly>& out) {
  if (!current.monomials.empty()) out.push_back(current);
  for (std::size_t i = first; i < pool.size(); ++i) {
    int cost = monomial_cost(pool[i]);
    if (cost > budget) continue;
    Poly next = current;
    next.monomials.push_back(pool[i]);
    grow_polys(pool, i + 1, std::move(next), budget - cost, out);
  }
}

}  // namespace

std::vector<Poly> enumerate_polynomials(int max_cost, int n_features) {
  if (max_cost < 1) return {};
  std::vector<Atom> alphabet = atom_alphabet(max_cost - 1, n_features);
  std::vector<Monomial> pool;
  grow_monomials(alphabet, 0, Monomial{}, max_cost - 1, pool);
  std::sort(pool.begin(), pool.end(),
            [](const Monomial& a, const Monomial& b) { return compare_monomials(a, b) < 0; });
  std::vector<Poly> out;
  grow_polys(pool, 0, Poly{}, max_cost, out);
  return out;
}

namespace {

struct CostedLv {
  LvPtr expr;
  int cost;
};
struct CostedLl {
  LlPtr expr;
  int cost;
};

std::vector<CostedLv> enumerate_lv_exprs(int budget, int n_features) {
  std::vector<CostedLv> out;
  for (const auto& p : enumerate_polynomials(budget, n_features)) {
    int c = structural_cost(p);
    out.push_back({make_fold(p), c});
  }
  if (budget >= 1 + 3 * kMinLvCost) {
    std::vector<CostedLv> inner = enumerate_lv_exprs(budget - 1 - 2 * kMinLvCost, n_features);
    for (const auto& c : inner) {
      for (const auto& t : enumerate_lv_exprs(budget - 1 - c.cost - kMinLvCost, n_features)) {
        for (const auto& e : enumerate_lv_exprs(budget - 1 - c.cost - t.cost, n_features)) {
          out.push_back({make_lv_ite(c.expr, t.expr, e.expr), 1 + c.cost + t.cost + e.cost});
        }
      }
    }
  }
  return out;
}

std::vector<CostedLl> enumerate_ll_exprs(int budget, int n_features) {
  std::vector<CostedLl> out;
  for (const auto& p : enumerate_polynomials(budget - 1, n_features)) {
    out.push_back({make_map(p), 1 + structural_cost(p)});
  }
  for (const auto& lv : enumerate_lv_exprs(budget - 1, n_features)) {
    out.push_back({make_mapprefix(lv.expr), 1 + lv.cost});
  }
  if (budget >= 1 + kMinLvCost + 2 * kMinLlCost) {
    for (const auto& c : enumerate_lv_exprs(budget - 1 - 2 * kMinLlCost, n_features)) {
      for (const auto& t : enumerate_ll_exprs(budget - 1 - c.cost - kMinLlCost, n_features)) {
        for (const auto& e : enumerate_ll_exprs(budget - 1 - c.cost - t.cost, n_features)) {
          out.push_back({make_ll_ite(c.expr, t.expr, e.expr), 1 + c.cost + t.cost + e.cost});
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<LlPtr> enumerate_programs(const SpaceOptions& options) {
  std::vector<LlPtr> out;
  for (const auto& e : enumerate_ll_exprs(options.cost_bound, options.n_features)) {
    out.push_back(e.expr);
  }
  return out;
}

// ---- children -----------------------------------------------------------------

namespace {

enum class HoleKind { None, Ll, Lv };

HoleKind find_leftmost_hole_lv(const LvExpr& e) {
  switch (e.kind) {
    case LvExpr::Kind::Hole:
      return HoleKind::Lv;
    case LvExpr::Kind::Fold:
      return HoleKind::None;
    case LvExpr::Kind::Ite:
      if (auto k = find_leftmost_hole_lv(*e.cond); k != HoleKind::None) return k;
      if (auto k = find_leftmost_hole_lv(*e.then_br); k != HoleKind::None) return k;
      return find_leftmost_hole_lv(*e.else_br);
  }
  return HoleKind::None;
}

HoleKind find_leftmost_hole_ll(const LlExpr& e) {
  switch (e.kind) {
    case LlExpr::Kind::Hole:
      return HoleKind::Ll;
    case LlExpr::Kind::Map:
      return HoleKind::None;
    case LlExpr::Kind::MapPrefix:
      return find_leftmost_hole_lv(*e.lv);
    case LlExpr::Kind::Ite:
      if (auto k = find_leftmost_hole_lv(*e.cond); k != HoleKind::None) return k;
      if (auto k = find_leftmost_hole_ll(*e.then_br); k != HoleKind::None) return k;
      return find_leftmost_hole_ll(*e.else_br);
  }
  return HoleKind::None;
}

LvPtr substitute_lv(const LvPtr& e, bool& done, const LvPtr& lv_repl);

LlPtr substitute_ll(const LlPtr& e, bool& done, const LlPtr& ll_repl, const LvPtr& lv_repl) {
  if (done) return e;
  switch (e->kind) {
    case LlExpr::Kind::Hole:
      if (ll_repl) {
        done = true;
        return ll_repl;
      }
      return e;
    case LlExpr::Kind::Map:
      return e;
    case LlExpr::Kind::MapPrefix: {
      LvPtr lv = substitute_lv(e->lv, done, lv_repl);
      return done ? make_mapprefix(std::move(lv)) : e;
    }
    case LlExpr::Kind::Ite: {
      LvPtr c = substitute_lv(e->cond, done, lv_repl);
      if (done) return make_ll_ite(std::move(c), e->then_br, e->else_br);
      LlPtr t = substitute_ll(e->then_br, done, ll_repl, lv_repl);
      if (done) return make_ll_ite(e->cond, std::move(t), e->else_br);
      LlPtr f = substitute_ll(e->else_br, done, ll_repl, lv_repl);
      if (done) return make_ll_ite(e->cond, e->then_br, std::move(f));
      return e;
    }
  }
  return e;
}

LvPtr substitute_lv(const LvPtr& e, bool& done, const LvPtr& lv_repl) {
  if (done) return e;
  switch (e->kind) {
    case LvExpr::Kind::Hole:
      if (lv_repl) {
        done = true;
        return lv_repl;
      }
      return e;
    case LvExpr::Kind::Fold:
      return e;
    case LvExpr::Kind::Ite: {
      LvPtr c = substitute_lv(e->cond, done, lv_repl);
      if (done) return make_lv_ite(std::move(c), e->then_br, e->else_br);
      LvPtr t = substitute_lv(e->then_br, done, lv_repl);
      if (done) return make_lv_ite(e->cond, std::move(t), e->else_br);
      LvPtr f = substitute_lv(e->else_br, done, lv_repl);
      if (done) return make_lv_ite(e->cond, e->then_br, std::move(f));
      return e;
    }
  }
  return e;
}

std::vector<LlPtr> expand_structural(const LlPtr& node, HoleKind kind,
                                     const SpaceOptions& options) {
  int extra = options.cost_bound - structural_cost(*node);
  std::vector<LlPtr> out;
  auto emit_ll = [&](const LlPtr& repl) {
    bool done = false;
    out.push_back(substitute_ll(node, done, repl, nullptr));
  };
  auto emit_lv = [&](const LvPtr& repl) {
    bool done = false;
    out.push_back(substitute_ll(node, done, nullptr, repl));
  };
  if (kind == HoleKind::Ll) {
    for (const auto& p : enumerate_polynomials(extra + 1, options.n_features)) {
      emit_ll(make_map(p));
    }
    if (extra >= 0) emit_ll(make_mapprefix(make_lv_hole()));
    // ite(lv, ll, ll) raises the minimum completion by 4 over a bare hole
    if (extra >= 4) emit_ll(make_ll_ite(make_lv_hole(), make_ll_hole(), make_ll_hole()));
  } else {
    for (const auto& p : enumerate_polynomials(extra + kMinLvCost, options.n_features)) {
      emit_lv(make_fold(p));
    }
    if (extra >= 3) emit_lv(make_lv_ite(make_lv_hole(), make_lv_hole(), make_lv_hole()));
  }
  return out;
}

std::vector<LlPtr> split_children(const LlPtr& node, const SpaceOptions& options) {
  std::vector<Coeff> coeffs = collect_coefficients(*node);
  int best = -1;
  double best_width = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].splits >= options.max_split_depth) continue;
    double width = coeffs[i].box.hi() - coeffs[i].box.lo();
    if (width > best_width) {
      best_width = width;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) return {};
  const Coeff& target = coeffs[static_cast<std::size_t>(best)];
  auto [left, right] = split_interval(target.box);
  return {replace_coefficient(node, best, Coeff{left, target.splits + 1}),
          replace_coefficient(node, best, Coeff{right, target.splits + 1})};
}

}  // namespace

std::vector<LlPtr> children(const LlPtr& node, const SpaceOptions& options) {
  HoleKind kind = find_leftmost_hole_ll(*node);
  if (kind != HoleKind::None) return expand_structural(node, kind, options);
  return split_children(node, options);
}

// ---- text form ------------------------------------------------------------------

namespace {

std::string coeff_text(const Coeff& c) { return to_string(c.box); }

std::string atom_text(const Atom& a) {
  switch (a.kind) {
    case Atom::Kind::Feature:
      return "z" + std::to_string(a.feature + 1);
    case Atom::Kind::FoldState:
      return "zf";
    case Atom::Kind::Indicator:
      return "ind(" + to_text(*a.body) + ")";
  }
  return "?";
}

}  // namespace

std::string to_text(const Poly& e) {
  if (e.monomials.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < e.monomials.size(); ++i) {
    if (i) out += " + ";
    const auto& m = e.monomials[i];
    out += coeff_text(m.coeff);
    for (const auto& a : m.atoms) out += "*" + atom_text(a);
  }
  return out;
}

std::string to_text(const LvExpr& e) {
  switch (e.kind) {
    case LvExpr::Kind::Fold:
      return "fold(" + to_text(e.body) + ")";
    case LvExpr::Kind::Ite:
      return "ite(" + to_text(*e.cond) + ", " + to_text(*e.then_br) + ", " +
             to_text(*e.else_br) + ")";
    case LvExpr::Kind::Hole:
      return "?lv";
  }
  return "?lv";
}

std::string to_text(const LlExpr& e) {
  switch (e.kind) {
    case LlExpr::Kind::Map:
      return "map(" + to_text(e.body) + ")";
    case LlExpr::Kind::MapPrefix:
      return "mapprefix(" + to_text(*e.lv) + ")";
    case LlExpr::Kind::Ite:
      return "ite(" + to_text(*e.cond) + ", " + to_text(*e.then_br) + ", " +
             to_text(*e.else_br) + ")";
    case LlExpr::Kind::Hole:
      return "?ll";
  }
  return "?ll";
}

// ---- parser ----------------------------------------------------------------------

namespace {

struct Cursor {
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
  bool number_ahead() {
    skip_ws();
    if (pos >= s.size()) return false;
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
    return c == '-' && pos + 1 < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos + 1])) || s[pos + 1] == '.');
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("parse error at position " + std::to_string(pos) + ": " + msg);
  }
};

Coeff parse_coeff(Cursor& cur) {
  if (cur.eat('[')) {
    double lo = cur.number();
    cur.expect(',');
    double hi = cur.number();
    cur.expect(']');
    return Coeff{RealInterval(lo, hi), 0};
  }
  return Coeff{RealInterval::singleton(cur.number()), 0};
}

Poly parse_poly(Cursor& cur);

Atom parse_atom(Cursor& cur) {
  std::string w = cur.word();
  if (w == "zf") return Atom::make_fold_state();
  if (w == "ind") {
    cur.expect('(');
    Poly body = parse_poly(cur);
    cur.expect(')');
    return Atom::make_indicator(std::move(body));
  }
  if (w.size() >= 2 && w[0] == 'z') {
    int idx = 0;
    auto res = std::from_chars(w.data() + 1, w.data() + w.size(), idx);
    if (res.ec == std::errc() && res.ptr == w.data() + w.size() && idx >= 1) {
      return Atom::make_feature(idx - 1);
    }
  }
  cur.fail("unknown atom '" + w + "'");
}

Monomial parse_monomial(Cursor& cur) {
  Monomial m;
  if (cur.number_ahead() || cur.peek() == '[') {
    m.coeff = parse_coeff(cur);
    while (cur.eat('*')) m.atoms.push_back(parse_atom(cur));
  } else {
    m.coeff = Coeff{RealInterval::singleton(1.0), 0};
    m.atoms.push_back(parse_atom(cur));
    while (cur.eat('*')) m.atoms.push_back(parse_atom(cur));
  }
  std::sort(m.atoms.begin(), m.atoms.end(),
            [](const Atom& a, const Atom& b) { return compare_atoms(a, b) < 0; });
  return m;
}

Poly parse_poly(Cursor& cur) {
  Poly p;
  p.monomials.push_back(parse_monomial(cur));
  while (cur.eat('+')) p.monomials.push_back(parse_monomial(cur));
  std::stable_sort(p.monomials.begin(), p.monomials.end(), [](const Monomial& a, const Monomial& b) {
    return compare_monomials(a, b) < 0;
  });
  return p;
}

LlPtr parse_ll(Cursor& cur);

LvPtr parse_lv(Cursor& cur) {
  if (cur.eat('?')) {
    if (cur.word() != "lv") cur.fail("expected ?lv");
    return make_lv_hole();
  }
  std::string w = cur.word();
  if (w == "fold") {
    cur.expect('(');
    Poly body = parse_poly(cur);
    cur.expect(')');
    return make_fold(std::move(body));
  }
  if (w == "ite") {
    cur.expect('(');
    LvPtr c = parse_lv(cur);
    cur.expect(',');
    LvPtr t = parse_lv(cur);
    cur.expect(',');
    LvPtr e = parse_lv(cur);
    cur.expect(')');
    return make_lv_ite(std::move(c), std::move(t), std::move(e));
  }
  cur.fail("expected fold or ite");
}

LlPtr parse_ll(Cursor& cur) {
  if (cur.eat('?')) {
    if (cur.word() != "ll") cur.fail("expected ?ll");
    return make_ll_hole();
  }
  std::string w = cur.word();
  if (w == "map") {
    cur.expect('(');
    Poly body = parse_poly(cur);
    cur.expect(')');
    return make_map(std::move(body));
  }
  if (w == "mapprefix") {
    cur.expect('(');
    LvPtr lv = parse_lv(cur);
    cur.expect(')');
    return make_mapprefix(std::move(lv));
  }
  if (w == "ite") {
    cur.expect('(');
    LvPtr c = parse_lv(cur);
    cur.expect(',');
    LlPtr t = parse_ll(cur);
    cur.expect(',');
    LlPtr e = parse_ll(cur);
    cur.expect(')');
    return make_ll_ite(std::move(c), std::move(t), std::move(e));
  }
  cur.fail("expected map, mapprefix, or ite");
}

}  // namespace

LlPtr parse_program(const std::string& text) {
  Cursor cur{text};
  LlPtr e = parse_ll(cur);
  if (!cur.at_end()) cur.fail("trailing input");
  return e;
}

// ---- search space binding ----------------------------------------------------------

namespace {

const NearNode& as_near(const search::NodePtr& p) {
  return dynamic_cast<const NearNode&>(*p);
}

}  // namespace

NearSpace::NearSpace(dataset::Dataset data, objectives::ObjectiveSpec objective,
                     SpaceOptions options)
    : data_(std::move(data)), objective_(std::move(objective)), options_(options) {
  if (data_.kind != dataset::TaskKind::Labeling) {
    throw std::invalid_argument("NearSpace expects a labeling dataset");
  }
  if (data_.examples.empty()) throw std::invalid_argument("NearSpace: empty dataset");
  if (options_.cost_bound < kMinLlCost) {
    throw std::invalid_argument("NearSpace: cost bound too small for any program");
  }
  options_.n_features = static_cast<int>(data_.feature_dim);
}

search::NodePtr NearSpace::wrap(LlPtr expr) const {
  return std::make_shared<NearNode>(std::move(expr));
}

search::NodePtr NearSpace::root() const { return wrap(make_ll_hole()); }

std::vector<search::NodePtr> NearSpace::children(const search::NodePtr& node) const {
  std::vector<search::NodePtr> out;
  for (auto& kid : near::children(as_near(node).expr, options_)) {
    out.push_back(wrap(std::move(kid)));
  }
  return out;
}

RealInterval NearSpace::abstract_objective(const search::NodePtr& node) const {
  const LlPtr& expr = as_near(node).expr;
  objectives::AbstractOutcomeSet outcomes;
  outcomes.reserve(data_.total_steps());
  for (const auto& ex : data_.examples) {
    std::vector<RealInterval> vals = abs_eval_ll(*expr, ex.features);
    for (std::size_t t = 0; t < vals.size(); ++t) {
      outcomes.emplace_back(geq_zero(vals[t]), ex.step_labels[t]);
    }
  }
  return objective_.abstract(outcomes);
}

bool NearSpace::has_structural_holes(const search::NodePtr& node) const {
  return near::has_structural_holes(*as_near(node).expr);
}

bool NearSpace::is_concrete(const search::NodePtr& node) const {
  return near::is_concrete(*as_near(node).expr);
}

search::NodePtr NearSpace::midpoint_witness(const search::NodePtr& node) const {
  const LlPtr& expr = as_near(node).expr;
  if (near::has_structural_holes(*expr)) return nullptr;
  return wrap(midpoint_instantiation(expr));
}

objectives::OutcomeSet NearSpace::concrete_outcomes(const search::NodePtr& node) const {
  const LlPtr& expr = as_near(node).expr;
  objectives::OutcomeSet outcomes;
  outcomes.reserve(data_.total_steps());
  for (const auto& ex : data_.examples) {
    std::vector<double> vals = eval_ll(*expr, ex.features);
    std::vector<bool> labels = threshold_labels(vals);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      outcomes.push_back({labels[t], static_cast<bool>(ex.step_labels[t])});
    }
  }
  return outcomes;
}

double NearSpace::concrete_objective(const search::NodePtr& node) const {
  return objective_.concrete(concrete_outcomes(node));
}

std::string NearSpace::describe(const search::NodePtr& node) const {
  return to_text(*as_near(node).expr);
}

}  // namespace optsyn::near

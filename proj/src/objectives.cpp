// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/objectives.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace optsyn::objectives {

namespace {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct TpFpCounts {
  std::int64_t tp_lo = 0, tp_hi = 0;
  std::int64_t fp_lo = 0, fp_hi = 0;
  std::int64_t positives = 0;
};

TpFpCounts count_tp_fp(const AbstractOutcomeSet& w) {
  TpFpCounts c;
  for (const auto& o : w) {
    if (o.label) {
      ++c.positives;
      if (o.prediction.lo()) ++c.tp_lo;
      if (o.prediction.hi()) ++c.tp_hi;
    } else {
      if (o.prediction.lo()) ++c.fp_lo;
      if (o.prediction.hi()) ++c.fp_hi;
    }
  }
  return c;
}

}  // namespace

bool fraction_geq(const Fraction& f, double x) {
  if (f.den <= 0) throw std::invalid_argument("fraction with nonpositive denominator");
  if (x <= 0.0) return f.num >= 0 || f.num >= x * f.den;
  if (std::isinf(x)) return false;
  // x = m * 2^(e-53) exactly, with m an integer < 2^53.
  int e = 0;
  double fr = std::frexp(x, &e);
  auto m = static_cast<__int128>(std::ldexp(fr, 53));
  int shift = 53 - e;
  if (shift < 0) {
    // x >= 2^53: no objective value here is that large.
    return false;
  }
  if (shift > 120) {
    // x < 2^-67; any positive fraction beats it.
    return f.num > 0;
  }
  __int128 lhs = static_cast<__int128>(f.num) << shift;
  __int128 rhs = m * static_cast<__int128>(f.den);
  return lhs >= rhs;
}

double accuracy(const OutcomeSet& w) {
  Fraction f = accuracy_fraction(w);
  return f.value();
}

Fraction accuracy_fraction(const OutcomeSet& w) {
  if (w.empty()) throw std::invalid_argument("accuracy over an empty outcome set");
  std::int64_t correct = 0;
  for (const auto& o : w) correct += o.prediction == o.label;
  return {correct, static_cast<std::int64_t>(w.size())};
}

RealInterval abstract_accuracy(const AbstractOutcomeSet& w) {
  if (w.empty()) throw std::invalid_argument("abstract_accuracy over an empty outcome set");
  // Per-outcome correctness intervals ([1,1] match, [0,0] mismatch, [0,1]
  // undetermined) summed by the monotone lift of +, then scaled by 1/|W|.
  std::int64_t lo = 0, hi = 0;
  for (const auto& o : w) {
    BoolInterval correct =
        o.label ? o.prediction : BoolInterval(!o.prediction.hi(), !o.prediction.lo());
    if (correct.lo()) ++lo;
    if (correct.hi()) ++hi;
  }
  double n = static_cast<double>(w.size());
  return RealInterval(static_cast<double>(lo) / n, static_cast<double>(hi) / n);
}

Fraction f1_fraction(const OutcomeSet& w) {
  std::int64_t tp = 0, fp = 0, pos = 0;
  for (const auto& o : w) {
    pos += o.label;
    if (o.prediction && o.label) ++tp;
    if (o.prediction && !o.label) ++fp;
  }
  std::int64_t den = tp + fp + pos;
  if (den == 0) return {0, 1};
  return {2 * tp, den};
}

double f1(const OutcomeSet& w) { return f1_fraction(w).value(); }

std::pair<RealInterval, RealInterval> abstract_tp_fp(const AbstractOutcomeSet& w) {
  TpFpCounts c = count_tp_fp(w);
  return {RealInterval(static_cast<double>(c.tp_lo), static_cast<double>(c.tp_hi)),
          RealInterval(static_cast<double>(c.fp_lo), static_cast<double>(c.fp_hi))};
}

RealInterval abstract_f1(const AbstractOutcomeSet& w) {
  TpFpCounts c = count_tp_fp(w);
  double a1 = static_cast<double>(c.tp_lo), b1 = static_cast<double>(c.tp_hi);
  double a2 = static_cast<double>(c.fp_lo), b2 = static_cast<double>(c.fp_hi);
  double p = static_cast<double>(c.positives);
  double lo = safe_ratio(2.0 * a1, a1 + b2 + p);
  double hi = safe_ratio(2.0 * b1, b1 + a2 + p);
  return RealInterval(lo, hi);
}

RealInterval naive_abstract_f1(const AbstractOutcomeSet& w) {
  TpFpCounts c = count_tp_fp(w);
  double a1 = static_cast<double>(c.tp_lo), b1 = static_cast<double>(c.tp_hi);
  double a2 = static_cast<double>(c.fp_lo), b2 = static_cast<double>(c.fp_hi);
  double p = static_cast<double>(c.positives);
  double lo = safe_ratio(2.0 * a1, b1 + b2 + p);
  double hi = safe_ratio(2.0 * b1, a1 + a2 + p);
  return RealInterval(lo, hi);
}

ObjectiveSpec make_objective(std::string_view name) {
  if (name == "accuracy") {
    return {"accuracy", [](const OutcomeSet& w) { return accuracy(w); },
            [](const AbstractOutcomeSet& w) { return abstract_accuracy(w); },
            [](const OutcomeSet& w) { return accuracy_fraction(w); }};
  }
  if (name == "f1") {
    return {"f1", [](const OutcomeSet& w) { return f1(w); },
            [](const AbstractOutcomeSet& w) { return abstract_f1(w); },
            [](const OutcomeSet& w) { return f1_fraction(w); }};
  }
  throw std::invalid_argument("unknown objective: " + std::string(name));
}

}  // namespace optsyn::objectives

// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Concrete and abstract quantitative objectives over (prediction, label)
// outcome multisets: per-outcome accuracy and F1, with interval-valued
// abstract transformers over partially determined predictions.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "optsyn/interval.hpp"

namespace optsyn::objectives {

struct Outcome {
  bool prediction;
  bool label;
};
using OutcomeSet = std::vector<Outcome>;

struct AbstractOutcome {
  BoolInterval prediction;
  bool label;

  AbstractOutcome(BoolInterval p, bool l) : prediction(p), label(l) {}
};
using AbstractOutcomeSet = std::vector<AbstractOutcome>;

// Objective values are ratios of small integers; exact comparisons for
// certificate audits go through this form.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
};

// Exact test of num/den >= x (x a nonnegative double).
bool fraction_geq(const Fraction& f, double x);

double accuracy(const OutcomeSet& w);
RealInterval abstract_accuracy(const AbstractOutcomeSet& w);
Fraction accuracy_fraction(const OutcomeSet& w);

// F1 = 2*TP / (TP + FP + |W+|); defined as 0 when the denominator is 0.
double f1(const OutcomeSet& w);
Fraction f1_fraction(const OutcomeSet& w);

// Componentwise interval sums of the per-outcome TP/FP contribution tables.
std::pair<RealInterval, RealInterval> abstract_tp_fp(const AbstractOutcomeSet& w);

// Tight abstract F1: 2*[a1/(a1+b2+P), b1/(b1+a2+P)] for TP# = [a1,b1],
// FP# = [a2,b2], P = |W+|. Always a subset of [0,1].
RealInterval abstract_f1(const AbstractOutcomeSet& w);

// Loose reference transformer obtained by composing the generic interval
// division; kept as a comparison baseline and can exceed [0,1].
RealInterval naive_abstract_f1(const AbstractOutcomeSet& w);

struct ObjectiveSpec {
  std::string name;
  std::function<double(const OutcomeSet&)> concrete;
  std::function<RealInterval(const AbstractOutcomeSet&)> abstract;
  std::function<Fraction(const OutcomeSet&)> fraction;
};

// name is "accuracy" or "f1".
ObjectiveSpec make_objective(std::string_view name);

}  // namespace optsyn::objectives

// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "optsyn/objectives.hpp"
#include "optsyn/oracle.hpp"

using namespace optsyn;
using namespace optsyn::objectives;

namespace {

const BoolInterval kFF(false, false);
const BoolInterval kFT(false, true);
const BoolInterval kTT(true, true);

AbstractOutcomeSet random_abstract_set(std::mt19937_64& rng, std::size_t max_size) {
  AbstractOutcomeSet w;
  std::size_t n = 1 + rng() % max_size;
  for (std::size_t i = 0; i < n; ++i) {
    BoolInterval pred = kFF;
    switch (rng() % 3) {
      case 0: pred = kFF; break;
      case 1: pred = kFT; break;
      default: pred = kTT; break;
    }
    w.emplace_back(pred, rng() % 2 == 0);
  }
  return w;
}

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy({{false, false}, {false, true}}) == 0.5);
  CHECK(accuracy({{true, true}}) == 1.0);
  CHECK(accuracy({{true, false}, {false, true}}) == 0.0);
  CHECK_THROWS_AS(accuracy({}), std::invalid_argument);
}

TEST_CASE("abstract accuracy") {
  CHECK(abstract_accuracy({{kFF, false}, {kFT, true}}) == RealInterval(0.5, 1.0));
  CHECK(abstract_accuracy({{kFF, false}, {kFF, true}}) == RealInterval(0.5, 0.5));
  // all-singleton input collapses to the concrete accuracy
  AbstractOutcomeSet det = {{kTT, true}, {kFF, true}, {kTT, false}};
  OutcomeSet conc = {{true, true}, {false, true}, {true, false}};
  CHECK(abstract_accuracy(det) == RealInterval::singleton(accuracy(conc)));
  CHECK_THROWS_AS(abstract_accuracy({}), std::invalid_argument);
}

TEST_CASE("f1") {
  CHECK(f1({{true, true}, {true, false}, {false, true}}) == 0.5);
  CHECK(f1({{true, true}, {false, false}, {true, true}}) == 1.0);
  CHECK(f1({{false, true}}) == 0.0);
  // no positive labels and no positive predictions: defined as 0
  CHECK(f1({{false, false}, {false, false}}) == 0.0);
}

TEST_CASE("abstract TP/FP case table sums") {
  auto [tp, fp] = abstract_tp_fp({{kTT, true}, {kFT, true}, {kFT, false}});
  CHECK(tp == RealInterval(1.0, 2.0));
  CHECK(fp == RealInterval(0.0, 1.0));

  auto [tp2, fp2] = abstract_tp_fp({{kTT, true}, {kFF, true}, {kTT, false}});
  CHECK(tp2 == RealInterval(1.0, 1.0));
  CHECK(fp2 == RealInterval(1.0, 1.0));

  // k undetermined positives, m undetermined negatives
  auto [tp3, fp3] = abstract_tp_fp({{kFT, true}, {kFT, true}, {kFT, false}});
  CHECK(tp3 == RealInterval(0.0, 2.0));
  CHECK(fp3 == RealInterval(0.0, 1.0));
}

TEST_CASE("tight abstract F1") {
  // TP# = [1,2], FP# = [0,1], |W+| = 2
  AbstractOutcomeSet w = {{kTT, true}, {kFT, true}, {kFT, false}};
  CHECK(abstract_f1(w) == RealInterval(0.5, 1.0));

  AbstractOutcomeSet det = {{kTT, true}, {kFF, true}, {kTT, false}};
  OutcomeSet conc = {{true, true}, {false, true}, {true, false}};
  CHECK(abstract_f1(det) == RealInterval::singleton(f1(conc)));

  AbstractOutcomeSet und = {{kFT, true}, {kFT, false}};
  CHECK(abstract_f1(und) == RealInterval(0.0, 1.0));
}

TEST_CASE("naive abstract F1 is loose") {
  AbstractOutcomeSet w = {{kTT, true}, {kFT, true}, {kFT, false}};
  RealInterval naive = naive_abstract_f1(w);
  CHECK(naive.lo() == doctest::Approx(0.4));
  CHECK(naive.hi() == doctest::Approx(4.0 / 3.0));

  AbstractOutcomeSet det = {{kTT, true}, {kFF, true}, {kTT, false}};
  OutcomeSet conc = {{true, true}, {false, true}, {true, false}};
  CHECK(naive_abstract_f1(det) == RealInterval::singleton(f1(conc)));

  // a fully undetermined positive blows the naive bound up to [0,2]
  AbstractOutcomeSet loose = {{kFT, true}};
  CHECK(naive_abstract_f1(loose) == RealInterval(0.0, 2.0));
}

TEST_CASE("validity: abstract objectives contain every resolution") {
  std::mt19937_64 rng(23);
  ObjectiveSpec acc = make_objective("accuracy");
  ObjectiveSpec f1s = make_objective("f1");
  for (int i = 0; i < 1000; ++i) {
    AbstractOutcomeSet w = random_abstract_set(rng, 8);
    auto [acc_lo, acc_hi] = oracle::enumerate_resolutions(w, acc);
    RealInterval acc_abs = abstract_accuracy(w);
    CHECK(acc_abs.contains(acc_lo));
    CHECK(acc_abs.contains(acc_hi));
    auto [f1_lo, f1_hi] = oracle::enumerate_resolutions(w, f1s);
    RealInterval f1_abs = abstract_f1(w);
    CHECK(f1_abs.contains(f1_lo));
    CHECK(f1_abs.contains(f1_hi));
  }
}

TEST_CASE("tightness: abstract F1 endpoints are attained") {
  std::mt19937_64 rng(29);
  ObjectiveSpec f1s = make_objective("f1");
  for (int i = 0; i < 500; ++i) {
    AbstractOutcomeSet w = random_abstract_set(rng, 8);
    auto [lo, hi] = oracle::enumerate_resolutions(w, f1s);
    RealInterval abs = abstract_f1(w);
    CHECK(abs.lo() == lo);
    CHECK(abs.hi() == hi);
  }
}

TEST_CASE("abstract F1 within naive and within [0,1]") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    AbstractOutcomeSet w = random_abstract_set(rng, 10);
    RealInterval tight = abstract_f1(w);
    RealInterval naive = naive_abstract_f1(w);
    CHECK(naive.lo() <= tight.lo());
    CHECK(tight.hi() <= naive.hi());
    CHECK(tight.lo() >= 0.0);
    CHECK(tight.hi() <= 1.0);
  }
}

TEST_CASE("raising a prediction never decreases the TP bounds") {
  std::mt19937_64 rng(37);
  auto raise = [](const BoolInterval& b) {
    if (b == BoolInterval(false, false)) return BoolInterval(false, true);
    return BoolInterval(true, true);
  };
  for (int i = 0; i < 500; ++i) {
    AbstractOutcomeSet w = random_abstract_set(rng, 8);
    std::size_t k = rng() % w.size();
    if (w[k].prediction == BoolInterval(true, true)) continue;
    auto [tp_before, fp_before] = abstract_tp_fp(w);
    w[k].prediction = raise(w[k].prediction);
    auto [tp_after, fp_after] = abstract_tp_fp(w);
    CHECK(tp_after.lo() >= tp_before.lo());
    CHECK(tp_after.hi() >= tp_before.hi());
    CHECK(fp_after.lo() >= fp_before.lo());
    CHECK(fp_after.hi() >= fp_before.hi());
  }
}

TEST_CASE("objective selection by name") {
  ObjectiveSpec acc = make_objective("accuracy");
  CHECK(acc.name == "accuracy");
  CHECK(acc.concrete({{true, true}, {false, true}}) == 0.5);
  ObjectiveSpec f = make_objective("f1");
  CHECK(f.name == "f1");
  CHECK_THROWS_AS(make_objective("precision"), std::invalid_argument);
}

TEST_CASE("exact fraction comparisons") {
  Fraction third{1, 3};
  CHECK(fraction_geq(third, 1.0 / 3.0 - 1e-18));
  CHECK(fraction_geq(third, 0.3333333333333333));  // nearest double below 1/3
  CHECK_FALSE(fraction_geq(third, 0.3333333333333334));
  CHECK(fraction_geq({1, 2}, 0.5));
  CHECK(fraction_geq({2, 2}, 1.0));
  CHECK_FALSE(fraction_geq({1, 2}, 0.5000000000000001));
  CHECK(fraction_geq({0, 5}, 0.0));
  CHECK(fraction_geq({1, 1000000}, 1e-30));
}

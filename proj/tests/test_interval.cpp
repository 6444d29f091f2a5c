// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "optsyn/interval.hpp"

using namespace optsyn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rand_in(std::mt19937_64& rng, const RealInterval& iv) {
  std::uniform_real_distribution<double> d(iv.lo(), iv.hi());
  return d(rng);
}

RealInterval random_interval(std::mt19937_64& rng, double lo = -10.0, double hi = 10.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  double a = d(rng), b = d(rng);
  if (a > b) std::swap(a, b);
  return RealInterval(a, b);
}

BoolInterval random_bool_interval(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0: return BoolInterval(false, false);
    case 1: return BoolInterval(false, true);
    default: return BoolInterval(true, true);
  }
}

bool sample_from(std::mt19937_64& rng, const BoolInterval& b) {
  if (b.is_singleton()) return b.lo();
  return rng() % 2 == 0;
}

}  // namespace

TEST_CASE("singleton abstraction") {
  CHECK(abstract_singleton(50.0) == RealInterval(50.0, 50.0));
  CHECK(abstract_singleton(true) == BoolInterval(true, true));
  CHECK(abstract_singleton(0.0).contains(0.0));
  CHECK(abstract_singleton(50.0).is_singleton());
}

TEST_CASE("containment") {
  RealInterval iv(50.0, 75.0);
  CHECK(iv.contains(65.0));
  CHECK(iv.contains(50.0));
  CHECK(iv.contains(75.0));
  CHECK_FALSE(iv.contains(101.0));
  RealInterval top = RealInterval::top();
  CHECK(top.contains(1e300));
  CHECK(top.contains(-1e300));
  CHECK(top.contains(0.0));
}

TEST_CASE("constructors reject reversed endpoints") {
  CHECK_THROWS_AS(RealInterval(2.0, 1.0), std::invalid_argument);
  CHECK_FALSE(RealInterval::bottom().contains(0.0));
}

TEST_CASE("monotone lift of addition") {
  RealInterval args_arr[] = {RealInterval(1.0, 2.0), RealInterval(3.0, 4.0)};
  auto sum = [](std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  };
  RealInterval r = lift_monotone<double>(sum, args_arr);
  CHECK(r == RealInterval(4.0, 6.0));

  RealInterval zeros[] = {RealInterval::singleton(0.0), RealInterval::singleton(0.0)};
  CHECK(lift_monotone<double>(sum, zeros) == RealInterval(0.0, 0.0));

  CHECK(add(RealInterval(1.0, 2.0), RealInterval(3.0, 4.0)) == RealInterval(4.0, 6.0));
}

TEST_CASE("threshold comparison as a lift with a decreasing argument") {
  // g(x) >= c with g(x) = 65 and c in [50, 75]
  auto geq = [](double g, double c) { return g >= c; };
  BoolInterval r = lift_monotone2<bool>(geq, RealInterval::singleton(65.0), false,
                                        RealInterval(50.0, 75.0), true);
  CHECK(r == BoolInterval(false, true));
  CHECK(threshold_geq(65.0, RealInterval(50.0, 75.0)) == BoolInterval(false, true));
  CHECK(threshold_geq(40.0, RealInterval(50.0, 75.0)) == BoolInterval(false, false));
  CHECK(threshold_geq(80.0, RealInterval(50.0, 75.0)) == BoolInterval(true, true));
}

TEST_CASE("interval multiplication") {
  CHECK(mul(RealInterval(-1.0, 2.0), RealInterval(3.0, 4.0)) == RealInterval(-4.0, 8.0));
  CHECK(mul(RealInterval(2.0, 2.0), RealInterval(3.0, 3.0)) == RealInterval(6.0, 6.0));
  CHECK(mul(RealInterval(-1.0, 1.0), RealInterval(-1.0, 1.0)) == RealInterval(-1.0, 1.0));
}

TEST_CASE("indicator abstraction") {
  CHECK(interval_indicator(BoolInterval(false, false)) == RealInterval(0.0, 0.0));
  CHECK(interval_indicator(BoolInterval(false, true)) == RealInterval(0.0, 1.0));
  CHECK(interval_indicator(BoolInterval(true, true)) == RealInterval(1.0, 1.0));
}

TEST_CASE("boolean interval case tables") {
  BoolInterval ff(false, false), ft(false, true), tt(true, true);
  CHECK(bool_and(ft, tt) == ft);
  CHECK(bool_and(ff, ft) == ff);
  CHECK(bool_and(tt, tt) == tt);
  CHECK(bool_or(ft, tt) == tt);
  CHECK(bool_or(ff, ff) == ff);
  CHECK(bool_or(ff, ft) == ft);
  CHECK(bool_not(ft) == ft);
  CHECK(bool_not(tt) == ff);
  CHECK(bool_not(ff) == tt);
}

TEST_CASE("boolean operators agree with the generic monotone lift") {
  auto all = {BoolInterval(false, false), BoolInterval(false, true), BoolInterval(true, true)};
  auto conj = [](std::span<const bool> xs) { return xs[0] && xs[1]; };
  auto disj = [](std::span<const bool> xs) { return xs[0] || xs[1]; };
  for (const auto& a : all) {
    for (const auto& b : all) {
      BoolInterval args[] = {a, b};
      CHECK(bool_and(a, b) == lift_monotone<bool>(conj, args));
      CHECK(bool_or(a, b) == lift_monotone<bool>(disj, args));
    }
  }
}

TEST_CASE("midpoint splitting") {
  auto [l1, r1] = split_interval(RealInterval(50.0, 100.0));
  CHECK(l1 == RealInterval(50.0, 75.0));
  CHECK(r1 == RealInterval(75.0, 100.0));
  auto [l2, r2] = split_interval(RealInterval(0.0, 100.0));
  CHECK(l2 == RealInterval(0.0, 50.0));
  CHECK(r2 == RealInterval(50.0, 100.0));
  auto [l3, r3] = split_interval(RealInterval(-1.0, 1.0));
  CHECK(l3 == RealInterval(-1.0, 0.0));
  CHECK(r3 == RealInterval(0.0, 1.0));
  CHECK_THROWS_AS(split_interval(RealInterval(3.0, 3.0)), std::invalid_argument);
  CHECK_THROWS_AS(split_interval(RealInterval::top()), std::invalid_argument);
}

TEST_CASE("split children cover the parent") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    RealInterval parent = random_interval(rng);
    if (parent.lo() == parent.hi()) continue;
    auto [l, r] = split_interval(parent);
    double v = rand_in(rng, parent);
    CHECK((l.contains(v) || r.contains(v)));
    CHECK(l.contains(parent.lo()));
    CHECK(r.contains(parent.hi()));
    CHECK(l.contains(l.hi()));
    CHECK(r.contains(l.hi()));
  }
}

TEST_CASE("random containment: lifted operators overapproximate") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    RealInterval a = random_interval(rng), b = random_interval(rng);
    double x = rand_in(rng, a), y = rand_in(rng, b);
    CHECK(add(a, b).contains(x + y));
    CHECK(mul(a, b).contains(x * y));
    CHECK(geq_zero(a).contains(x >= 0.0));
    BoolInterval p = random_bool_interval(rng), q = random_bool_interval(rng);
    bool s = sample_from(rng, p), t = sample_from(rng, q);
    CHECK(bool_and(p, q).contains(s && t));
    CHECK(bool_or(p, q).contains(s || t));
    CHECK(interval_indicator(p).contains(s ? 1.0 : 0.0));
    double c = rand_in(rng, b);
    CHECK(threshold_geq(x, b).contains(x >= c));
    CHECK(threshold_leq(x, b).contains(x <= c));
  }
}

TEST_CASE("singleton exactness of the operators") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    double x = d(rng), y = d(rng);
    RealInterval a = RealInterval::singleton(x), b = RealInterval::singleton(y);
    CHECK(add(a, b) == RealInterval::singleton(x + y));
    CHECK(mul(a, b) == RealInterval::singleton(x * y));
    CHECK(geq_zero(a) == BoolInterval::singleton(x >= 0.0));
    bool s = rng() % 2 == 0, t = rng() % 2 == 0;
    CHECK(bool_and(BoolInterval::singleton(s), BoolInterval::singleton(t)) ==
          BoolInterval::singleton(s && t));
    CHECK(interval_indicator(BoolInterval::singleton(s)) ==
          RealInterval::singleton(s ? 1.0 : 0.0));
  }
}

TEST_CASE("monotone lift matches exhaustive optimization on an endpoint grid") {
  std::mt19937_64 rng(17);
  auto f = [](std::span<const double> xs) { return xs[0] + 2.0 * xs[1]; };
  auto g = [](std::span<const double> xs) { return std::max(xs[0], xs[1]); };
  for (int trial = 0; trial < 50; ++trial) {
    RealInterval a = random_interval(rng), b = random_interval(rng);
    for (auto fn : {+f, +g}) {
      double lo = kInf, hi = -kInf;
      for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
          double x = a.lo() + (a.hi() - a.lo()) * i / 9.0;
          double y = b.lo() + (b.hi() - b.lo()) * j / 9.0;
          double args[] = {x, y};
          double v = fn(std::span<const double>(args));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      RealInterval args_arr[] = {a, b};
      RealInterval lifted = lift_monotone<double>(fn, args_arr);
      CHECK(lifted.lo() == doctest::Approx(lo).epsilon(1e-12));
      CHECK(lifted.hi() == doctest::Approx(hi).epsilon(1e-12));
    }
  }
}

TEST_CASE("infinite endpoints saturate") {
  RealInterval top = RealInterval::top();
  CHECK(add(top, RealInterval(1.0, 2.0)) == top);
  CHECK(mul(top, RealInterval(2.0, 3.0)) == top);
  CHECK(mul(RealInterval(0.0, 0.0), top) == top);  // 0*inf saturates conservatively
  CHECK(mul(RealInterval(0.0, 1.0), RealInterval(-kInf, kInf)) == top);
  RealInterval half = RealInterval(0.0, kInf);
  CHECK(add(half, RealInterval(1.0, 1.0)).lo() == 1.0);
  CHECK(add(half, RealInterval(1.0, 1.0)).hi() == kInf);
  RealInterval args_arr[] = {RealInterval(-kInf, 3.0), RealInterval(1.0, 2.0)};
  auto sum = [](std::span<const double> xs) { return xs[0] + xs[1]; };
  RealInterval r = lift_monotone<double>(sum, args_arr);
  CHECK(r.lo() == -kInf);
  CHECK(r.hi() == 5.0);
}

TEST_CASE("interval text form") {
  CHECK(to_string(RealInterval(0.5, 0.75)) == "[0.5,0.75]");
  CHECK(to_string(RealInterval::singleton(-1.0)) == "-1");
  CHECK(format_number(0.1) == "0.1");
}

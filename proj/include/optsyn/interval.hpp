// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Interval abstract domains over partially ordered carriers.
//
// An interval (lo, hi) over a carrier Z denotes { z in Z | lo <= z <= hi }.
// The carrier is extended with -inf/+inf endpoints; for `double` these are
// the IEEE infinities, for `bool` the lattice is already bounded (f < t) so
// the formal infinities coincide with f and t.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace optsyn {

template <typename T>
struct carrier_traits;

template <>
struct carrier_traits<double> {
  static constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  static constexpr double pos_inf = std::numeric_limits<double>::infinity();
  static bool is_finite(double v) { return std::isfinite(v); }
  static bool leq(double a, double b) { return a <= b; }
};

template <>
struct carrier_traits<bool> {
  static constexpr bool neg_inf = false;
  static constexpr bool pos_inf = true;
  static bool is_finite(bool) { return true; }
  static bool leq(bool a, bool b) { return a <= b; }
};

// Closed interval over a partially ordered carrier. The dedicated bottom
// element exists for API completeness but no operation here produces it;
// all constructors reject lo > hi.
template <typename T>
class Interval {
 public:
  Interval(T lo, T hi) : lo_(lo), hi_(hi) {
    if (!carrier_traits<T>::leq(lo, hi)) {
      throw std::invalid_argument("interval endpoints out of order");
    }
  }

  // Abstraction of a single carrier value: alpha(z) = (z, z).
  static Interval singleton(T v) { return Interval(v, v); }

  static Interval top() {
    return Interval(carrier_traits<T>::neg_inf, carrier_traits<T>::pos_inf);
  }

  static Interval bottom() {
    Interval iv(carrier_traits<T>::neg_inf, carrier_traits<T>::pos_inf);
    iv.bottom_ = true;
    return iv;
  }

  T lo() const { return lo_; }
  T hi() const { return hi_; }
  bool is_bottom() const { return bottom_; }
  bool is_singleton() const { return !bottom_ && lo_ == hi_; }

  // Concretization membership: lo <= v <= hi.
  bool contains(T v) const {
    return !bottom_ && carrier_traits<T>::leq(lo_, v) &&
           carrier_traits<T>::leq(v, hi_);
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.bottom_ == b.bottom_ && (a.bottom_ || (a.lo_ == b.lo_ && a.hi_ == b.hi_));
  }

 private:
  T lo_;
  T hi_;
  bool bottom_ = false;
};

using RealInterval = Interval<double>;
using BoolInterval = Interval<bool>;

inline RealInterval real_top() { return RealInterval::top(); }

inline BoolInterval bool_singleton(bool v) { return BoolInterval::singleton(v); }
inline BoolInterval bool_unknown() { return BoolInterval(false, true); }

template <typename T>
Interval<T> abstract_singleton(T v) {
  return Interval<T>::singleton(v);
}

namespace detail {

inline double add_end(double a, double b, bool lower) {
  double s = a + b;
  if (std::isnan(s)) {  // only from (-inf) + (+inf)
    return lower ? carrier_traits<double>::neg_inf : carrier_traits<double>::pos_inf;
  }
  return s;
}

// Endpoint product with 0*inf saturating toward the bound being computed.
inline double mul_end(double a, double b, bool lower) {
  if ((a == 0.0 && std::isinf(b)) || (b == 0.0 && std::isinf(a))) {
    return lower ? carrier_traits<double>::neg_inf : carrier_traits<double>::pos_inf;
  }
  return a * b;
}

}  // namespace detail

inline RealInterval add(const RealInterval& a, const RealInterval& b) {
  return RealInterval(detail::add_end(a.lo(), b.lo(), true),
                      detail::add_end(a.hi(), b.hi(), false));
}

// min/max over the four endpoint products.
inline RealInterval mul(const RealInterval& a, const RealInterval& b) {
  double lo = detail::mul_end(a.lo(), b.lo(), true);
  double hi = detail::mul_end(a.lo(), b.lo(), false);
  const double pairs[3][2] = {{a.lo(), b.hi()}, {a.hi(), b.lo()}, {a.hi(), b.hi()}};
  for (const auto& p : pairs) {
    lo = std::min(lo, detail::mul_end(p[0], p[1], true));
    hi = std::max(hi, detail::mul_end(p[0], p[1], false));
  }
  return RealInterval(lo, hi);
}

// Exact scaling by a nonnegative constant (used for means; the divisor is a
// dataset constant, not an interval).
inline RealInterval scale(const RealInterval& a, double k) {
  if (k < 0.0) throw std::invalid_argument("scale expects k >= 0");
  return RealInterval(a.lo() * k, a.hi() * k);
}

// Indicator abstraction: [f,f] -> [0,0], [f,t] -> [0,1], [t,t] -> [1,1].
inline RealInterval interval_indicator(const BoolInterval& b) {
  return RealInterval(b.lo() ? 1.0 : 0.0, b.hi() ? 1.0 : 0.0);
}

inline BoolInterval bool_and(const BoolInterval& a, const BoolInterval& b) {
  return BoolInterval(a.lo() && b.lo(), a.hi() && b.hi());
}

inline BoolInterval bool_or(const BoolInterval& a, const BoolInterval& b) {
  return BoolInterval(a.lo() || b.lo(), a.hi() || b.hi());
}

// Negation is antitone, so the endpoints swap.
inline BoolInterval bool_not(const BoolInterval& b) {
  return BoolInterval(!b.hi(), !b.lo());
}

// v >= 0 over an interval of values.
inline BoolInterval geq_zero(const RealInterval& v) {
  if (v.lo() >= 0.0) return BoolInterval(true, true);
  if (v.hi() < 0.0) return BoolInterval(false, false);
  return BoolInterval(false, true);
}

// score >= c for c constrained to `box`; monotone decreasing in c.
inline BoolInterval threshold_geq(double score, const RealInterval& box) {
  if (score < box.lo()) return BoolInterval(false, false);
  if (box.hi() <= score) return BoolInterval(true, true);
  return BoolInterval(false, true);
}

// value <= t for t constrained to `box`; monotone increasing in t.
inline BoolInterval threshold_leq(double value, const RealInterval& box) {
  if (box.lo() >= value) return BoolInterval(true, true);
  if (box.hi() < value) return BoolInterval(false, false);
  return BoolInterval(false, true);
}

// Interval transformer for a k-ary monotone function: evaluate f on the two
// endpoint tuples. `decreasing[i]` swaps argument i's endpoints. Any infinite
// endpoint in a tuple saturates the corresponding output bound.
template <typename T, typename F>
Interval<T> lift_monotone(F&& f, std::span<const Interval<T>> args,
                          std::span<const bool> decreasing = {}) {
  std::vector<T> lo_args, hi_args;
  lo_args.reserve(args.size());
  hi_args.reserve(args.size());
  bool lo_sat = false, hi_sat = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    bool dec = i < decreasing.size() && decreasing[i];
    T lo_end = dec ? args[i].hi() : args[i].lo();
    T hi_end = dec ? args[i].lo() : args[i].hi();
    lo_sat = lo_sat || !carrier_traits<T>::is_finite(lo_end);
    hi_sat = hi_sat || !carrier_traits<T>::is_finite(hi_end);
    lo_args.push_back(lo_end);
    hi_args.push_back(hi_end);
  }
  T lo = lo_sat ? carrier_traits<T>::neg_inf : f(std::span<const T>(lo_args));
  T hi = hi_sat ? carrier_traits<T>::pos_inf : f(std::span<const T>(hi_args));
  return Interval<T>(lo, hi);
}

// Binary heterogeneous lift (e.g. reals -> bool comparisons). Endpoints must
// be finite; saturate in the caller if they are not.
template <typename R, typename A, typename B, typename F>
Interval<R> lift_monotone2(F&& f, const Interval<A>& a, bool a_decreasing,
                           const Interval<B>& b, bool b_decreasing) {
  A alo = a_decreasing ? a.hi() : a.lo();
  A ahi = a_decreasing ? a.lo() : a.hi();
  B blo = b_decreasing ? b.hi() : b.lo();
  B bhi = b_decreasing ? b.lo() : b.hi();
  return Interval<R>(f(alo, blo), f(ahi, bhi));
}

// Midpoint split; the two closed children share the midpoint, so their
// concretizations cover the parent.
inline std::pair<RealInterval, RealInterval> split_interval(const RealInterval& iv) {
  if (!carrier_traits<double>::is_finite(iv.lo()) ||
      !carrier_traits<double>::is_finite(iv.hi())) {
    throw std::invalid_argument("split_interval requires finite endpoints");
  }
  if (iv.lo() >= iv.hi()) {
    throw std::invalid_argument("split_interval requires lo < hi");
  }
  double mid = iv.lo() / 2.0 + iv.hi() / 2.0;
  return {RealInterval(iv.lo(), mid), RealInterval(mid, iv.hi())};
}

std::string format_number(double v);
std::string to_string(const RealInterval& iv);

}  // namespace optsyn

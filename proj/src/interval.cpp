// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0

#include "optsyn/interval.hpp"

#include <charconv>

namespace optsyn {

// Shortest decimal form that round-trips through parsing.
std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_string(const RealInterval& iv) {
  if (iv.is_bottom()) return "[bottom]";
  if (iv.is_singleton()) return format_number(iv.lo());
  return "[" + format_number(iv.lo()) + "," + format_number(iv.hi()) + "]";
}

}  // namespace optsyn

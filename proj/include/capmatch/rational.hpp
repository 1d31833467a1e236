// Copyright 2026 The Capmatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace capmatch {

/// Exact rational arithmetic for all decision logic. Canonical form
/// (gcd-reduced, positive denominator) is maintained by the backend.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline BigInt rational_num(const Rational& r) { return numerator(r); }
inline BigInt rational_den(const Rational& r) { return denominator(r); }

/// Parses "p/q", an integer ("-12"), or a finite decimal ("0.45" -> 9/20).
/// Throws std::invalid_argument on anything else.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("not a rational: '" + std::string(text) + "'");
  };
  if (text.empty()) fail();

  const auto is_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) fail();

  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    if (!is_digits(num) || !is_digits(den)) fail();
    const BigInt p{std::string(num)};
    const BigInt q{std::string(den)};
    if (q == 0) fail();
    value = Rational(p, q);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (!is_digits(frac) || (!whole.empty() && !is_digits(whole))) fail();
    BigInt scale = 1;
    for (std::size_t t = 0; t < frac.size(); ++t) scale *= 10;
    const BigInt whole_part = whole.empty() ? BigInt(0) : BigInt{std::string(whole)};
    const BigInt frac_part{std::string(frac)};
    value = Rational(whole_part * scale + frac_part, scale);
  } else {
    if (!is_digits(text)) fail();
    value = Rational(BigInt{std::string(text)});
  }
  return negative ? Rational(-value) : value;
}

/// Canonical exact rendering: "p/q", or just "p" for integers.
inline std::string to_fraction_string(const Rational& r) {
  std::string out = rational_num(r).str();
  if (rational_den(r) != 1) out += "/" + rational_den(r).str();
  return out;
}

/// Decimal rendering with a fixed number of significant digits, derived from
/// the exact value. Display only; never used in decision logic.
inline std::string to_decimal_string(const Rational& r, int significant_digits = 6) {
  if (r == 0) return "0";
  const bool negative = r < 0;
  BigInt p = negative ? BigInt(-rational_num(r)) : rational_num(r);
  BigInt q = rational_den(r);

  // exponent e with 10^e <= p/q < 10^(e+1)
  int e = 0;
  BigInt lo = q, hi = q * 10;
  if (p >= q) {
    while (p >= hi) {
      lo = hi;
      hi *= 10;
      ++e;
    }
  } else {
    while (p < lo) {
      lo /= 10;
      --e;
    }
  }

  const int shift = significant_digits - 1 - e;
  BigInt scaled_num = p, scaled_den = q;
  for (int t = 0; t < shift; ++t) scaled_num *= 10;
  for (int t = 0; t < -shift; ++t) scaled_den *= 10;
  BigInt digits = (scaled_num * 2 + scaled_den) / (scaled_den * 2);  // round half up
  std::string ds = digits.str();
  int exp = e;
  if (static_cast<int>(ds.size()) > significant_digits) {  // rounding overflowed
    ds.pop_back();
    ++exp;
  }

  std::string out = negative ? "-" : "";
  if (exp >= significant_digits) {
    out += ds;
    out.append(static_cast<std::size_t>(exp + 1 - significant_digits), '0');
  } else if (exp >= 0) {
    out += ds.substr(0, static_cast<std::size_t>(exp + 1));
    out += ".";
    out += ds.substr(static_cast<std::size_t>(exp + 1));
  } else {
    out += "0.";
    out.append(static_cast<std::size_t>(-exp - 1), '0');
    out += ds;
  }
  return out;
}

}  // namespace capmatch

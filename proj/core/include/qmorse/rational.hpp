#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace qmorse {

using Rational = boost::rational<std::int64_t>;

/// Parses "p/q" or "p" (optional sign, surrounding whitespace ignored).
/// Throws Error("bad_rational") on malformed input or zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; integers are written without a denominator.
std::string to_string(const Rational& r);

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace qmorse

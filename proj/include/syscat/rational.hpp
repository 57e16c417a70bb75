#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace syscat {

/// Exact rational scalar used by every exact-mode computation.
/// Arbitrary precision so that deep series recursions never overflow.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long long num, long long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    return Rational(BigInt(num), BigInt(den));
}

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational rat_pow(const Rational& q, int e) {
    if (e < 0) {
        if (q == 0) throw std::domain_error("0^negative");
        return Rational(1) / rat_pow(q, -e);
    }
    Rational r(1), b(q);
    for (int k = e; k > 0; k >>= 1) {
        if (k & 1) r *= b;
        b *= b;
    }
    return r;
}

inline std::string rat_str(const Rational& q) {
    return q.str();
}

}  // namespace syscat

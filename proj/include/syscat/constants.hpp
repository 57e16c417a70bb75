#pragma once

// Universal coefficients of the boundary recursion for the mode equation:
// the rational-in-s families c_{q,s}, d_{2p+1,s} and the residue constants
// c_q = res_{s=(n+q)/2} c_{q,s}.
//
// Gamma ratios are evaluated as finite telescoping products so everything
// stays in exact rational arithmetic:
//   c_{2p,s} = (-1)^p / (2^{2p} p! * prod_{i=1..p} (s - n/2 - i)).
//
// Every evaluator is templated on the scalar ring, so the same code runs on
// plain rationals, doubles, and truncated Laurent expansions in s - s0 (the
// independent route used to verify residues).

#include <optional>
#include <vector>

#include "syscat/series.hpp"

namespace syscat {

/// Evaluation that hit a pole of c_{q,s}: location and residue are data,
/// not an error condition.
struct PoleValue {
    Rational location;  // the offending s
    Rational residue;
};

template <class C>
C factorial_ring(int m) {
    C f = ring_ops<C>::from_long(1);
    for (int i = 2; i <= m; ++i) f = f * ring_ops<C>::from_long(i);
    return f;
}

/// c_{q,s} over an arbitrary scalar ring; shalf = s - n/2.
/// Throws std::domain_error on exact division by zero (pole hit); the
/// Rational front-end below converts that into a PoleValue.
template <class C>
C c_coeff_ring(int q, const C& shalf) {
    if (q < 0) throw std::invalid_argument("c_coeff: q must be nonnegative");
    if (q == 0) return ring_ops<C>::from_long(1);
    if (q == 1) return C();
    if (q % 2 == 0) {
        int p = q / 2;
        C denom = ring_ops<C>::from_long(1 << (2 * p)) * factorial_ring<C>(p);
        C prod = ring_ops<C>::from_long(1);
        for (int i = 1; i <= p; ++i) prod = prod * (shalf - ring_ops<C>::from_long(i));
        C val = ring_ops<C>::div(ring_ops<C>::from_long(p % 2 == 0 ? 1 : -1), denom * prod);
        return val;
    }
    // odd q = 2p+1:
    //   c_{2p+1,s} = [2(-1)^{p-1} c_{2p-2,s} + c_{2p-1,s}] / [2(2p+1)(s - n/2 - p - 1/2)]
    // The half-integer shift is written as (2 shalf - (2p+1)) to stay in the ring.
    int p = (q - 1) / 2;
    C bracket = ring_ops<C>::from_long(2 * (p % 2 == 1 ? 1 : -1)) * c_coeff_ring<C>(2 * p - 2, shalf) +
                c_coeff_ring<C>(2 * p - 1, shalf);
    C denom = ring_ops<C>::from_long(2 * p + 1) *
              (ring_ops<C>::from_long(2) * shalf - ring_ops<C>::from_long(2 * p + 1));
    return ring_ops<C>::div(bracket, denom);
}

/// d_{2p+1,s} = (n + 2p - s)/(2n) * (-1)^p c_{2p,s}; smooth across
/// s = (n+2p+1)/2. The prefactor is fixed by the base case
/// d_{1,s} = (n-s)/(2n) at p = 0.
template <class C>
C d_coeff_ring(int p, const C& s, int n) {
    C shalf = s - ring_ops<C>::div(ring_ops<C>::from_long(n), ring_ops<C>::from_long(2));
    C pref = ring_ops<C>::div(ring_ops<C>::from_long(n + 2 * p) - s,
                              ring_ops<C>::from_long(2 * n));
    C sign = ring_ops<C>::from_long(p % 2 == 0 ? 1 : -1);
    return pref * sign * c_coeff_ring<C>(2 * p, shalf);
}

/// Residue of c_{q,s} at s = (n+q)/2, as a closed-form rational.
inline Rational residue_c(int q) {
    if (q < 1) throw std::invalid_argument("residue_c: q must be positive");
    if (q == 1) return Rational(0);
    if (q % 2 == 0) {
        // c_{2p} = (-1)^p [2^{2p} p! (p-1)!]^{-1}
        int p = q / 2;
        Rational denom = rat_pow(Rational(2), 2 * p) * factorial_ring<Rational>(p) *
                         factorial_ring<Rational>(p - 1);
        return Rational(p % 2 == 0 ? 1 : -1) / denom;
    }
    // c_{2p+1}: bracket of the recursion evaluated at shalf = p + 1/2,
    // divided by 2(2p+1) (the vanishing linear factor contributes the residue).
    int p = (q - 1) / 2;
    Rational shalf = Rational(2 * p + 1) / 2;
    Rational bracket = Rational(2 * (p % 2 == 1 ? 1 : -1)) * c_coeff_ring<Rational>(2 * p - 2, shalf) +
                       c_coeff_ring<Rational>(2 * p - 1, shalf);
    return bracket / Rational(2 * (2 * p + 1));
}

/// Exact Laurent expansion of c_{q,s} about s0, to the requested order in
/// t = s - s0. Independent residue oracle: coefficient of t^{-1}.
inline LaurentQ c_coeff_laurent(int q, const Rational& s0, int n, int order = 2) {
    LaurentQ s = LaurentQ(s0, order);
    s.set(1, 0, Rational(1));  // s = s0 + t
    LaurentQ shalf = s - LaurentQ(Rational(n) / 2, order);
    return c_coeff_ring<LaurentQ>(q, shalf);
}

/// Point evaluation with pole detection.
struct CValue {
    std::optional<Rational> value;    // set when finite at s
    std::optional<PoleValue> pole;    // set when s is a pole of c_{q,s}
};

inline CValue c_coeff(int q, const Rational& s, int n) {
    try {
        Rational shalf = s - Rational(n) / 2;
        return CValue{c_coeff_ring<Rational>(q, shalf), std::nullopt};
    } catch (const std::domain_error&) {
        LaurentQ lau = c_coeff_laurent(q, s, n, 1);
        return CValue{std::nullopt, PoleValue{s, lau.coeff(-1, 0)}};
    }
}

inline CValue d_coeff(int p, const Rational& s, int n) {
    try {
        return CValue{d_coeff_ring<Rational>(p, s, n), std::nullopt};
    } catch (const std::domain_error&) {
        LaurentQ sl = LaurentQ(s, 1);
        sl.set(1, 0, Rational(1));
        LaurentQ lau = d_coeff_ring<LaurentQ>(p, sl, n);
        return CValue{std::nullopt, PoleValue{s, lau.coeff(-1, 0)}};
    }
}

/// Tabulated residues and spot values for the CLI `constants` subcommand.
struct CoeffTable {
    int n = 0;
    int qmax = 0;
    std::vector<Rational> residues;                       // residues[q], q = 1..qmax
    std::vector<std::pair<Rational, std::vector<CValue>>> spot;  // (s, c_{q,s} q=1..qmax)
};

inline CoeffTable coeff_table(int n, int qmax, const std::vector<Rational>& s_values = {}) {
    CoeffTable t;
    t.n = n;
    t.qmax = qmax;
    t.residues.resize(qmax + 1);
    for (int q = 1; q <= qmax; ++q) t.residues[q] = residue_c(q);
    for (const auto& s : s_values) {
        std::vector<CValue> row(qmax + 1);
        for (int q = 1; q <= qmax; ++q) row[q] = c_coeff(q, s, n);
        t.spot.emplace_back(s, std::move(row));
    }
    return t;
}

}  // namespace syscat

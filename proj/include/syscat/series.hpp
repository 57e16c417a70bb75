#pragma once

// Truncated polyhomogeneous series  r^alpha * sum_{k,j} a_{k,j} r^k log(r)^j.
//
// This is the substrate for every formal boundary expansion in the library:
// the singular Yamabe expansion, Frobenius data of the mode ODEs, volume
// densities, and (with the coefficient ring itself a series in s - s0) exact
// Laurent expansions in the spectral parameter.
//
// Truncation is explicit metadata: coefficients with k > order() are unknown,
// not zero, and the order propagates contravariantly through arithmetic.
// Values are immutable in spirit: all operations return new series.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "syscat/rational.hpp"

namespace syscat {

// ---------------------------------------------------------------------------
// Coefficient-ring operations. Specialized for double, Rational and for
// nested series (used as truncated Laurent expansions in a parameter).
// ---------------------------------------------------------------------------

template <class C>
struct ring_ops {
    static C from_long(long v) { return C(v); }
    static bool is_zero(const C& a) { return a == C(0); }
    static C div(const C& a, const C& b) { return a / b; }
};

template <>
struct ring_ops<double> {
    static double from_long(long v) { return static_cast<double>(v); }
    static bool is_zero(double a) { return a == 0.0; }
    static double div(double a, double b) { return a / b; }
};

template <>
struct ring_ops<Rational> {
    static Rational from_long(long v) { return Rational(v); }
    static bool is_zero(const Rational& a) { return a == 0; }
    static Rational div(const Rational& a, const Rational& b) {
        if (b == 0) throw std::domain_error("exact division by zero");
        return a / b;
    }
};

// ---------------------------------------------------------------------------

template <class C>
class PolyLogSeries {
public:
    using Key = std::pair<int, int>;  // (k = power of r, j = power of log r)
    using Map = std::map<Key, C>;

    static constexpr int unbounded = 1 << 28;

    PolyLogSeries() = default;
    explicit PolyLogSeries(const C& constant, int order = unbounded) : order_(order) {
        set(0, 0, constant);
    }

    static PolyLogSeries zero(int order = unbounded) { return PolyLogSeries().truncated(order); }
    static PolyLogSeries one(int order = unbounded) {
        return PolyLogSeries(ring_ops<C>::from_long(1), order);
    }
    /// c * r^k log(r)^j as a series.
    static PolyLogSeries monomial(const C& c, int k, int j = 0, int order = unbounded) {
        PolyLogSeries s;
        s.order_ = order;
        s.set(k, j, c);
        return s;
    }

    double base_exponent() const { return base_; }
    PolyLogSeries& with_base(double alpha) {
        base_ = alpha;
        return *this;
    }

    int order() const { return order_; }
    const Map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Lowest power of r carrying a nonzero coefficient (unbounded if none).
    int valuation() const {
        int v = unbounded;
        for (const auto& [key, c] : terms_) v = std::min(v, key.first);
        return v;
    }
    int max_log_power() const {
        int j = 0;
        for (const auto& [key, c] : terms_) j = std::max(j, key.second);
        return j;
    }

    C coeff(int k, int j = 0) const {
        auto it = terms_.find(Key{k, j});
        return it == terms_.end() ? C() : it->second;
    }

    void set(int k, int j, const C& c) {
        if (ring_ops<C>::is_zero(c))
            terms_.erase(Key{k, j});
        else
            terms_[Key{k, j}] = c;
    }

    void add_term(int k, int j, const C& c) { set(k, j, coeff(k, j) + c); }

    /// Restrict the known range; terms above the new order are discarded.
    PolyLogSeries truncated(int new_order) const {
        PolyLogSeries out;
        out.base_ = base_;
        out.order_ = std::min(order_, new_order);
        for (const auto& [key, c] : terms_)
            if (key.first <= out.order_) out.terms_[key] = c;
        return out;
    }

    /// Multiply by r^dk log(r)^dj (dk may be negative).
    PolyLogSeries shifted(int dk, int dj = 0) const {
        PolyLogSeries out;
        out.base_ = base_;
        out.order_ = cap_add(order_, dk);
        for (const auto& [key, c] : terms_) out.terms_[{key.first + dk, key.second + dj}] = c;
        return out;
    }

    PolyLogSeries operator-() const {
        PolyLogSeries out = *this;
        for (auto& [key, c] : out.terms_) c = -c;
        return out;
    }

    friend PolyLogSeries operator+(const PolyLogSeries& a, const PolyLogSeries& b) {
        require_same_base(a, b);
        PolyLogSeries out;
        out.base_ = a.is_zero() ? b.base_ : a.base_;
        out.order_ = std::min(a.order_, b.order_);
        for (const auto& [key, c] : a.terms_)
            if (key.first <= out.order_) out.terms_[key] = c;
        for (const auto& [key, c] : b.terms_)
            if (key.first <= out.order_) out.add_term(key.first, key.second, c);
        return out;
    }
    friend PolyLogSeries operator-(const PolyLogSeries& a, const PolyLogSeries& b) {
        return a + (-b);
    }

    friend PolyLogSeries operator*(const PolyLogSeries& a, const PolyLogSeries& b) {
        PolyLogSeries out;
        out.base_ = a.base_ + b.base_;
        // Unknown tail of one factor meets the leading term of the other:
        // result order = min(Ka + val(b), Kb + val(a)).
        int vb = b.valuation();
        out.order_ = std::min(cap_add(a.order_, vb), cap_add(b.order_, a.valuation()));
        for (const auto& [ka, ca] : a.terms_) {
            if (cap_add(ka.first, vb) > out.order_) continue;
            for (const auto& [kb, cb] : b.terms_) {
                int k = ka.first + kb.first;
                if (k > out.order_) continue;
                out.add_term(k, ka.second + kb.second, ca * cb);
            }
        }
        return out;
    }

    friend PolyLogSeries operator*(const C& c, const PolyLogSeries& a) {
        PolyLogSeries out;
        out.base_ = a.base_;
        out.order_ = a.order_;
        if (!ring_ops<C>::is_zero(c))
            for (const auto& [key, ca] : a.terms_) out.terms_[key] = c * ca;
        return out;
    }
    friend PolyLogSeries operator*(const PolyLogSeries& a, const C& c) { return c * a; }

    bool operator==(const PolyLogSeries& o) const {
        return base_ == o.base_ && order_ == o.order_ && terms_ == o.terms_;
    }

    /// d/dr with d(log r)/dr = 1/r:
    ///   r^{a+k} log^j -> (a+k) r^{a+k-1} log^j + j r^{a+k-1} log^{j-1}.
    PolyLogSeries derivative() const {
        PolyLogSeries out;
        out.base_ = base_;
        out.order_ = order_ == unbounded ? unbounded : order_ - 1;
        for (const auto& [key, c] : terms_) {
            auto [k, j] = key;
            C fac = ring_ops<C>::from_long(k);
            if (base_ != 0.0) {
                if constexpr (std::is_same_v<C, double>)
                    fac = base_ + static_cast<double>(k);
                else
                    throw std::invalid_argument("derivative of exact series requires base exponent 0");
            }
            if (!ring_ops<C>::is_zero(fac)) out.add_term(k - 1, j, fac * c);
            if (j > 0) out.add_term(k - 1, j - 1, ring_ops<C>::from_long(j) * c);
        }
        return out;
    }

    /// Term-by-term antiderivative (no constant). Requires base exponent 0
    /// and no r^{-1} log^j terms (those integrate to log^{j+1}, handled by
    /// the caller when needed).
    PolyLogSeries integral() const {
        if (base_ != 0.0) throw std::invalid_argument("integral requires base exponent 0");
        PolyLogSeries out;
        out.order_ = order_ == unbounded ? unbounded : order_ + 1;
        for (const auto& [key, c] : terms_) {
            auto [k, j] = key;
            if (k == -1) {
                // int r^-1 log^j = log^{j+1}/(j+1)
                out.add_term(0, j + 1, ring_ops<C>::div(c, ring_ops<C>::from_long(j + 1)));
                continue;
            }
            // int r^k log^j dr by repeated integration by parts.
            C sign = ring_ops<C>::from_long(1);
            C fall = ring_ops<C>::from_long(1);  // j (j-1) ... falling factorial
            C p1 = ring_ops<C>::from_long(k + 1);
            C den = p1;
            for (int i = 0; i <= j; ++i) {
                out.add_term(k + 1, j - i, ring_ops<C>::div(sign * fall * c, den));
                sign = -sign;
                fall = fall * ring_ops<C>::from_long(j - i);
                den = den * p1;
                if (ring_ops<C>::is_zero(fall)) break;
            }
        }
        return out;
    }

    /// Multiplicative inverse. The lowest-order term must be a pure power
    /// (no log at the valuation level).
    PolyLogSeries inverse(int to_order = -1) const {
        int v = valuation();
        if (v == unbounded) throw std::domain_error("inverse of zero series");
        C lead = coeff(v, 0);
        if (ring_ops<C>::is_zero(lead))
            throw std::domain_error("inverse requires a pure-power leading term");
        for (const auto& [key, c] : terms_)
            if (key.first == v && key.second > 0)
                throw std::domain_error("inverse requires a pure-power leading term");
        if (terms_.size() == 1) {
            // Pure monomial: exactly invertible at full known range.
            PolyLogSeries out = monomial(ring_ops<C>::div(ring_ops<C>::from_long(1), lead), -v, 0,
                                         order_ == unbounded ? unbounded : order_ - 2 * v);
            out.base_ = -base_;
            if (to_order >= 0) out = out.truncated(to_order - v);
            return out;
        }
        int K = resolve_order(order_ == unbounded ? unbounded : order_ - v, to_order,
                              "inverse of unbounded series requires explicit order");
        // a = lead r^v (1 + b), 1/a = r^{-v}/lead * sum (-b)^m.
        PolyLogSeries b = shifted(-v);
        b.base_ = 0.0;
        b = ring_ops<C>::div(ring_ops<C>::from_long(1), lead) * b;
        b.set(0, 0, C());
        b = b.truncated(K);
        PolyLogSeries geom = one(K);
        PolyLogSeries pw = one(K);
        for (int m = 1; m <= K && !b.is_zero(); ++m) {
            pw = (pw * (-b)).truncated(K);
            if (pw.is_zero()) break;
            geom = geom + pw;
        }
        PolyLogSeries out = (ring_ops<C>::div(ring_ops<C>::from_long(1), lead) * geom).shifted(-v);
        out.base_ = -base_;
        return out;
    }

    friend PolyLogSeries operator/(const PolyLogSeries& a, const PolyLogSeries& b) {
        return a * b.inverse();
    }

    /// Substitute r -> g(r) where g has valuation >= 1 and no logs.
    /// Both series must be log-free.
    PolyLogSeries compose(const PolyLogSeries& g, int to_order = -1) const {
        if (max_log_power() > 0 || g.max_log_power() > 0)
            throw std::invalid_argument("compose requires log-free series");
        if (g.valuation() < 1 && !g.is_zero())
            throw std::invalid_argument("compose requires inner valuation >= 1");
        if (valuation() < 0) throw std::invalid_argument("compose requires nonnegative powers");
        int K = resolve_order(std::min(order_, g.order_), to_order,
                              "compose of unbounded series requires explicit order");
        // Horner in decreasing k.
        PolyLogSeries out = zero(K);
        int kmax = 0;
        for (const auto& [key, c] : terms_) kmax = std::max(kmax, key.first);
        for (int k = std::min(kmax, K); k >= 0; --k) {
            out = (out * g).truncated(K);
            C ck = coeff(k, 0);
            if (!ring_ops<C>::is_zero(ck)) out.add_term(0, 0, ck);
        }
        return out;
    }

    /// Compositional inverse of a log-free series with valuation exactly 1.
    PolyLogSeries reversion(int to_order = -1) const {
        if (max_log_power() > 0) throw std::invalid_argument("reversion requires log-free series");
        if (valuation() != 1) throw std::invalid_argument("reversion requires valuation 1");
        int K = resolve_order(order_, to_order, "reversion of unbounded series requires explicit order");
        C c1 = coeff(1, 0);
        PolyLogSeries t = monomial(ring_ops<C>::div(ring_ops<C>::from_long(1), c1), 1, 0, 1);
        PolyLogSeries id = monomial(ring_ops<C>::from_long(1), 1, 0, K);
        // Newton iteration t <- t - (f(t) - id)/f'(t).
        PolyLogSeries fp = derivative();
        int known = 1;
        while (known < K) {
            known = std::min(2 * known, K);
            PolyLogSeries tt = t.truncated(known);
            tt.order_ = known;
            PolyLogSeries err = compose_at(*this, tt, known) - id.truncated(known);
            PolyLogSeries slope = compose_at(fp, tt, known);
            t = tt - (err * slope.inverse(known)).truncated(known);
        }
        t.order_ = K;
        return t;
    }

    /// exp(a) for a with base 0 and valuation >= 1.
    PolyLogSeries exp(int to_order = -1) const {
        if (base_ != 0.0) throw std::invalid_argument("exp requires base exponent 0");
        if (!is_zero() && valuation() < 1)
            throw std::invalid_argument("exp requires vanishing constant and log-leading terms");
        int K = resolve_order(order_, to_order, "exp of unbounded series requires explicit order");
        PolyLogSeries a = truncated(K);
        PolyLogSeries out = one(K);
        PolyLogSeries pw = one(K);
        C fact = ring_ops<C>::from_long(1);
        for (int m = 1; m <= K && !a.is_zero(); ++m) {
            pw = (pw * a).truncated(K);
            if (pw.is_zero()) break;
            fact = fact * ring_ops<C>::from_long(m);
            out = out + ring_ops<C>::div(ring_ops<C>::from_long(1), fact) * pw;
        }
        return out;
    }

    /// log(a) for a with leading coefficient 1 at (0,0).
    PolyLogSeries log(int to_order = -1) const {
        if (base_ != 0.0) throw std::invalid_argument("log requires base exponent 0");
        if (!(coeff(0, 0) == ring_ops<C>::from_long(1)))
            throw std::domain_error("non-unit leading term");
        for (const auto& [key, c] : terms_)
            if (key.first <= 0 && !(key.first == 0 && key.second == 0))
                throw std::domain_error("non-unit leading term");
        int K = resolve_order(order_, to_order, "log of unbounded series requires explicit order");
        PolyLogSeries b = truncated(K);
        b.set(0, 0, C());
        PolyLogSeries out = zero(K);
        PolyLogSeries pw = one(K);
        C sign = ring_ops<C>::from_long(1);
        for (int m = 1; m <= K && !b.is_zero(); ++m) {
            pw = (pw * b).truncated(K);
            if (pw.is_zero()) break;
            out = out + ring_ops<C>::div(sign, ring_ops<C>::from_long(m)) * pw;
            sign = -sign;
        }
        return out;
    }

    /// Integer power.
    PolyLogSeries pow(int e) const {
        if (e < 0) return inverse().pow(-e);
        PolyLogSeries out = one(order_);
        out.base_ = 0.0;
        PolyLogSeries b = *this;
        for (int k = e; k > 0; k >>= 1) {
            if (k & 1) out = out * b;
            if (k > 1) b = b * b;
        }
        return out;
    }

    /// Evaluate at r > 0 (float coefficients only; includes r^alpha and logs).
    double eval(double r) const {
        static_assert(std::is_same_v<C, double> || std::is_same_v<C, Rational>,
                      "eval requires scalar coefficients");
        double lr = std::log(r);
        double acc = 0.0;
        for (const auto& [key, c] : terms_) {
            double cv;
            if constexpr (std::is_same_v<C, double>)
                cv = c;
            else
                cv = to_double(c);
            acc += cv * std::pow(r, key.first) * std::pow(lr, key.second);
        }
        return acc * (base_ == 0.0 ? 1.0 : std::pow(r, base_));
    }

    static PolyLogSeries compose_at(const PolyLogSeries& f, const PolyLogSeries& g, int K) {
        return f.compose(g, K);
    }

private:
    static int cap_add(int a, int b) {
        if (a >= unbounded || b >= unbounded) return unbounded;
        long s = static_cast<long>(a) + b;
        return s >= unbounded ? unbounded : static_cast<int>(s);
    }
    static int resolve_order(int own, int requested, const char* msg) {
        int K = own;
        if (requested >= 0) K = std::min(K, requested);
        if (K >= unbounded) throw std::invalid_argument(msg);
        return K;
    }
    static void require_same_base(const PolyLogSeries& a, const PolyLogSeries& b) {
        if (a.base_ != b.base_ && !a.is_zero() && !b.is_zero())
            throw std::invalid_argument("base exponent mismatch in series addition");
    }

    double base_ = 0.0;
    int order_ = unbounded;
    Map terms_;
};

/// (r e^w)^alpha = r^alpha exp(alpha w) for w with base 0 and w(0) = 0.
inline PolyLogSeries<double> series_rpow(const PolyLogSeries<double>& w, double alpha,
                                         int to_order = -1) {
    PolyLogSeries<double> s = (alpha * w).exp(to_order);
    s.with_base(alpha);
    return s;
}

/// Exact-to-float coefficient promotion.
inline PolyLogSeries<double> promote(const PolyLogSeries<Rational>& a) {
    PolyLogSeries<double> out;
    out.with_base(a.base_exponent());
    out = out.truncated(a.order());
    for (const auto& [key, c] : a.terms()) out.set(key.first, key.second, to_double(c));
    return out;
}

using SeriesD = PolyLogSeries<double>;
using SeriesQ = PolyLogSeries<Rational>;
/// Truncated Laurent expansion in an auxiliary parameter (e.g. s - s0),
/// exact coefficients. Negative powers carry pole parts.
using LaurentQ = PolyLogSeries<Rational>;
using LaurentD = PolyLogSeries<double>;

// Nested-series ring (Laurent coefficients inside an r-series).
template <class C>
struct ring_ops<PolyLogSeries<C>> {
    static PolyLogSeries<C> from_long(long v) {
        PolyLogSeries<C> s;
        s.set(0, 0, ring_ops<C>::from_long(v));
        return s;
    }
    static bool is_zero(const PolyLogSeries<C>& a) { return a.is_zero(); }
    static PolyLogSeries<C> div(const PolyLogSeries<C>& a, const PolyLogSeries<C>& b) {
        return a * b.inverse();
    }
};

}  // namespace syscat

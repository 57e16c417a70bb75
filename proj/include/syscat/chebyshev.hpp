#pragma once

// Chebyshev interpolation on [a,b]: Gauss-Lobatto sampling, Clenshaw
// evaluation, spectral differentiation. Used for dense output of BVP
// solutions and cached coordinate maps. The long-double instantiation keeps
// round-off out of differentiated defect evaluations.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace syscat {

template <class Real>
class BasicChebFun {
public:
    BasicChebFun() = default;

    /// Gauss-Lobatto nodes on [a,b], ascending, N+1 points.
    static std::vector<double> nodes(int N, double a, double b) {
        std::vector<double> x(N + 1);
        for (int k = 0; k <= N; ++k)
            x[N - k] = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(M_PI * k / N);
        return x;
    }

    /// Build from values at nodes(N, a, b) (ascending order).
    template <class V>
    static BasicChebFun from_values(const std::vector<V>& vals, double a, double b) {
        int N = static_cast<int>(vals.size()) - 1;
        if (N < 1) throw std::invalid_argument("ChebFun needs at least 2 samples");
        BasicChebFun f;
        f.a_ = a;
        f.b_ = b;
        f.c_.assign(N + 1, Real(0));
        // vals[k] corresponds to cos(pi k / N) with k = N - index.
        for (int j = 0; j <= N; ++j) {
            long double acc = 0.0L;
            for (int k = 0; k <= N; ++k) {
                long double w = (k == 0 || k == N) ? 0.5L : 1.0L;
                acc += w * static_cast<long double>(vals[N - k]) *
                       cosl(M_PI * static_cast<long double>(j) * k / N);
            }
            f.c_[j] = static_cast<Real>(2.0L * acc / N);
        }
        f.c_[0] *= Real(0.5);
        f.c_[N] *= Real(0.5);
        return f;
    }

    Real operator()(double x) const {
        // Clenshaw recurrence on t in [-1,1].
        Real t = Real(2) * (Real(x) - Real(0.5) * (Real(a_) + Real(b_))) / (Real(b_) - Real(a_));
        Real b1 = 0, b2 = 0;
        for (int j = static_cast<int>(c_.size()) - 1; j >= 1; --j) {
            Real tmp = Real(2) * t * b1 - b2 + c_[j];
            b2 = b1;
            b1 = tmp;
        }
        return t * b1 - b2 + c_[0];
    }

    BasicChebFun derivative() const {
        int N = static_cast<int>(c_.size()) - 1;
        BasicChebFun d;
        d.a_ = a_;
        d.b_ = b_;
        d.c_.assign(std::max(N, 1), Real(0));
        std::vector<Real> b(N + 2, Real(0));
        for (int j = N; j >= 1; --j) b[j - 1] = b[j + 1] + Real(2 * j) * c_[j];
        b[0] *= Real(0.5);
        Real scale = Real(2) / (Real(b_) - Real(a_));
        for (int j = 0; j < static_cast<int>(d.c_.size()); ++j) d.c_[j] = scale * b[j];
        return d;
    }

    double lo() const { return a_; }
    double hi() const { return b_; }
    const std::vector<Real>& coeffs() const { return c_; }

private:
    double a_ = -1.0, b_ = 1.0;
    std::vector<Real> c_;
};

using ChebFun = BasicChebFun<double>;
using ChebFunLD = BasicChebFun<long double>;

/// Monotone-function inverse by safeguarded Newton on a ChebFun.
inline double cheb_invert(const ChebFun& f, const ChebFun& fprime, double y, double guess) {
    double lo = f.lo(), hi = f.hi();
    double x = std::min(hi, std::max(lo, guess));
    for (int it = 0; it < 50; ++it) {
        double err = f(x) - y;
        double step = err / fprime(x);
        double xn = x - step;
        if (xn < lo) xn = 0.5 * (x + lo);
        if (xn > hi) xn = 0.5 * (x + hi);
        if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

}  // namespace syscat

#pragma once

// Analytic radial profiles. Derivatives are computed by rule, never by
// differencing: boundary-jet checks need third and fourth derivatives and
// differencing would dominate every error budget.
//
// Bases:
//   poly      phi(x) = sum_j c_j x^j           (exact jets when coefficients
//                                               are rational)
//   trig_cos  phi(x) = c_0 + sum_{m>=1} c_m cos(m pi x)    (slab profiles)
//   trig_sin  phi(x) = sum_{m>=0} c_m sin((m+1) x)         (ball profiles)

#include <cmath>
#include <vector>

#include "syscat/series.hpp"

namespace syscat {

class Profile {
public:
    enum class Basis { Poly, TrigCos, TrigSin };

    Profile() = default;
    Profile(Basis basis, std::vector<Rational> coeffs) : basis_(basis), cq_(std::move(coeffs)) {
        for (const auto& q : cq_) c_.push_back(to_double(q));
    }
    static Profile poly(std::vector<Rational> coeffs) {
        return Profile(Basis::Poly, std::move(coeffs));
    }

    Basis basis() const { return basis_; }
    const std::vector<Rational>& coeffs() const { return cq_; }
    bool exact_capable() const { return basis_ == Basis::Poly; }

    double operator()(double x) const { return deriv(x, 0); }

    double deriv(double x, int order) const {
        double acc = 0.0;
        switch (basis_) {
            case Basis::Poly: {
                // Horner on the order-th derivative polynomial.
                for (int j = static_cast<int>(c_.size()) - 1; j >= order; --j) {
                    double f = 1.0;
                    for (int i = 0; i < order; ++i) f *= static_cast<double>(j - i);
                    acc = acc * x + f * c_[j];
                }
                return acc;
            }
            case Basis::TrigCos:
                if (order == 0 && !c_.empty()) acc += c_[0];
                for (size_t m = 1; m < c_.size(); ++m) {
                    double w = static_cast<double>(m) * M_PI;
                    acc += c_[m] * std::pow(w, order) * std::cos(w * x + order * M_PI / 2);
                }
                return acc;
            case Basis::TrigSin:
                for (size_t m = 0; m < c_.size(); ++m) {
                    double w = static_cast<double>(m + 1);
                    acc += c_[m] * std::pow(w, order) * std::sin(w * x + order * M_PI / 2);
                }
                return acc;
        }
        return acc;
    }

    /// Float Taylor series about x0 (coefficients f^(k)(x0)/k!).
    SeriesD taylor(double x0, int K) const {
        SeriesD s = SeriesD::zero(K);
        double fact = 1.0;
        for (int k = 0; k <= K; ++k) {
            if (k > 0) fact *= k;
            s.set(k, 0, deriv(x0, k) / fact);
        }
        return s;
    }

    /// Exact Taylor about a rational point; poly basis only. Classic
    /// Taylor shift by repeated synthetic division by (x - x0).
    SeriesQ taylor_exact(const Rational& x0, int K) const {
        if (basis_ != Basis::Poly)
            throw std::invalid_argument("exact jets require polynomial profiles");
        std::vector<Rational> work = cq_;
        SeriesQ s = SeriesQ::zero(K);
        int k = 0;
        while (!work.empty() && k <= K) {
            for (size_t j = work.size() - 1; j-- > 0;) work[j] += work[j + 1] * x0;
            s.set(k++, 0, work.front());
            work.erase(work.begin());
        }
        return s;
    }

private:
    Basis basis_ = Basis::Poly;
    std::vector<double> c_;
    std::vector<Rational> cq_;
};

}  // namespace syscat

#pragma once

// Renormalized volume ledger. The volume density of g = u^{-2} gbar on a
// model geometry reduces to the radial integral
//
//   vol_g({r > eps}) = components * int_eps^R u(r)^{-(n+1)} A(r) dr,
//
// and its eps-expansion is handled by exact subtraction: the boundary series
// of the integrand (built from the formal expansion, including the first log
// layer and the fitted free coefficient) is integrated term by term, so the
// ladder fit only has to determine the finite part and a correction to the
// log coefficient.

#include <boost/math/quadrature/gauss.hpp>
#include <functional>

#include "syscat/constants.hpp"
#include "syscat/yamabe.hpp"

namespace syscat {

struct FitDiagnostics {
    double cond = 0;   // condition number of the 2x2 normal matrix
    double resid = 0;  // max |J - model| over the ladder
    double err = 0;    // spread-based error estimate for the finite part
};

struct FinitePartResult {
    double value = 0;      // finite part
    double log_coeff = 0;  // coefficient of log(1/eps) (formal + fitted delta)
    double log_coeff_formal = 0;
    FitDiagnostics fit;
};

/// Gauss-Legendre on log-graded panels: [a, mid] geometric, [mid, b] uniform.
inline double integrate_graded(const std::function<double(double)>& f, double a, double b,
                               double grade_until = -1) {
    using gauss = boost::math::quadrature::gauss<double, 30>;
    double mid = grade_until > 0 ? grade_until : std::min(0.3 * b, 64 * a);
    mid = std::clamp(mid, a, b);
    double acc = 0.0;
    double lo = a;
    while (lo < mid * 0.999999) {
        double hi = std::min(lo * 1.6, mid);
        acc += gauss::integrate(f, lo, hi);
        lo = hi;
    }
    int panels = 8;
    for (int k = 0; k < panels; ++k) {
        double p0 = mid + (b - mid) * k / panels;
        double p1 = mid + (b - mid) * (k + 1) / panels;
        acc += gauss::integrate(f, p0, p1);
    }
    return acc;
}

/// Finite part of int_{r>eps} Phi dr given the boundary series of Phi
/// (negative powers and logs allowed, truncated so that the remainder is
/// o(1) after integration). `phi` must be integrable away from 0.
inline FinitePartResult finite_part_integral(const std::function<double(double)>& phi,
                                             const SeriesD& phi_series, double R_end,
                                             double ladder_hi, double ladder_lo) {
    FinitePartResult out;
    SeriesD anti = phi_series.integral();
    // I(eps) = Anti(R) - Anti(eps): a log r term in Anti contributes
    // +a log(1/eps) to the expansion of the integral.
    out.log_coeff_formal = anti.coeff(0, 1);

    // ladder of J(eps) = int_eps^R phi + anti(eps): constant + residual log part
    std::vector<double> eps, J;
    double tail = integrate_graded(phi, ladder_hi, R_end);
    double e = ladder_hi;
    std::vector<double> cut;
    while (e > ladder_lo) {
        cut.push_back(e);
        e *= 0.85;
    }
    eps.push_back(ladder_hi);
    J.push_back(tail + anti.eval(ladder_hi));
    double acc = tail;
    for (size_t i = 0; i + 1 < cut.size(); ++i) {
        acc += integrate_graded(phi, cut[i + 1], cut[i], cut[i]);
        eps.push_back(cut[i + 1]);
        J.push_back(acc + anti.eval(cut[i + 1]));
    }
    if (eps.size() < 6) throw std::invalid_argument("finite-part ladder too short");

    // J(eps) = V + dE log(1/eps) + a eps + O(eps^2 log eps): the linear term
    // absorbs the error of the fitted free coefficient in the subtraction,
    // the quadratic ones the first orders past the subtracted series.
    const int m = static_cast<int>(eps.size());
    const int q = 5;
    Eigen::MatrixXd A(m, q);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) {
        double L = std::log(1.0 / eps[i]);
        A(i, 0) = 1.0;
        A(i, 1) = L;
        A(i, 2) = eps[i];
        A(i, 3) = eps[i] * eps[i] * L;
        A(i, 4) = eps[i] * eps[i];
        rhs(i) = J[i];
    }
    Eigen::VectorXd scale(q);
    for (int j = 0; j < q; ++j) {
        scale(j) = A.col(j).norm();
        A.col(j) /= scale(j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.fit.cond = svd.singularValues()(0) / svd.singularValues()(q - 1);
    if (out.fit.cond > 1e8) throw std::runtime_error("ill-conditioned finite-part fit");
    Eigen::VectorXd cf = svd.solve(rhs);
    double V = cf(0) / scale(0);
    double dE = cf(1) / scale(1);
    double worst = (A * cf - rhs).lpNorm<Eigen::Infinity>();
    out.fit.resid = worst;
    // refit on the lower half of the ladder as an error estimate
    {
        int m2 = m / 2;
        Eigen::MatrixXd A2 = A.bottomRows(m2);
        Eigen::VectorXd r2 = rhs.tail(m2);
        Eigen::VectorXd c2 = A2.colPivHouseholderQr().solve(r2);
        out.fit.err = std::abs(V - c2(0) / scale(0)) + worst;
    }
    out.value = V;
    out.log_coeff = out.log_coeff_formal + dE;
    return out;
}

struct VolumeLedger {
    int n = 0;
    std::vector<double> c;       // c_0 .. c_{n-1}, total over components
    std::vector<double> v;       // v^(1) .. v^(n)
    double vn_integral = 0;      // ∮ v^(n) dv_k (raw log coefficient, formal)
    double log_coeff_fit = 0;    // raw log coefficient from the ladder fit
    double energy = 0;           // E = log coefficient / (2 c_n): matches ∮ Q_n dv_k
    double V = 0;                // finite part
    FitDiagnostics fit;
};

inline VolumeLedger volume_expansion(const SYSolution& sol, const ModelGeometry& g) {
    int n = g.n;
    VolumeLedger led;
    led.n = n;
    double A0 = g.vol_k();
    double comps = g.components();

    SeriesD ut = sol.formal.truncated(n + 1);
    SeriesD ut_aug = ut;
    ut_aug.add_term(n + 1, 0, sol.C_fit);

    RadialSeriesData<double> rs = radial_series(g, n + 1);
    SeriesD W = (ut.pow(-(n + 1)) * rs.Aratio.truncated(n + 1)).truncated(n + 1);
    SeriesD W_aug = (ut_aug.pow(-(n + 1)) * rs.Aratio.truncated(n + 1)).truncated(n + 1);

    led.v.assign(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) led.v[j] = W.coeff(j, 0);
    led.c.assign(n, 0.0);
    for (int k = 0; k < n; ++k) led.c[k] = comps * A0 * W.coeff(k, 0) / (n - k);
    led.vn_integral = comps * A0 * W.coeff(n, 0);

    // integrand and its boundary series (phi = comps * A0 W r^{-1-n})
    auto phi = [&](double r) {
        return comps * std::pow(sol.u(r), -(n + 1)) * g.A(r);
    };
    SeriesD phis = (comps * A0) * W_aug.shifted(-1 - n);

    double hi = std::min(0.012, 0.25 * g.domain_end());
    double lo = std::max(1.35 * sol.eps, 1e-3);
    FinitePartResult fp = finite_part_integral(phi, phis, g.domain_end(), hi, lo);
    led.log_coeff_fit = fp.log_coeff;
    led.V = fp.value;
    led.fit = fp.fit;
    double cn = to_double(residue_c(n));
    led.energy = fp.log_coeff / (2.0 * cn);
    return led;
}

}  // namespace syscat

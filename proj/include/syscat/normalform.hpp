#pragma once

// Geodesic gauge: rhat = u e^{omega} with omega solving the radial
// first-order equation
//
//   2 w' + 2 r (u~'/u~) w' + r (w')^2 = (1 - u~^2 - r^2 (u~')^2 - 2 r u~ u~')
//                                       / (r u~^2),
//
// so that |d rhat| = 1 for the compactified metric, equivalently
// u' + u w' = 1 on the collar. Both a formal series solution (jets at the
// boundary, log layer included) and a numeric ODE solution are produced;
// their agreement and the induced normal-form identities are the checks.

#include <boost/numeric/odeint.hpp>

#include "syscat/yamabe.hpp"

namespace syscat {

struct GeodesicGauge {
    int n = 0;
    SeriesD omega_series;  // boundary series of omega, log layer included
    double omega_r = 0, omega_rr = 0, omega_rrr = 0;  // formal jets (rrr: n >= 3)
    double log_coeff = 0;  // coefficient of r^{n+1} log r in omega

    double collar_end = 0;
    ChebFun omega_grid;  // numeric omega on [0, collar_end]
    double defining_residual = 0;  // sup |u' + u w' - 1| on the collar

    // numerically extracted jets (Richardson ladders on the ODE solution)
    double num_r = 0, num_rr = 0, num_rrr = 0;

    double omega(double r) const { return omega_grid(r); }
};

namespace detail {

/// Formal series solution of the gauge equation from the formal u~ series.
inline SeriesD omega_formal_series(const SeriesD& ut, int n, int K) {
    SeriesD U = ut.truncated(K + 1);
    SeriesD Up = U.derivative().truncated(K);
    SeriesD r = SeriesD::monomial(1.0, 1, 0, K + 1);
    SeriesD Uinv = U.inverse(K);
    SeriesD B = SeriesD(2.0, K) + 2.0 * (r * Up * Uinv).truncated(K);
    SeriesD num = SeriesD::one(K + 1) - (U * U).truncated(K + 1) -
                  (r * r * Up * Up).truncated(K + 1) - 2.0 * (r * U * Up).truncated(K + 1);
    num.set(0, 0, 0.0);  // exact cancellation of the constant term
    SeriesD rhs = (num.shifted(-1) * (Uinv * Uinv).truncated(K)).truncated(K);
    // w' = (-B + sqrt(B^2 + 4 r rhs)) / (2r), sqrt via exp(log/2)
    SeriesD Q = (B * B + 4.0 * (r * rhs).truncated(K + 1)).truncated(K);
    SeriesD Qn = 0.25 * Q;
    Qn.set(0, 0, 1.0);
    SeriesD root = 2.0 * (0.5 * Qn.log(K)).exp(K);
    SeriesD numer = root - B;
    numer.set(0, 0, 0.0);  // leading terms cancel by construction
    SeriesD wp = 0.5 * numer.shifted(-1);
    return wp.integral().truncated(K);
}

}  // namespace detail

/// Build the geodesic gauge for a solved geometry.
inline GeodesicGauge geodesic_gauge(const SYSolution& sol, const ModelGeometry& g) {
    GeodesicGauge gauge;
    int n = g.n;
    gauge.n = n;
    gauge.omega_series = detail::omega_formal_series(sol.formal, n, n + 2);
    gauge.omega_r = gauge.omega_series.coeff(1, 0);
    gauge.omega_rr = 2.0 * gauge.omega_series.coeff(2, 0);
    gauge.omega_rrr = n >= 3 ? 6.0 * gauge.omega_series.coeff(3, 0)
                             : std::numeric_limits<double>::quiet_NaN();
    gauge.log_coeff = gauge.omega_series.coeff(n + 1, 1);

    // numeric omega: pointwise slope from the quadratic formula
    auto slope = [&](double r) {
        double ut = sol.utilde(r), up = (sol.u_r(r) - ut) / r;  // u~' from u'
        double B = 2.0 + 2.0 * r * up / ut;
        double num = 1.0 - ut * ut - r * r * up * up - 2.0 * r * ut * up;
        double rhs = num / (r * ut * ut);
        double disc = B * B + 4.0 * r * rhs;
        if (disc <= 0) throw std::runtime_error("collar exhausted");
        return (-B + std::sqrt(disc)) / (2.0 * r);
    };
    double end = 0.5 * g.domain_end();
    gauge.collar_end = end;
    const int N = 64;
    std::vector<double> nodes = ChebFun::nodes(N, 0.0, end);
    std::vector<double> vals(nodes.size(), 0.0);
    namespace odeint = boost::numeric::odeint;
    using state = std::array<double, 1>;
    auto sys = [&](const state& y, state& dy, double r) { dy[0] = slope(r); };
    double r0 = 1e-4;
    state y{gauge.omega_series.eval(r0)};
    auto stepper = odeint::make_controlled(1e-14, 1e-14,
                                           odeint::runge_kutta_fehlberg78<state>());
    double rcur = r0;
    for (size_t i = 1; i < nodes.size(); ++i) {
        odeint::integrate_adaptive(stepper, sys, y, rcur, nodes[i], (nodes[i] - rcur) / 8);
        rcur = nodes[i];
        vals[i] = y[0];
        if (std::abs(y[0]) > 5.0) throw std::runtime_error("collar exhausted");
    }
    vals[0] = 0.0;
    gauge.omega_grid = ChebFun::from_values(vals, 0.0, end);

    // defining property |d rhat| = 1  <=>  u' + u (d omega/dr) = 1, with the
    // derivative taken from the integrated solution
    ChebFun omder = gauge.omega_grid.derivative();
    double worst = 0;
    for (double r = std::max(2 * sol.eps, 0.01); r < end; r += end / 37) {
        worst = std::max(worst, std::abs(sol.u_r(r) + sol.u(r) * omder(r) - 1.0));
    }
    gauge.defining_residual = worst;

    // Jets from the numeric solution: Richardson ladders on the difference
    // against the formal series. The difference vanishes to high order when
    // the formal jets are right, so the ladders see any low-order defect at
    // full precision without the log layer breaking the extrapolation.
    {
        auto D = [&](double r) { return gauge.omega_grid(r) - gauge.omega_series.eval(r); };
        double r = std::min(0.1, 0.45 * end);
        auto extract = [&](auto f) {
            double a = 2 * f(r / 2) - f(r);
            double b = 2 * f(r / 4) - f(r / 2);
            return (4 * b - a) / 3;
        };
        double d1 = extract([&](double rr) { return D(rr) / rr; });
        gauge.num_r = gauge.omega_r + d1;
        double d2 = extract([&](double rr) { return 2 * (D(rr) - d1 * rr) / (rr * rr); });
        gauge.num_rr = gauge.omega_rr + d2;
        if (n >= 3) {
            double d3 = extract([&](double rr) {
                return 6 * (D(rr) - d1 * rr - 0.5 * d2 * rr * rr) / (rr * rr * rr);
            });
            gauge.num_rrr = gauge.omega_rrr + d3;
        }
    }
    return gauge;
}

/// Residuals of the geodesic normal-form identities, computed from the
/// numerically extracted gauge jets and the boundary invariants. For n = 2
/// only the first two are meaningful.
struct NormalFormReport {
    double resid_H = 0;      // mean curvature of the geodesic representative
    double resid_Rbar = 0;   // ambient scalar at the boundary vs n/(n-1)(R - |Lo|^2)
    double resid_dRbar = 0;  // its radial derivative vs the contraction identity
    double rhat_ratio_resid = 0;  // rhat/r -> 1 at the boundary
};

inline NormalFormReport normal_form_check(const GeodesicGauge& gauge, const SYSolution& sol,
                                          const ModelGeometry& g) {
    NormalFormReport rep;
    BoundaryInvariants b = g.boundary_invariants();
    int n = g.n;
    double p1 = gauge.num_r, p2 = gauge.num_rr, p3 = gauge.num_rrr;
    double P0 = -b.H;                      // trace term at the boundary
    rep.resid_H = std::abs(b.H - n * p1);  // e^{-w}(H - n w_r) at w = 0
    double law = b.Rbar - 2 * n * (p2 + P0 * p1) - n * (n - 1) * p1 * p1;
    double target = n / (n - 1.0) * (b.R - b.LoNormSq);
    rep.resid_Rbar = std::abs(law - target);
    if (n >= 3) {
        // d/dr of the conformal law at r = 0 (rhat-derivative = e^{-w} d/dr)
        double lap0 = p2 + P0 * p1;
        // P'(0) = -(|L|^2 + Rbar00), with |L|^2 = |Lo|^2 + H^2/n
        double dP0 = -(b.LoNormSq + b.H * b.H / n + b.Rbar00);
        double dlaw = -2 * p1 * (b.Rbar - 2 * n * lap0 - n * (n - 1) * p1 * p1) + b.dRbar -
                      2 * n * (p3 + dP0 * p1 + P0 * p2) - 2 * n * (n - 1) * p1 * p2;
        double lo_rbarhat = b.lo_dot_rbar_ric() + (n - 1) * p1 * b.LoNormSq;
        double dtarget = 4.0 * n / (n - 2) * b.lo_dot_ric() - 2.0 * n / (n - 2) * lo_rbarhat;
        rep.resid_dRbar = std::abs(dlaw - dtarget);
    }
    double r = std::max(4 * sol.eps, 0.005);
    rep.rhat_ratio_resid = std::abs(sol.u(r) * std::exp(gauge.omega(r)) / r - 1.0) / r;
    return rep;
}

/// Closed-form gauge jets in terms of boundary invariants; the third jet
/// uses the (n-2) reading of the displayed denominator (n >= 3 only).
inline std::array<double, 3> gauge_jets_closed_form(const BoundaryInvariants& b) {
    int n = b.n;
    double w1 = b.H / n;
    double w2 = (1.0 + n) / (2.0 * n * n) * b.H * b.H + b.Rbar / (2.0 * n) -
                b.R / (2.0 * (n - 1)) + b.LoNormSq / (2.0 * (n - 1));
    double w3 = std::numeric_limits<double>::quiet_NaN();
    if (n >= 3) {
        double H = b.H;
        w3 = (1.0 / (n - 2)) * b.lo_dot_rbar_ric() - (2.0 / (n - 2)) * b.lo_dot_ric() +
             b.dRbar / (2.0 * n) + (n * n + 2.0 * n + 1) / (2.0 * n * n * n) * H * H * H +
             (n + 1.0) / (2.0 * n * n) * H * b.Rbar - (n + 2.0) / (2.0 * n * (n - 1)) * H * b.R +
             (3.0 * n * n - 4 * n - 2) / (2.0 * n * (n - 1) * (n - 2)) * H * b.LoNormSq;
    }
    return {w1, w2, w3};
}

}  // namespace syscat

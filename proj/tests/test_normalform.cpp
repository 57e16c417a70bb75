#include <catch2/catch_amalgamated.hpp>

#include "syscat/normalform.hpp"

using namespace syscat;

namespace {

ModelGeometry euclid_ball(int n) { return ModelGeometry::make_ball(n, Profile::poly({0, 1})); }

ModelGeometry sym_slab_n2() {
    return ModelGeometry::make_slab(
        2, {Profile::poly({1, 1, -1}), Profile::poly({1, -1, 1})}, true);
}

ModelGeometry sym_slab_n3() {
    return ModelGeometry::make_slab(
        3, {Profile::poly({1, 1, -1}), Profile::poly({1, -1, 1}), Profile::poly({1})}, true);
}

ModelGeometry sin_ball(int n) {
    return ModelGeometry::make_ball(n, Profile(Profile::Basis::TrigSin, {1}));
}

}  // namespace

TEST_CASE("gauge jets against closed forms", "[normalform]") {
    for (const auto& g : {euclid_ball(3), sym_slab_n2(), sym_slab_n3(), sin_ball(3)}) {
        SYSolution sol = sy_global_solve(g);
        GeodesicGauge gauge = geodesic_gauge(sol, g);
        BoundaryInvariants b = g.boundary_invariants();
        auto cf = gauge_jets_closed_form(b);
        INFO("n = " << g.n << " kind " << (g.kind == GeomKind::WarpedBall ? "ball" : "slab"));
        CHECK(gauge.omega_r == Catch::Approx(b.H / g.n).margin(1e-12));
        CHECK(gauge.omega_rr == Catch::Approx(cf[1]).margin(1e-11));
        if (g.n >= 3) CHECK(gauge.omega_rrr == Catch::Approx(cf[2]).margin(1e-10));
        // numeric-ODE jets agree with the formal/closed-form ones
        CHECK(gauge.num_r == Catch::Approx(cf[0]).margin(1e-8));
        CHECK(gauge.num_rr == Catch::Approx(cf[1]).margin(1e-8));
        if (g.n >= 3) CHECK(gauge.num_rrr == Catch::Approx(cf[2]).margin(1e-8));
    }
}

TEST_CASE("Euclidean ball gauge jets specialize", "[normalform]") {
    // H = n, R = n(n-1), Rbar = 0, Lo = 0: w_r = 1
    ModelGeometry g = euclid_ball(3);
    SYSolution sol = sy_global_solve(g);
    GeodesicGauge gauge = geodesic_gauge(sol, g);
    CHECK(gauge.omega_r == Catch::Approx(1.0).margin(1e-12));
    double w2 = (1.0 + 3) / (2.0 * 9) * 9 - 6.0 / (2 * 2);  // (1+n)/(2n^2)H^2 - R/(2(n-1))
    CHECK(gauge.omega_rr == Catch::Approx(w2).margin(1e-11));
}

TEST_CASE("normal form identities", "[normalform]") {
    for (const auto& g : {euclid_ball(3), sym_slab_n3(), sin_ball(3), sym_slab_n2()}) {
        SYSolution sol = sy_global_solve(g);
        GeodesicGauge gauge = geodesic_gauge(sol, g);
        NormalFormReport rep = normal_form_check(gauge, sol, g);
        INFO("n = " << g.n << " kind " << (g.kind == GeomKind::WarpedBall ? "ball" : "slab"));
        CHECK(rep.resid_H < 1e-8);
        CHECK(rep.resid_Rbar < 1e-8);
        if (g.n >= 3) CHECK(rep.resid_dRbar < 1e-8);
        CHECK(gauge.defining_residual < 1e-9);
        CHECK(rep.rhat_ratio_resid < 1.0);  // rhat/r - 1 = O(r)
    }
}

TEST_CASE("geodesic representative of the Euclidean ball", "[normalform]") {
    // Rbar-hat at the boundary: (n/(n-1)) R(S^n) = n^2
    for (int n : {2, 3}) {
        ModelGeometry g = euclid_ball(n);
        SYSolution sol = sy_global_solve(g);
        GeodesicGauge gauge = geodesic_gauge(sol, g);
        BoundaryInvariants b = g.boundary_invariants();
        double law = b.Rbar - 2 * n * (gauge.num_rr + (-b.H) * gauge.num_r) -
                     n * (n - 1.0) * gauge.num_r * gauge.num_r;
        CHECK(law == Catch::Approx(static_cast<double>(n * n)).margin(1e-7));
    }
}

#include <catch2/catch_amalgamated.hpp>

#include "syscat/yamabe.hpp"

using namespace syscat;

namespace {

ModelGeometry euclid_ball(int n) { return ModelGeometry::make_ball(n, Profile::poly({0, 1})); }

ModelGeometry ridge_slab_n2() {
    return ModelGeometry::make_slab(
        2, {Profile::poly({1, 1}), Profile::poly({1, -1})}, false, 1.0, 0.7);
}

ModelGeometry sym_slab_n2() {
    return ModelGeometry::make_slab(
        2, {Profile::poly({1, 1, -1}), Profile::poly({1, -1, 1})}, true);
}

ModelGeometry sym_slab_n3() {
    return ModelGeometry::make_slab(
        3, {Profile::poly({1, 1, -1}), Profile::poly({1, -1, 1}), Profile::poly({1})}, true);
}

}  // namespace

TEST_CASE("formal expansion of the Euclidean ball is exact", "[yamabe]") {
    for (int n : {2, 3}) {
        ModelGeometry g = euclid_ball(n);
        RadialSeriesData<Rational> geo = radial_series_exact(g, n + 3);
        SYFormal<Rational> f = sy_formal_expansion<Rational>(geo, n + 2);
        CHECK(f.u_tilde.coeff(0, 0) == 1);
        CHECK(f.u_tilde.coeff(1, 0) == rat(-1, 2));
        for (int k = 2; k <= n + 1; ++k) CHECK(f.u_tilde.coeff(k, 0) == 0);
        CHECK(f.Lcal == 0);
    }
}

TEST_CASE("formal expansion reproduces the boundary jets", "[yamabe]") {
    SECTION("du~/dr = -H/(2n) on every model") {
        for (const auto& g : {ridge_slab_n2(), sym_slab_n2(), sym_slab_n3(), euclid_ball(3)}) {
            BoundaryInvariants v = g.boundary_invariants();
            RadialSeriesData<double> geo = radial_series(g, g.n + 3);
            SYFormal<double> f = sy_formal_expansion<double>(geo, g.n + 2);
            CHECK(f.u_tilde.coeff(1, 0) == Catch::Approx(-v.H / (2 * g.n)).margin(1e-13));
        }
    }
    SECTION("second jet matches the curvature combination") {
        for (const auto& g : {ridge_slab_n2(), sym_slab_n3(), euclid_ball(3)}) {
            int n = g.n;
            BoundaryInvariants v = g.boundary_invariants();
            RadialSeriesData<double> geo = radial_series(g, n + 3);
            SYFormal<double> f = sy_formal_expansion<double>(geo, n + 2);
            double urr = -(v.Rbar + v.H * v.H) / (3.0 * n) +
                         (v.R - v.LoNormSq) / (3.0 * (n - 1));
            CHECK(2 * f.u_tilde.coeff(2, 0) == Catch::Approx(urr).margin(1e-12));
        }
    }
    SECTION("ridge slab n=2 second derivative equals -1") {
        RadialSeriesData<Rational> geo = radial_series_exact(ridge_slab_n2(), 5);
        SYFormal<Rational> f = sy_formal_expansion<Rational>(geo, 4);
        CHECK(f.u_tilde.coeff(2, 0) * 2 == Rational(-1));
    }
    SECTION("requesting beyond the first log order fails") {
        RadialSeriesData<double> geo = radial_series(sym_slab_n2(), 8);
        CHECK_THROWS_WITH(sy_formal_expansion<double>(geo, 5), "beyond first log order");
    }
}

TEST_CASE("global solve on the Euclidean ball", "[yamabe]") {
    for (int n : {2, 3}) {
        ModelGeometry g = euclid_ball(n);
        SYSolution sol = sy_global_solve(g);
        CHECK(sol.residual_norm < 1e-12);
        CHECK(std::abs(sol.Lcal) < 1e-13);
        for (double r : {0.01, 0.1, 0.4, 0.8, 0.999}) {
            CHECK(sol.utilde(r) == Catch::Approx(1 - r / 2).epsilon(1e-12));
            CHECK(sol.u_r(r) == Catch::Approx(1 - r).margin(1e-11));
        }
        CHECK(sol.u_center == Catch::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("global solve on symmetric slabs", "[yamabe]") {
    ModelGeometry g = sym_slab_n2();
    SYSolution sol = sy_global_solve(g);
    CHECK(sol.residual_norm < 5e-11);
    // grid matches the formal expansion on the overlap with a finite constant
    CHECK(sol.overlap_C < 50.0);
    // u symmetric about the midpoint: derivative vanishes there
    CHECK(std::abs(sol.u_r(0.5)) < 1e-11);
    CHECK(sol.u(0.5) > 0);

    ModelGeometry g3 = sym_slab_n3();
    SYSolution sol3 = sy_global_solve(g3);
    CHECK(sol3.residual_norm < 5e-11);
}

TEST_CASE("discretization convergence", "[yamabe]") {
    // spectral discretization: doubling the order must beat 4th-order decay
    ModelGeometry g = sym_slab_n2();
    SYOptions a, b;
    a.N = 24;
    b.N = 48;
    double ra = sy_global_solve(g, a).residual_norm;
    double rb = sy_global_solve(g, b).residual_norm;
    CHECK(rb < ra / 16.0);
}

TEST_CASE("conformal weight of the solver", "[yamabe]") {
    // constant rescale gbar -> t^2 gbar: u~ -> u~(r/t) by uniqueness
    ModelGeometry g = sym_slab_n2();
    ModelGeometry gt = g.conformal_rescale(Profile::poly({Rational(1) / 4}));  // t = e^{1/4}
    double t = std::exp(0.25);
    SYSolution sol = sy_global_solve(g);
    SYSolution solt = sy_global_solve(gt);
    for (double r : {0.05, 0.2, 0.4}) {
        CHECK(solt.utilde(r * t) == Catch::Approx(sol.utilde(r)).epsilon(1e-10));
    }
}

// ---------------------------------------------------------------------------
// volume ledger
// ---------------------------------------------------------------------------

#include "syscat/volume.hpp"

TEST_CASE("volume ledger on the Euclidean ball, n=2", "[yamabe][volume]") {
    ModelGeometry g = euclid_ball(2);
    SYSolution sol = sy_global_solve(g);
    VolumeLedger led = volume_expansion(sol, g);
    CHECK(led.v[1] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(led.v[2] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(led.c[0] == Catch::Approx(2 * M_PI).epsilon(1e-12));
    CHECK(led.c[1] == Catch::Approx(-2 * M_PI).epsilon(1e-12));
    CHECK(led.vn_integral == Catch::Approx(-2 * M_PI).epsilon(1e-12));
    // closed-form finite part of the hyperbolic-ball volume integral
    double Vexact = M_PI / 2 - 2 * M_PI * std::log(2.0);
    CHECK(led.V == Catch::Approx(Vexact).margin(2e-7));
    // fitted log coefficient agrees with the formal one
    CHECK(std::abs(led.log_coeff_fit - led.vn_integral) < 1e-6 * 2 * M_PI);
    // energy normalization: E = log/(2 c_2) = 4 pi = area * Q_2
    CHECK(led.energy == Catch::Approx(4 * M_PI).epsilon(1e-6));
}

TEST_CASE("volume ledger on the Euclidean ball, n=3", "[yamabe][volume]") {
    ModelGeometry g = euclid_ball(3);
    SYSolution sol = sy_global_solve(g);
    VolumeLedger led = volume_expansion(sol, g);
    CHECK(led.v[1] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(led.v[2] == Catch::Approx(-0.5).margin(1e-12));
    CHECK(led.v[3] == Catch::Approx(0.0).margin(1e-12));
    double A0 = 2 * M_PI * M_PI;
    CHECK(led.c[0] == Catch::Approx(A0 / 3).epsilon(1e-12));
    CHECK(led.c[1] == Catch::Approx(-M_PI * M_PI).epsilon(1e-12));
    CHECK(led.c[2] == Catch::Approx(-M_PI * M_PI).epsilon(1e-12));
    CHECK(led.V == Catch::Approx(2 * M_PI * M_PI).margin(2e-6));
    CHECK(std::abs(led.log_coeff_fit) < 1e-6 * A0);
}

TEST_CASE("renormalized volume coefficients match the closed forms", "[yamabe][volume]") {
    // v1 = (1-n)/(2n) H; v2 = (n-5)/(12(n-1)) (R - |Lo|^2)
    //                      + (n-2)/(24 n^2) ((n-3) H^2 - 2n Rbar)
    auto check_v = [](const ModelGeometry& g) {
        BoundaryInvariants b = g.boundary_invariants();
        SYSolution sol = sy_global_solve(g);
        VolumeLedger led = volume_expansion(sol, g);
        int n = g.n;
        double v1 = (1.0 - n) / (2.0 * n) * b.H;
        double v2 = (n - 5.0) / (12.0 * (n - 1)) * (b.R - b.LoNormSq) +
                    (n - 2.0) / (24.0 * n * n) * ((n - 3.0) * b.H * b.H - 2.0 * n * b.Rbar);
        CHECK(led.v[1] == Catch::Approx(v1).margin(1e-11));
        CHECK(led.v[2] == Catch::Approx(v2).margin(1e-11));
    };
    check_v(sym_slab_n3());
    check_v(euclid_ball(3));
    check_v(ModelGeometry::make_ball(3, Profile(Profile::Basis::TrigSin, {1})));
}

TEST_CASE("ledger totals cover both slab components", "[yamabe][volume]") {
    ModelGeometry g = sym_slab_n2();
    SYSolution sol = sy_global_solve(g);
    VolumeLedger led = volume_expansion(sol, g);
    CHECK(led.c[0] == Catch::Approx(2.0 * 1.0 / 2).epsilon(1e-12));  // comps * A0 / n
    CHECK(std::abs(led.log_coeff_fit - led.vn_integral) < 1e-6 * std::max(1.0, std::abs(led.vn_integral)));
}

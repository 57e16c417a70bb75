#include <catch2/catch_amalgamated.hpp>

#include "syscat/constants.hpp"

using namespace syscat;

TEST_CASE("c_{q,s} spot values", "[constants]") {
    SECTION("q = 1 vanishes identically") {
        for (int n = 2; n <= 4; ++n)
            for (long num = 3; num <= 9; num += 2)
                CHECK(c_coeff(1, Rational(num) / 2, n).value.value() == 0);
    }
    SECTION("q = 2, n = 2, s = 3") {
        CHECK(c_coeff(2, Rational(3), 2).value.value() == rat(-1, 4));
    }
    SECTION("odd c_{q,s} positive past the pole") {
        for (int n = 2; n <= 4; ++n) {
            Rational s = Rational(n + 3) / 2 + rat(2, 3);
            CHECK(c_coeff(3, s, n).value.value() > 0);
            s = Rational(n + 5) / 2 + rat(1, 5);
            CHECK(c_coeff(5, s, n).value.value() > 0);
        }
    }
    SECTION("even closed form vs direct product") {
        // independent oracle: c_{2p,s} = (-1)^p / (2^{2p} p! prod (s - n/2 - i))
        int n = 3;
        Rational s = rat(17, 4);
        for (int p = 1; p <= 4; ++p) {
            Rational prod = 1;
            for (int i = 1; i <= p; ++i) prod *= s - Rational(n) / 2 - i;
            Rational expect = Rational(p % 2 ? -1 : 1) /
                              (rat_pow(Rational(2), 2 * p) * factorial_ring<Rational>(p) * prod);
            CHECK(c_coeff(2 * p, s, n).value.value() == expect);
        }
    }
}

TEST_CASE("d_{2p+1,s} values", "[constants]") {
    SECTION("p = 0 gives (n-s)/(2n)") {
        for (int n = 2; n <= 4; ++n) {
            Rational s = rat(7, 3);
            CHECK(d_coeff(0, s, n).value.value() == (Rational(n) - s) / (2 * n));
        }
    }
    SECTION("p = 0, s = n vanishes") { CHECK(d_coeff(0, Rational(3), 3).value.value() == 0); }
    SECTION("p = 1, n = 3 vs closed form") {
        // (n + 2p - s)/(2n) (-1)^p c_{2p,s}
        Rational s = rat(10, 3);
        Rational c2 = c_coeff(2, s, 3).value.value();
        CHECK(d_coeff(1, s, 3).value.value() == (Rational(5) - s) / 6 * Rational(-1) * c2);
        CHECK(d_coeff(1, Rational(3), 3).value.value() ==
              Rational(2) / 6 * Rational(-1) * c_coeff(2, Rational(3), 3).value.value());
    }
    SECTION("no pole at s = (n+2p+1)/2") {
        for (int n = 2; n <= 5; ++n)
            for (int p = 0; p <= 3; ++p) {
                auto v = d_coeff(p, Rational(n + 2 * p + 1) / 2, n);
                CHECK(v.value.has_value());
            }
    }
}

TEST_CASE("residues of c_{q,s}", "[constants]") {
    SECTION("closed forms") {
        CHECK(residue_c(1) == 0);
        CHECK(residue_c(2) == rat(-1, 4));
        CHECK(residue_c(3) == rat(1, 3));
        CHECK(residue_c(4) == rat(1, 32));
        CHECK(residue_c(5) == rat(1, 15));
    }
    SECTION("exact Laurent oracle, q <= 10, n <= 6") {
        for (int n = 2; n <= 6; ++n)
            for (int q = 2; q <= 10; ++q) {
                Rational s0 = Rational(n + q) / 2;
                LaurentQ lau = c_coeff_laurent(q, s0, n, 2);
                CHECK(lau.coeff(-1, 0) == residue_c(q));
                CHECK(lau.coeff(-2, 0) == 0);  // simple pole
            }
    }
    SECTION("odd residues positive") {
        for (int p = 1; p <= 4; ++p) CHECK(residue_c(2 * p + 1) > 0);
    }
}

TEST_CASE("pole values are data", "[constants]") {
    // evaluation exactly at the pole s = (n+2)/2 reports location + residue
    int n = 3;
    CValue v = c_coeff(2, Rational(n + 2) / 2, n);
    REQUIRE(!v.value.has_value());
    REQUIRE(v.pole.has_value());
    CHECK(v.pole->location == Rational(n + 2) / 2);
    CHECK(v.pole->residue == rat(-1, 4));
}

TEST_CASE("coeff_table assembles residues and spot values", "[constants]") {
    CoeffTable t = coeff_table(2, 6, {rat(7, 2), rat(11, 3)});
    CHECK(t.residues[2] == rat(-1, 4));
    CHECK(t.residues[6] == rat(-1, 768));  // (-1)^3 / (2^6 3! 2!)
    CHECK(t.spot.size() == 2);
    CHECK(t.spot[1].second[1].value.value() == 0);
}

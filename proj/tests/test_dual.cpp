#include <catch2/catch_amalgamated.hpp>

#include "migrad/dual.hpp"

using migrad::DualScalar;
using Catch::Approx;

TEST_CASE("dual arithmetic follows the chain rule", "[dual]") {
    DualScalar a{2.0, 1.0};
    DualScalar b{3.0, 0.0};

    SECTION("product rule with a constant factor") {
        DualScalar p = a * b;
        CHECK(p.value == 6.0);
        CHECK(p.deriv == 3.0);
    }

    SECTION("sum and difference are componentwise") {
        DualScalar s = a + b;
        CHECK(s.value == 5.0);
        CHECK(s.deriv == 1.0);
        DualScalar d = a - b;
        CHECK(d.value == -1.0);
        CHECK(d.deriv == 1.0);
    }

    SECTION("quotient rule") {
        DualScalar q = a / b;
        CHECK(q.value == Approx(2.0 / 3.0));
        CHECK(q.deriv == Approx(1.0 / 3.0));
    }

    SECTION("general product rule") {
        DualScalar x{1.5, 0.7};
        DualScalar y{-2.0, 0.3};
        DualScalar p = x * y;
        CHECK(p.value == Approx(-3.0));
        CHECK(p.deriv == Approx(0.7 * -2.0 + 1.5 * 0.3));
    }
}

TEST_CASE("dual sqrt and ln", "[dual]") {
    DualScalar s = migrad::dual_sqrt({4.0, 1.0});
    CHECK(s.value == 2.0);
    CHECK(s.deriv == 0.25);

    DualScalar l = migrad::dual_ln({1.0, 1.0});
    CHECK(l.value == 0.0);
    CHECK(l.deriv == 1.0);

    // chain: d/dg sqrt(g) at g then squared should recover g with deriv 1
    DualScalar g = DualScalar::variable(2.7);
    DualScalar back = migrad::dual_sqrt(g) * migrad::dual_sqrt(g);
    CHECK(back.value == Approx(2.7));
    CHECK(back.deriv == Approx(1.0));
}

TEST_CASE("dual domain violations throw typed errors", "[dual]") {
    CHECK_THROWS_AS(migrad::dual_sqrt({-1.0, 0.0}), migrad::domain_error);
    CHECK_THROWS_AS(migrad::dual_sqrt({0.0, 0.0}), migrad::domain_error);
    CHECK_THROWS_AS(migrad::dual_ln({0.0, 0.0}), migrad::domain_error);
    CHECK_THROWS_AS(DualScalar(1.0, 0.0) / DualScalar(0.0, 1.0), migrad::domain_error);
}

TEST_CASE("constants carry zero derivative, the variable carries one", "[dual]") {
    CHECK(DualScalar::constant(5.0).deriv == 0.0);
    CHECK(DualScalar::variable(5.0).deriv == 1.0);
}

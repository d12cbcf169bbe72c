#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "migrad/mc.hpp"

using namespace migrad;
using Catch::Approx;

namespace {

SkConfig calibrated_config(double power, int n) {
    SkConfig sk;
    sk.power = power;
    sk.n = n;
    sk.rho_star = solve_rho_star(power);
    sk.gamma1 = calibrate_gamma1(power);
    sk.gamma = calibrate_gamma(power, sk.rho_star);
    return sk;
}

} // namespace

TEST_CASE("Monte Carlo concords with the exact engine", "[mc]") {
    SkConfig sk = calibrated_config(1.0, 10);
    McConfig mc{100000, 1ULL, 1e-4};

    auto exact = decomposition_sk(run_sk_recursion(sk), sk);
    auto est = simulate_sk_mc(sk, mc);

    CHECK(std::abs(est.estimate.mmse_term - exact.mmse_term) < 3.0 * est.mmse_se);
    CHECK(std::abs(est.estimate.interference_term - exact.interference_term) <
          3.0 * est.interference_se);
    CHECK(std::abs(est.estimate.feedback_term - exact.feedback_term) <
          3.0 * est.feedback_se);
}

TEST_CASE("fixed seed gives bit-identical estimates", "[mc]") {
    SkConfig sk = calibrated_config(1.0, 6);
    McConfig mc{20000, 99ULL, 1e-4};
    auto a = simulate_sk_mc(sk, mc);
    auto b = simulate_sk_mc(sk, mc);
    CHECK(a.estimate.mmse_term == b.estimate.mmse_term);
    CHECK(a.estimate.interference_term == b.estimate.interference_term);
    CHECK(a.estimate.feedback_term == b.estimate.feedback_term);
    CHECK(a.mmse_se == b.mmse_se);
}

TEST_CASE("standard errors shrink as the root of the sample count", "[mc]") {
    SkConfig sk = calibrated_config(1.0, 6);
    auto small = simulate_sk_mc(sk, McConfig{10000, 7ULL, 1e-4});
    auto large = simulate_sk_mc(sk, McConfig{1000000, 7ULL, 1e-4});
    double ratio = small.mmse_se / large.mmse_se;
    CHECK(ratio > 8.0);
    CHECK(ratio < 12.0);
}

TEST_CASE("interference at rho* = 0", "[mc]") {
    SkConfig sk = calibrated_config(1.0, 10);
    sk.rho_star = 0.0;
    // matched gains: the first feedback step then sees uncorrelated errors
    // (the step-2 cross term is gamma/3 - gamma^3/(2 gamma^2 + 1) at
    // gamma1 = 1, which vanishes only at gamma = gamma1)
    sk.gamma = sk.gamma1;
    McConfig mc{100000, 31337ULL, 1e-4};

    auto exact = decomposition_sk(run_sk_recursion(sk), sk);
    auto est = simulate_sk_mc(sk, mc);

    // independent users leave the step-2 cross term at zero, but later steps
    // correlate through the shared output history, so the total does not vanish
    CHECK(std::abs(est.interference_step2) < 3.0 * est.interference_step2_se);
    CHECK(std::abs(exact.step_interference[0]) < 1e-14);
    CHECK(std::abs(exact.interference_term) > 0.1);
    CHECK(std::abs(est.estimate.interference_term - exact.interference_term) <
          3.0 * est.interference_se);
}

TEST_CASE("mc validation rejects undersized runs", "[mc]") {
    SkConfig sk = calibrated_config(1.0, 5);
    CHECK_THROWS_AS(simulate_sk_mc(sk, McConfig{100, 1ULL, 1e-4}), domain_error);
    CHECK_THROWS_AS(simulate_sk_mc(sk, McConfig{20000, 1ULL, 0.0}), domain_error);
}

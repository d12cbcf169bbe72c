// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
// Each criterion is checked at the pinned configuration and tolerance; nothing
// here adapts to the measured values.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "migrad/grid.hpp"
#include "migrad/mc.hpp"
#include "migrad/nf.hpp"
#include "migrad/sk.hpp"

using namespace migrad;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %d (%s): %s  [%s]\n", number, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void criterion1_sk_identity() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> up(0.25, 4.0);
    std::uniform_int_distribution<int> un(5, 40);
    std::uniform_real_distribution<double> ug(0.2, 3.0);
    std::uniform_real_distribution<double> ur(0.0, 0.9);
    double worst_dual = 0.0, worst_fd = 0.0;
    for (int t = 0; t < 50; ++t) {
        SkConfig cfg;
        cfg.power = up(rng);
        cfg.n = un(rng);
        cfg.gamma = ug(rng);
        cfg.rho_star = ur(rng);
        cfg.gamma1 = calibrate_gamma1(cfg.power);
        auto rep = decomposition_sk(run_sk_recursion(cfg), cfg, 1e-5);
        double scale = std::abs(rep.derivative_dual) + 1e-30;
        worst_dual = std::max(worst_dual,
            std::abs(rep.derivative_dual - rep.derivative_reconstructed) / scale);
        worst_fd = std::max(worst_fd,
            std::abs(rep.derivative_fd - rep.derivative_reconstructed));
    }
    report(1, "S-K decomposition identity", worst_dual <= 1e-10 && worst_fd <= 1e-6,
           "worst dual rel " + fmt(worst_dual) + " <= 1e-10, worst FD " +
           fmt(worst_fd) + " <= 1e-6, 50 configs");
}

void criterion2_closed_forms() {
    double worst = 0.0;
    for (double g : {0.5, 0.8, 1.0, 1.5, 2.5})
        for (double g1 : {0.5, 0.8, 1.0, 1.5, 2.5})
            for (double r : {0.0, 0.2, 0.4, 0.6, 0.8}) {
                auto cf = closed_form_step2(g, g1, r);
                SkConfig cfg{1.0, 3, r, g1, g};
                SkTrace tr = run_sk_recursion(cfg);
                auto rep = decomposition_sk(run_sk_recursion(cfg), cfg);
                LinearForm e1 = lmmse_estimate(tr.x1[1], tr.y[1]).residual;
                LinearForm e2 = lmmse_estimate(tr.x2[1], tr.y[1]).residual;
                double vals[8][2] = {
                    {cf.kappa1, lmmse_estimate(tr.z1, tr.y[0]).coefficient.value},
                    {cf.kappa2, lmmse_estimate(tr.x1[1], tr.y[1]).coefficient.value},
                    {cf.var_y1, variance(tr.y[0]).value},
                    {cf.var_y2, variance(tr.y[1]).value},
                    {cf.cov_x12_y2, covariance(tr.x1[1], tr.y[1]).value},
                    {cf.mmse2, variance(e1).value},
                    {cf.crosscorr2, covariance(e1, e2).value},
                    {cf.zeta2, rep.step_feedback[0]},
                };
                for (auto& v : vals)
                    worst = std::max(worst, std::abs(v[0] - v[1]) / (1.0 + std::abs(v[0])));
            }
    auto spot = closed_form_step2(1.0, 1.0, 0.0);
    bool spots_ok = std::abs(spot.kappa1 - 1.0 / 3.0) < 1e-14 &&
                    std::abs(spot.var_y1 - 3.0) < 1e-14 &&
                    std::abs(spot.zeta2 - 1.0 / 3.0) < 1e-14;
    report(2, "step-2 closed forms", worst <= 1e-12 && spots_ok,
           "worst rel " + fmt(worst) + " <= 1e-12 on 5x5x5 grid, spot values exact");
}

void criterion3_nf_identity() {
    double worst_cf = 0.0, worst_fd = 0.0;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ug(0.2, 3.0);
    std::uniform_real_distribution<double> us(0.1, 4.0);
    for (int t = 0; t < 50; ++t) {
        double g = ug(rng), s2 = us(rng);
        auto rep = nf_exact(NfConfig{s2, s2, g, g, 1});
        auto cl = nf_closed_forms(g, s2);
        worst_cf = std::max({worst_cf,
                             std::abs(g * rep.mmse_term - cl.mmse_scaled),
                             std::abs(rep.interference_term - cl.interference),
                             std::abs(rep.mutual_information - cl.mutual_information)});
        worst_fd = std::max(worst_fd,
                            std::abs(rep.derivative_reconstructed - rep.derivative_fd));
    }
    auto triple = nf_closed_forms(1.0, 1.0);
    bool triple_ok = std::abs(triple.mmse_scaled - 4.0 / 3.0) < 1e-14 &&
                     std::abs(triple.interference + 2.0 / 3.0) < 1e-14 &&
                     std::abs(triple.mutual_information - 0.5 * std::log(3.0)) < 1e-14;
    report(3, "no-feedback identity", worst_cf <= 1e-12 && worst_fd <= 1e-6 && triple_ok,
           "worst closed-form gap " + fmt(worst_cf) + " <= 1e-12, worst FD " +
           fmt(worst_fd) + " <= 1e-6, triple (4/3, -2/3, ln(3)/2) exact");
}

void criterion4_sign_structure() {
    bool signs_ok = true;
    for (double r : {0.05, 0.2, 0.31, 0.5, 0.7, 0.9}) {
        double p = 2.0 * r / ((1.0 - r) * (1.0 - r) * (1.0 + r));
        for (const auto& rep : sk_sweep(p, 10, default_sweep_grid(p, 9)))
            if (rep.feedback_term <= 0.0 || rep.interference_term >= 0.0) signs_ok = false;
    }
    SkConfig nofb{1.0, 10, solve_rho_star(1.0), 1.0, 1.5};
    auto rep = decomposition_sk(run_sk_recursion(nofb, false), nofb);
    bool zeta_zero = rep.feedback_term == 0.0;
    report(4, "sign structure", signs_ok && zeta_zero,
           std::string("zeta > 0 and theta < 0 on operating-point sweeps for "
                       "rho* in {0.05..0.9}; zeta with feedback disabled = ") +
               fmt(rep.feedback_term));
}

void criterion5_sum_capacity() {
    double power = 1.0;
    double rho = solve_rho_star(power);
    double g = calibrate_gamma(power, rho);
    double cs = sum_capacity(power);
    auto gap = [&](int n) {
        SkConfig cfg{power, n, rho, calibrate_gamma1(power), g};
        return std::abs(sk_mutual_information(run_sk_recursion(cfg)).value / n - cs);
    };
    double g10 = gap(10), g50 = gap(50);
    report(5, "sum-capacity consistency", g50 < g10 && g50 < 0.02,
           "gap at n=50 " + fmt(g50) + " < gap at n=10 " + fmt(g10) + " and < 0.02");
}

void criterion6_immse() {
    auto prior = gaussian_prior(1.0);
    auto linear = ScalarChannel::additive([](double x, double g) { return g * x; },
                                          [](double x, double) { return x; });
    double worst_mmse = 0.0, worst_analytic = 0.0;
    for (double g : {0.5, 1.0, 2.0}) {
        double ymax = 6.0 * std::sqrt(g * g + 1.0);
        GridSpec grid{-6.0, 6.0, -ymax, ymax, 513, 513};
        double grad = gradient_general(prior, linear, g, grid);
        auto d = build_joint(prior, linear, g, grid);
        worst_mmse = std::max(worst_mmse, std::abs(grad - g * grid_mmse(d)));
        worst_analytic = std::max(worst_analytic, std::abs(grad - g / (1.0 + g * g)));
    }
    report(6, "I-MMSE recovery", worst_mmse <= 5e-3 && worst_analytic <= 5e-3,
           "worst |grad - gamma*mmse| " + fmt(worst_mmse) + ", worst analytic gap " +
           fmt(worst_analytic) + ", both <= 5e-3");
}

void criterion7_factorization() {
    auto prior = gaussian_prior(1.0);
    double g = 1.3;
    struct Case {
        ScalarChannel ch;
        double kmax;
    };
    std::vector<Case> cases = {
        {ScalarChannel::additive([](double x, double gg) { return gg * x; },
                                 [](double x, double) { return x; }), 6.0 * g},
        {ScalarChannel::additive([](double x, double gg) { return gg * gg * x; },
                                 [](double x, double gg) { return 2.0 * gg * x; }),
         6.0 * g * g},
        {ScalarChannel::additive([](double x, double gg) { return gg * std::tanh(x); },
                                 [](double x, double) { return std::tanh(x); }), g},
    };
    double worst_additive = 0.0;
    for (auto& c : cases) {
        GridSpec grid{-6.0, 6.0, -(c.kmax + 6.0), c.kmax + 6.0, 513, 513};
        double gp = gradient_palomar(prior, c.ch, g, grid,
                                     [&](double x) { return c.ch.dk_dgamma(x, g); });
        double fd = finite_diff_mi(prior, c.ch, g, grid);
        worst_additive = std::max(worst_additive, std::abs(gp - fd));
    }

    double gm = 1.0;
    auto mult = ScalarChannel::multiplicative(0.5);
    double ymax = 6.0 * (1.0 + 5.0 * gm);
    GridSpec mgrid{-6.0, 6.0, -ymax, ymax, 481, 961};
    double fd = finite_diff_mi(prior, mult, gm, mgrid);
    double gg = gradient_general(prior, mult, gm, mgrid);
    double mult_gap = std::abs(gg - fd);

    std::vector<std::function<double(double)>> candidates = {
        [](double) { return 0.0; },
        [](double x) { return x; },
        [gm](double x) { return gm * x; },
        [](double x) { return x * x; },
        [](double x) { return std::abs(x); },
    };
    double closest_candidate = 1e300;
    for (auto& xi : candidates)
        closest_candidate = std::min(closest_candidate,
            std::abs(gradient_palomar(prior, mult, gm, mgrid, xi) - fd));

    report(7, "factorization demonstration",
           worst_additive <= 5e-3 && mult_gap <= 5e-3 && closest_candidate > 5e-2,
           "additive worst " + fmt(worst_additive) + " <= 5e-3, multiplicative gap " +
           fmt(mult_gap) + " <= 5e-3, best naive candidate misses by " +
           fmt(closest_candidate) + " > 5e-2");
}

void criterion8_monte_carlo() {
    SkConfig sk;
    sk.power = 1.0;
    sk.n = 10;
    sk.rho_star = solve_rho_star(sk.power);
    sk.gamma1 = calibrate_gamma1(sk.power);
    sk.gamma = calibrate_gamma(sk.power, sk.rho_star);
    McConfig mc{100000, 1ULL, 1e-4};

    auto exact = decomposition_sk(run_sk_recursion(sk), sk);
    auto est = simulate_sk_mc(sk, mc);
    auto repeat = simulate_sk_mc(sk, mc);

    double zm = std::abs(est.estimate.mmse_term - exact.mmse_term) / est.mmse_se;
    double zt = std::abs(est.estimate.interference_term - exact.interference_term) /
                est.interference_se;
    double zz = std::abs(est.estimate.feedback_term - exact.feedback_term) /
                est.feedback_se;
    bool deterministic = est.estimate.mmse_term == repeat.estimate.mmse_term &&
                         est.estimate.interference_term == repeat.estimate.interference_term &&
                         est.estimate.feedback_term == repeat.estimate.feedback_term;
    report(8, "Monte Carlo concordance",
           zm <= 3.0 && zt <= 3.0 && zz <= 3.0 && deterministic,
           "z-scores mmse " + fmt(zm) + ", interference " + fmt(zt) + ", feedback " +
           fmt(zz) + " all <= 3; repeat run bit-identical");
}

} // namespace

int main() {
    criterion1_sk_identity();
    criterion2_closed_forms();
    criterion3_nf_identity();
    criterion4_sign_structure();
    criterion5_sum_capacity();
    criterion6_immse();
    criterion7_factorization();
    criterion8_monte_carlo();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 8 acceptance criteria passed\n");
    return 0;
}

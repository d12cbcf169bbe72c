#pragma once

// Monte Carlo validation of the S-K decomposition. Samples drive the same
// recursion as the exact engine, but numerically: the LMMSE coefficients come
// from the exact engine (not re-estimated), so the sampling noise sits only in
// the expectations being validated. The feedback term uses common random
// numbers: each sample is replayed at gamma +/- h on the same noise draws and
// the pathwise derivative of the input sum is differenced. Sample j always
// uses its own stream derived from (seed, j), so any partition of the work
// yields identical results; accumulation is chunked with a pairwise reduction.

#include <cstdint>
#include <random>
#include <vector>

#include "sk.hpp"

namespace migrad {

struct McConfig {
    long samples = 100000;
    std::uint64_t seed = 1;
    double crn_step = 1e-4;

    void validate() const {
        if (samples < 10000) throw domain_error("McConfig: need at least 1e4 samples");
        if (crn_step <= 0.0) throw domain_error("McConfig: crn_step must be positive");
    }
};

struct McReport {
    DecompositionReport estimate;   // mmse/interference/feedback as sample means
    double mmse_se = 0.0;
    double interference_se = 0.0;
    double feedback_se = 0.0;
    double interference_step2 = 0.0;     // i = 2 contribution alone
    double interference_step2_se = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Engine-side per-step LMMSE coefficients kappa_(k)i = Cov(X_(k)i, Y_i)/Var(Y_i).
struct SkCoefficients {
    std::vector<double> k1, k2;  // index i-1 holds step i, i = 1..n
};

inline SkCoefficients sk_coefficients(const SkConfig& cfg) {
    SkTrace tr = run_sk_recursion(cfg);
    SkCoefficients c;
    for (int i = 0; i < cfg.n; ++i) {
        std::size_t p = static_cast<std::size_t>(i);
        c.k1.push_back(lmmse_estimate(tr.x1[p], tr.y[p]).coefficient.value);
        c.k2.push_back(lmmse_estimate(tr.x2[p], tr.y[p]).coefficient.value);
    }
    return c;
}

struct SkPath {
    std::vector<double> x1, x2, y;  // index i-1 holds step i
};

// Numeric replay of the recursion on one noise draw w[0..n+2]
// (w[0], w[1], w[2] are the message primitives, w[2+i] is channel noise i).
inline SkPath replay(const SkConfig& cfg, const SkCoefficients& kc,
                     const std::vector<double>& w) {
    double r = cfg.rho_star;
    double z1 = std::sqrt(1.0 - r) * w[1] + std::sqrt(r) * w[2];
    double z2 = std::sqrt(1.0 - r) * w[0] + std::sqrt(r) * w[2];
    double sg1 = std::sqrt(cfg.gamma1);
    double sg = std::sqrt(cfg.gamma);

    SkPath p;
    p.x1.push_back(sg1 * z1);
    p.x2.push_back(sg1 * z2);
    p.y.push_back(sg1 * (p.x1[0] + p.x2[0]) + w[3]);
    for (int i = 2; i <= cfg.n; ++i) {
        std::size_t q = static_cast<std::size_t>(i - 2);
        double e1 = p.x1[q] - kc.k1[q] * p.y[q];
        double e2 = p.x2[q] - kc.k2[q] * p.y[q];
        p.x1.push_back(sg * e1);
        p.x2.push_back(-sg * e2);
        p.y.push_back(sg * (p.x1[q + 1] + p.x2[q + 1]) + w[static_cast<std::size_t>(i) + 2]);
    }
    return p;
}

inline double pairwise_sum(std::vector<double> v) {
    if (v.empty()) return 0.0;
    while (v.size() > 1) {
        std::size_t half = (v.size() + 1) / 2;
        for (std::size_t i = 0; i + half < v.size(); ++i)
            v[i] += v[i + half];
        v.resize(half);
    }
    return v[0];
}

} // namespace detail

inline McReport simulate_sk_mc(const SkConfig& sk, const McConfig& mc) {
    sk.validate();
    mc.validate();

    double h = mc.crn_step;
    SkConfig up = sk, dn = sk;
    up.gamma += h;
    dn.gamma -= h;
    auto kc0 = detail::sk_coefficients(sk);
    auto kcu = detail::sk_coefficients(up);
    auto kcd = detail::sk_coefficients(dn);

    const std::size_t nw = static_cast<std::size_t>(sk.n) + 3;
    constexpr long kChunk = 4096;
    std::vector<double> cs_m, cs_t, cs_z, cs_t2;      // chunk sums
    std::vector<double> cq_m, cq_t, cq_z, cq_t2;      // chunk sums of squares
    double am = 0, at = 0, az = 0, at2 = 0;
    double qm = 0, qt = 0, qz = 0, qt2 = 0;
    std::vector<double> w(nw);

    for (long j = 0; j < mc.samples; ++j) {
        std::mt19937_64 rng(detail::splitmix64(mc.seed ^ detail::splitmix64(
            static_cast<std::uint64_t>(j) + 0x51ed2701a3c5e9b7ULL)));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& wi : w) wi = normal(rng);

        auto p0 = detail::replay(sk, kc0, w);
        auto pu = detail::replay(up, kcu, w);
        auto pd = detail::replay(dn, kcd, w);

        double sm = 0, st = 0, sz = 0, st2 = 0;
        for (int i = 2; i <= sk.n; ++i) {
            std::size_t q = static_cast<std::size_t>(i - 1);
            double e1 = p0.x1[q] - kc0.k1[q] * p0.y[q];
            double e2 = p0.x2[q] - kc0.k2[q] * p0.y[q];
            sm += e1 * e1 + e2 * e2;
            st += e1 * e2;
            if (i == 2) st2 = e1 * e2;
            double ds = ((pu.x1[q] + pu.x2[q]) - (pd.x1[q] + pd.x2[q])) / (2.0 * h);
            sz += sk.gamma * (e1 + e2) * ds;
        }

        am += sm; at += st; az += sz; at2 += st2;
        qm += sm * sm; qt += st * st; qz += sz * sz; qt2 += st2 * st2;
        if ((j + 1) % kChunk == 0 || j + 1 == mc.samples) {
            cs_m.push_back(am); cs_t.push_back(at); cs_z.push_back(az); cs_t2.push_back(at2);
            cq_m.push_back(qm); cq_t.push_back(qt); cq_z.push_back(qz); cq_t2.push_back(qt2);
            am = at = az = at2 = 0;
            qm = qt = qz = qt2 = 0;
        }
    }

    double ns = static_cast<double>(mc.samples);
    auto mean_se = [&](std::vector<double>& s, std::vector<double>& q,
                       double& mean, double& se) {
        mean = detail::pairwise_sum(s) / ns;
        double var = detail::pairwise_sum(q) / ns - mean * mean;
        se = std::sqrt(std::max(var, 0.0) / ns);
    };

    McReport rep;
    rep.estimate.gamma = sk.gamma;
    mean_se(cs_m, cq_m, rep.estimate.mmse_term, rep.mmse_se);
    mean_se(cs_t, cq_t, rep.estimate.interference_term, rep.interference_se);
    mean_se(cs_z, cq_z, rep.estimate.feedback_term, rep.feedback_se);
    mean_se(cs_t2, cq_t2, rep.interference_step2, rep.interference_step2_se);
    rep.estimate.derivative_reconstructed = 0.5 * rep.estimate.mmse_term +
        rep.estimate.interference_term + rep.estimate.feedback_term;
    return rep;
}

} // namespace migrad

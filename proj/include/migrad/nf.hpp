#pragma once

// No-feedback two-user Gaussian MAC. Inputs are i.i.d. across channel uses
// and do not depend on the gain, so everything reduces to a single use:
// Y = gamma1*X1 + gamma2*X2 + W with X_k = sigma_k * U_k. The gradient of
// I in a gain splits into a scaled mmse plus a (negative) cross-correlation
// term; the feedback term is identically zero here.

#include <cmath>

#include "sk.hpp"

namespace migrad {

struct NfConfig {
    double sigma2_1 = 1.0;  // per-user input variances, fixed under differentiation
    double sigma2_2 = 1.0;
    double gamma_1 = 1.0;   // per-user gains
    double gamma_2 = 1.0;
    int n = 1;              // enters only as a normalization

    void validate() const {
        if (sigma2_1 < 0.0 || sigma2_2 < 0.0)
            throw domain_error("NfConfig: input variances must be nonnegative");
        if (gamma_1 <= 0.0 || gamma_2 <= 0.0)
            throw domain_error("NfConfig: gains must be positive");
        if (n < 1) throw domain_error("NfConfig: n must be at least 1");
    }
};

struct NfClosedForms {
    double mmse_scaled;         // gamma * (sum of per-user mmse)
    double interference;        // 2 * gamma * E{e1 e2}, always negative
    double mutual_information;  // nats per channel use
};

// Symmetric-case closed forms with P = gamma^2 * sigma^2 a derived quantity
// (sigma^2 fixed under differentiation, so I is a nontrivial function of gamma).
inline NfClosedForms nf_closed_forms(double gamma, double sigma2) {
    if (gamma <= 0.0) throw domain_error("nf_closed_forms: gamma must be positive");
    if (sigma2 < 0.0) throw domain_error("nf_closed_forms: sigma2 must be nonnegative");
    double p = gamma * gamma * sigma2;
    NfClosedForms r{};
    r.mmse_scaled = 2.0 * p * (p + 1.0) / (gamma * (1.0 + 2.0 * p));
    r.interference = -2.0 * p * p / (gamma * (1.0 + 2.0 * p));
    r.mutual_information = 0.5 * std::log(1.0 + 2.0 * p);
    return r;
}

namespace detail {

// Single-use joint build: basis {U1, U2, W}; the dual seeds select which gain
// is the active parameter.
struct NfSignals {
    LinearForm x1, x2, y;
};

inline NfSignals nf_build(const NfConfig& cfg, DualScalar g1, DualScalar g2) {
    NfSignals s{LinearForm(3), LinearForm(3), LinearForm(3)};
    s.x1 = LinearForm::basis(3, 0).scaled_by(DualScalar::constant(std::sqrt(cfg.sigma2_1)));
    s.x2 = LinearForm::basis(3, 1).scaled_by(DualScalar::constant(std::sqrt(cfg.sigma2_2)));
    s.y = s.x1.scaled_by(g1) + s.x2.scaled_by(g2) + LinearForm::basis(3, 2);
    return s;
}

} // namespace detail

// Common-gain decomposition (both users swept together); requires a symmetric
// gain configuration. All quantities are per channel use.
inline DecompositionReport nf_exact(const NfConfig& cfg, double fd_step = 1e-6) {
    cfg.validate();
    if (cfg.gamma_1 != cfg.gamma_2)
        throw domain_error("nf_exact: common-gain decomposition needs gamma_1 == gamma_2");
    double gamma = cfg.gamma_1;

    DualScalar g = DualScalar::variable(gamma);
    auto s = detail::nf_build(cfg, g, g);

    DecompositionReport rep;
    rep.gamma = gamma;
    DualScalar info = dual_ln(variance(s.y));
    rep.mutual_information = 0.5 * info.value;
    rep.derivative_dual = 0.5 * info.deriv;

    LinearForm e1 = lmmse_estimate(s.x1, s.y).residual;
    LinearForm e2 = lmmse_estimate(s.x2, s.y).residual;
    rep.mmse_term = variance(e1).value + variance(e2).value;
    rep.interference_term = 2.0 * gamma * covariance(e1, e2).value;
    rep.feedback_term = 0.0;
    rep.derivative_reconstructed = gamma * rep.mmse_term + rep.interference_term;

    auto info_at = [&cfg](double gv) {
        auto sv = detail::nf_build(cfg, DualScalar::constant(gv), DualScalar::constant(gv));
        return 0.5 * std::log(variance(sv.y).value);
    };
    rep.derivative_fd = (info_at(gamma + fd_step) - info_at(gamma - fd_step)) / (2.0 * fd_step);
    return rep;
}

// Gradient of I in one user's gain. The cross-correlation sum runs over the
// other user only; including the own-user term would double-count the scaled
// mmse (the finite-difference oracle in the tests pins this down).
inline DecompositionReport nf_per_user_gradient(const NfConfig& cfg, int which_user,
                                                double fd_step = 1e-6) {
    cfg.validate();
    if (which_user != 1 && which_user != 2)
        throw domain_error("nf_per_user_gradient: user index must be 1 or 2");

    bool first = (which_user == 1);
    DualScalar g1 = first ? DualScalar::variable(cfg.gamma_1)
                          : DualScalar::constant(cfg.gamma_1);
    DualScalar g2 = first ? DualScalar::constant(cfg.gamma_2)
                          : DualScalar::variable(cfg.gamma_2);
    auto s = detail::nf_build(cfg, g1, g2);

    DecompositionReport rep;
    rep.gamma = first ? cfg.gamma_1 : cfg.gamma_2;
    DualScalar info = dual_ln(variance(s.y));
    rep.mutual_information = 0.5 * info.value;
    rep.derivative_dual = 0.5 * info.deriv;

    const LinearForm& xl = first ? s.x1 : s.x2;
    const LinearForm& xk = first ? s.x2 : s.x1;
    double gl = first ? cfg.gamma_1 : cfg.gamma_2;
    double gk = first ? cfg.gamma_2 : cfg.gamma_1;

    LinearForm el = lmmse_estimate(xl, s.y).residual;
    LinearForm ek = lmmse_estimate(xk, s.y).residual;
    rep.mmse_term = variance(el).value;
    rep.interference_term = gk * covariance(el, ek).value;
    rep.feedback_term = 0.0;
    rep.derivative_reconstructed = gl * rep.mmse_term + rep.interference_term;

    auto info_at = [&](double gv) {
        DualScalar a = DualScalar::constant(first ? gv : cfg.gamma_1);
        DualScalar b = DualScalar::constant(first ? cfg.gamma_2 : gv);
        auto sv = detail::nf_build(cfg, a, b);
        return 0.5 * std::log(variance(sv.y).value);
    };
    rep.derivative_fd = (info_at(rep.gamma + fd_step) - info_at(rep.gamma - fd_step))
                      / (2.0 * fd_step);
    return rep;
}

} // namespace migrad

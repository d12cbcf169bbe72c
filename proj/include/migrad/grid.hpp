#pragma once

// Grid-based scalar-channel laboratory. Joint densities p(x,y) are held on a
// rectangular grid and integrated with the trapezoidal rule; the gradient of
// mutual information in the channel parameter is computed as
//   E{ (df/dgamma)(x,w) * d/dy ln p(x|y) }
// and cross-checked against a central-difference oracle. Two channel kinds:
//   additive:        y = k(x, gamma) + W
//   multiplicative:  y = x + gamma * x * W   (signal-dependent noise)
// The multiplicative build excludes a band around x = 0 where the conditional
// density degenerates; the excluded prior mass is recorded on the density.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dual.hpp"

namespace migrad {

struct GridSpec {
    double x_min, x_max, y_min, y_max;
    int nx, ny;

    void validate() const {
        if (nx < 64 || ny < 64)
            throw domain_error("GridSpec: need at least 64 points per axis");
        if (x_max <= x_min || y_max <= y_min)
            throw domain_error("GridSpec: empty axis range");
    }
    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dy() const { return (y_max - y_min) / (ny - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double y(int j) const { return y_min + j * dy(); }
};

struct GridDensity2D {
    GridSpec grid{};
    std::vector<double> values;    // row-major: ix * ny + iy
    double excluded_mass = 0.0;    // prior mass removed by the exclusion band

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(ix) * grid.ny + iy]; }
    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(ix) * grid.ny + iy];
    }
};

struct ScalarChannel {
    enum class Kind { additive, multiplicative };
    Kind kind = Kind::additive;
    std::function<double(double, double)> k;          // k(x, gamma)
    std::function<double(double, double)> dk_dgamma;  // dk/dgamma (x, gamma)
    double exclusion_band = 0.0;                      // |x| < band removed (multiplicative)

    static ScalarChannel additive(std::function<double(double, double)> k,
                                  std::function<double(double, double)> dk) {
        ScalarChannel c;
        c.kind = Kind::additive;
        c.k = std::move(k);
        c.dk_dgamma = std::move(dk);
        return c;
    }
    static ScalarChannel multiplicative(double band = 0.5) {
        ScalarChannel c;
        c.kind = Kind::multiplicative;
        c.exclusion_band = band;
        return c;
    }
};

using Density1D = std::function<double(double)>;

namespace detail {

constexpr double kDensityFloor = 1e-300;

inline double trapz_weight(int i, int m) { return (i == 0 || i == m - 1) ? 0.5 : 1.0; }

inline double gauss_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

inline std::vector<double> marginal_x(const GridDensity2D& d) {
    std::vector<double> px(d.grid.nx, 0.0);
    for (int i = 0; i < d.grid.nx; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d.grid.ny; ++j)
            acc += trapz_weight(j, d.grid.ny) * d.at(i, j);
        px[i] = acc * d.grid.dy();
    }
    return px;
}

inline std::vector<double> marginal_y(const GridDensity2D& d) {
    std::vector<double> py(d.grid.ny, 0.0);
    for (int j = 0; j < d.grid.ny; ++j) {
        double acc = 0.0;
        for (int i = 0; i < d.grid.nx; ++i)
            acc += trapz_weight(i, d.grid.nx) * d.at(i, j);
        py[j] = acc * d.grid.dx();
    }
    return py;
}

// Trapezoidal double integral of an arbitrary cell-wise integrand.
template <typename F>
double integrate2d(const GridSpec& g, F&& f) {
    double acc = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        double wx = trapz_weight(i, g.nx);
        for (int j = 0; j < g.ny; ++j)
            acc += wx * trapz_weight(j, g.ny) * f(i, j);
    }
    return acc * g.dx() * g.dy();
}

} // namespace detail

inline GridDensity2D build_joint(const Density1D& prior, const ScalarChannel& channel,
                                 double gamma, const GridSpec& grid) {
    grid.validate();

    // prior must be a density on the x-range
    double prior_mass = 0.0, kept_mass = 0.0;
    std::vector<double> px(grid.nx);
    for (int i = 0; i < grid.nx; ++i) {
        double xv = grid.x(i);
        double pv = prior(xv);
        prior_mass += detail::trapz_weight(i, grid.nx) * pv;
        if (channel.kind == ScalarChannel::Kind::multiplicative &&
            std::abs(xv) < channel.exclusion_band)
            pv = 0.0;
        px[i] = pv;
        kept_mass += detail::trapz_weight(i, grid.nx) * pv;
    }
    prior_mass *= grid.dx();
    kept_mass *= grid.dx();
    if (std::abs(prior_mass - 1.0) > 1e-8)
        throw domain_error("build_joint: prior does not integrate to 1 on the x-range");

    GridDensity2D d;
    d.grid = grid;
    d.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
    d.excluded_mass = prior_mass - kept_mass;

    for (int i = 0; i < grid.nx; ++i) {
        if (px[i] == 0.0) continue;
        double xv = grid.x(i);
        for (int j = 0; j < grid.ny; ++j) {
            double yv = grid.y(j);
            double cond;
            if (channel.kind == ScalarChannel::Kind::additive) {
                cond = detail::gauss_pdf(yv - channel.k(xv, gamma));
            } else {
                double s = std::abs(gamma * xv);
                cond = detail::gauss_pdf((yv - xv) / s) / s;
            }
            d.at(i, j) = px[i] * cond;
        }
    }

    double mass = detail::integrate2d(grid, [&](int i, int j) { return d.at(i, j); });
    if (std::abs(mass - kept_mass) > 1e-4)
        throw domain_error("build_joint: mass leakage exceeds 1e-4 (y-range too small?)");
    for (double& v : d.values) v /= mass;
    return d;
}

inline double mutual_information(const GridDensity2D& d) {
    auto px = detail::marginal_x(d);
    auto py = detail::marginal_y(d);
    return detail::integrate2d(d.grid, [&](int i, int j) {
        double p = d.at(i, j);
        if (p <= 0.0) return 0.0;
        double denom = std::max(px[i] * py[j], detail::kDensityFloor);
        return p * std::log(std::max(p, detail::kDensityFloor) / denom);
    });
}

// d/dy ln p(x|y), central differences in y (one-sided at the boundary rows).
inline std::vector<double> posterior_log_gradient(const GridDensity2D& d) {
    auto py = detail::marginal_y(d);
    const int nx = d.grid.nx, ny = d.grid.ny;
    double dy = d.grid.dy();

    std::vector<double> logp(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            logp[static_cast<std::size_t>(i) * ny + j] =
                std::log(std::max(d.at(i, j), detail::kDensityFloor)) -
                std::log(std::max(py[j], detail::kDensityFloor));

    std::vector<double> score(logp.size());
    for (int i = 0; i < nx; ++i) {
        const double* row = &logp[static_cast<std::size_t>(i) * ny];
        double* out = &score[static_cast<std::size_t>(i) * ny];
        out[0] = (row[1] - row[0]) / dy;
        out[ny - 1] = (row[ny - 1] - row[ny - 2]) / dy;
        for (int j = 1; j < ny - 1; ++j)
            out[j] = (row[j + 1] - row[j - 1]) / (2.0 * dy);
    }
    return score;
}

namespace detail {

// E{ weight(x,y) * score(x,y) } against the joint.
inline double score_expectation(const GridDensity2D& d,
                                const std::function<double(double, double)>& weight) {
    auto score = posterior_log_gradient(d);
    return integrate2d(d.grid, [&](int i, int j) {
        double p = d.at(i, j);
        if (p <= 0.0) return 0.0;
        return p * weight(d.grid.x(i), d.grid.y(j)) *
               score[static_cast<std::size_t>(i) * d.grid.ny + j];
    });
}

} // namespace detail

// General gradient formula: E{(df/dgamma) * d/dy ln p(x|y)}. For the additive
// kind df/dgamma = dk/dgamma(x); for the multiplicative kind
// df/dgamma = x*W = (y - x)/gamma.
inline double gradient_general(const Density1D& prior, const ScalarChannel& channel,
                               double gamma, const GridSpec& grid) {
    auto d = build_joint(prior, channel, gamma, grid);
    if (channel.kind == ScalarChannel::Kind::additive)
        return detail::score_expectation(
            d, [&](double x, double) { return channel.dk_dgamma(x, gamma); });
    return detail::score_expectation(d, [&](double x, double y) { return (y - x) / gamma; });
}

// Factorized form with a caller-supplied xi(x) in place of df/dgamma. Agrees
// with gradient_general exactly when the gamma-dependence factors through the
// input alone (additive channels); for the multiplicative kind no xi works.
inline double gradient_palomar(const Density1D& prior, const ScalarChannel& channel,
                               double gamma, const GridSpec& grid,
                               const std::function<double(double)>& xi) {
    auto d = build_joint(prior, channel, gamma, grid);
    return detail::score_expectation(d, [&](double x, double) { return xi(x); });
}

inline double finite_diff_mi(const Density1D& prior, const ScalarChannel& channel,
                             double gamma, const GridSpec& grid, double h = 1e-4) {
    if (h <= 0.0 || gamma - h <= 0.0)
        throw domain_error("finite_diff_mi: step leaves the channel domain");
    double ip = mutual_information(build_joint(prior, channel, gamma + h, grid));
    double im = mutual_information(build_joint(prior, channel, gamma - h, grid));
    return (ip - im) / (2.0 * h);
}

// Grid-computed MMSE of X given Y: E{x^2} - int p(y) E{x|y}^2 dy.
inline double grid_mmse(const GridDensity2D& d) {
    auto py = detail::marginal_y(d);
    double ex2 = detail::integrate2d(d.grid, [&](int i, int j) {
        double xv = d.grid.x(i);
        return d.at(i, j) * xv * xv;
    });

    const int nx = d.grid.nx, ny = d.grid.ny;
    double reduction = 0.0;
    for (int j = 0; j < ny; ++j) {
        if (py[j] <= detail::kDensityFloor) continue;
        double num = 0.0;
        for (int i = 0; i < nx; ++i)
            num += detail::trapz_weight(i, nx) * d.grid.x(i) * d.at(i, j);
        num *= d.grid.dx();
        reduction += detail::trapz_weight(j, ny) * num * num / py[j];
    }
    reduction *= d.grid.dy();
    return ex2 - reduction;
}

// Gaussian prior helper used throughout the lab.
inline Density1D gaussian_prior(double sigma2) {
    double s = std::sqrt(sigma2);
    return [s](double x) { return detail::gauss_pdf(x / s) / s; };
}

} // namespace migrad

#pragma once

// Forward-mode scalar derivatives. A DualScalar carries a value together with
// its derivative with respect to the active sweep parameter; arithmetic
// propagates both through the chain rule. Seed exactly one input with
// deriv = 1 (the parameter being swept) and every downstream quantity's
// .deriv is its exact derivative in that parameter.

#include <cmath>
#include <stdexcept>
#include <string>

namespace migrad {

class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

struct DualScalar {
    double value = 0.0;
    double deriv = 0.0;

    constexpr DualScalar() = default;
    constexpr DualScalar(double v, double d) : value(v), deriv(d) {}

    static constexpr DualScalar constant(double v) { return {v, 0.0}; }
    static constexpr DualScalar variable(double v) { return {v, 1.0}; }

    constexpr DualScalar operator-() const { return {-value, -deriv}; }

    constexpr DualScalar operator+(const DualScalar& o) const {
        return {value + o.value, deriv + o.deriv};
    }
    constexpr DualScalar operator-(const DualScalar& o) const {
        return {value - o.value, deriv - o.deriv};
    }
    constexpr DualScalar operator*(const DualScalar& o) const {
        return {value * o.value, deriv * o.value + value * o.deriv};
    }
    DualScalar operator/(const DualScalar& o) const {
        if (o.value == 0.0)
            throw domain_error("dual division by zero");
        return {value / o.value,
                (deriv * o.value - value * o.deriv) / (o.value * o.value)};
    }

    constexpr DualScalar& operator+=(const DualScalar& o) {
        value += o.value;
        deriv += o.deriv;
        return *this;
    }
    constexpr DualScalar& operator-=(const DualScalar& o) {
        value -= o.value;
        deriv -= o.deriv;
        return *this;
    }
};

inline DualScalar dual_add(const DualScalar& a, const DualScalar& b) { return a + b; }
inline DualScalar dual_sub(const DualScalar& a, const DualScalar& b) { return a - b; }
inline DualScalar dual_mul(const DualScalar& a, const DualScalar& b) { return a * b; }
inline DualScalar dual_div(const DualScalar& a, const DualScalar& b) { return a / b; }

inline DualScalar dual_sqrt(const DualScalar& a) {
    if (a.value <= 0.0)
        throw domain_error("dual sqrt of non-positive value");
    double s = std::sqrt(a.value);
    return {s, a.deriv / (2.0 * s)};
}

inline DualScalar dual_ln(const DualScalar& a) {
    if (a.value <= 0.0)
        throw domain_error("dual ln of non-positive value");
    return {std::log(a.value), a.deriv / a.value};
}

} // namespace migrad

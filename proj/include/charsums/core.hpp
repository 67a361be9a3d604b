#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace charsums {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Thrown when a modulus exceeds the dense-table cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on evaluation at a pole (zeta/L at s=1).
struct PoleError : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown when a quadrature or series fails its internal convergence check.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Absolute tolerance for a sum of `terms` values of magnitude <= max_term:
// rounding error grows linearly in the number of summed terms.
inline double sum_tolerance(double terms, double max_term = 1.0) {
    return 1e-10 * std::max(terms, 1.0) * std::max(max_term, 1.0);
}

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// A root of unity exp(2*pi*i*num/den) held exactly; `zero` marks the value 0
// (character evaluated off the unit group). Kept in lowest terms only when
// needed; num is reduced mod den.
struct RootAngle {
    bool zero = false;
    std::int64_t num = 0;
    std::int64_t den = 1;

    static RootAngle zero_value() { return RootAngle{true, 0, 1}; }
    static RootAngle one() { return RootAngle{false, 0, 1}; }

    Complex to_complex() const {
        if (zero) return Complex(0.0, 0.0);
        if (num == 0) return Complex(1.0, 0.0);
        const double theta = kTwoPi * static_cast<double>(num) / static_cast<double>(den);
        return Complex(std::cos(theta), std::sin(theta));
    }
};

}  // namespace charsums

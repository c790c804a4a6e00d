#pragma once

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aeon {

using cplx = std::complex<double>;

// Validation failures: bad specs, bad configs, preconditions.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-convergence, step underflow, domain exhaustion.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Side { hat, check };   // hat: tau in [tau_-, 0), check: tau in (0, tau_+]

// eta as in the asymptotics of the auxiliary function: eta_hat = +1, eta_check = -1.
inline constexpr double eta(Side s) { return s == Side::hat ? +1.0 : -1.0; }

// Sign of tau on the side (hat: tau < 0).
inline constexpr double tau_sign(Side s) { return s == Side::hat ? -1.0 : +1.0; }

inline const char* side_name(Side s) { return s == Side::hat ? "hat" : "check"; }

inline bool nearly_equal(double a, double b, double rel, double abs_floor = 0.0) {
    double d = std::abs(a - b);
    return d <= abs_floor + rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace aeon

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "aeon/common.hpp"

namespace aeon {

// Embedded Dormand-Prince 5(4) with PI step control.
// State must support: State + State, State * double (value semantics),
// and a free function norm_inf(const State&).
struct Rk45Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;       // 0 -> auto
    double min_step_fraction = 1e-14;  // of interval length
    long max_steps = 2000000;
};

template <typename State, typename Rhs>
State rk45_integrate(Rhs&& rhs, double t0, double t1, State y, const Rk45Options& opt = {}) {
    if (t0 == t1) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // 4th-order weights for the error estimate
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0;
    double h = opt.initial_step > 0 ? opt.initial_step : span / 100.0;
    h = std::min(h, span);
    double err_prev = 1.0;

    State k1 = rhs(t, y);
    bool k1_valid = true;

    for (long step = 0; step < opt.max_steps; ++step) {
        if ((t1 - t) * dir <= 0.0) return y;
        h = std::min(h, std::abs(t1 - t));
        if (h < span * opt.min_step_fraction)
            throw numeric_error("rk45: step underflow at t=" + std::to_string(t));
        double hs = h * dir;

        if (!k1_valid) { k1 = rhs(t, y); k1_valid = true; }
        State k2 = rhs(t + c2 * hs, y + k1 * (a21 * hs));
        State k3 = rhs(t + c3 * hs, y + k1 * (a31 * hs) + k2 * (a32 * hs));
        State k4 = rhs(t + c4 * hs, y + k1 * (a41 * hs) + k2 * (a42 * hs) + k3 * (a43 * hs));
        State k5 = rhs(t + c5 * hs,
                       y + k1 * (a51 * hs) + k2 * (a52 * hs) + k3 * (a53 * hs) + k4 * (a54 * hs));
        State k6 = rhs(t + hs, y + k1 * (a61 * hs) + k2 * (a62 * hs) + k3 * (a63 * hs) +
                                   k4 * (a64 * hs) + k5 * (a65 * hs));
        State y5 = y + k1 * (b1 * hs) + k3 * (b3 * hs) + k4 * (b4 * hs) + k5 * (b5 * hs) +
                   k6 * (b6 * hs);
        State k7 = rhs(t + hs, y5);
        State err_state = k1 * (e1 * hs) + k3 * (e3 * hs) + k4 * (e4 * hs) + k5 * (e5 * hs) +
                          k6 * (e6 * hs) + k7 * (e7 * hs);

        double scale = opt.abs_tol + opt.rel_tol * std::max(norm_inf(y), norm_inf(y5));
        double err = norm_inf(err_state) / scale;

        if (err <= 1.0) {
            t += hs;
            y = y5;
            k1 = k7;  // FSAL
            k1_valid = true;
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                         std::pow(err_prev, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-10);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            k1_valid = true;  // k1 unchanged, still valid at (t, y)
        }
    }
    throw numeric_error("rk45: max step count exceeded");
}

}  // namespace aeon

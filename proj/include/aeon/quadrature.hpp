#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "aeon/common.hpp"

namespace aeon {

// Adaptive Simpson on a finite interval. Good for smooth integrands; the
// graded-mesh machinery (mesh.hpp) handles the singular ones.
namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol = 1e-12,
                          int max_depth = 48) {
    if (a == b) return 0.0;
    double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace aeon

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "aeon/common.hpp"

namespace aeon {

// Monotone cubic Hermite interpolant (Fritsch-Carlson slope limiting).
// Abscissae strictly increasing.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw validation_error("MonotoneCubic: need >= 2 points");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw validation_error("MonotoneCubic: x not increasing");
        d_.resize(n);
        std::vector<double> h(n - 1), s(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            s[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2) {
            d_[0] = d_[1] = s[0];
        } else {
            d_[0] = end_slope(h[0], h[1], s[0], s[1]);
            d_[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
            for (size_t i = 1; i + 1 < n; ++i) {
                if (s[i - 1] * s[i] <= 0.0) {
                    d_[i] = 0.0;
                } else {
                    double w1 = 2.0 * h[i] + h[i - 1];
                    double w2 = h[i] + 2.0 * h[i - 1];
                    d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
                }
            }
            limit(h, s);
        }
    }

    double operator()(double x) const { return eval(x, nullptr); }

    double eval(double x, double* deriv) const {
        size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        if (deriv) {
            double g00 = (6 * t2 - 6 * t) / h, g10 = (3 * t2 - 4 * t + 1) / h;
            double g01 = (-6 * t2 + 6 * t) / h, g11 = (3 * t2 - 2 * t) / h;
            *deriv = g00 * y_[i] + g10 * h * d_[i] + g01 * y_[i + 1] + g11 * h * d_[i + 1];
        }
        return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
    }

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    static double end_slope(double h0, double h1, double s0, double s1) {
        double d = ((2 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0) return 0.0;
        if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) return 3.0 * s0;
        return d;
    }

    void limit(const std::vector<double>& h, const std::vector<double>& s) {
        (void)h;
        for (size_t i = 0; i + 1 < x_.size(); ++i) {
            if (s[i] == 0.0) { d_[i] = d_[i + 1] = 0.0; continue; }
            double a = d_[i] / s[i], b = d_[i + 1] / s[i];
            double r = a * a + b * b;
            if (r > 9.0) {
                double t = 3.0 / std::sqrt(r);
                d_[i] = t * a * s[i];
                d_[i + 1] = t * b * s[i];
            }
        }
    }

    size_t locate(double x) const {
        // clamped extrapolation at the ends
        if (x <= x_.front()) return 0;
        if (x >= x_.back()) return x_.size() - 2;
        size_t i = size_t(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        return i - 1;
    }

    std::vector<double> x_, y_, d_;
};

}  // namespace aeon

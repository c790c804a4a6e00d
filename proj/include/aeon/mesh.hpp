#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "aeon/common.hpp"

namespace aeon {

// Nodes in w = |tau|, descending from w_hi toward 0, geometrically graded:
// step = min(max_step, w * du), stopping at floor_w. Handles ln|tau|-type
// integrands by keeping the log-spacing du constant all the way down.
inline std::vector<double> graded_nodes_desc(double w_hi, double floor_w, double du,
                                             double max_step) {
    if (!(w_hi > floor_w) || !(floor_w > 0.0) || !(du > 0.0) || !(max_step > 0.0))
        throw validation_error("graded_nodes_desc: bad parameters");
    std::vector<double> w;
    w.reserve(size_t(std::log(w_hi / floor_w) / du) + size_t(w_hi / max_step) + 8);
    double v = w_hi;
    while (v > floor_w) {
        w.push_back(v);
        double step = std::min(max_step, v * du);
        v -= step;
        if (v < floor_w * (1.0 + 1e-9)) break;
    }
    w.push_back(floor_w);
    return w;
}

// Interpolatory quadrature over an arbitrary strictly monotone node array:
// each segment integrates the Lagrange cubic through its 4 nearest nodes
// (2-point Gauss per segment evaluates the cubic exactly). Weights are
// precomputed once per node array and reused across integrands.
class SegmentedQuad {
public:
    SegmentedQuad() = default;

    explicit SegmentedQuad(std::vector<double> x) : x_(std::move(x)) {
        const size_t n = x_.size();
        if (n < 2) throw validation_error("SegmentedQuad: need >= 2 nodes");
        bool inc = x_[1] > x_[0];
        for (size_t i = 1; i < n; ++i)
            if ((x_[i] > x_[i - 1]) != inc || x_[i] == x_[i - 1])
                throw validation_error("SegmentedQuad: nodes not strictly monotone");
        stencil_.resize(n - 1);
        wts_.resize(n - 1);
        const double g = 1.0 / std::sqrt(3.0);
        for (size_t i = 0; i + 1 < n; ++i) {
            size_t s = (n == 2) ? 0 : std::min(std::max<size_t>(i, 1) - 1, n - 4);
            size_t m = std::min<size_t>(4, n);  // stencil size (2 or 3 for tiny arrays)
            if (n == 3) s = 0, m = 3;
            if (n == 2) s = 0, m = 2;
            stencil_[i] = s;
            double mid = 0.5 * (x_[i] + x_[i + 1]);
            double half = 0.5 * (x_[i + 1] - x_[i]);
            std::array<double, 2> gp = {mid - half * g, mid + half * g};
            for (size_t k = 0; k < 4; ++k) wts_[i][k] = 0.0;
            for (double p : gp) {
                for (size_t k = 0; k < m; ++k) {
                    double lk = 1.0;
                    for (size_t j = 0; j < m; ++j)
                        if (j != k) lk *= (p - x_[s + j]) / (x_[s + k] - x_[s + j]);
                    wts_[i][k] += half * lk;
                }
            }
        }
    }

    const std::vector<double>& nodes() const { return x_; }
    size_t size() const { return x_.size(); }

    // Segment index i with x between x_i and x_{i+1} (clamped outside).
    size_t segment_of(double x) const {
        bool inc = x_[1] > x_[0];
        size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            bool left = inc ? (x < x_[mid]) : (x > x_[mid]);
            (left ? hi : lo) = mid;
        }
        return lo;
    }

    // Integral of segment i's stencil cubic from x_i to x. Agrees exactly
    // with the stored segment weight at x = x_{i+1}, so cumulative + partial
    // evaluations are globally continuous.
    template <typename T>
    T partial(size_t i, double x, const std::vector<T>& f) const {
        i = std::min(i, x_.size() - 2);
        size_t s = stencil_[i];
        size_t m = std::min<size_t>(4, x_.size());
        if (x_.size() == 3) m = 3;
        if (x_.size() == 2) m = 2;
        const double g = 1.0 / std::sqrt(3.0);
        double mid = 0.5 * (x_[i] + x);
        double half = 0.5 * (x - x_[i]);
        T acc{};
        for (double p : {mid - half * g, mid + half * g}) {
            for (size_t k = 0; k < m; ++k) {
                double lk = 1.0;
                for (size_t j = 0; j < m; ++j)
                    if (j != k) lk *= (p - x_[s + j]) / (x_[s + k] - x_[s + j]);
                acc += f[s + k] * (half * lk);
            }
        }
        return acc;
    }

    // C_j = integral from x_0 to x_j (signed with the node direction).
    template <typename T>
    std::vector<T> cumulative(const std::vector<T>& f) const {
        if (f.size() != x_.size()) throw validation_error("SegmentedQuad: value count mismatch");
        std::vector<T> c(x_.size());
        c[0] = T{};
        for (size_t i = 0; i + 1 < x_.size(); ++i) {
            T seg{};
            size_t s = stencil_[i];
            size_t m = std::min<size_t>(4, x_.size());
            if (x_.size() == 3) m = 3;
            if (x_.size() == 2) m = 2;
            for (size_t k = 0; k < m; ++k) seg += f[s + k] * wts_[i][k];
            c[i + 1] = c[i] + seg;
        }
        return c;
    }

    template <typename T>
    T total(const std::vector<T>& f) const {
        return cumulative(f).back();
    }

private:
    std::vector<double> x_;
    std::vector<size_t> stencil_;
    std::vector<std::array<double, 4>> wts_;
};

// F(x) = offset + int_{x_0}^x f, evaluated anywhere on the node range as
// node cumulative plus a partial-segment integral of the same stencil cubic.
// Globally continuous and piecewise smooth, so finite differences of the
// result recover f to the cubic's accuracy.
class CumulativeTable {
public:
    CumulativeTable() = default;

    CumulativeTable(std::shared_ptr<const SegmentedQuad> quad, std::vector<double> f,
                    double offset = 0.0)
        : quad_(std::move(quad)), f_(std::move(f)) {
        cum_ = quad_->cumulative(f_);
        for (auto& c : cum_) c += offset;
    }

    double operator()(double x) const {
        size_t i = quad_->segment_of(x);
        return cum_[i] + quad_->partial(i, x, f_);
    }

    double at_node(size_t i) const { return cum_[i]; }
    const SegmentedQuad& quad() const { return *quad_; }

private:
    std::shared_ptr<const SegmentedQuad> quad_;
    std::vector<double> f_;
    std::vector<double> cum_;
};

// Integral of g over (0, w1] from samples at the two innermost nodes
// (w1 < w2), fitting g = a + b*ln(w). Exact for log-plus-constant tails.
template <typename T>
T tail_integral_logfit(double w1, T g1, double w2, T g2) {
    double du = std::log(w2) - std::log(w1);
    T b = (g2 - g1) * (1.0 / du);
    T a = g1 - b * std::log(w1);
    return a * w1 + b * (w1 * (std::log(w1) - 1.0));
}

// Integral of g over (0, w1], fitting g = C*w^p. Returns 0 when the samples
// do not support a convergent power fit.
inline double tail_integral_powerfit(double w1, double g1, double w2, double g2) {
    if (g1 == 0.0 || g2 == 0.0 || (g1 > 0) != (g2 > 0)) return 0.0;
    double p = std::log(std::abs(g1 / g2)) / std::log(w1 / w2);
    if (!(p > -0.95)) return g1 * w1;  // borderline: crude one-panel bound
    return g1 * w1 / (p + 1.0);
}

}  // namespace aeon

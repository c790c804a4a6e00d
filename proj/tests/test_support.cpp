#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "aeon/interp.hpp"
#include "aeon/mesh.hpp"
#include "aeon/quadrature.hpp"
#include "aeon/rk45.hpp"

using namespace aeon;

namespace {
struct Vec2 {
    double a = 0, b = 0;
    Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
    Vec2 operator*(double s) const { return {a * s, b * s}; }
};
double norm_inf(const Vec2& v) { return std::max(std::abs(v.a), std::abs(v.b)); }
}  // namespace

TEST_CASE("adaptive quadrature on smooth integrands") {
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate_adaptive([](double x) { return x * x * x; }, -1.0, 2.0) ==
          doctest::Approx(15.0 / 4.0).epsilon(1e-12));
    CHECK(integrate_adaptive([](double x) { return std::exp(-x); }, 0.0, 30.0) ==
          doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-11));
}

TEST_CASE("graded nodes reach the floor and respect the cap") {
    auto w = graded_nodes_desc(0.5, 1e-13, 0.04, 0.01);
    CHECK(w.front() == 0.5);
    CHECK(w.back() == doctest::Approx(1e-13));
    for (size_t i = 1; i < w.size(); ++i) {
        CHECK(w[i] < w[i - 1]);
        CHECK(w[i - 1] - w[i] <= 0.01 + 1e-15);
    }
}

TEST_CASE("segmented quadrature integrates ln on a graded mesh") {
    auto w = graded_nodes_desc(0.5, 1e-13, 0.02, 0.002);
    SegmentedQuad quad(w);
    std::vector<double> f(w.size());
    for (size_t i = 0; i < w.size(); ++i) f[i] = std::log(w[i]);
    auto c = quad.cumulative(f);
    auto exact = [](double a, double b) {  // int_a^b ln
        return (b * std::log(b) - b) - (a * std::log(a) - a);
    };
    for (size_t i : {w.size() / 4, w.size() / 2, w.size() - 1}) {
        CHECK(c[i] == doctest::Approx(exact(w[0], w[i])).epsilon(1e-8));
    }
    // halving the grading parameters drives the error down (refinement check)
    auto w2 = graded_nodes_desc(0.5, 1e-13, 0.01, 0.001);
    SegmentedQuad quad2(w2);
    std::vector<double> f2(w2.size());
    for (size_t i = 0; i < w2.size(); ++i) f2[i] = std::log(w2[i]);
    double e1 = std::abs(c.back() - exact(w[0], w.back()));
    double e2 = std::abs(quad2.cumulative(f2).back() - exact(w2[0], w2.back()));
    CHECK(e2 < 0.5 * e1);
}

TEST_CASE("segmented quadrature handles mild power singularities") {
    auto w = graded_nodes_desc(1.0, 1e-12, 0.02, 0.002);
    SegmentedQuad quad(w);
    std::vector<double> f(w.size());
    for (size_t i = 0; i < w.size(); ++i) f[i] = 1.0 / std::sqrt(w[i]);
    double total = quad.total(f);  // int_1^eps w^-1/2 = 2 sqrt(eps) - 2
    CHECK(total == doctest::Approx(2.0 * std::sqrt(1e-12) - 2.0).epsilon(1e-7));
}

TEST_CASE("segmented quadrature on ascending smooth nodes") {
    std::vector<double> x;
    for (int i = 0; i <= 200; ++i) x.push_back(i * (M_PI / 200));
    SegmentedQuad quad(x);
    std::vector<double> f(x.size());
    for (size_t i = 0; i < x.size(); ++i) f[i] = std::sin(x[i]);
    CHECK(quad.total(f) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("partial segment integrals agree with the stored rule at nodes") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto w = graded_nodes_desc(0.3, 1e-11, 0.05, 0.01);
    auto quad = std::make_shared<SegmentedQuad>(w);
    std::vector<double> f(w.size());
    for (size_t i = 0; i < w.size(); ++i) f[i] = std::log(w[i]) * (1.0 + 0.1 * U(rng));
    // partial up to the next node equals the stored segment weight exactly
    auto cum = quad->cumulative(f);
    for (size_t i = 0; i + 1 < w.size(); i += 7) {
        double seg = cum[i + 1] - cum[i];
        CHECK(quad->partial(i, w[i + 1], f) == doctest::Approx(seg).epsilon(1e-13));
    }
}

TEST_CASE("cumulative table is continuous across segment boundaries") {
    auto w = graded_nodes_desc(0.25, 1e-12, 0.03, 0.003);
    auto quad = std::make_shared<const SegmentedQuad>(w);
    std::vector<double> f(w.size());
    for (size_t i = 0; i < w.size(); ++i) f[i] = 1.0 - 0.5 * std::log(w[i]);
    CumulativeTable tab(quad, f, 0.7);
    for (size_t i = 1; i + 1 < w.size(); i += 11) {
        double x = w[i];
        double below = tab(x * (1.0 - 1e-12));
        double above = tab(x * (1.0 + 1e-12));
        double at = tab(x);
        CHECK(std::abs(below - at) < 1e-11 * std::max(1.0, std::abs(at)));
        CHECK(std::abs(above - at) < 1e-11 * std::max(1.0, std::abs(at)));
    }
    // and it differentiates back to the integrand (the property the
    // finite-difference residual probes rely on)
    for (double x : {0.2, 0.05, 1e-3, 1e-6}) {
        double s = x * 1e-4;
        double fd = (tab(x + s) - tab(x - s)) / (2 * s);
        // nodes descend, so d/dx of the cumulative is -f... with the signed
        // direction the derivative equals the integrand directly
        CHECK(fd == doctest::Approx(1.0 - 0.5 * std::log(x)).epsilon(1e-6));
    }
}

TEST_CASE("tail fits recover log and power tails") {
    double w1 = 1e-10, w2 = 1.3e-10;
    auto g = [](double w) { return 2.5 - 0.7 * std::log(w); };
    double exact = 2.5 * w1 - 0.7 * w1 * (std::log(w1) - 1.0);
    CHECK(tail_integral_logfit(w1, g(w1), w2, g(w2)) == doctest::Approx(exact).epsilon(1e-12));

    auto p = [](double w) { return 3.0 * std::pow(w, -0.5); };
    double pexact = 3.0 * std::pow(w1, 0.5) / 0.5;
    CHECK(tail_integral_powerfit(w1, p(w1), w2, p(w2)) == doctest::Approx(pexact).epsilon(1e-9));
}

TEST_CASE("rk45 integrates the harmonic oscillator both directions") {
    auto rhs = [](double, const Vec2& y) { return Vec2{y.b, -4.0 * y.a}; };
    Rk45Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    Vec2 y{1.0, 0.0};
    Vec2 fwd = rk45_integrate(rhs, 0.0, 2.0, y, opt);
    CHECK(fwd.a == doctest::Approx(std::cos(4.0)).epsilon(1e-10));
    CHECK(fwd.b == doctest::Approx(-2.0 * std::sin(4.0)).epsilon(1e-10));
    Vec2 back = rk45_integrate(rhs, 2.0, 0.0, fwd, opt);
    CHECK(back.a == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(back.b == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("monotone cubic interpolation") {
    std::vector<double> x, y;
    for (int i = 0; i <= 40; ++i) {
        double t = -2.0 + i * 0.1;
        x.push_back(t);
        y.push_back(std::tanh(t));
    }
    MonotoneCubic m(x, y);
    for (double t : {-1.77, -0.3, 0.05, 1.91}) {
        double d = 0;
        double v = m.eval(t, &d);
        CHECK(v == doctest::Approx(std::tanh(t)).epsilon(2e-5));
        CHECK(d == doctest::Approx(1.0 - std::tanh(t) * std::tanh(t)).epsilon(5e-3));
    }
    // monotone data stays monotone between nodes
    for (int i = 0; i < 400; ++i) {
        double a = -2.0 + i * 0.01, b = a + 0.01;
        CHECK(m(b) >= m(a) - 1e-14);
    }
}

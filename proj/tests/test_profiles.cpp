#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "aeon/profiles.hpp"

using namespace aeon;

TEST_CASE("de Sitter conformal time, closed form and quadrature path") {
    // a(t) = e^t, t_start = 0: tau(t) = -e^{-t}, tau_- = -1, Omega = -1/tau
    auto cf = de_sitter_hat(1.0, 1.0, 0.0);
    CHECK(cf.tau_edge == doctest::Approx(-1.0));
    CHECK(cf(-0.5) == doctest::Approx(2.0));
    CHECK(cf.domega(-0.5) == doctest::Approx(4.0));

    auto [tau_minus, num] = conformal_time_hat([](double t) { return std::exp(t); }, 0.0, 40.0,
                                               {ScaleFactorTail::Kind::exponential, 1.0});
    CHECK(tau_minus == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(num(-0.5) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(num(-0.01) == doctest::Approx(100.0).epsilon(1e-7));

    // De Sitter asymptotics: Omega(tau) * (-H tau) -> 1
    for (double tau : {-1e-2, -1e-3, -1e-4})
        CHECK(num(tau) * (-tau) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("unit scale factor gives affine conformal time") {
    auto [tau_minus, num] = conformal_time_hat([](double) { return 1.0; }, 0.0, 50.0,
                                               {ScaleFactorTail::Kind::power, 2.0});
    // tau(t) = t - T_eff with the declared (fictitious) tail; on the window the
    // map is affine with unit slope: tau(1) - tau(0) = 1.
    double t0 = tau_minus;
    CHECK((num(-1.0) == doctest::Approx(1.0).epsilon(1e-9)));
    (void)t0;
}

TEST_CASE("power-law bang side") {
    // a(t) = sqrt(2) t^{1/2}: Omega(tau) = tau exactly
    auto cf = power_law_check(std::sqrt(2.0), 0.5, 1.0);
    for (double tau : {0.05, 0.2, 0.7}) CHECK(cf(tau) == doctest::Approx(tau).epsilon(1e-12));

    auto [tau_plus, num] = conformal_time_check(
        [](double t) { return std::sqrt(2.0) * std::sqrt(t); }, 1.0);
    CHECK(tau_plus == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    for (double tau : {0.05, 0.2, 0.7}) CHECK(num(tau) == doctest::Approx(tau).epsilon(1e-6));

    // identity scale factor
    auto [tp, id] = conformal_time_check([](double) { return 1.0; }, 0.7);
    CHECK(tp == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(id(0.3) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("conformal time is strictly monotone and inverts accurately") {
    auto a = [](double t) { return std::exp(0.8 * t) * (1.0 + 0.1 * std::tanh(t)); };
    auto [tau_minus, cf] = conformal_time_hat(a, 0.0, 45.0,
                                              {ScaleFactorTail::Kind::exponential, 0.8});
    (void)tau_minus;
    double prev = cf(-0.9);
    for (double tau = -0.8; tau < -0.05; tau += 0.1) {
        double cur = cf(tau);
        CHECK(cur > prev);  // expanding side: Omega increases toward 0
        prev = cur;
    }
}

TEST_CASE("non-integrable tails are rejected") {
    CHECK_THROWS_AS(conformal_time_hat([](double t) { return 1.0 + t; }, 0.0, 30.0,
                                       {ScaleFactorTail::Kind::power, 1.0}),
                    numeric_error);
    CHECK_THROWS_AS(conformal_time_check([](double t) { return t; }, 1.0), numeric_error);
}

TEST_CASE("Penrose reciprocal residual") {
    // Omega_hat = -a_hat (sign = -1), eta = 1/2, C = sqrt(2H): residual -> 0
    double H = 1.0;
    auto hat = de_sitter_hat(1.0, H, 0.0, -1.0);
    auto check = power_law_check(std::sqrt(2.0 * H), 0.5, 1.0);
    for (double tau : {0.3, 0.1, 0.01})
        CHECK(reciprocal_residual(hat, check, tau) == doctest::Approx(0.0).epsilon(1e-12));

    // constant factors violate reciprocity: residual = 2
    auto c1 = constant_factor(Side::hat, -1.0, 1.0);
    auto c2 = constant_factor(Side::check, 1.0, 1.0);
    CHECK(reciprocal_residual(c1, c2, 0.5) == doctest::Approx(2.0));

    CHECK_THROWS_AS(reciprocal_residual(hat, check, 5.0), validation_error);
}

TEST_CASE("integrability classification") {
    auto constant = [](double) { return 4.0; };
    CHECK(classify_integrability(constant, Side::check, 1.0).cls == IntegrabilityClass::L1);

    auto inv_abs = [](double tau) { return 1.0 / std::abs(tau); };
    auto rep = classify_integrability(inv_abs, Side::hat, 1.0);
    CHECK(rep.cls == IntegrabilityClass::weighted_L1);
    CHECK(rep.fitted_exponent == doctest::Approx(-1.0).epsilon(1e-3));

    auto inv_sq = [](double tau) { return 1.0 / (tau * tau); };
    CHECK(classify_integrability(inv_sq, Side::check, 1.0).cls == IntegrabilityClass::neither);

    auto zero = [](double) { return 0.0; };
    CHECK(classify_integrability(zero, Side::check, 1.0).cls == IntegrabilityClass::L1);

    auto inv_sqrt = [](double tau) { return 1.0 / std::sqrt(std::abs(tau)); };
    CHECK(classify_integrability(inv_sqrt, Side::hat, 1.0).cls == IntegrabilityClass::L1);
}

TEST_CASE("classification is monotone under pointwise domination") {
    // q dominated by an L1-classified q stays out of "neither"
    auto big = [](double tau) { return 2.0 / std::sqrt(std::abs(tau)); };
    auto small = [](double tau) { return 1.0 / (1.0 + std::abs(tau)); };
    auto rb = classify_integrability(big, Side::check, 1.0);
    auto rs = classify_integrability(small, Side::check, 1.0);
    CHECK(rb.cls == IntegrabilityClass::L1);
    CHECK(rs.cls == IntegrabilityClass::L1);
    CHECK(rs.integral_q <= rb.integral_q);
}

TEST_CASE("liouville scaling examples") {
    // n=3, Omega = tau: u=(1,0) at tau=0.5 -> (0.5, 1)
    ConformalFactor lin;
    lin.side = Side::check;
    lin.tau_edge = 1.0;
    lin.omega = [](double tau) { return tau; };
    lin.domega = [](double) { return 1.0; };
    auto out = liouville_scale(3, lin, {cplx(1.0), cplx(0.0)}, 0.5);
    CHECK(out.value.real() == doctest::Approx(0.5));
    CHECK(out.deriv.real() == doctest::Approx(1.0));

    // n=1: identity for any Omega
    auto id = liouville_scale(1, lin, {cplx(0.3, -0.2), cplx(1.5, 0.8)}, 0.5);
    CHECK(id.value == cplx(0.3, -0.2));
    CHECK(id.deriv == cplx(1.5, 0.8));

    // n=3, Omega = -1/tau at tau=-2: phi = 1/2, dphi = 1/4
    ConformalFactor ds;
    ds.side = Side::hat;
    ds.tau_edge = -3.0;
    ds.omega = [](double tau) { return -1.0 / tau; };
    ds.domega = [](double tau) { return 1.0 / (tau * tau); };
    auto out2 = liouville_scale(3, ds, {cplx(1.0), cplx(0.0)}, -2.0);
    CHECK(out2.value.real() == doctest::Approx(0.5));
    CHECK(out2.deriv.real() == doctest::Approx(0.25));

    // unscale inverts the triangular matrix
    auto back = liouville_unscale(3, lin, {cplx(0.5), cplx(1.0)}, 0.5);
    CHECK(back.value.real() == doctest::Approx(1.0));
    CHECK(back.deriv.real() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("liouville round trip and determinant") {
    ConformalFactor om;
    om.side = Side::hat;
    om.tau_edge = -2.0;
    om.omega = [](double tau) { return 1.5 + std::sin(tau); };
    om.domega = [](double tau) { return std::cos(tau); };
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n : {1, 2, 3, 5}) {
        for (int trial = 0; trial < 20; ++trial) {
            CPair u{cplx(U(rng), U(rng)), cplx(U(rng), U(rng))};
            double tau = -1.5 + trial * 0.05;
            auto phi = liouville_scale(n, om, u, tau);
            auto u2 = liouville_unscale(n, om, phi, tau);
            CHECK(std::abs(u2.value - u.value) < 1e-13);
            CHECK(std::abs(u2.deriv - u.deriv) < 1e-13);
            double det = liouville_det(n, om, tau);
            CHECK(det == doctest::Approx(std::pow(om(tau), n - 1)));
            CHECK(det != 0.0);
        }
    }

    // even n with negative Omega is rejected
    ConformalFactor neg;
    neg.side = Side::hat;
    neg.tau_edge = -2.0;
    neg.omega = [](double) { return -1.0; };
    neg.domega = [](double) { return 0.0; };
    CHECK_THROWS_AS(liouville_scale(2, neg, {cplx(1.0), cplx(0.0)}, -1.0), validation_error);
}

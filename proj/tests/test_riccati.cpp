#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "aeon/frobenius.hpp"
#include "aeon/riccati.hpp"

using namespace aeon;

namespace {

EffectiveMassSq make_q(Side side, double edge, std::function<double(double)> q) {
    return effective_mass_from_q(side, tau_sign(side) * edge, std::move(q));
}

}  // namespace

TEST_CASE("picard with q = 0 gives A = 0") {
    auto q = make_q(Side::check, 1.0, [](double) { return 0.0; });
    auto A = picard_construct(q, 1.0);
    CHECK(A.h == doctest::Approx(1.0));
    for (double tau : {0.9, 0.1, 1e-6}) {
        CHECK(A(tau) == 0.0);
        CHECK(A.intA0(tau) == 0.0);
    }
}

TEST_CASE("picard with q = 1 on the check side is tan(tau - 1/sqrt(2))") {
    auto q = make_q(Side::check, 1.0, [](double) { return 1.0; });
    CHECK(q.cls == IntegrabilityClass::L1);
    auto A = picard_construct(q, 1.0);
    // anchor from the weighted budget eps/(1+eps)^2 = 1/4: tau_eps = 1/sqrt(2)
    CHECK(A.tau_eps == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    for (double tau : {0.7, 0.5, 0.3, 0.1, 0.01, 1e-4}) {
        CHECK(A(tau) == doctest::Approx(std::tan(tau - 1.0 / std::sqrt(2.0))).epsilon(1e-9));
    }
    // int_0^tau A for tan: -ln|cos(tau - t0)| + ln|cos(t0)|
    double t0 = 1.0 / std::sqrt(2.0);
    for (double tau : {0.5, 0.1}) {
        double exact = -std::log(std::abs(std::cos(tau - t0))) + std::log(std::cos(t0));
        CHECK(A.intA0(tau) == doctest::Approx(exact).epsilon(1e-8));
    }
    // residual of the constructed solution
    for (double tau : {0.5, 0.05, 1e-3})
        CHECK(std::abs(riccati_residual(A, q.q, tau)) < 1e-7);
}

TEST_CASE("picard bounds and L1 budget for the singular family") {
    for (double c2 : {0.25, 1.0}) {
        for (Side side : {Side::hat, Side::check}) {
            auto q = make_q(side, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
            CHECK(q.cls == IntegrabilityClass::weighted_L1);
            double eps = 1.0;
            auto A = picard_construct(q, eps);
            // anchor: int_0^{w_eps} c^2 dv = w_eps c^2 = eps/(1+eps)^2
            CHECK(std::abs(A.tau_eps) ==
                  doctest::Approx(0.25 / c2).epsilon(1e-9));

            // (inegala): eta * int_{tau_eps}^{tau} q <= eta A <= (1+eps) * same
            double et = eta(side);
            double weps = std::abs(A.tau_eps);
            for (double w = weps * 0.98; w > 1e-6; w *= 0.5) {
                double tau = tau_sign(side) * w;
                double J = c2 * std::log(weps / w);  // eta * int q
                double val = et * A(tau);
                CHECK(val >= J - 1e-9);
                CHECK(val <= (1.0 + eps) * J + 1e-9);
            }

            // int |A| over (tau_eps, 0) <= eps/(1+eps)
            auto nodes = graded_nodes_desc(weps, 1e-12, 0.01, weps / 128.0);
            std::vector<double> f(nodes.size());
            for (size_t i = 0; i < nodes.size(); ++i)
                f[i] = std::abs(A(tau_sign(side) * nodes[i]));
            SegmentedQuad sq(nodes);
            double l1 =
                -sq.total(f) + tail_integral_logfit(nodes.back(), f.back(),
                                                    nodes[nodes.size() - 2], f[f.size() - 2]);
            CHECK(l1 <= eps / (1.0 + eps) + 1e-8);

            // residual down to 1e-4
            for (double w : {1e-1, 1e-2, 1e-3, 1e-4}) {
                if (w >= weps) continue;
                double tau = tau_sign(side) * w;
                CHECK(std::abs(riccati_residual(A, q.q, tau)) < 1e-6);
            }
        }
    }
}

TEST_CASE("picard asymptote matches the singular-family log law") {
    double c2 = 1.0;
    auto q = make_q(Side::hat, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
    auto A = picard_construct(q, 1.0);
    // A(tau) ~ -eta c^2 ln|tau| + O(1) on the hat side: A + c^2 ln|tau| bounded,
    // and the remainder settles at the O(w ln^2 w) rate of the coarser sample
    double prev_dev = 0, prev_w = 0;
    for (double w : {1e-3, 1e-5, 1e-7, 1e-9}) {
        double dev = A(-w) + eta(Side::hat) * c2 * std::log(w);
        CHECK(std::abs(dev) < 5.0);
        if (prev_w != 0) {
            double rate = 40.0 * prev_w * std::log(prev_w) * std::log(prev_w);
            CHECK(std::abs(dev - prev_dev) < rate + 1e-6);
        }
        prev_dev = dev;
        prev_w = w;
    }
}

TEST_CASE("picard refuses non-weighted-integrable q") {
    auto q = make_q(Side::check, 1.0, [](double tau) { return 1.0 / (tau * tau); });
    CHECK(q.cls == IntegrabilityClass::neither);
    CHECK_THROWS_AS(picard_construct(q, 1.0), validation_error);
}

TEST_CASE("ivp solutions: q = 0 and q = 1 closed forms") {
    auto q0 = make_q(Side::check, 1.0, [](double) { return 0.0; });
    auto A0 = ivp_solve(q0, 0.0);
    for (double tau : {0.2, 0.01}) CHECK(A0(tau) == doctest::Approx(0.0).epsilon(1e-12));

    // q = 0, alpha = 1: A = 1/(1 - tau)
    auto A1 = ivp_solve(q0, 1.0);
    CHECK(A1.h <= 1.0 / 9.0 + 1e-12);
    for (double tau = 0.01; tau < A1.h; tau += 0.02)
        CHECK(A1(tau) == doctest::Approx(1.0 / (1.0 - tau)).epsilon(1e-9));

    // hat side mirror: A = 1/(1 - tau) still (tau < 0)
    auto q0h = make_q(Side::hat, 1.0, [](double) { return 0.0; });
    auto A1h = ivp_solve(q0h, 1.0);
    for (double tau = -0.01; tau > -A1h.h; tau -= 0.02)
        CHECK(A1h(tau) == doctest::Approx(1.0 / (1.0 - tau)).epsilon(1e-9));

    // q = 1, alpha = 0: A = tan(tau)
    auto qc = make_q(Side::check, 1.0, [](double) { return 1.0; });
    auto At = ivp_solve(qc, 0.0);
    for (double tau = 0.02; tau < At.h; tau += 0.04)
        CHECK(At(tau) == doctest::Approx(std::tan(tau)).epsilon(1e-9));
    CHECK(std::abs(riccati_residual(At, qc.q, 0.1)) < 1e-7);

    // A(0) = alpha by construction
    CHECK(At.alpha == 0.0);
    CHECK(A1(1e-9) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("ivp refuses weighted-only q") {
    auto q = make_q(Side::check, 1.0, [](double tau) { return 1.0 / std::abs(tau); });
    CHECK_THROWS_AS(ivp_solve(q, 0.0), validation_error);
}

TEST_CASE("shift_to_alpha: defining limit and closed forms") {
    // base A_eps = 0 (q = 0): shifted solution is alpha/(1 - alpha tau) on check
    auto q0 = make_q(Side::check, 1.0, [](double) { return 0.0; });
    auto base = picard_construct(q0, 1.0);
    auto S = shift_to_alpha(base, 1.0);
    for (double tau = 0.01; tau < 0.5; tau += 0.05)
        CHECK(S(tau) == doctest::Approx(1.0 / (1.0 - tau)).epsilon(1e-8));
    CHECK(std::abs(riccati_residual(S, q0.q, 0.2)) < 1e-7);

    // alpha = 0 returns the base unchanged
    auto Z = shift_to_alpha(base, 0.0);
    CHECK(Z(0.3) == base(0.3));

    // the defining limit lim (A_shift - A_base) = alpha, singular family
    double c2 = 0.25;
    auto q = make_q(Side::hat, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
    auto Ae = picard_construct(q, 1.0);
    for (double alpha : {0.7, -0.4}) {
        auto Sh = shift_to_alpha(Ae, alpha);
        double d1 = Sh(-1e-7) - Ae(-1e-7);
        double d2 = Sh(-1e-9) - Ae(-1e-9);
        CHECK(d2 == doctest::Approx(alpha).epsilon(1e-6));
        CHECK(std::abs(d2 - alpha) < std::abs(d1 - alpha) + 1e-12);
        CHECK(std::abs(riccati_residual(Sh, q.q, -0.01)) < 1e-6);
    }
}

TEST_CASE("uniqueness: equal limits give equal solutions") {
    // two fixed points with the same delta-limit built along different routes
    double c2 = 1.0;
    auto q = make_q(Side::check, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
    auto Ae = picard_construct(q, 1.0);

    // closed form matched to the picard solution by its limit constant
    FuchsProblem p;
    p.lambda = 0.0;
    p.c2 = c2;
    p.side = Side::check;
    SeriesPair ks = h2_series(k_problem(p));
    // kappa_p := lim (A + eta c^2 ln|tau|), then D1/D2 = -kappa_p - k2'(0) - eta c^2
    double et = eta(Side::check);
    double kappa1 = Ae(1e-9) + et * c2 * std::log(1e-9);
    double kappa2 = Ae(1e-11) + et * c2 * std::log(1e-11);
    CHECK(std::abs(kappa1 - kappa2) < 2e-6);
    double ratio = -kappa2 - ks.h2_prime0 - et * c2;
    auto Ac = riccati_closed_form(p, ratio, 1.0, 0.2);
    for (double w = 1e-4; w < 0.2; w *= 10.0)
        CHECK(Ac(w) == doctest::Approx(Ae(w)).epsilon(2e-5));
}

TEST_CASE("integrate_A uses the antiderivative") {
    auto q0 = make_q(Side::check, 1.0, [](double) { return 0.0; });
    auto base = picard_construct(q0, 1.0);
    auto S = shift_to_alpha(base, 1.0);  // A = 1/(1-tau), intA0 = -ln(1-tau)
    CHECK(integrate_A(S, 0.1, 0.4) ==
          doctest::Approx(-std::log(0.6) + std::log(0.9)).epsilon(1e-8));
    CHECK(integrate_A(S, 0.25, 0.25) == 0.0);
}

TEST_CASE("divergence probe") {
    for (double c2 : {0.25, 1.0}) {
        auto qh = make_q(Side::hat, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
        auto Ah = picard_construct(qh, 1.0);
        auto rep = divergence_probe(Ah);
        CHECK(rep.matches_expected_sign);
        CHECK(rep.log_coeff == doctest::Approx(c2).epsilon(0.02));

        auto qc = make_q(Side::check, 1.0, [c2](double tau) { return c2 / std::abs(tau); });
        auto Acheck = picard_construct(qc, 1.0);
        auto repc = divergence_probe(Acheck);
        CHECK(repc.matches_expected_sign);
        CHECK(repc.log_coeff == doctest::Approx(-c2).epsilon(0.02));
    }

    // L1 q with an IVP solution: bounded, flat fit
    auto ql = make_q(Side::check, 1.0, [](double) { return 1.0; });
    auto Al = ivp_solve(ql, 0.3);
    auto repl = divergence_probe(Al);
    CHECK(std::abs(repl.log_coeff) < 1e-3);
    CHECK(repl.max_abs < 1.0);
}

TEST_CASE("shift family shrinks the domain past denominator zeros") {
    // base A_eps = 0 (q = 0): A = alpha/(1 - alpha tau) blows up at tau = 1/alpha;
    // the family construction must hand back a domain inside the pole
    auto q0 = make_q(Side::check, 1.0, [](double) { return 0.0; });
    auto base = picard_construct(q0, 1.0);
    double alpha = 4.0;  // pole at tau = 0.25 < h = 1
    auto S = shift_to_alpha(base, alpha);
    CHECK(S.h < 0.25);
    for (double tau = S.h * 0.9; tau > 1e-4; tau *= 0.5)
        CHECK(S(tau) == doctest::Approx(alpha / (1.0 - alpha * tau)).epsilon(1e-8));
}

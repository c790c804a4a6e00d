#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "aeon/mode_evolver.hpp"
#include "aeon/rk45.hpp"
#include "aeon/semilinear.hpp"

using namespace aeon;

namespace {

FieldState3 zero_state(const TorusGrid3& g, double tau) {
    FieldState3 s;
    s.tau = tau;
    s.phi.assign(g.size(), cplx{});
    s.chi.assign(g.size(), cplx{});
    return s;
}

struct Pair2 {
    cplx a, b;
    Pair2 operator+(const Pair2& o) const { return {a + o.a, b + o.b}; }
    Pair2 operator*(double s) const { return {a * s, b * s}; }
};
double norm_inf(const Pair2& p) { return std::max(std::abs(p.a), std::abs(p.b)); }

}  // namespace

TEST_CASE("fft round trip and Parseval") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<cplx> a(g.size());
    for (auto& v : a) v = cplx(U(rng), U(rng));
    auto b = a;
    fft3(b, g.N, false);
    double sum_phys = 0, sum_spec = 0;
    for (const auto& v : a) sum_phys += std::norm(v);
    for (const auto& v : b) sum_spec += std::norm(v);
    CHECK(sum_spec == doctest::Approx(sum_phys * g.size()).epsilon(1e-12));
    fft3(b, g.N, true);
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst < 1e-13);

    // a single plane wave lands on its own mode
    std::vector<cplx> wave(g.size());
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        (void)idx;
        double x = 2 * M_PI * ix / g.N, y = 2 * M_PI * iy / g.N, z = 2 * M_PI * iz / g.N;
        wave[size_t(iz) + size_t(g.N) * (iy + size_t(g.N) * ix)] =
            std::exp(cplx(0, 1.0) * (2.0 * x + 1.0 * y - 3.0 * z));
    });
    fft3(wave, g.N, false);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        double mag = std::abs(wave[idx]) / double(g.size());
        if (g.freq(ix) == 2 && g.freq(iy) == 1 && g.freq(iz) == -3)
            CHECK(mag == doctest::Approx(1.0).epsilon(1e-10));
        else
            CHECK(mag < 1e-10);
    });
}

TEST_CASE("nonlinearity basics and convolution support") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    // kappa = 0 -> zero
    std::vector<cplx> phi(g.size(), cplx(0.7, -0.4));
    auto z = nonlinearity(g, phi, 0.0);
    for (const auto& v : z) CHECK(std::abs(v) == 0.0);

    // constant field phi = 1: -kappa |1|^2 1 = -2 with kappa = 2
    std::vector<cplx> ones(g.size(), cplx(1.0));
    auto c = nonlinearity(g, ones, 2.0);
    for (const auto& v : c) CHECK(std::abs(v - cplx(-2.0)) < 1e-12);

    // single mode k0: |phi|^2 phi = phi phi conj(phi) has support at
    // k0 + k0 - k0 = k0 only; dealiasing keeps it exactly
    std::vector<cplx> mode(g.size());
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        (void)iy;
        (void)iz;
        double x = 2 * M_PI * ix / g.N;
        mode[idx] = 0.5 * std::exp(cplx(0, 2.0 * x));
    });
    auto nl = nonlinearity(g, mode, 1.0);
    auto spec = nl;
    fft3(spec, g.N, false);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        double mag = std::abs(spec[idx]) / double(g.size());
        if (g.freq(ix) == 2 && g.freq(iy) == 0 && g.freq(iz) == 0)
            CHECK(mag == doctest::Approx(0.125).epsilon(1e-10));  // |0.5|^2 0.5
        else
            CHECK(mag < 1e-12);
    });

    // two modes: brute-force convolution of the cubic on the 3 amplitudes
    std::vector<cplx> two(g.size());
    cplx A1(0.4, 0.1), A2(-0.2, 0.3);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        (void)iy;
        (void)iz;
        double x = 2 * M_PI * ix / g.N;
        two[idx] = A1 * std::exp(cplx(0, 1.0 * x)) + A2 * std::exp(cplx(0, -1.0 * x));
    });
    auto nl2 = nonlinearity(g, two, 1.0);
    auto spec2 = nl2;
    fft3(spec2, g.N, false);
    // |phi|^2 phi for phi = A1 e^{ix} + A2 e^{-ix}: convolution support at
    // k = 3,1,-1,-3; the two-thirds rule on N=8 keeps |k| <= 2, so the inner
    // products survive exactly and the k = +-3 products are filtered out
    auto coef = [&](int k) {
        cplx out{};
        g.for_modes([&](size_t idx, int ix, int iy, int iz) {
            if (g.freq(ix) == k && iy == 0 && iz == 0) out = spec2[idx] / double(g.size());
        });
        return out;
    };
    CHECK(std::abs(coef(3)) < 1e-14);
    CHECK(std::abs(coef(1) + A1 * (std::norm(A1) + 2 * std::norm(A2))) < 1e-12);
    CHECK(std::abs(coef(-1) + A2 * (std::norm(A2) + 2 * std::norm(A1))) < 1e-12);
    CHECK(std::abs(coef(-3)) < 1e-14);
    // no leakage anywhere else
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        int k = g.freq(ix);
        if ((std::abs(k) == 1 && iy == 0 && iz == 0)) return;
        CHECK(std::abs(spec2[idx]) / double(g.size()) < 1e-12);
    });
}

TEST_CASE("kappa = 0 regular evolution matches per-mode linear evolution") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    SemilinearProblem p;
    p.grid = g;
    p.kappa = 0.0;
    p.q = [](double tau) { return 0.5 + 0.1 * tau; };

    // data on a few modes
    auto st = zero_state(g, 0.2);
    std::vector<std::array<int, 3>> ks = {{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {3, 1, 2}};
    std::vector<cplx> amps = {{0.5, 0.1}, {-0.3, 0.2}, {0.2, -0.7}, {0.1, 0.4}};
    std::vector<cplx> damps = {{0.0, 0.3}, {0.4, 0.0}, {-0.2, 0.1}, {0.3, -0.2}};
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        for (size_t m = 0; m < ks.size(); ++m) {
            if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] && g.freq(iz) == ks[m][2]) {
                // build in spectral space below
            }
        }
        (void)idx;
    });
    // assemble in spectral space directly
    std::vector<cplx> ph(g.size()), ch(g.size());
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        for (size_t m = 0; m < ks.size(); ++m)
            if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] && g.freq(iz) == ks[m][2]) {
                ph[idx] = amps[m] * double(g.size());
                ch[idx] = damps[m] * double(g.size());
            }
    });
    fft3(ph, g.N, true);
    fft3(ch, g.N, true);
    st.phi = ph;
    st.chi = ch;

    auto out = evolve_semilinear(p, st, 1.0, 1e-11);
    auto spec_phi = out.phi, spec_chi = out.chi;
    fft3(spec_phi, g.N, false);
    fft3(spec_chi, g.N, false);

    for (size_t m = 0; m < ks.size(); ++m) {
        double lam = 0;
        for (int d = 0; d < 3; ++d) lam += double(ks[m][d]) * ks[m][d];
        ModeProblem mp;
        mp.lambda = lam;
        mp.q = p.q;
        auto ref = evolve_regular(mp, {0.2, amps[m], damps[m]}, 1.0, 1e-12);
        cplx got_phi, got_chi;
        g.for_modes([&](size_t idx, int ix, int iy, int iz) {
            if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] && g.freq(iz) == ks[m][2]) {
                got_phi = spec_phi[idx] / double(g.size());
                got_chi = spec_chi[idx] / double(g.size());
            }
        });
        CHECK(std::abs(got_phi - ref.phi) < 1e-8);
        CHECK(std::abs(got_chi - ref.chi) < 1e-8);
    }
}

TEST_CASE("spatially constant data reduces to the scalar ODE") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    SemilinearProblem p;
    p.grid = g;
    p.kappa = 1.5;
    p.q = [](double tau) { return 0.7 + 0.2 * std::sin(tau); };

    auto st = zero_state(g, 0.3);
    cplx a0(0.6, -0.2), b0(0.1, 0.4);
    for (size_t i = 0; i < g.size(); ++i) {
        st.phi[i] = a0;
        st.chi[i] = b0;
    }
    auto out = evolve_semilinear(p, st, 1.2, 1e-11);

    // scalar oracle: phi'' + q phi + kappa |phi|^2 phi = 0
    auto rhs = [&p](double tau, const Pair2& y) {
        return Pair2{y.b, -p.q(tau) * y.a - p.kappa * std::norm(y.a) * y.a};
    };
    Rk45Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    auto ref = rk45_integrate(rhs, 0.3, 1.2, Pair2{a0, b0}, opt);
    for (size_t i : {size_t(0), g.size() / 2, g.size() - 1}) {
        CHECK(std::abs(out.phi[i] - ref.a) < 1e-7);
        CHECK(std::abs(out.chi[i] - ref.b) < 1e-7);
    }
}

TEST_CASE("grid refinement leaves smooth trajectories unchanged") {
    auto run = [&](int N) {
        TorusGrid3 g(N, {2 * M_PI, 2 * M_PI, 2 * M_PI});
        SemilinearProblem p;
        p.grid = g;
        p.kappa = 1.0;
        p.q = [](double) { return 0.4; };
        auto st = zero_state(g, 0.1);
        g.for_modes([&](size_t idx, int ix, int iy, int iz) {
            double x = 2 * M_PI * ix / g.N, y = 2 * M_PI * iy / g.N, z = 2 * M_PI * iz / g.N;
            st.phi[idx] = 0.3 * std::cos(x) + 0.2 * std::sin(y + z);
            st.chi[idx] = 0.1 * std::sin(x + y);
        });
        auto out = evolve_semilinear(p, st, 0.8, 1e-10);
        return energy_functional(g, out, p.kappa);
    };
    double e8 = run(8), e16 = run(16);
    CHECK(std::abs(e8 - e16) / std::abs(e16) < 1e-5);
}

TEST_CASE("energy functional values and the Gronwall envelope") {
    TorusGrid3 g(8, {1.0, 1.0, 1.0});  // unit volume
    auto st = zero_state(g, 0.0);
    CHECK(energy_functional(g, st, 2.0) == 0.0);

    for (size_t i = 0; i < g.size(); ++i) st.phi[i] = cplx(1.0);
    // E = V ||1||_H1^2 + 0 + (kappa/2) ||1||_L4^4 = 1 + 1 = 2 with kappa = 2, V = 1
    CHECK(energy_functional(g, st, 2.0) == doctest::Approx(2.0).epsilon(1e-12));

    // envelope: E(tau) <= E(0) exp(int (1 + |R| + q))
    TorusGrid3 g2(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    SemilinearProblem p;
    p.grid = g2;
    p.kappa = 1.0;
    p.q = [](double tau) { return 0.5 + 0.3 * std::cos(tau); };
    auto s0 = zero_state(g2, 0.2);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (size_t i = 0; i < g2.size(); ++i) {
        s0.phi[i] = cplx(U(rng), U(rng));
        s0.chi[i] = cplx(U(rng), U(rng));
    }
    double e0 = energy_functional(g2, s0, p.kappa);
    double tau1 = 1.4;
    auto s1 = evolve_semilinear(p, s0, tau1, 1e-10);
    double e1 = energy_functional(g2, s1, p.kappa);
    double coef = integrate_adaptive([&](double t) { return 1.0 + p.q(t); }, 0.2, tau1);
    CHECK(e1 <= e0 * std::exp(coef) * (1 + 1e-9));
}

TEST_CASE("linear energy identity in the kappa = 0 limit") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    SemilinearProblem p;
    p.grid = g;
    p.kappa = 0.0;
    p.q = nullptr;  // free wave, R = 0
    auto st = zero_state(g, 0.0);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        double x = 2 * M_PI * ix / g.N, y = 2 * M_PI * iy / g.N, z = 2 * M_PI * iz / g.N;
        st.phi[idx] = 0.4 * std::cos(x + y) + 0.1 * std::sin(z);
    });
    // quadratic energy H1 x L2 with the +1 shift is not conserved, but the
    // true wave energy ||grad phi||^2 + ||chi||^2 + ... reduces to mode
    // rotations; check by comparing E at matching phases
    double e0 = energy_functional(g, st, 0.0);
    auto s1 = evolve_semilinear(p, st, 2.0 * M_PI, 1e-10);  // full period of every mode?
    // integer frequencies sqrt(lam): not all periodic; instead check the
    // identity d/dtau [sum (lam+1)|phi|^2 + |chi|^2] = 2 Re <phi, conj(chi)>
    // via a short step comparison
    double h = 1e-4;
    auto s2 = evolve_semilinear(p, st, h, 1e-12);
    double e2 = energy_functional(g, s2, 0.0);
    // d/dtau E = 2 Re sum (1) phi conj(chi) * V-normalization (the +1 shift term)
    std::vector<cplx> ph = st.phi, ch = st.chi;
    double dot = 0;
    for (size_t i = 0; i < g.size(); ++i) dot += 2.0 * std::real(st.phi[i] * std::conj(st.chi[i]));
    dot *= g.volume() / double(g.size());
    CHECK(e2 - e0 == doctest::Approx(dot * h).epsilon(1e-2));
    (void)s1;
    (void)e0;
}

TEST_CASE("semilinear crossing: kappa = 0 equals the linear stack") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    double c2 = 0.5;
    auto qf = [c2](double tau) { return c2 / std::abs(tau); };

    SemilinearCrossSpec spec;
    spec.hat.grid = spec.check.grid = g;
    spec.hat.kappa = spec.check.kappa = 0.0;
    spec.hat.q = spec.check.q = qf;
    spec.omega_hat = constant_factor(Side::hat, -0.3, 1.0);
    spec.omega_check = constant_factor(Side::check, 0.3, 1.0);
    auto qh = effective_mass_from_q(Side::hat, -0.3, qf);
    auto qc = effective_mass_from_q(Side::check, 0.3, qf);
    spec.A_hat = std::make_shared<RiccatiSolution>(picard_construct(qh, 1.0));
    spec.A_check = std::make_shared<RiccatiSolution>(picard_construct(qc, 1.0));
    spec.h = 0.1;
    // the cross-stack comparison needs the finer mesh of the linear layer
    spec.layer.du = 0.035;
    spec.layer.floor_w = 1e-11;
    spec.layer.tol = 1e-10;

    // data on two modes
    auto data = zero_state(g, -0.3);
    std::vector<cplx> ph(g.size()), ch(g.size());
    std::vector<std::array<int, 3>> ks = {{1, 0, 0}, {0, 2, 1}};
    std::vector<cplx> amps = {{0.5, -0.2}, {0.3, 0.4}};
    std::vector<cplx> damps = {{-0.1, 0.3}, {0.2, 0.1}};
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        for (size_t m = 0; m < ks.size(); ++m)
            if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] && g.freq(iz) == ks[m][2]) {
                ph[idx] = amps[m] * double(g.size());
                ch[idx] = damps[m] * double(g.size());
            }
    });
    fft3(ph, g.N, true);
    fft3(ch, g.N, true);
    data.phi = ph;
    data.chi = ch;

    CrossDiagnostics diag;
    auto out = cross_semilinear(spec, data, &diag);
    CHECK(diag.continuity_mismatch < 1e-5);

    auto sp = out.phi, sc_ = out.chi;
    fft3(sp, g.N, false);
    fft3(sc_, g.N, false);
    for (size_t m = 0; m < ks.size(); ++m) {
        double lam = 0;
        for (int d = 0; d < 3; ++d) lam += double(ks[m][d]) * ks[m][d];
        ModeProblem mp;
        mp.lambda = lam;
        mp.q = qf;
        ModeState st{-0.3, amps[m], damps[m]};
        st = evolve_regular(mp, st, -0.1);
        auto bang = limit_W(mp, spec.A_hat.get(), st, Side::hat);
        auto edge = inverse_W(mp, spec.A_check.get(), bang, Side::check, 0.1);
        auto ref = evolve_regular(mp, edge, 0.3);
        cplx got_phi, got_chi;
        g.for_modes([&](size_t idx, int ix, int iy, int iz) {
            if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] && g.freq(iz) == ks[m][2]) {
                got_phi = sp[idx] / double(g.size());
                got_chi = sc_[idx] / double(g.size());
            }
        });
        CHECK(std::abs(got_phi - ref.phi) < 1e-6);
        CHECK(std::abs(got_chi - ref.chi) < 1e-6);
    }
}

TEST_CASE("small-amplitude crossing stays within O(amplitude^3) of linear") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    auto qf = [](double tau) { return 0.25 / std::abs(tau); };
    SemilinearCrossSpec nl;
    nl.hat.grid = nl.check.grid = g;
    nl.hat.kappa = nl.check.kappa = 1.0;
    nl.hat.q = nl.check.q = qf;
    nl.omega_hat = constant_factor(Side::hat, -0.3, 1.0);
    nl.omega_check = constant_factor(Side::check, 0.3, 1.0);
    auto qh = effective_mass_from_q(Side::hat, -0.3, qf);
    auto qc = effective_mass_from_q(Side::check, 0.3, qf);
    nl.A_hat = std::make_shared<RiccatiSolution>(picard_construct(qh, 1.0));
    nl.A_check = std::make_shared<RiccatiSolution>(picard_construct(qc, 1.0));
    nl.h = 0.1;
    SemilinearCrossSpec lin = nl;
    lin.hat.kappa = lin.check.kappa = 0.0;

    auto make_data = [&](double amp) {
        auto d = zero_state(g, -0.3);
        g.for_modes([&](size_t idx, int ix, int iy, int iz) {
            double x = 2 * M_PI * ix / g.N, y = 2 * M_PI * iy / g.N;
            (void)iz;
            d.phi[idx] = amp * (std::cos(x) + 0.5 * std::sin(y));
            d.chi[idx] = amp * 0.3 * std::sin(x);
        });
        return d;
    };
    double prev_ratio = 0;
    for (double amp : {1e-1, 1e-2}) {
        auto d = make_data(amp);
        auto a = cross_semilinear(nl, d);
        auto b = cross_semilinear(lin, d);
        FieldState3 diff = a;
        for (size_t i = 0; i < g.size(); ++i) {
            diff.phi[i] -= b.phi[i];
            diff.chi[i] -= b.chi[i];
        }
        double ratio = h1l2_norm(g, diff) / std::pow(h1l2_norm(g, d), 3);
        if (prev_ratio != 0) CHECK(ratio < 3.0 * prev_ratio);  // cubic scaling
        prev_ratio = ratio;
    }
}

TEST_CASE("lipschitz probe ratios are finite and stable") {
    TorusGrid3 g(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
    auto qf = [](double tau) { return 0.25 / std::abs(tau); };
    SemilinearCrossSpec spec;
    spec.hat.grid = spec.check.grid = g;
    spec.hat.kappa = spec.check.kappa = 1.0;
    spec.hat.q = spec.check.q = qf;
    spec.omega_hat = constant_factor(Side::hat, -0.3, 1.0);
    spec.omega_check = constant_factor(Side::check, 0.3, 1.0);
    auto qh = effective_mass_from_q(Side::hat, -0.3, qf);
    auto qc = effective_mass_from_q(Side::check, 0.3, qf);
    spec.A_hat = std::make_shared<RiccatiSolution>(picard_construct(qh, 1.0));
    spec.A_check = std::make_shared<RiccatiSolution>(picard_construct(qc, 1.0));
    spec.h = 0.1;

    auto d = zero_state(g, -0.3);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        double x = 2 * M_PI * ix / g.N;
        (void)iy;
        (void)iz;
        d.phi[idx] = 0.2 * std::cos(x);
    });
    auto rep = lipschitz_probe(spec, d, {1e-2, 1e-3, 1e-4});
    REQUIRE(rep.ratios.size() == 3);
    for (double r : rep.ratios) {
        CHECK(std::isfinite(r));
        CHECK(r > 0.0);
        CHECK(r < 100.0);
    }
    CHECK(std::abs(rep.ratios[1] - rep.ratios[2]) < 0.05 * rep.ratios[2] + 1e-6);

    // zero data: ratio still finite
    auto zd = zero_state(g, -0.3);
    auto zrep = lipschitz_probe(spec, zd, {1e-3});
    CHECK(std::isfinite(zrep.ratios[0]));
}

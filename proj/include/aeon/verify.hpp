#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aeon/frobenius.hpp"
#include "aeon/mode_evolver.hpp"
#include "aeon/riccati.hpp"
#include "aeon/runner.hpp"
#include "aeon/semilinear.hpp"
#include "aeon/transmission.hpp"

namespace aeon {

// One acceptance criterion: measured value against its pinned threshold,
// plus the stated runtime budget where the criterion carries one.
struct CheckResult {
    int id = 0;
    std::string tag;
    std::string name;
    bool pass = false;
    double measured = 0.0;      // worst observed value
    double threshold = 0.0;     // pinned bound
    double seconds = 0.0;
    double budget_seconds = 0.0;  // 0 = no runtime bound
    std::string note;
};

namespace verify_detail {

struct Worst {
    double v = 0.0;
    void feed(double x) { v = std::max(v, x); }
};

struct ScalarPair {
    cplx a, b;
    ScalarPair operator+(const ScalarPair& o) const { return {a + o.a, b + o.b}; }
    ScalarPair operator*(double s) const { return {a * s, b * s}; }
};
inline double norm_inf(const ScalarPair& p) {
    return std::max(std::abs(p.a), std::abs(p.b));
}

inline TransmissionSpec singular_spec(double c2, double tau_minus, double tau_plus, double h,
                                      std::vector<std::pair<double, int>> eigs) {
    TransmissionSpec spec;
    spec.n = 3;
    spec.spectrum = SpectrumSpec::explicit_list(3, std::move(eigs));
    spec.cutoff = 1e9;
    spec.omega_hat = constant_factor(Side::hat, tau_minus, 1.0);
    spec.omega_check = constant_factor(Side::check, tau_plus, 1.0);
    auto qf = [c2](double tau) { return c2 / std::abs(tau); };
    spec.q_hat = effective_mass_from_q(Side::hat, tau_minus, qf);
    spec.q_check = effective_mass_from_q(Side::check, tau_plus, qf);
    spec.path = TransmissionPath::riccati;
    spec.h = h;
    return spec;
}

inline FieldData random_field(double tau, size_t m, unsigned seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    FieldData d;
    d.tau = tau;
    for (size_t i = 0; i < m; ++i)
        d.modes.push_back({scale * cplx(U(rng), U(rng)), scale * cplx(U(rng), U(rng))});
    return d;
}

template <typename F>
CheckResult timed(int id, std::string tag, std::string name, double threshold, F&& body,
                  double budget_seconds = 0.0) {
    CheckResult r;
    r.id = id;
    r.tag = std::move(tag);
    r.name = std::move(name);
    r.threshold = threshold;
    r.budget_seconds = budget_seconds;
    auto t0 = std::chrono::steady_clock::now();
    try {
        r.measured = body();
        r.pass = r.measured <= threshold;
    } catch (const std::exception& e) {
        r.pass = false;
        r.measured = std::numeric_limits<double>::infinity();
        r.note = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0.0 && r.seconds > budget_seconds) {
        r.pass = false;
        r.note += (r.note.empty() ? "" : "; ");
        r.note += "runtime budget exceeded";
    }
    return r;
}

}  // namespace verify_detail

// 1. m = 0 and constant-q mode evolutions vs closed trigonometric forms.
inline CheckResult check_exact_linear() {
    using namespace verify_detail;
    return timed(1, "exact_linear", "trig oracles over unit intervals", 1e-8, [] {
        Worst w;
        for (double lam : {0.0, 1.0, 4.0, 9.0}) {
            // massless: phi'' + lam phi = 0
            ModeProblem p;
            p.lambda = lam;
            double om = std::sqrt(lam);
            ModeState s0{0.1,
                         om == 0 ? cplx(0.7) : cplx(std::cos(om * 0.1)),
                         om == 0 ? cplx(-0.3) : cplx(-om * std::sin(om * 0.1))};
            auto out = evolve_regular(p, s0, 1.1, 1e-11);
            cplx exact = om == 0 ? s0.phi + s0.chi * 1.0 : cplx(std::cos(om * 1.1));
            cplx exactd = om == 0 ? s0.chi : cplx(-om * std::sin(om * 1.1));
            w.feed(std::abs(out.phi - exact));
            w.feed(std::abs(out.chi - exactd));

            // constant q: frequency sqrt(lam + q0)
            ModeProblem pc = p;
            double q0 = 0.7;
            pc.q = [q0](double) { return q0; };
            double oc = std::sqrt(lam + q0);
            ModeState s1{0.1, cplx(std::sin(oc * 0.1)), cplx(oc * std::cos(oc * 0.1))};
            auto outc = evolve_regular(pc, s1, 1.1, 1e-11);
            w.feed(std::abs(outc.phi - std::sin(oc * 1.1)));
            w.feed(std::abs(outc.chi - oc * std::cos(oc * 1.1)));
        }
        return w.v;
    }, 1.0);
}

// 2. Riccati construction: tan oracle, residuals, bounds, L1 budget.
inline CheckResult check_riccati() {
    using namespace verify_detail;
    return timed(2, "riccati", "picard construction against its bounds", 1e-6, [] {
        Worst w;  // every sub-check is scaled so its own bound sits at 1e-6

        // q = 1, check side, eps = 1: A = tan(tau - 1/sqrt(2)) to 1e-8
        auto q1 = effective_mass_from_q(Side::check, 1.0, [](double) { return 1.0; });
        auto At = picard_construct(q1, 1.0);
        for (double tau = 0.7; tau > 1e-4; tau *= 0.6)
            w.feed(std::abs(At(tau) - std::tan(tau - 1.0 / std::sqrt(2.0))) * 1e2);

        for (double c2 : {0.25, 1.0}) {
            for (Side side : {Side::hat, Side::check}) {
                auto q = effective_mass_from_q(side, 1.0,
                                               [c2](double t) { return c2 / std::abs(t); });
                double eps = 1.0;
                auto A = picard_construct(q, eps);
                double weps = std::abs(A.tau_eps);
                // residual down to |tau| = 1e-4 at 1e-6
                for (double v : {1e-1, 1e-2, 1e-3, 1e-4}) {
                    if (v >= weps) continue;
                    w.feed(std::abs(riccati_residual(A, q.q, tau_sign(side) * v)));
                }
                // (inegala) bounds at 1e-6 slack
                double et = eta(side);
                for (double v = weps * 0.98; v > 1e-6; v *= 0.5) {
                    double J = c2 * std::log(weps / v);
                    double val = et * A(tau_sign(side) * v);
                    w.feed(std::max(0.0, J - val));
                    w.feed(std::max(0.0, val - (1.0 + eps) * J));
                }
                // int |A| <= eps/(1+eps) + 1e-8, scaled to the 1e-6 gate
                auto nodes = graded_nodes_desc(weps, 1e-12, 0.02, weps / 64.0);
                std::vector<double> f(nodes.size());
                for (size_t i = 0; i < nodes.size(); ++i)
                    f[i] = std::abs(A(tau_sign(side) * nodes[i]));
                SegmentedQuad sq(nodes);
                double l1 = -sq.total(f) +
                            tail_integral_logfit(nodes.back(), f.back(),
                                                 nodes[nodes.size() - 2], f[f.size() - 2]);
                w.feed(std::max(0.0, l1 - eps / (1.0 + eps) - 1e-8) * 1e2);
            }
        }
        return w.v;
    }, 5.0);
}

// 3. Frobenius cross-validation of the full transmission pipeline.
inline CheckResult check_frobenius_transmission() {
    using namespace verify_detail;
    return timed(3, "frobenius", "pipeline reproduces the explicit rule", 1e-4, [] {
        Worst w;
        for (double c2 : {0.25, 1.0}) {
            auto spec = singular_spec(c2, -0.3, 0.3, 0.1, {{1.0, 1}, {4.0, 1}});
            double D1h = 0.2, D2h = 1.0, D1c = -0.1, D2c = 1.0;
            FuchsProblem ph;
            ph.c2 = c2;
            ph.side = Side::hat;
            ph.truncation = 20;
            FuchsProblem pc = ph;
            pc.side = Side::check;
            spec.A_hat = std::make_shared<RiccatiSolution>(riccati_closed_form(ph, D1h, D2h));
            spec.A_check = std::make_shared<RiccatiSolution>(riccati_closed_form(pc, D1c, D2c));
            double delta = delta_from_series(ph, pc, D1h, D2h, D1c, D2c);

            std::vector<Mode> modes = {{1.0, 1, 0}, {4.0, 1, 1}};
            std::vector<std::pair<cplx, cplx>> Cs = {{cplx(0.7, 0.2), cplx(-1.2, 0.5)},
                                                     {cplx(-0.4, 0.6), cplx(0.9, -0.3)}};
            FieldData data;
            data.tau = spec.tau_minus();
            for (size_t i = 0; i < modes.size(); ++i) {
                FuchsProblem hp = ph;
                hp.lambda = modes[i].lambda;
                auto sv =
                    eval_solution(hp, h2_series(hp), Cs[i].first, Cs[i].second, data.tau);
                data.modes.push_back({sv.phi, sv.dphi});
            }
            auto out = full_map_S(spec, modes, data);
            for (size_t i = 0; i < modes.size(); ++i) {
                FuchsProblem cp = pc;
                cp.lambda = modes[i].lambda;
                auto cseries = h2_series(cp);
                auto [C1c, C2c] = oracle_transmission(Cs[i].first, Cs[i].second, delta);
                auto ref = eval_solution(cp, cseries, C1c, C2c, spec.tau_plus());
                double scale = std::max(std::abs(ref.phi), std::abs(ref.dphi));
                w.feed(std::abs(out.modes[i].value - ref.phi) / scale);
                w.feed(std::abs(out.modes[i].deriv - ref.dphi) / scale);

                // cross-check: extract the constants back from samples near 0
                ModeProblem mp;
                mp.lambda = modes[i].lambda;
                mp.q = spec.q_check.q;
                std::vector<std::pair<double, SolutionValue>> samples;
                auto phi_edge = liouville_scale(3, spec.omega_check, out.modes[i],
                                                spec.tau_plus());
                ModeState st{spec.tau_plus(), phi_edge.value, phi_edge.deriv};
                for (double tau : {0.12, 0.06, 0.03, 0.015}) {
                    st = evolve_regular(mp, st, tau, 1e-12);
                    samples.push_back({tau, {st.phi, st.chi}});
                }
                auto fit = extract_constants(cp, cseries, samples);
                double cs = std::max(std::abs(C1c), std::abs(C2c));
                w.feed(std::abs(fit.C1 - C1c) / cs);
                w.feed(std::abs(fit.C2 - C2c) / cs);
            }
        }
        return w.v;
    }, 30.0);
}

// 4. one-real-parameter family invariance.
inline CheckResult check_delta_family() {
    using namespace verify_detail;
    return timed(4, "delta_family", "equal delta pairs agree; affine rule", 1e-4, [] {
        auto spec = singular_spec(1.0, -0.4, 0.4, 0.08, {{0.0, 1},
                                                         {1.0, 1},
                                                         {2.0, 1},
                                                         {4.0, 1},
                                                         {6.0, 1},
                                                         {9.0, 1},
                                                         {12.0, 1},
                                                         {16.0, 1},
                                                         {20.0, 1},
                                                         {25.0, 1}});
        auto Aeh = std::make_shared<RiccatiSolution>(picard_construct(spec.q_hat, 1.0));
        auto Aec = std::make_shared<RiccatiSolution>(picard_construct(spec.q_check, 1.0));
        std::vector<Mode> modes;
        for (int k = 0; k < 10; ++k)
            modes.push_back({spec.spectrum.spectrum[k].first, 1, k});
        auto data = random_field(spec.tau_minus(), modes.size(), 2024);

        Worst w;
        // equal delta (both shifted by +0.3): discrepancy <= 1e-6, scaled to 1e-4
        auto h1 = std::make_shared<RiccatiSolution>(shift_to_alpha(*Aeh, 0.3));
        auto c1 = std::make_shared<RiccatiSolution>(shift_to_alpha(*Aec, 0.3));
        auto rep = delta_family_check(spec, modes, data, h1, c1, Aeh, Aec, *Aeh, *Aec);
        if (!rep.same_delta) return 1.0;
        w.feed(rep.max_discrepancy * 1e2);

        // deltas differing by 1: the discrepancy follows the affine rule to 1e-4
        auto h2s = std::make_shared<RiccatiSolution>(shift_to_alpha(*Aeh, 1.0));
        auto rep2 = delta_family_check(spec, modes, data, Aeh, Aec, h2s, Aec, *Aeh, *Aec);
        if (rep2.same_delta || rep2.max_discrepancy < 1e-3) return 1.0;
        w.feed(rep2.max_affine_mismatch);
        w.feed(std::abs(rep2.delta2 - rep2.delta1 - 1.0));
        return w.v;
    });
}

// 5. both q in L1: riccati path with alpha = 0 equals the simple path.
inline CheckResult check_l1_consistency() {
    using namespace verify_detail;
    return timed(5, "l1_consistency", "alpha=0 riccati equals simple transmission", 1e-6, [] {
        TransmissionSpec spec;
        spec.n = 3;
        spec.spectrum = SpectrumSpec::explicit_list(
            3, {{0.0, 1}, {1.0, 1}, {3.0, 1}, {7.0, 1}, {11.0, 1}});
        spec.cutoff = 1e9;
        spec.omega_hat = constant_factor(Side::hat, -0.5, 1.0);
        spec.omega_check = constant_factor(Side::check, 0.5, 1.0);
        double q0 = 1.3;
        spec.q_hat = effective_mass_from_q(Side::hat, -0.5, [q0](double) { return q0; });
        spec.q_check = effective_mass_from_q(Side::check, 0.5, [q0](double) { return q0; });
        spec.path = TransmissionPath::simple;
        spec.h = 0.1;

        std::vector<Mode> modes;
        for (int k = 0; k < 5; ++k) modes.push_back({spec.spectrum.spectrum[k].first, 1, k});
        auto data = random_field(spec.tau_minus(), modes.size(), 99);
        auto simple_out = full_map_S(spec, modes, data);

        TransmissionSpec ric = spec;
        ric.path = TransmissionPath::riccati;
        ric.A_hat = std::make_shared<RiccatiSolution>(ivp_solve(spec.q_hat, 0.0));
        ric.A_check = std::make_shared<RiccatiSolution>(ivp_solve(spec.q_check, 0.0));
        ric.h = std::min({0.1, ric.A_hat->h, ric.A_check->h});
        auto ric_out = full_map_S(ric, modes, data);

        Worst w;
        for (size_t i = 0; i < modes.size(); ++i) {
            w.feed(std::abs(simple_out.modes[i].value - ric_out.modes[i].value));
            w.feed(std::abs(simple_out.modes[i].deriv - ric_out.modes[i].deriv));
        }
        return w.v;
    });
}

// 6. homeomorphism identities of the full map on 20 modes.
inline CheckResult check_homeomorphism() {
    using namespace verify_detail;
    return timed(6, "homeomorphism", "linearity 1e-10 and round trip 1e-6", 1e-6, [] {
        std::vector<std::pair<double, int>> eigs;
        for (int k = 0; k < 20; ++k) eigs.push_back({double(k) * k, 1});
        auto spec = singular_spec(1.0, -0.4, 0.4, 0.1, eigs);
        spec.A_hat = std::make_shared<RiccatiSolution>(picard_construct(spec.q_hat, 1.0));
        spec.A_check = std::make_shared<RiccatiSolution>(picard_construct(spec.q_check, 1.0));
        std::vector<Mode> modes;
        for (int k = 0; k < 20; ++k) modes.push_back({double(k) * k, 1, k});

        auto X = random_field(spec.tau_minus(), modes.size(), 5);
        auto Y = random_field(spec.tau_minus(), modes.size(), 6);
        cplx a(1.3, -0.2), b(0.4, 0.9);
        FieldData comb;
        comb.tau = X.tau;
        for (size_t i = 0; i < modes.size(); ++i)
            comb.modes.push_back(CPair{a * X.modes[i].value + b * Y.modes[i].value,
                                       a * X.modes[i].deriv + b * Y.modes[i].deriv});
        auto SX = full_map_S(spec, modes, X);
        auto SY = full_map_S(spec, modes, Y);
        auto SC = full_map_S(spec, modes, comb);
        Worst w;
        for (size_t i = 0; i < modes.size(); ++i) {
            w.feed(std::abs(SC.modes[i].value - (a * SX.modes[i].value + b * SY.modes[i].value)) *
                   1e4);
            w.feed(std::abs(SC.modes[i].deriv - (a * SX.modes[i].deriv + b * SY.modes[i].deriv)) *
                   1e4);
        }
        auto back = invert_full_map(spec, modes, SX);
        for (size_t i = 0; i < modes.size(); ++i) {
            w.feed(std::abs(back.modes[i].value - X.modes[i].value));
            w.feed(std::abs(back.modes[i].deriv - X.modes[i].deriv));
        }
        return w.v;
    });
}

// 7. blow-up signatures on the hat side.
inline CheckResult check_blowup_signatures() {
    using namespace verify_detail;
    return timed(7, "blowup", "chi/ln converges; probe fits +c^2", 0.02, [] {
        Worst w;
        for (double c2 : {0.25, 1.0}) {
            ModeProblem p;
            p.lambda = 1.0;
            p.q = [c2](double tau) { return c2 / std::abs(tau); };
            auto qq = effective_mass_from_q(Side::hat, 1.0, p.q);
            auto A = picard_construct(qq, 1.0);
            ModeState edge{-0.1, cplx(0.9, -0.2), cplx(0.3, 0.1)};
            std::vector<ModeState> traj;
            auto bang = limit_W(p, &A, edge, Side::hat, {}, &traj);

            auto fit_slope = [&traj](double w_lo, double w_hi) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                int n = 0;
                for (const auto& s : traj) {
                    double v = std::abs(s.tau);
                    if (v < w_lo || v > w_hi) continue;
                    double x = std::log(v), y = s.chi.real();
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    sxy += x * y;
                    ++n;
                }
                return (n * sxy - sx * sy) / (n * sxx - sx * sx);
            };
            // fitted ln-slope stable to 1% across the last decade of the run
            double a1 = fit_slope(1e-11, 1e-10);
            double a2 = fit_slope(1e-13, 1e-12);
            w.feed(std::abs(a1 - a2) / std::abs(a2) * 2.0);  // 1% gate on the 2% scale
            // phi converges to psi0
            w.feed(std::abs(traj.back().phi - bang.psi0) * 1.0);
            // divergence probe fits +c^2 to 2%
            auto rep = divergence_probe(A);
            if (!rep.matches_expected_sign) return 1.0;
            w.feed(std::abs(rep.log_coeff - c2) / c2);
        }
        return w.v;
    });
}

// 8. energy identities and envelopes.
inline CheckResult check_energy() {
    using namespace verify_detail;
    return timed(8, "energy", "mode identity, first integral, envelopes", 1e-7, [] {
        Worst w;
        std::vector<double> taus;
        for (int i = 0; i <= 300; ++i) taus.push_back(0.1 + i * 0.003);

        ModeProblem p;
        p.lambda = 4.0;
        p.rho = 0.2;
        p.q = [](double t) { return 0.8 + 0.3 * std::sin(3 * t); };
        p.source = [](double t) { return cplx(0.2 * std::cos(t), 0.1); };
        ModeState s{0.1, cplx(0.8, 0.1), cplx(-0.4, 0.3)};
        auto traj = evolve_regular_sampled(p, s, taus, 1e-12);
        w.feed(energy_identity_residual(p, traj));

        // constant-q first integral conserved to 1e-8 (scaled to the 1e-7 gate)
        ModeProblem pc;
        pc.lambda = 3.0;
        pc.q = [](double) { return 1.5 ; };
        auto trajc = evolve_regular_sampled(pc, s, taus, 1e-12);
        double e0 = std::norm(trajc[0].chi) + 4.5 * std::norm(trajc[0].phi);
        for (auto& st : trajc) {
            double e = std::norm(st.chi) + 4.5 * std::norm(st.phi);
            w.feed(std::abs(e - e0) / e0 * 10.0);
        }

        // Gronwall envelopes never violated
        auto g = gronwall_regular(pc, trajc);
        if (!g.holds()) return 1.0;
        auto qq = effective_mass_from_q(Side::hat, 1.0,
                                        [](double t) { return 1.0 / std::abs(t); });
        auto A = picard_construct(qq, 1.0);
        ModeProblem ph;
        ph.lambda = 1.0;
        ph.q = qq.q;
        ModeState edge{-0.1, cplx(0.5, 0.4), cplx(-0.2, 0.6)};
        std::vector<ModeState> phi_traj;
        limit_W(ph, &A, edge, Side::hat, {}, &phi_traj);
        std::vector<PsiState> psi_traj;
        for (auto& st : phi_traj) {
            double wg = std::exp(A.intA0(st.tau));
            psi_traj.push_back({st.tau, st.phi * wg, (st.chi + A(st.tau) * st.phi) * wg});
        }
        if (!gronwall_damped(ph, &A, psi_traj).holds()) return 1.0;
        return w.v;
    });
}

// 9. semilinear stack.
inline CheckResult check_semilinear() {
    using namespace verify_detail;
    return timed(9, "semilinear", "kappa=0 reduction, scalar oracle, continuity", 1e-5, [] {
        Worst w;
        TorusGrid3 g(16, {2 * M_PI, 2 * M_PI, 2 * M_PI});
        double c2 = 0.5;
        auto qf = [c2](double tau) { return c2 / std::abs(tau); };

        // kappa = 0 reduction vs the linear stack, gated at 1e-6 (x10 scale)
        {
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
            spec.layer.du = 0.035;
            spec.layer.floor_w = 1e-11;
            spec.layer.tol = 1e-10;

            std::vector<std::array<int, 3>> ks = {{1, 0, 0}, {0, 2, 1}, {3, 1, 0}};
            std::vector<cplx> amps = {{0.5, -0.2}, {0.3, 0.4}, {-0.2, 0.1}};
            std::vector<cplx> damps = {{-0.1, 0.3}, {0.2, 0.1}, {0.4, -0.3}};
            FieldState3 data;
            data.tau = -0.3;
            std::vector<cplx> ph(g.size()), ch(g.size());
            g.for_modes([&](size_t idx, int ix, int iy, int iz) {
                for (size_t m = 0; m < ks.size(); ++m)
                    if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] &&
                        g.freq(iz) == ks[m][2]) {
                        ph[idx] = amps[m] * double(g.size());
                        ch[idx] = damps[m] * double(g.size());
                    }
            });
            fft3(ph, g.N, true);
            fft3(ch, g.N, true);
            data.phi = ph;
            data.chi = ch;
            auto out = cross_semilinear(spec, data);
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
                st = evolve_regular(mp, st, -0.1, 1e-12);
                auto bang = limit_W(mp, spec.A_hat.get(), st, Side::hat);
                auto edge = inverse_W(mp, spec.A_check.get(), bang, Side::check, 0.1);
                auto ref = evolve_regular(mp, edge, 0.3, 1e-12);
                cplx got_phi, got_chi;
                g.for_modes([&](size_t idx, int ix, int iy, int iz) {
                    if (g.freq(ix) == ks[m][0] && g.freq(iy) == ks[m][1] &&
                        g.freq(iz) == ks[m][2]) {
                        got_phi = sp[idx] / double(g.size());
                        got_chi = sc_[idx] / double(g.size());
                    }
                });
                w.feed(std::abs(got_phi - ref.phi) * 10.0);
                w.feed(std::abs(got_chi - ref.chi) * 10.0);
            }
        }

        // spatially constant data vs the scalar ODE oracle (1e-7, x100 scale)
        {
            SemilinearProblem p;
            p.grid = TorusGrid3(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
            p.kappa = 1.0;
            p.q = [](double t) { return 0.8 + 0.2 * std::cos(t); };
            FieldState3 st;
            st.tau = 0.2;
            st.phi.assign(p.grid.size(), cplx(0.5, -0.1));
            st.chi.assign(p.grid.size(), cplx(0.1, 0.2));
            auto out = evolve_semilinear(p, st, 1.0, 1e-11);
            using P2 = ScalarPair;
            auto rhs = [&p](double t, const P2& y) {
                return P2{y.b, -p.q(t) * y.a - p.kappa * std::norm(y.a) * y.a};
            };
            Rk45Options ro;
            ro.rel_tol = 1e-13;
            ro.abs_tol = 1e-14;
            auto ref = rk45_integrate(rhs, 0.2, 1.0, P2{cplx(0.5, -0.1), cplx(0.1, 0.2)}, ro);
            w.feed(std::abs(out.phi[0] - ref.a) * 100.0);
            w.feed(std::abs(out.chi[0] - ref.b) * 100.0);
        }

        // two-sided extrapolation continuity at 1e-5 and Lipschitz stability
        {
            TorusGrid3 g8(8, {2 * M_PI, 2 * M_PI, 2 * M_PI});
            SemilinearCrossSpec spec;
            spec.hat.grid = spec.check.grid = g8;
            spec.hat.kappa = spec.check.kappa = 1.0;
            spec.hat.q = spec.check.q = qf;
            spec.omega_hat = constant_factor(Side::hat, -0.3, 1.0);
            spec.omega_check = constant_factor(Side::check, 0.3, 1.0);
            auto qh = effective_mass_from_q(Side::hat, -0.3, qf);
            auto qc = effective_mass_from_q(Side::check, 0.3, qf);
            spec.A_hat = std::make_shared<RiccatiSolution>(picard_construct(qh, 1.0));
            spec.A_check = std::make_shared<RiccatiSolution>(picard_construct(qc, 1.0));
            spec.h = 0.1;
            FieldState3 d;
            d.tau = -0.3;
            d.phi.resize(g8.size());
            d.chi.resize(g8.size());
            g8.for_modes([&](size_t idx, int ix, int iy, int iz) {
                double x = 2 * M_PI * ix / g8.N, y = 2 * M_PI * iy / g8.N;
                (void)iz;
                d.phi[idx] = 0.25 * std::cos(x) + 0.1 * std::sin(y);
                d.chi[idx] = 0.1 * std::sin(x);
            });
            CrossDiagnostics diag;
            cross_semilinear(spec, d, &diag);
            w.feed(diag.continuity_mismatch);

            auto rep = lipschitz_probe(spec, d, {1e-2, 1e-3, 1e-4});
            for (double r : rep.ratios)
                if (!std::isfinite(r) || r <= 0 || r > 1e3) return 1.0;
            w.feed(std::abs(rep.ratios[1] - rep.ratios[2]) /
                   std::max(rep.ratios[2], 1e-12) * 1e-4);
        }
        return w.v;
    }, 120.0);
}

// 10. profile identities.
inline CheckResult check_profiles() {
    using namespace verify_detail;
    return timed(10, "profiles", "de Sitter asymptotics and reciprocity", 1e-4, [] {
        Worst w;
        // quadrature-path de Sitter factor: Omega(tau) * (-H tau) -> 1 to 1e-6
        double H = 1.0;
        auto [tau_minus, num] =
            conformal_time_hat([](double t) { return std::exp(t); }, 0.0, 40.0,
                               {ScaleFactorTail::Kind::exponential, H});
        (void)tau_minus;
        for (double tau : {-1e-2, -1e-3, -1e-4})
            w.feed(std::abs(num(tau) * (-H * tau) - 1.0) * 1e2);

        // Penrose reciprocity for Omega_hat = -a, eta = 1/2, C = sqrt(2H):
        // fitted limit of the residual <= 1e-4
        auto hat = de_sitter_hat(1.0, H, 0.0, -1.0);
        auto [tau_plus, chk] = conformal_time_check(
            [H](double t) { return std::sqrt(2.0 * H) * std::sqrt(t); }, 1.0);
        (void)tau_plus;
        // linear fit of residual against tau, extrapolate to 0
        double s_x = 0, s_y = 0, s_xx = 0, s_xy = 0;
        int n = 0;
        for (double tau = 0.2; tau > 1e-3; tau *= 0.5) {
            double r = reciprocal_residual(hat, chk, tau);
            s_x += tau;
            s_y += r;
            s_xx += tau * tau;
            s_xy += tau * r;
            ++n;
        }
        double slope = (n * s_xy - s_x * s_y) / (n * s_xx - s_x * s_x);
        double limit = (s_y - slope * s_x) / n;
        w.feed(std::abs(limit));
        return w.v;
    });
}

inline std::vector<CheckResult> run_acceptance(const std::string& tag_filter = "") {
    std::vector<CheckResult> out;
    auto want = [&](const char* tag) {
        return tag_filter.empty() || tag_filter == tag;
    };
    if (want("exact_linear")) out.push_back(check_exact_linear());
    if (want("riccati")) out.push_back(check_riccati());
    if (want("frobenius")) out.push_back(check_frobenius_transmission());
    if (want("delta_family")) out.push_back(check_delta_family());
    if (want("l1_consistency")) out.push_back(check_l1_consistency());
    if (want("homeomorphism")) out.push_back(check_homeomorphism());
    if (want("blowup")) out.push_back(check_blowup_signatures());
    if (want("energy")) out.push_back(check_energy());
    if (want("semilinear")) out.push_back(check_semilinear());
    if (want("profiles")) out.push_back(check_profiles());
    return out;
}

}  // namespace aeon

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/mode_evolver.hpp"
#include "aeon/profiles.hpp"
#include "aeon/riccati.hpp"
#include "aeon/spectrum.hpp"

namespace aeon {

enum class TransmissionPath { simple, riccati };

// Everything defining the crossing map: profiles on both sides, the spectral
// truncation, the path through the bang surface and its Riccati pair.
struct TransmissionSpec {
    int n = 3;
    SpectrumSpec spectrum;
    double cutoff = 10.0;

    ConformalFactor omega_hat, omega_check;
    EffectiveMassSq q_hat, q_check;

    TransmissionPath path = TransmissionPath::riccati;
    std::shared_ptr<RiccatiSolution> A_hat, A_check;

    // per-mode source coefficients of Omega^{(n+3)/2} f (index-aligned with
    // enumerate_modes; empty = no source)
    std::vector<std::function<cplx(double)>> source_hat, source_check;

    double h = 0.1;  // damped-layer half-width
    LayerOptions layer;
    double regular_tol = 1e-11;

    double tau_minus() const { return omega_hat.tau_edge; }
    double tau_plus() const { return omega_check.tau_edge; }

    void validate() const {
        if (n < 1) throw validation_error("transmission: dimension must be >= 1");
        if (!(tau_minus() < 0.0) || !(tau_plus() > 0.0))
            throw validation_error("transmission: need tau_- < 0 < tau_+");
        if (!(h > 0.0) || h > -tau_minus() || h > tau_plus())
            throw validation_error("transmission: layer width exceeds the side intervals");
        if (path == TransmissionPath::simple) {
            if (q_hat.cls != IntegrabilityClass::L1 || q_check.cls != IntegrabilityClass::L1)
                throw validation_error(
                    "transmission: the simple path needs q in L1 on both sides");
        } else {
            if (!A_hat || !A_check)
                throw validation_error("transmission: the Riccati path needs both solutions");
            if (q_hat.cls == IntegrabilityClass::neither ||
                q_check.cls == IntegrabilityClass::neither)
                throw validation_error(
                    "transmission: q must be |tau|-weighted integrable on both sides");
            if (h > A_hat->h * (1 + 1e-12) || h > A_check->h * (1 + 1e-12))
                throw validation_error("transmission: layer exceeds a Riccati domain");
        }
    }
};

// Field data at a fixed time: one (u, du/dtau) pair per enumerated mode.
struct FieldData {
    double tau = 0.0;
    std::vector<CPair> modes;
};

// The layer half-width default: min(0.1, |tau_-|/4, tau_+/4), clipped to the
// Riccati domains when present.
inline double default_layer_width(double tau_minus, double tau_plus,
                                  const RiccatiSolution* Ahat = nullptr,
                                  const RiccatiSolution* Acheck = nullptr) {
    double h = std::min(0.1, std::min(-tau_minus / 4.0, tau_plus / 4.0));
    if (Ahat) h = std::min(h, Ahat->h);
    if (Acheck) h = std::min(h, Acheck->h);
    return h;
}

// ---------------------------------------------------------------------------
// The crossing itself is the identity on renormalized pairs; these two ops
// carry the path validation and make the matching conditions explicit.
// ---------------------------------------------------------------------------
inline BangPair cross_simple(const TransmissionSpec& spec, const BangPair& hat_pair) {
    if (spec.path != TransmissionPath::simple)
        throw validation_error("cross_simple: spec is not on the simple path");
    return hat_pair;  // continuity of Omega^{(n-1)/2} u and its derivative
}

inline BangPair cross_riccati(const TransmissionSpec& spec, const BangPair& hat_pair) {
    if (spec.path != TransmissionPath::riccati)
        throw validation_error("cross_riccati: spec is not on the Riccati path");
    return hat_pair;  // identity on (lim phi, lim(phi' + A phi))
}

// ---------------------------------------------------------------------------
// Full map: Liouville scale at tau_-, regular evolution to the layer,
// W-limit, crossing, outward W, regular evolution, unscale at tau_+.
// ---------------------------------------------------------------------------
namespace detail {

inline ModeProblem mode_problem(const TransmissionSpec& spec, Side side, double lambda,
                                size_t idx) {
    ModeProblem p;
    p.lambda = lambda;
    p.rho = curvature_potential(spec.spectrum);
    p.q = side == Side::hat ? spec.q_hat.q : spec.q_check.q;
    const auto& srcs = side == Side::hat ? spec.source_hat : spec.source_check;
    if (idx < srcs.size() && srcs[idx]) p.source = srcs[idx];
    return p;
}

inline const RiccatiSolution* layer_A(const TransmissionSpec& spec, Side side) {
    if (spec.path == TransmissionPath::simple) return nullptr;
    return side == Side::hat ? spec.A_hat.get() : spec.A_check.get();
}

}  // namespace detail

// hat-side data at tau_- for one mode -> pair on the bang surface
inline BangPair mode_to_bang(const TransmissionSpec& spec, double lambda, size_t idx,
                             const CPair& u_pair) {
    auto p = detail::mode_problem(spec, Side::hat, lambda, idx);
    auto phi = liouville_scale(spec.n, spec.omega_hat, u_pair, spec.tau_minus());
    ModeState st{spec.tau_minus(), phi.value, phi.deriv};
    st = evolve_regular(p, st, -spec.h, spec.regular_tol);
    return limit_W(p, detail::layer_A(spec, Side::hat), st, Side::hat, spec.layer);
}

// pair on the bang surface -> check-side data at tau_+ for one mode
inline CPair bang_to_mode(const TransmissionSpec& spec, double lambda, size_t idx,
                          const BangPair& bang) {
    auto p = detail::mode_problem(spec, Side::check, lambda, idx);
    auto st = inverse_W(p, detail::layer_A(spec, Side::check), bang, Side::check, spec.h,
                        spec.layer);
    st = evolve_regular(p, st, spec.tau_plus(), spec.regular_tol);
    return liouville_unscale(spec.n, spec.omega_check, {st.phi, st.chi}, spec.tau_plus());
}

inline FieldData full_map_S(const TransmissionSpec& spec, const std::vector<Mode>& modes,
                            const FieldData& data) {
    spec.validate();
    if (data.modes.size() != modes.size())
        throw validation_error("full_map_S: mode count mismatch");
    FieldData out;
    out.tau = spec.tau_plus();
    out.modes.resize(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        try {
            auto bang = mode_to_bang(spec, modes[i].lambda, i, data.modes[i]);
            bang = spec.path == TransmissionPath::simple ? cross_simple(spec, bang)
                                                         : cross_riccati(spec, bang);
            out.modes[i] = bang_to_mode(spec, modes[i].lambda, i, bang);
        } catch (const numeric_error& e) {
            throw numeric_error("mode " + std::to_string(modes[i].index) +
                                " (lambda=" + std::to_string(modes[i].lambda) +
                                "): " + e.what());
        }
    }
    return out;
}

// exact reversal of the pipeline: data at tau_+ -> data at tau_-
inline FieldData invert_full_map(const TransmissionSpec& spec, const std::vector<Mode>& modes,
                                 const FieldData& data) {
    spec.validate();
    if (data.modes.size() != modes.size())
        throw validation_error("invert_full_map: mode count mismatch");
    FieldData out;
    out.tau = spec.tau_minus();
    out.modes.resize(modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        try {
            auto pc = detail::mode_problem(spec, Side::check, modes[i].lambda, i);
            auto phi = liouville_scale(spec.n, spec.omega_check, data.modes[i],
                                       spec.tau_plus());
            ModeState st{spec.tau_plus(), phi.value, phi.deriv};
            st = evolve_regular(pc, st, spec.h, spec.regular_tol);
            auto bang = limit_W(pc, detail::layer_A(spec, Side::check), st, Side::check,
                                spec.layer);

            auto ph = detail::mode_problem(spec, Side::hat, modes[i].lambda, i);
            auto hat_st = inverse_W(ph, detail::layer_A(spec, Side::hat), bang, Side::hat,
                                    spec.h, spec.layer);
            hat_st = evolve_regular(ph, hat_st, spec.tau_minus(), spec.regular_tol);
            out.modes[i] = liouville_unscale(spec.n, spec.omega_hat,
                                             {hat_st.phi, hat_st.chi}, spec.tau_minus());
        } catch (const numeric_error& e) {
            throw numeric_error("mode " + std::to_string(modes[i].index) +
                                " (lambda=" + std::to_string(modes[i].lambda) +
                                "): " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// delta extraction and the one-parameter family check
// ---------------------------------------------------------------------------

// alpha = lim (A - A_ref), extrapolated against the O(w ln^2 w) remainder.
inline double delta_limit_against(const RiccatiSolution& A, const RiccatiSolution& ref,
                                  double w1 = 1e-10, double w2 = 1e-12) {
    if (A.side != ref.side) throw validation_error("delta_limit_against: side mismatch");
    double sgn = tau_sign(A.side);
    auto d = [&](double w) { return A(sgn * w) - ref(sgn * w); };
    double r1 = w1 * std::log(w1) * std::log(w1);
    double r2 = w2 * std::log(w2) * std::log(w2);
    double d1 = d(w1), d2 = d(w2);
    return d2 - (d1 - d2) * r2 / (r1 - r2);
}

// delta := alpha_hat - alpha_check for a Riccati pair, relative to a shared
// anchor pair.
inline double pair_delta(const RiccatiSolution& A_hat, const RiccatiSolution& A_check,
                         const RiccatiSolution& ref_hat, const RiccatiSolution& ref_check) {
    return delta_limit_against(A_hat, ref_hat) - delta_limit_against(A_check, ref_check);
}

struct DeltaFamilyReport {
    double delta1 = 0.0, delta2 = 0.0;
    double max_discrepancy = 0.0;     // max mode |S2 X - S1 X|
    double max_affine_mismatch = 0.0; // vs the predicted (0, ddelta*psi0) correction
    bool same_delta = false;
};

// Run the crossing with two Riccati pairs; when their deltas agree the maps
// agree, and in general the difference is the affine correction through the
// check side applied to (0, ddelta * psi0).
inline DeltaFamilyReport delta_family_check(
    const TransmissionSpec& base, const std::vector<Mode>& modes, const FieldData& data,
    std::shared_ptr<RiccatiSolution> A_hat_1, std::shared_ptr<RiccatiSolution> A_check_1,
    std::shared_ptr<RiccatiSolution> A_hat_2, std::shared_ptr<RiccatiSolution> A_check_2,
    const RiccatiSolution& ref_hat, const RiccatiSolution& ref_check, double tol = 1e-6) {
    TransmissionSpec s1 = base, s2 = base;
    s1.A_hat = A_hat_1;
    s1.A_check = A_check_1;
    s2.A_hat = A_hat_2;
    s2.A_check = A_check_2;

    DeltaFamilyReport rep;
    rep.delta1 = pair_delta(*A_hat_1, *A_check_1, ref_hat, ref_check);
    rep.delta2 = pair_delta(*A_hat_2, *A_check_2, ref_hat, ref_check);
    rep.same_delta = std::abs(rep.delta1 - rep.delta2) <= tol;
    double ddelta = rep.delta2 - rep.delta1;

    auto out1 = full_map_S(s1, modes, data);
    auto out2 = full_map_S(s2, modes, data);
    for (size_t i = 0; i < modes.size(); ++i) {
        cplx du = out2.modes[i].value - out1.modes[i].value;
        cplx dd = out2.modes[i].deriv - out1.modes[i].deriv;
        rep.max_discrepancy =
            std::max({rep.max_discrepancy, std::abs(du), std::abs(dd)});

        // predicted difference: the check side of pair 1 applied to (0, ddelta*psi0)
        auto bang1 = mode_to_bang(s1, modes[i].lambda, i, data.modes[i]);
        auto corr = bang_to_mode(s1, modes[i].lambda, i, BangPair{cplx{}, ddelta * bang1.psi0});
        rep.max_affine_mismatch = std::max(
            {rep.max_affine_mismatch, std::abs(du - corr.value), std::abs(dd - corr.deriv)});
    }
    return rep;
}

}  // namespace aeon

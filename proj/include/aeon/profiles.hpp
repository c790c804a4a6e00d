#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/interp.hpp"
#include "aeon/mesh.hpp"
#include "aeon/quadrature.hpp"

namespace aeon {

enum class AsymptoticTag { bounce, ccc_expansion, big_rip, generic };

enum class IntegrabilityClass { L1, weighted_L1, neither };

inline const char* to_string(IntegrabilityClass c) {
    switch (c) {
        case IntegrabilityClass::L1: return "L1";
        case IntegrabilityClass::weighted_L1: return "weighted_L1";
        default: return "neither";
    }
}

// Conformal factor on one side: nonvanishing C^1 function of tau on the open
// side interval, with its derivative. Sign is constant on the side.
struct ConformalFactor {
    Side side = Side::hat;
    double tau_edge = -1.0;  // tau_- (hat) or tau_+ (check)
    std::function<double(double)> omega;
    std::function<double(double)> domega;
    AsymptoticTag tag = AsymptoticTag::generic;

    double operator()(double tau) const { return omega(tau); }

    void check_domain(double tau) const {
        bool ok = side == Side::hat ? (tau >= tau_edge && tau < 0.0)
                                    : (tau > 0.0 && tau <= tau_edge);
        if (!ok)
            throw validation_error("conformal factor: tau=" + std::to_string(tau) +
                                   " outside the " + side_name(side) + " side");
    }
};

struct MassProfile {
    std::function<double(double)> m;  // >= 0, continuous on the side
    double operator()(double tau) const { return m(tau); }
};

struct EffectiveMassSq {
    Side side = Side::hat;
    double tau_edge = -1.0;
    std::function<double(double)> q;  // q = m^2 Omega^2 >= 0
    IntegrabilityClass cls = IntegrabilityClass::L1;

    double operator()(double tau) const { return q(tau); }

    static EffectiveMassSq from_parts(const MassProfile& m, const ConformalFactor& om) {
        EffectiveMassSq e;
        e.side = om.side;
        e.tau_edge = om.tau_edge;
        auto mf = m.m;
        auto of = om.omega;
        e.q = [mf, of](double tau) {
            double mv = mf(tau), ov = of(tau);
            return mv * mv * ov * ov;
        };
        return e;
    }
};

// ---------------------------------------------------------------------------
// FLRW conformal time
// ---------------------------------------------------------------------------

// Tail model for 1/a beyond the numerical cut: exponential a ~ C e^{Ht} or
// power law a ~ C t^p (p > 1 for an integrable tail).
struct ScaleFactorTail {
    enum class Kind { exponential, power } kind = Kind::exponential;
    double rate = 1.0;  // H for exponential, p for power
};

// tau(t) = -int_t^inf ds/a(s); returns (tau_-, Omega_hat) with
// Omega_hat(tau) = sign * a(t(tau)). The finite part is adaptive quadrature
// up to the cut; the tail uses the declared family.
inline std::pair<double, ConformalFactor> conformal_time_hat(
    std::function<double(double)> a, double t_start, double cut,
    ScaleFactorTail tail, double sign = 1.0) {
    if (!(cut > t_start)) throw validation_error("conformal_time_hat: cut must exceed t_start");
    if (!(a(t_start) > 0.0) || !(a(cut) > 0.0))
        throw validation_error("conformal_time_hat: scale factor must be positive");

    auto tail_integral = [&](double T) {  // int_T^inf ds/a(s), by family
        if (tail.kind == ScaleFactorTail::Kind::exponential) {
            if (!(tail.rate > 0.0))
                throw numeric_error("conformal time undefined: non-integrable exponential tail");
            return 1.0 / (tail.rate * a(T));
        }
        if (!(tail.rate > 1.0))
            throw numeric_error("conformal time undefined: non-integrable power tail");
        return T / ((tail.rate - 1.0) * a(T));
    };

    // tau at sample times: cumulative quadrature over [t_start, cut] + tail
    const int n_nodes = 1600;
    std::vector<double> nodes(n_nodes + 1), taus(n_nodes + 1);
    for (int i = 0; i <= n_nodes; ++i)
        nodes[i] = t_start + (cut - t_start) * i / double(n_nodes);
    double acc = -tail_integral(cut);  // tau(cut)
    taus[n_nodes] = acc;
    for (size_t i = nodes.size() - 1; i > 0; --i) {
        double seg = integrate_adaptive([&](double s) { return 1.0 / a(s); }, nodes[i - 1],
                                        nodes[i], 1e-14);
        acc -= seg;
        taus[i - 1] = acc;
    }
    double tau_minus = taus.front();
    double tau_cut = taus.back();

    // Inversion per query: coarse inverse table to land near the root, then
    // Newton on the node-anchored exact integral (dtau/dt = 1/a known).
    auto grid = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>(
        std::move(nodes), std::move(taus));
    auto coarse_inv = std::make_shared<MonotoneCubic>(grid->second, grid->first);
    auto t_of_tau = [grid, coarse_inv, tau_cut, cut, tail, a](double tau) {
        if (tau > tau_cut) {
            // tail region
            if (tail.kind == ScaleFactorTail::Kind::exponential) {
                // a(t) ~ a(cut) e^{H (t-cut)}  =>  tau = -1/(H a(t))
                double at = -1.0 / (tail.rate * tau);
                return cut + std::log(at / a(cut)) / tail.rate;
            }
            // a(t) ~ a(cut) (t/cut)^p  =>  tau = -t / ((p-1) a(t))
            double p = tail.rate;
            return cut * std::pow(-tau * (p - 1.0) * a(cut) / cut, -1.0 / (p - 1.0));
        }
        double t = (*coarse_inv)(tau);
        const auto& tn = grid->first;
        const auto& tv = grid->second;
        for (int it = 0; it < 6; ++it) {
            size_t i = size_t(std::upper_bound(tn.begin(), tn.end(), t) - tn.begin());
            i = i == 0 ? 0 : i - 1;
            if (i >= tn.size()) i = tn.size() - 1;
            double exact_tau =
                tv[i] + integrate_adaptive([&](double s) { return 1.0 / a(s); }, tn[i], t, 1e-15);
            double step = -(exact_tau - tau) * a(t);
            t += step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(t))) break;
        }
        return t;
    };

    ConformalFactor cf;
    cf.side = Side::hat;
    cf.tau_edge = tau_minus;
    cf.tag = AsymptoticTag::ccc_expansion;
    auto a_fn = a;
    cf.omega = [t_of_tau, a_fn, sign](double tau) { return sign * a_fn(t_of_tau(tau)); };
    cf.domega = [cf_omega = cf.omega](double tau) {
        double hstep = std::min(0.4 * std::abs(tau), std::max(1e-9, 1e-5 * std::abs(tau)));
        return (cf_omega(tau + hstep) - cf_omega(tau - hstep)) / (2.0 * hstep);
    };
    return {tau_minus, cf};
}

// tau(t) = int_0^t ds/a(s) with a(t) -> 0 integrably at 0.
// The quadrature splits the singular end on a graded mesh.
inline std::pair<double, ConformalFactor> conformal_time_check(
    const std::function<double(double)>& a, double t_plus) {
    if (!(t_plus > 0.0)) throw validation_error("conformal_time_check: t_plus must be > 0");

    // cumulative tau at graded t-nodes toward 0
    auto tn = graded_nodes_desc(t_plus, 1e-13 * t_plus, 0.01, t_plus / 400.0);
    std::vector<double> inv_a(tn.size());
    for (size_t i = 0; i < tn.size(); ++i) {
        double av = a(tn[i]);
        if (!(av > 0.0)) throw validation_error("conformal_time_check: a must be positive");
        inv_a[i] = 1.0 / av;
    }
    SegmentedQuad quad(tn);
    auto cum = quad.cumulative(inv_a);  // int from t_plus down to tn[i] (negative of tau gap)

    // integrability of 1/a at 0: local exponent over the innermost decade
    size_t i1 = tn.size() - 1, i0 = i1;
    while (i0 > 0 && tn[i0] < 10.0 * tn[i1]) --i0;
    if (inv_a[i1] > 0.0 && inv_a[i0] > 0.0) {
        double p = std::log(inv_a[i1] / inv_a[i0]) / std::log(tn[i1] / tn[i0]);
        if (p <= -0.98) throw numeric_error("conformal time undefined: 1/a not integrable at 0");
    }
    double tail = tail_integral_powerfit(tn.back(), inv_a.back(), tn[tn.size() - 2],
                                         inv_a[tn.size() - 2]);
    if (!std::isfinite(tail) || tail < 0.0)
        throw numeric_error("conformal time undefined: 1/a not integrable at 0");
    double tau_plus = -cum.back() + tail;  // int_0^{t_plus}
    if (!(tau_plus > 0.0) || !std::isfinite(tau_plus))
        throw numeric_error("conformal time undefined: 1/a not integrable at 0");

    // tau at each node, ascending for the inverse table
    std::vector<double> taus(tn.size()), ts(tn.size());
    for (size_t i = 0; i < tn.size(); ++i) {
        taus[tn.size() - 1 - i] = tau_plus + cum[i];  // cum <= 0
        ts[tn.size() - 1 - i] = tn[i];
    }
    auto inv = std::make_shared<MonotoneCubic>(taus, ts);
    double tau_lo = taus.front();
    double t_lo = ts.front();
    auto a_fn = a;
    auto t_of_tau = [inv, tau_lo, t_lo](double tau) {
        if (tau <= tau_lo) return t_lo * (tau / tau_lo);  // linear pinch to 0
        return (*inv)(tau);
    };

    ConformalFactor cf;
    cf.side = Side::check;
    cf.tau_edge = tau_plus;
    cf.tag = AsymptoticTag::bounce;
    cf.omega = [t_of_tau, a_fn](double tau) { return a_fn(t_of_tau(tau)); };
    cf.domega = [cf_omega = cf.omega](double tau) {
        double hstep = std::min(0.4 * tau, std::max(1e-9, 1e-5 * tau));
        return (cf_omega(tau + hstep) - cf_omega(tau - hstep)) / (2.0 * hstep);
    };
    return {tau_plus, cf};
}

// Exact closed forms for the two FLRW families used throughout.
// De Sitter hat side: a(t) = C e^{Ht}  =>  Omega(tau) = -sign_choice/(H tau).
inline ConformalFactor de_sitter_hat(double C, double H, double t_start, double sign = 1.0) {
    if (!(C > 0.0) || !(H > 0.0)) throw validation_error("de_sitter_hat: C, H must be > 0");
    ConformalFactor cf;
    cf.side = Side::hat;
    cf.tau_edge = -std::exp(-H * t_start) / (C * H);
    cf.tag = AsymptoticTag::ccc_expansion;
    cf.omega = [H, sign](double tau) { return -sign / (H * tau); };
    cf.domega = [H, sign](double tau) { return sign / (H * tau * tau); };
    return cf;
}

// Power-law check side: a(t) = C t^eta, 0 < eta < 1
//   =>  Omega(tau) = C^{1/(1-eta)} (1-eta)^{eta/(1-eta)} tau^{eta/(1-eta)}.
inline ConformalFactor power_law_check(double C, double eta, double t_plus) {
    if (!(C > 0.0) || !(eta > 0.0) || !(eta < 1.0))
        throw validation_error("power_law_check: need C > 0, eta in (0,1)");
    ConformalFactor cf;
    cf.side = Side::check;
    cf.tau_edge = std::pow(t_plus, 1.0 - eta) / (C * (1.0 - eta));
    cf.tag = AsymptoticTag::bounce;
    double k = eta / (1.0 - eta);
    double amp = std::pow(C, 1.0 / (1.0 - eta)) * std::pow(1.0 - eta, k);
    cf.omega = [amp, k](double tau) { return amp * std::pow(tau, k); };
    cf.domega = [amp, k](double tau) { return amp * k * std::pow(tau, k - 1.0); };
    return cf;
}

inline ConformalFactor constant_factor(Side side, double tau_edge, double value) {
    if (value == 0.0) throw validation_error("constant_factor: must be nonvanishing");
    ConformalFactor cf;
    cf.side = side;
    cf.tau_edge = tau_edge;
    cf.tag = AsymptoticTag::generic;
    cf.omega = [value](double) { return value; };
    cf.domega = [](double) { return 0.0; };
    return cf;
}

// Tabulated (tau, Omega) samples with monotone-cubic interpolation.
inline ConformalFactor tabulated_factor(Side side, std::vector<double> tau,
                                        std::vector<double> omega) {
    auto interp = std::make_shared<MonotoneCubic>(std::move(tau), std::move(omega));
    ConformalFactor cf;
    cf.side = side;
    cf.tau_edge = side == Side::hat ? interp->x_front() : interp->x_back();
    cf.tag = AsymptoticTag::generic;
    cf.omega = [interp](double t) { return (*interp)(t); };
    cf.domega = [interp](double t) {
        double d = 0;
        interp->eval(t, &d);
        return d;
    };
    return cf;
}

// Penrose reciprocal probe: Omega_hat(-tau) * Omega_check(tau) + 1.
inline double reciprocal_residual(const ConformalFactor& hat, const ConformalFactor& check,
                                  double tau) {
    if (!(tau > 0.0)) throw validation_error("reciprocal_residual: tau must be > 0");
    hat.check_domain(-tau);
    check.check_domain(tau);
    return hat(-tau) * check(tau) + 1.0;
}

// ---------------------------------------------------------------------------
// Integrability classification of q near tau = 0
// ---------------------------------------------------------------------------

struct IntegrabilityReport {
    IntegrabilityClass cls = IntegrabilityClass::neither;
    double integral_q = 0.0;    // over [edge, probe_floor], plus fitted tail if finite
    double integral_qw = 0.0;   // |tau|-weighted
    double fitted_exponent = 0.0;
    bool tail_fit_ok = true;
};

// Numerical verdict: probe q on a graded mesh down to probe_floor, fit the
// local power law at the inner end, decide which integrals converge.
inline IntegrabilityReport classify_integrability(const std::function<double(double)>& q,
                                                  Side side, double w_edge,
                                                  double probe_floor = 1e-8) {
    if (!(w_edge > probe_floor))
        throw validation_error("classify_integrability: edge must exceed probe floor");
    auto w = graded_nodes_desc(w_edge, probe_floor, 0.05, w_edge / 64.0);
    std::vector<double> qv(w.size()), qwv(w.size());
    bool all_zero = true;
    for (size_t i = 0; i < w.size(); ++i) {
        double tau = tau_sign(side) * w[i];
        double v = q(tau);
        if (v != 0.0) all_zero = false;
        if (!std::isfinite(v)) {
            IntegrabilityReport r;
            r.cls = IntegrabilityClass::neither;
            r.tail_fit_ok = false;
            return r;
        }
        qv[i] = std::abs(v);
        qwv[i] = qv[i] * w[i];
    }
    IntegrabilityReport rep;
    if (all_zero) {
        rep.cls = IntegrabilityClass::L1;
        return rep;
    }
    SegmentedQuad quad(w);
    rep.integral_q = std::abs(quad.total(qv));
    rep.integral_qw = std::abs(quad.total(qwv));

    // log-log slope over the innermost decade
    size_t i1 = w.size() - 1;
    size_t i0 = i1;
    while (i0 > 0 && w[i0] < 10.0 * w[i1]) --i0;
    if (qv[i0] <= 0.0 || qv[i1] <= 0.0) {
        rep.tail_fit_ok = false;
        rep.cls = IntegrabilityClass::neither;
        return rep;
    }
    double p = std::log(qv[i1] / qv[i0]) / std::log(w[i1] / w[i0]);
    rep.fitted_exponent = p;
    const double margin = 0.05;
    if (p > -1.0 + margin)
        rep.cls = IntegrabilityClass::L1;
    else if (p > -2.0 + margin)
        rep.cls = IntegrabilityClass::weighted_L1;
    else
        rep.cls = IntegrabilityClass::neither;
    return rep;
}

inline IntegrabilityReport classify_integrability(const EffectiveMassSq& q,
                                                  double probe_floor = 1e-8) {
    return classify_integrability(q.q, q.side, std::abs(q.tau_edge), probe_floor);
}

// Build an effective mass directly from q(tau), classifying on the way.
inline EffectiveMassSq effective_mass_from_q(Side side, double tau_edge,
                                             std::function<double(double)> q,
                                             double probe_floor = 1e-8) {
    EffectiveMassSq e;
    e.side = side;
    e.tau_edge = tau_edge;
    e.q = std::move(q);
    e.cls = classify_integrability(e.q, side, std::abs(tau_edge), probe_floor).cls;
    return e;
}

// ---------------------------------------------------------------------------
// Liouville scaling: phi = Omega^{(n-1)/2} u and its inverse
// ---------------------------------------------------------------------------

namespace detail {

// Omega^p and d/dtau(Omega^p) with the sign conventions of the scaling maps:
// odd integer powers keep the sign of Omega, fractional powers need Omega > 0.
inline std::pair<double, double> liouville_weight(int n, const ConformalFactor& om, double tau) {
    double ov = om.omega(tau);
    if (ov == 0.0) throw numeric_error("liouville: Omega vanishes at tau=" + std::to_string(tau));
    double p = 0.5 * (n - 1);
    if (n == 1) return {1.0, 0.0};
    double dov = om.domega(tau);
    if (n % 2 == 1) {  // integer power
        int ip = (n - 1) / 2;
        double s = 1.0, spow = 1.0;
        for (int i = 0; i < ip; ++i) {
            if (i + 1 < ip) spow *= ov;
            s *= ov;
        }
        double ds = p * spow * dov;
        return {s, ds};
    }
    if (ov < 0.0)
        throw validation_error("liouville: fractional power of negative Omega (even n)");
    double s = std::pow(ov, p);
    double ds = p * std::pow(ov, p - 1.0) * dov;
    return {s, ds};
}

}  // namespace detail

struct CPair {
    cplx value;
    cplx deriv;
};

inline CPair liouville_scale(int n, const ConformalFactor& om, const CPair& u, double tau) {
    auto [s, ds] = detail::liouville_weight(n, om, tau);
    return {s * u.value, ds * u.value + s * u.deriv};
}

inline CPair liouville_unscale(int n, const ConformalFactor& om, const CPair& phi, double tau) {
    auto [s, ds] = detail::liouville_weight(n, om, tau);
    cplx u = phi.value / s;
    return {u, (phi.deriv - ds * u) / s};
}

// det of the scaling matrix: Omega^{n-1}
inline double liouville_det(int n, const ConformalFactor& om, double tau) {
    auto [s, ds] = detail::liouville_weight(n, om, tau);
    (void)ds;
    return s * s;
}

}  // namespace aeon

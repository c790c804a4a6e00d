#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/mesh.hpp"
#include "aeon/riccati.hpp"
#include "aeon/rk45.hpp"

namespace aeon {

// One spectral mode of the renormalized field:
//   phi'' + (lambda + rho + q(tau)) phi = g(tau).
struct ModeProblem {
    double lambda = 0.0;
    double rho = 0.0;
    std::function<double(double)> q;     // null -> 0
    std::function<cplx(double)> source;  // null -> 0

    double q_at(double tau) const { return q ? q(tau) : 0.0; }
    cplx source_at(double tau) const { return source ? source(tau) : cplx{}; }
    double omega() const { return std::sqrt(lambda + 1.0); }  // free-propagator frequency
};

struct ModeState {
    double tau = 0.0;
    cplx phi{};
    cplx chi{};  // = d phi / d tau
};

// Limits on the bang surface: psi0 = lim phi, psi1 = lim (phi' + A phi).
struct BangPair {
    cplx psi0{};
    cplx psi1{};
};

// ---------------------------------------------------------------------------
// Free propagator: the rotation generated by the shifted operator, omega^2 =
// lambda + 1. The physical q and curvature enter through the Duhamel load.
// ---------------------------------------------------------------------------
inline ModeState free_propagate(double lambda, const ModeState& s, double dtau) {
    double om = std::sqrt(lambda + 1.0);
    double c = std::cos(om * dtau), sn = std::sin(om * dtau);
    return {s.tau + dtau, s.phi * c + s.chi * (sn / om), -s.phi * (om * sn) + s.chi * c};
}

// ---------------------------------------------------------------------------
// Regular-region evolution by adaptive embedded Runge-Kutta
// ---------------------------------------------------------------------------
namespace detail {

struct PhiPair {
    cplx phi{}, chi{};
    PhiPair operator+(const PhiPair& o) const { return {phi + o.phi, chi + o.chi}; }
    PhiPair operator*(double s) const { return {phi * s, chi * s}; }
};
inline double norm_inf(const PhiPair& p) {
    return std::max(std::abs(p.phi), std::abs(p.chi));
}

}  // namespace detail

inline ModeState evolve_regular(const ModeProblem& p, const ModeState& s, double tau_end,
                                double tol = 1e-11) {
    if (s.tau == tau_end) return s;
    if ((s.tau < 0.0) != (tau_end < 0.0) && s.tau != 0.0 && tau_end != 0.0)
        throw validation_error("evolve_regular: interval crosses tau = 0");
    auto rhs = [&p](double tau, const detail::PhiPair& y) {
        return detail::PhiPair{y.chi,
                               -(p.lambda + p.rho + p.q_at(tau)) * y.phi + p.source_at(tau)};
    };
    Rk45Options opt;
    opt.rel_tol = tol;
    opt.abs_tol = tol * 1e-2;
    auto out = rk45_integrate(rhs, s.tau, tau_end, detail::PhiPair{s.phi, s.chi}, opt);
    return {tau_end, out.phi, out.chi};
}

// Evolve through a regular interval, recording the state at given times
// (taus monotone starting from s.tau's direction).
inline std::vector<ModeState> evolve_regular_sampled(const ModeProblem& p, ModeState s,
                                                     const std::vector<double>& taus,
                                                     double tol = 1e-11) {
    std::vector<ModeState> out;
    out.reserve(taus.size());
    for (double t : taus) {
        s = evolve_regular(p, s, t, tol);
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// psi variables: psi = phi * exp(int_{anchor}^{tau} A)
// ---------------------------------------------------------------------------
struct PsiState {
    double tau = 0.0;
    cplx psi{};
    cplx dpsi{};
};

inline PsiState to_psi(const ModeState& s, const RiccatiSolution& A, double anchor) {
    double wgt = std::exp(A.intA0(s.tau) - A.intA0(anchor));
    return {s.tau, s.phi * wgt, (s.chi + A(s.tau) * s.phi) * wgt};
}

inline ModeState from_psi(const PsiState& s, const RiccatiSolution& A, double anchor) {
    double wgt = std::exp(A.intA0(s.tau) - A.intA0(anchor));
    cplx phi = s.psi / wgt;
    return {s.tau, phi, s.dpsi / wgt - A(s.tau) * phi};
}

// ---------------------------------------------------------------------------
// Damped layer: windowed Picard iteration on the Duhamel form of
//   psi'' + (lambda+1) psi = (1 - rho - Q) psi + 2 A psi' + F
// on graded meshes toward tau = 0. The Riccati path absorbs q entirely
// (Q = 0, A != 0); the simple path keeps q in the load (Q = q, A = 0).
// ---------------------------------------------------------------------------
struct LayerOptions {
    double du = 0.02;              // log-spacing toward 0
    double cap_fraction = 1.0 / 25.0;  // max tau-step relative to the layer width
    double floor_w = 1e-13;
    double tol = 1e-11;
    int max_iter = 400;
    double window_budget = 0.5;    // contraction budget per Picard window
};

namespace detail {

struct LayerNodeData {
    std::vector<double> tau;   // monotone, excludes 0
    std::vector<double> Acoef;
    std::vector<double> Qcoef;
    std::vector<cplx> F;
    std::vector<double> budget_density;  // 1 + |rho| + Q + 2|A|
};

// trajectory of the Picard iterate on the node set
struct LayerRun {
    std::vector<cplx> psi, dpsi;
};

// Advance the pair through node indices [i0, i1] with the anchor value at
// node i0 (anchor_at_origin: anchor at tau = 0 instead, with the sub-floor
// tail of the load integrals fitted). Returns values at all nodes of the
// window; the caller assembles windows into a full crossing.
inline void picard_window(const LayerNodeData& nd, size_t i0, size_t i1, double omega,
                          double rho, cplx psi_a, cplx chi_a, bool anchor_at_origin,
                          const LayerOptions& opt, LayerRun& run) {
    const size_t m = i1 - i0 + 1;
    std::vector<double> taus(nd.tau.begin() + i0, nd.tau.begin() + i0 + m);
    SegmentedQuad quad(taus);
    const double tau_anchor = anchor_at_origin ? 0.0 : taus[0];

    std::vector<cplx> load(m), fc(m), fs(m), psi(m), chi(m);
    // free part as the initial iterate
    for (size_t j = 0; j < m; ++j) {
        double dt = taus[j] - tau_anchor;
        double c = std::cos(omega * dt), s = std::sin(omega * dt);
        psi[j] = psi_a * c + chi_a * (s / omega);
        chi[j] = -psi_a * (omega * s) + chi_a * c;
    }

    double change = 0.0;
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        for (size_t j = 0; j < m; ++j) {
            size_t k = i0 + j;
            load[j] = (1.0 - rho - nd.Qcoef[k]) * psi[j] + 2.0 * nd.Acoef[k] * chi[j] + nd.F[k];
            fc[j] = load[j] * std::cos(omega * taus[j]);
            fs[j] = load[j] * std::sin(omega * taus[j]);
        }
        auto Ic = quad.cumulative(fc);
        auto Is = quad.cumulative(fs);
        cplx tail_c{}, tail_s{};
        if (anchor_at_origin) {
            // int_0^{tau_0} of the load kernels, log-fitted below the floor
            size_t n = taus.size();
            double w0 = std::abs(taus[0]), w1 = std::abs(taus[std::min<size_t>(1, n - 1)]);
            double sgn = taus[0] > 0 ? 1.0 : -1.0;
            tail_c = sgn * tail_integral_logfit(w0, fc[0], w1, fc[1]);
            tail_s = sgn * tail_integral_logfit(w0, fs[0], w1, fs[1]);
        }
        change = 0.0;
        double scale = 1.0;
        for (size_t j = 0; j < m; ++j) {
            double dt = taus[j] - tau_anchor;
            double cA = std::cos(omega * dt), sA = std::sin(omega * dt);
            double ct = std::cos(omega * taus[j]), st = std::sin(omega * taus[j]);
            cplx IcT = Ic[j] + tail_c, IsT = Is[j] + tail_s;
            cplx npsi = psi_a * cA + chi_a * (sA / omega) + (st * IcT - ct * IsT) / omega;
            cplx nchi = -psi_a * (omega * sA) + chi_a * cA + (ct * IcT + st * IsT);
            change = std::max(change, std::max(omega * std::abs(npsi - psi[j]),
                                               std::abs(nchi - chi[j])));
            scale = std::max({scale, omega * std::abs(npsi), std::abs(nchi)});
            psi[j] = npsi;
            chi[j] = nchi;
        }
        if (change < opt.tol * scale) break;
    }
    if (!(change < 1e-5))
        throw numeric_error("damped layer: Picard stalled, last sup-change=" +
                            std::to_string(change));
    for (size_t j = 0; j < m; ++j) {
        run.psi[i0 + j] = psi[j];
        run.dpsi[i0 + j] = chi[j];
    }
}

// Value exactly at tau = 0 from the final window (free part + full load
// integral including the sub-floor tail).
inline std::pair<cplx, cplx> close_at_origin(const LayerNodeData& nd, size_t i0, double omega,
                                             double rho, cplx psi_a, cplx chi_a,
                                             const LayerRun& run, const LayerOptions& opt) {
    (void)opt;
    const size_t K = nd.tau.size();
    const size_t m = K - i0;
    std::vector<double> taus(nd.tau.begin() + i0, nd.tau.end());
    SegmentedQuad quad(taus);
    std::vector<cplx> fc(m), fs(m);
    for (size_t j = 0; j < m; ++j) {
        size_t k = i0 + j;
        cplx load = (1.0 - rho - nd.Qcoef[k]) * run.psi[k] + 2.0 * nd.Acoef[k] * run.dpsi[k] +
                    nd.F[k];
        fc[j] = load * std::cos(omega * nd.tau[k]);
        fs[j] = load * std::sin(omega * nd.tau[k]);
    }
    cplx Ic = quad.cumulative(fc).back();
    cplx Is = quad.cumulative(fs).back();
    // tail from the innermost node to 0:
    // int_{tau_last}^0 f = -sgn * int_0^{w_last} f(sgn w) dw
    double w_in = std::abs(taus.back()), w_prev = std::abs(taus[m - 2]);
    double sgn = taus.back() > 0 ? 1.0 : -1.0;
    Ic -= sgn * tail_integral_logfit(w_in, fc[m - 1], w_prev, fc[m - 2]);
    Is -= sgn * tail_integral_logfit(w_in, fs[m - 1], w_prev, fs[m - 2]);

    double tau_a = taus[0];
    double cA = std::cos(omega * tau_a), sA = std::sin(omega * tau_a);
    // free part at tau = 0 from the anchor, plus the Duhamel terms
    // (sin(omega*0) = 0, cos = 1)
    cplx psi0 = psi_a * cA - chi_a * (sA / omega) - Is / omega;
    cplx chi0 = psi_a * (omega * sA) + chi_a * cA + Ic;
    return {psi0, chi0};
}

inline LayerNodeData build_layer_nodes(const ModeProblem& p, const RiccatiSolution* A,
                                       Side side, double h, bool inward,
                                       const LayerOptions& opt) {
    auto w = graded_nodes_desc(h, opt.floor_w, opt.du, h * opt.cap_fraction);
    if (!inward) std::reverse(w.begin(), w.end());
    LayerNodeData nd;
    const double sgn = tau_sign(side);
    const size_t K = w.size();
    nd.tau.resize(K);
    nd.Acoef.resize(K);
    nd.Qcoef.resize(K);
    nd.F.resize(K);
    nd.budget_density.resize(K);
    for (size_t i = 0; i < K; ++i) {
        double tau = sgn * w[i];
        nd.tau[i] = tau;
        nd.Acoef[i] = A ? A->A(tau) : 0.0;
        nd.Qcoef[i] = A ? 0.0 : p.q_at(tau);
        cplx g = p.source_at(tau);
        nd.F[i] = g == cplx{} ? cplx{} : g * std::exp(A ? A->intA0(tau) : 0.0);
        nd.budget_density[i] = 1.0 + std::abs(p.rho) + nd.Qcoef[i] + 2.0 * std::abs(nd.Acoef[i]);
    }
    return nd;
}

// window boundaries so each window's contraction budget stays small
inline std::vector<size_t> split_windows(const LayerNodeData& nd, double budget) {
    std::vector<size_t> cuts{0};
    double acc = 0.0;
    for (size_t i = 0; i + 1 < nd.tau.size(); ++i) {
        double seg = 0.5 * (nd.budget_density[i] + nd.budget_density[i + 1]) *
                     std::abs(nd.tau[i + 1] - nd.tau[i]);
        acc += seg;
        if (acc > budget && i + 1 < nd.tau.size() - 1) {
            cuts.push_back(i + 1);
            acc = 0.0;
        }
    }
    cuts.push_back(nd.tau.size() - 1);
    return cuts;
}

}  // namespace detail

// Damped evolution from the psi pair at tau_edge = side-sign * h to the pair
// at tau = 0, all in the int_0 gauge.
inline BangPair damped_to_origin(const ModeProblem& p, const RiccatiSolution* A, Side side,
                                 double h, cplx psi_edge, cplx dpsi_edge,
                                 const LayerOptions& opt = {},
                                 std::vector<PsiState>* trajectory = nullptr) {
    auto nd = detail::build_layer_nodes(p, A, side, h, /*inward=*/true, opt);
    auto cuts = detail::split_windows(nd, opt.window_budget);
    detail::LayerRun run;
    run.psi.resize(nd.tau.size());
    run.dpsi.resize(nd.tau.size());
    const double omega = p.omega();
    cplx pa = psi_edge, ca = dpsi_edge;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        detail::picard_window(nd, cuts[c], cuts[c + 1], omega, p.rho, pa, ca, false, opt, run);
        pa = run.psi[cuts[c + 1]];
        ca = run.dpsi[cuts[c + 1]];
    }
    if (trajectory) {
        trajectory->clear();
        for (size_t i = 0; i < nd.tau.size(); ++i)
            trajectory->push_back({nd.tau[i], run.psi[i], run.dpsi[i]});
    }
    // close the run at tau = 0 from the last window's anchor
    size_t last_cut = cuts[cuts.size() - 2];
    auto [psi0, chi0] = detail::close_at_origin(nd, last_cut, omega, p.rho,
                                                run.psi[last_cut], run.dpsi[last_cut], run, opt);
    return {psi0, chi0};
}

// Damped evolution outward from the pair at tau = 0 to tau_edge.
inline PsiState damped_from_origin(const ModeProblem& p, const RiccatiSolution* A, Side side,
                                   double h, const BangPair& bang,
                                   const LayerOptions& opt = {},
                                   std::vector<PsiState>* trajectory = nullptr) {
    auto nd = detail::build_layer_nodes(p, A, side, h, /*inward=*/false, opt);
    auto cuts = detail::split_windows(nd, opt.window_budget);
    detail::LayerRun run;
    run.psi.resize(nd.tau.size());
    run.dpsi.resize(nd.tau.size());
    const double omega = p.omega();
    cplx pa = bang.psi0, ca = bang.psi1;
    bool from_origin = true;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        detail::picard_window(nd, cuts[c], cuts[c + 1], omega, p.rho, pa, ca, from_origin, opt,
                              run);
        pa = run.psi[cuts[c + 1]];
        ca = run.dpsi[cuts[c + 1]];
        from_origin = false;
    }
    if (trajectory) {
        trajectory->clear();
        for (size_t i = 0; i < nd.tau.size(); ++i)
            trajectory->push_back({nd.tau[i], run.psi[i], run.dpsi[i]});
    }
    return {nd.tau.back(), run.psi.back(), run.dpsi.back()};
}

// Spec-facing damped evolution between two times on one side (0 allowed as
// the inner endpoint); pure psi-gauge bookkeeping around the windowed core.
inline PsiState damped_evolve(const ModeProblem& p, const RiccatiSolution* A, Side side,
                              const PsiState& s, double tau_end, const LayerOptions& opt = {}) {
    double wa = std::abs(s.tau), wb = std::abs(tau_end);
    if (wa == wb) return s;
    if (wa > wb) {  // inward
        LayerOptions o = opt;
        o.floor_w = std::max(wb, opt.floor_w);
        if (wb <= opt.floor_w) {
            auto bang = damped_to_origin(p, A, side, wa, s.psi, s.dpsi, o);
            return {0.0, bang.psi0, bang.psi1};
        }
        auto nd = detail::build_layer_nodes(p, A, side, wa, true, o);
        auto cuts = detail::split_windows(nd, o.window_budget);
        detail::LayerRun run;
        run.psi.resize(nd.tau.size());
        run.dpsi.resize(nd.tau.size());
        cplx pa = s.psi, ca = s.dpsi;
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            detail::picard_window(nd, cuts[c], cuts[c + 1], p.omega(), p.rho, pa, ca, false, o,
                                  run);
            pa = run.psi[cuts[c + 1]];
            ca = run.dpsi[cuts[c + 1]];
        }
        return {nd.tau.back(), run.psi.back(), run.dpsi.back()};
    }
    // outward from |s.tau| (or 0) to wb
    LayerOptions o = opt;
    o.floor_w = std::max(wa, opt.floor_w);
    if (wa <= opt.floor_w) {
        return damped_from_origin(p, A, side, wb, {s.psi, s.dpsi}, o);
    }
    auto nd = detail::build_layer_nodes(p, A, side, wb, false, o);
    auto cuts = detail::split_windows(nd, o.window_budget);
    detail::LayerRun run;
    run.psi.resize(nd.tau.size());
    run.dpsi.resize(nd.tau.size());
    cplx pa = s.psi, ca = s.dpsi;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        detail::picard_window(nd, cuts[c], cuts[c + 1], p.omega(), p.rho, pa, ca, false, o, run);
        pa = run.psi[cuts[c + 1]];
        ca = run.dpsi[cuts[c + 1]];
    }
    return {nd.tau.back(), run.psi.back(), run.dpsi.back()};
}

// ---------------------------------------------------------------------------
// The W map and its inverse: interior data at the layer edge -> the limit
// pair (lim phi, lim (phi' + A phi)) on the bang surface.
// ---------------------------------------------------------------------------
inline BangPair limit_W(const ModeProblem& p, const RiccatiSolution* A, const ModeState& edge,
                        Side side, const LayerOptions& opt = {},
                        std::vector<ModeState>* phi_trajectory = nullptr) {
    double h = std::abs(edge.tau);
    if (A && h > A->h * (1.0 + 1e-9))
        throw validation_error("limit_W: layer edge outside the Riccati domain");
    cplx psi_e, dpsi_e;
    if (A) {
        double wgt = std::exp(A->intA0(edge.tau));
        psi_e = edge.phi * wgt;
        dpsi_e = (edge.chi + A->A(edge.tau) * edge.phi) * wgt;
    } else {
        psi_e = edge.phi;
        dpsi_e = edge.chi;
    }
    std::vector<PsiState> traj;
    auto bang = damped_to_origin(p, A, side, h, psi_e, dpsi_e, opt,
                                 phi_trajectory ? &traj : nullptr);
    if (phi_trajectory) {
        phi_trajectory->clear();
        for (const auto& st : traj) {
            if (A) {
                double wgt = std::exp(A->intA0(st.tau));
                cplx phi = st.psi / wgt;
                phi_trajectory->push_back({st.tau, phi, st.dpsi / wgt - A->A(st.tau) * phi});
            } else {
                phi_trajectory->push_back({st.tau, st.psi, st.dpsi});
            }
        }
    }
    return bang;
}

inline ModeState inverse_W(const ModeProblem& p, const RiccatiSolution* A, const BangPair& bang,
                           Side side, double h, const LayerOptions& opt = {}) {
    if (A && h > A->h * (1.0 + 1e-9))
        throw validation_error("inverse_W: layer edge outside the Riccati domain");
    auto out = damped_from_origin(p, A, side, h, bang, opt);
    if (!A) return {out.tau, out.psi, out.dpsi};
    double wgt = std::exp(A->intA0(out.tau));
    cplx phi = out.psi / wgt;
    return {out.tau, phi, out.dpsi / wgt - A->A(out.tau) * phi};
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

// max over samples of | E(tau) - E(tau_0) - int 2 Re(F conj(chi)) |, with
// E = (lambda+1)|phi|^2 + |chi|^2 and F = (1 - rho - q) phi + g.
inline double energy_identity_residual(const ModeProblem& p,
                                       const std::vector<ModeState>& traj) {
    if (traj.size() < 3) throw validation_error("energy_identity_residual: need >= 3 samples");
    std::vector<double> taus(traj.size());
    std::vector<double> rhs(traj.size());
    for (size_t i = 0; i < traj.size(); ++i) {
        taus[i] = traj[i].tau;
        cplx F = (1.0 - p.rho - p.q_at(taus[i])) * traj[i].phi + p.source_at(taus[i]);
        rhs[i] = 2.0 * std::real(F * std::conj(traj[i].chi));
    }
    SegmentedQuad quad(taus);
    auto cum = quad.cumulative(rhs);
    auto energy = [&p](const ModeState& s) {
        return (p.lambda + 1.0) * std::norm(s.phi) + std::norm(s.chi);
    };
    double e0 = energy(traj[0]);
    double worst = 0.0;
    for (size_t i = 0; i < traj.size(); ++i)
        worst = std::max(worst, std::abs(energy(traj[i]) - e0 - cum[i]));
    return worst;
}

// Testable Gronwall bound for the regular region:
//   sup ||state|| <= (||state_0|| + |int ||g|||) * exp(|int (1+|rho|+q)|).
struct GronwallCheck {
    double sup_lhs = 0.0;
    double bound_rhs = 0.0;
    bool holds() const { return sup_lhs <= bound_rhs * (1.0 + 1e-9); }
};

inline GronwallCheck gronwall_regular(const ModeProblem& p,
                                      const std::vector<ModeState>& traj) {
    GronwallCheck g;
    if (traj.size() < 2) throw validation_error("gronwall_regular: need >= 2 samples");
    auto pnorm = [&p](const ModeState& s) {
        return std::sqrt((p.lambda + 1.0) * std::norm(s.phi) + std::norm(s.chi));
    };
    std::vector<double> taus(traj.size()), coef(traj.size()), src(traj.size());
    for (size_t i = 0; i < traj.size(); ++i) {
        taus[i] = traj[i].tau;
        coef[i] = 1.0 + std::abs(p.rho) + p.q_at(taus[i]);
        src[i] = std::abs(p.source_at(taus[i]));
        g.sup_lhs = std::max(g.sup_lhs, pnorm(traj[i]));
    }
    SegmentedQuad quad(taus);
    double ic = std::abs(quad.total(coef));
    double is = std::abs(quad.total(src));
    g.bound_rhs = (pnorm(traj[0]) + is) * std::exp(ic);
    return g;
}

// Same bound in psi variables through the damped layer:
//   sup ||(psi,dpsi)|| <= (anchor + |int |F||) * exp(|int (1+|rho|+2|A|)|).
inline GronwallCheck gronwall_damped(const ModeProblem& p, const RiccatiSolution* A,
                                     const std::vector<PsiState>& traj) {
    GronwallCheck g;
    if (traj.size() < 2) throw validation_error("gronwall_damped: need >= 2 samples");
    auto pnorm = [&p](const PsiState& s) {
        return std::sqrt((p.lambda + 1.0) * std::norm(s.psi) + std::norm(s.dpsi));
    };
    std::vector<double> taus(traj.size()), coef(traj.size()), src(traj.size());
    for (size_t i = 0; i < traj.size(); ++i) {
        taus[i] = traj[i].tau;
        double Av = A ? A->A(taus[i]) : 0.0;
        double Qv = A ? 0.0 : p.q_at(taus[i]);
        coef[i] = 1.0 + std::abs(p.rho) + Qv + 2.0 * std::abs(Av);
        cplx gsrc = p.source_at(taus[i]);
        src[i] = std::abs(gsrc) * std::exp(A ? A->intA0(taus[i]) : 0.0);
        g.sup_lhs = std::max(g.sup_lhs, pnorm(traj[i]));
    }
    SegmentedQuad quad(taus);
    g.bound_rhs = (pnorm(traj[0]) + std::abs(quad.total(src))) *
                  std::exp(std::abs(quad.total(coef)));
    return g;
}

}  // namespace aeon

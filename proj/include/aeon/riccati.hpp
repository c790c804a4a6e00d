#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/mesh.hpp"
#include "aeon/profiles.hpp"
#include "aeon/quadrature.hpp"

namespace aeon {

// An integrable solution of A' - A^2 = q near tau = 0, together with its
// antiderivative int_0^tau A (finite because A is L^1). The callables remain
// valid on 0 < |tau| <= h of the carrying side.
struct RiccatiSolution {
    enum class Provenance { picard, ivp, family, closed_form };

    Side side = Side::hat;
    double h = 0.0;        // domain half-width
    double tau_eps = 0.0;  // anchor (side-signed); 0 when anchored at the origin
    std::function<double(double)> A;
    std::function<double(double)> intA0;  // int_0^tau A(s) ds
    Provenance provenance = Provenance::picard;
    double epsilon = 0.0;  // picard only
    double alpha = 0.0;    // ivp: A(0); family: the delta-limit against its anchor

    double operator()(double tau) const { return A(tau); }

    void check_domain(double tau) const {
        if (tau_sign(side) * tau <= 0.0 || std::abs(tau) > h * (1.0 + 1e-12))
            throw validation_error("riccati solution: tau=" + std::to_string(tau) +
                                   " outside (0," + std::to_string(h) + "] on the " +
                                   side_name(side) + " side");
    }
};

struct RiccatiOptions {
    double du = 0.02;            // log-spacing of the graded mesh
    double cap_fraction = 1.0 / 128.0;  // max step = cap_fraction * anchor
    double floor_w = 1e-13;
    double tol = 1e-12;
    int max_iter = 400;
};

namespace detail {

// Cumulative integral from w_nodes[0] down to each node, each segment by
// adaptive quadrature of the exact integrand: keeps singular q exact.
inline std::vector<double> cumulative_exact(const std::vector<double>& w,
                                            const std::function<double(double)>& g) {
    std::vector<double> c(w.size());
    c[0] = 0.0;
    for (size_t i = 0; i + 1 < w.size(); ++i)
        c[i + 1] = c[i] + integrate_adaptive(g, w[i], w[i + 1], 1e-15);
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Picard construction on (tau_eps, 0): the monotone iteration
//   B_0 = 0,  B_{n+1}(w) = int_w^{w_eps} q + int_w^{w_eps} B_n^2
// in the mirrored variable w = |tau|, with A = eta_side * B.
// The anchor w_eps is picked by bisection on the weighted-integral budget
//   int_0^{w_eps} q(w) w dw <= eps/(1+eps)^2.
// ---------------------------------------------------------------------------
inline RiccatiSolution picard_construct(const EffectiveMassSq& q, double eps,
                                        const RiccatiOptions& opt = {}) {
    if (!(eps > 0.0)) throw validation_error("picard_construct: eps must be > 0");
    if (q.cls == IntegrabilityClass::neither)
        throw validation_error("picard_construct: q is not |tau|-weighted integrable");
    const Side side = q.side;
    const double sgn = tau_sign(side);
    auto qw = [&q, sgn](double w) { return q.q(sgn * w); };

    // weighted integral int_0^w q(v) v dv, with the sub-floor tail fitted
    const double w_max = std::abs(q.tau_edge);
    auto weighted = [&](double w_hi) {
        auto nodes = graded_nodes_desc(w_hi, opt.floor_w, 0.05, w_hi / 64.0);
        std::vector<double> f(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) f[i] = qw(nodes[i]) * nodes[i];
        SegmentedQuad sq(nodes);
        double main = -sq.total(f);  // descending nodes: flip sign
        double tail = tail_integral_powerfit(nodes.back(), f.back(), nodes[nodes.size() - 2],
                                             f[nodes.size() - 2]);
        return main + tail;
    };
    const double budget = eps / ((1.0 + eps) * (1.0 + eps));
    double w_eps = w_max;
    if (weighted(w_max) > budget) {
        double lo = opt.floor_w * 16.0, hi = w_max;
        for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            (weighted(mid) > budget ? hi : lo) = mid;
        }
        w_eps = 0.5 * (lo + hi);
    }

    // mesh and the exact q cumulative J_q(w) = int_w^{w_eps} q
    auto w = graded_nodes_desc(w_eps, opt.floor_w, opt.du, w_eps * opt.cap_fraction);
    const size_t K = w.size();
    auto jq_exact = detail::cumulative_exact(w, qw);
    std::vector<double> Jq(K);
    for (size_t i = 0; i < K; ++i) Jq[i] = -jq_exact[i];  // descending: int_w^{w_eps} >= 0

    SegmentedQuad quad(w);
    std::vector<double> B(K, 0.0), Bsq(K), JB(K);
    double change = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        for (size_t i = 0; i < K; ++i) Bsq[i] = B[i] * B[i];
        auto cum = quad.cumulative(Bsq);
        change = 0.0;
        double scale = 1.0;
        for (size_t i = 0; i < K; ++i) {
            double next = Jq[i] - cum[i];
            change = std::max(change, std::abs(next - B[i]));
            scale = std::max(scale, std::abs(next));
            B[i] = next;
        }
        if (change < opt.tol * scale) break;
    }
    if (change == std::numeric_limits<double>::infinity() || !(change < 1e-3))
        throw numeric_error("picard_construct: no convergence, last sup-change=" +
                            std::to_string(change));

    // final mild part J_{B^2}(w) = int_w^{w_eps} B^2 as a continuous
    // cumulative table; the q part stays exact per evaluation
    for (size_t i = 0; i < K; ++i) Bsq[i] = B[i] * B[i];
    auto quad_sp = std::make_shared<const SegmentedQuad>(w);
    auto jb2 = std::make_shared<CumulativeTable>(quad_sp, Bsq);  // = -J_{B^2}

    // IB(w) = int_0^w B dv (for intA0), the sub-floor tail by log fit
    double tailB = tail_integral_logfit(w.back(), B.back(), w[K - 2], B[K - 2]);
    auto cumBval = quad.cumulative(B);
    double IB_eps = -cumBval.back() + tailB;  // int_0^{w_eps} B
    auto ib = std::make_shared<CumulativeTable>(quad_sp, B, IB_eps);

    // Jq anchors for the exact q part per query
    auto wnodes = std::make_shared<std::vector<double>>(w);
    auto jq_tab = std::make_shared<std::vector<double>>(Jq);
    auto qfun = std::make_shared<std::function<double(double)>>(qw);

    RiccatiSolution sol;
    sol.side = side;
    sol.h = w_eps;
    sol.tau_eps = sgn * w_eps;
    sol.provenance = RiccatiSolution::Provenance::picard;
    sol.epsilon = eps;
    sol.alpha = 0.0;
    const double eta_side = eta(side);
    sol.A = [wnodes, jq_tab, jb2, qfun, eta_side](double tau) {
        double wv = std::abs(tau);
        // nearest node at or below wv (nodes descending)
        auto it = std::lower_bound(wnodes->begin(), wnodes->end(), wv,
                                   [](double a, double b) { return a > b; });
        size_t i = std::min(size_t(it - wnodes->begin()), wnodes->size() - 1);
        double jq = (*jq_tab)[i] + integrate_adaptive(*qfun, wv, (*wnodes)[i], 1e-15);
        return eta_side * (jq - (*jb2)(wv));
    };
    sol.intA0 = [ib](double tau) {
        // int_0^tau A = -int_0^|tau| B on either side
        return -(*ib)(std::abs(tau));
    };
    return sol;
}

// ---------------------------------------------------------------------------
// Initial value problem at tau = 0 for q in L^1:
//   A(tau) = alpha + int_0^tau q + int_0^tau A^2,
// contraction on |tau| <= h < 1/(2+|alpha|)^2 with int q <= 1.
// ---------------------------------------------------------------------------
inline RiccatiSolution ivp_solve(const EffectiveMassSq& q, double alpha,
                                 const RiccatiOptions& opt = {}) {
    if (q.cls != IntegrabilityClass::L1)
        throw validation_error("ivp_solve: q must be integrable (L1 class)");
    const Side side = q.side;
    const double sgn = tau_sign(side);
    auto qw = [&q, sgn](double w) { return q.q(sgn * w); };

    double h = std::min(std::abs(q.tau_edge), 0.999 / ((2.0 + std::abs(alpha)) *
                                                       (2.0 + std::abs(alpha))));
    // shrink until int_0^h q <= 1
    for (int guard = 0; guard < 60; ++guard) {
        auto nodes = graded_nodes_desc(h, opt.floor_w, 0.05, h / 64.0);
        std::vector<double> f(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) f[i] = qw(nodes[i]);
        SegmentedQuad sq(nodes);
        double total = -sq.total(f) + tail_integral_powerfit(nodes.back(), f.back(),
                                                             nodes[nodes.size() - 2],
                                                             f[nodes.size() - 2]);
        if (total <= 1.0) break;
        h *= 0.5;
        if (guard == 59) throw numeric_error("ivp_solve: cannot satisfy the mass budget");
    }

    auto wdesc = graded_nodes_desc(h, opt.floor_w, opt.du, h * opt.cap_fraction);
    const size_t K = wdesc.size();
    // K_q(w_i) = int_0^{w_i} q: exact segments plus the sub-floor tail
    auto cq = detail::cumulative_exact(wdesc, qw);  // int from h down to w_i (<= 0)
    double tail_q = std::abs(tail_integral_powerfit(
        wdesc.back(), qw(wdesc.back()), wdesc[K - 2], qw(wdesc[K - 2])));
    std::vector<double> Kq(K);
    for (size_t i = 0; i < K; ++i) Kq[i] = tail_q + (cq[i] - cq[K - 1]);

    // iterate a(w) = alpha + sgn * (K_q(w) + int_0^w a^2)
    SegmentedQuad quad(wdesc);
    std::vector<double> a(K, alpha), asq(K), Ka2(K);
    double change = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        for (size_t i = 0; i < K; ++i) asq[i] = a[i] * a[i];
        auto cum = quad.cumulative(asq);
        double tail_a = asq[K - 1] * wdesc[K - 1];
        change = 0.0;
        double scale = 1.0;
        for (size_t i = 0; i < K; ++i) {
            Ka2[i] = tail_a + (cum[i] - cum[K - 1]);
            double next = alpha + sgn * (Kq[i] + Ka2[i]);
            change = std::max(change, std::abs(next - a[i]));
            scale = std::max(scale, std::abs(next));
            a[i] = next;
        }
        if (change < opt.tol * scale) break;
    }
    if (!(change < 1e-6))
        throw numeric_error("ivp_solve: no convergence, last sup-change=" +
                            std::to_string(change));

    // the a^2 cumulative stays a continuous table, the q part exact per query
    auto quad_sp = std::make_shared<const SegmentedQuad>(wdesc);
    for (size_t i = 0; i < K; ++i) asq[i] = a[i] * a[i];
    auto cum_asq = quad.cumulative(asq);
    double tail_a = asq[K - 1] * wdesc[K - 1];
    auto ka2 = std::make_shared<CumulativeTable>(quad_sp, asq, tail_a - cum_asq[K - 1]);

    auto wnodes = std::make_shared<std::vector<double>>(wdesc);
    auto kq_tab = std::make_shared<std::vector<double>>(Kq);
    auto qfun = std::make_shared<std::function<double(double)>>(qw);

    // int_0^w a dv for intA0
    auto cum_a = quad.cumulative(a);
    double tail_ia = a[K - 1] * wdesc[K - 1];
    auto ia = std::make_shared<CumulativeTable>(quad_sp, a, tail_ia - cum_a[K - 1]);

    RiccatiSolution sol;
    sol.side = side;
    sol.h = h;
    sol.tau_eps = 0.0;
    sol.provenance = RiccatiSolution::Provenance::ivp;
    sol.alpha = alpha;
    sol.A = [wnodes, kq_tab, ka2, qfun, alpha, sgn](double tau) {
        double wv = std::abs(tau);
        auto it = std::lower_bound(wnodes->begin(), wnodes->end(), wv,
                                   [](double x, double y) { return x > y; });
        size_t i = std::min(size_t(it - wnodes->begin()), wnodes->size() - 1);
        double kq = (*kq_tab)[i] + integrate_adaptive(*qfun, (*wnodes)[i], wv, 1e-15);
        return alpha + sgn * (kq + (*ka2)(wv));
    };
    sol.intA0 = [ia, sgn](double tau) { return sgn * (*ia)(std::abs(tau)); };
    return sol;
}

// ---------------------------------------------------------------------------
// The unique integrable solution with lim_{tau->0} (A - A_eps) = alpha:
//   A = A_eps + alpha E (1 + alpha int_tau^0 E)^{-1},  E = exp(2 int_0^tau A_eps).
// ---------------------------------------------------------------------------
inline RiccatiSolution shift_to_alpha(const RiccatiSolution& base, double alpha,
                                      const RiccatiOptions& opt = {}) {
    if (alpha == 0.0) return base;
    const Side side = base.side;
    const double sgn = tau_sign(side);
    auto E = [base](double tau) { return std::exp(2.0 * base.intA0(tau)); };

    // KE(w) = int_0^w E(sgn v) dv on the mesh
    auto wdesc = graded_nodes_desc(base.h, opt.floor_w, opt.du, base.h * opt.cap_fraction);
    const size_t K = wdesc.size();
    std::vector<double> Ev(K);
    for (size_t i = 0; i < K; ++i) Ev[i] = E(sgn * wdesc[i]);
    auto quad_sp = std::make_shared<const SegmentedQuad>(wdesc);
    auto cum = quad_sp->cumulative(Ev);
    double tail = tail_integral_logfit(wdesc[K - 1], Ev[K - 1], wdesc[K - 2], Ev[K - 2]);
    auto ke = std::make_shared<CumulativeTable>(quad_sp, Ev, tail - cum[K - 1]);

    // denominator G = 1 + alpha * int_tau^0 E; find the largest clean domain
    // int_tau^0 E = +KE(w) on hat, -KE(w) on check
    const double ke_sign = side == Side::hat ? 1.0 : -1.0;
    double h_ok = base.h;
    for (size_t i = 0; i < K; ++i) {
        double G = 1.0 + alpha * ke_sign * ke->at_node(i);
        if (G <= 1e-6) {
            if (i + 1 >= K)
                throw numeric_error("shift_to_alpha: denominator vanishes near tau=0");
            h_ok = wdesc[i + 1];  // shrink inside the first zero crossing
        }
    }
    if (h_ok < wdesc[K - 1] * 4.0)
        throw numeric_error("shift_to_alpha: no domain with nonvanishing denominator");

    RiccatiSolution sol;
    sol.side = side;
    sol.h = h_ok;
    sol.tau_eps = base.tau_eps;
    sol.provenance = RiccatiSolution::Provenance::family;
    sol.epsilon = base.epsilon;
    sol.alpha = alpha;
    auto baseA = base.A;
    auto baseI = base.intA0;
    sol.A = [baseA, baseI, ke, alpha, ke_sign](double tau) {
        double Eval = std::exp(2.0 * baseI(tau));
        double G = 1.0 + alpha * ke_sign * (*ke)(std::abs(tau));
        return baseA(tau) + alpha * Eval / G;
    };
    sol.intA0 = [baseI, ke, alpha, ke_sign](double tau) {
        double G = 1.0 + alpha * ke_sign * (*ke)(std::abs(tau));
        return baseI(tau) - std::log(std::abs(G));
    };
    return sol;
}

// Pointwise defect A'(tau) - A(tau)^2 - q(tau). A' is differenced in the
// log variable u = ln|tau| (base step 1/16, so the tau-step scales with
// |tau|) with one Richardson refinement; the ln|tau| part of A is linear in
// u, which keeps the stencil error away from the singular curvature.
inline double riccati_residual(const std::function<double(double)>& A,
                               const std::function<double(double)>& q, double tau) {
    auto dAdu = [&](double du) {
        double e1 = std::exp(du), e2 = e1 * e1;
        return (-A(tau * e2) + 8.0 * A(tau * e1) - 8.0 * A(tau / e1) + A(tau / e2)) /
               (12.0 * du);
    };
    const double base = 1.0 / 16.0;
    double d1 = dAdu(base), d2 = dAdu(0.5 * base);
    double dprime = (16.0 * d2 - d1) / (15.0 * tau);  // dA/dtau = (dA/du)/tau
    double a = A(tau);
    return dprime - a * a - q(tau);
}

inline double riccati_residual(const RiccatiSolution& A, const std::function<double(double)>& q,
                               double tau) {
    return riccati_residual(A.A, q, tau);
}

inline double integrate_A(const RiccatiSolution& A, double tau1, double tau2) {
    return A.intA0(tau2) - A.intA0(tau1);
}

struct DivergenceReport {
    double log_coeff = 0.0;   // kappa in A ~ kappa ln(1/|tau|) + m
    double intercept = 0.0;
    double max_abs = 0.0;
    bool matches_expected_sign = false;  // hat: +, check: -
};

// Sample A on a geometric sequence toward 0 and fit A = kappa ln(1/w) + m.
inline DivergenceReport divergence_probe(const RiccatiSolution& A, double w_hi = 1e-3,
                                         double w_lo = 1e-6, int n = 13) {
    DivergenceReport rep;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        double wv = w_hi * std::pow(w_lo / w_hi, double(k) / (n - 1));
        double x = std::log(1.0 / wv);
        double y = A(tau_sign(A.side) * wv);
        rep.max_abs = std::max(rep.max_abs, std::abs(y));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    rep.log_coeff = (n * sxy - sx * sy) / denom;
    rep.intercept = (sy - rep.log_coeff * sx) / n;
    rep.matches_expected_sign = A.side == Side::hat ? rep.log_coeff > 0 : rep.log_coeff < 0;
    return rep;
}

}  // namespace aeon

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/riccati.hpp"

namespace aeon {

// Mode ODE with the regular singular effective mass:
//   phi'' + (lambda + c^2/|tau| + F(tau)) phi = 0,
// F a real polynomial. Solved by Frobenius series around tau = 0.
struct FuchsProblem {
    double lambda = 0.0;
    double c2 = 1.0;                 // c^2 >= 0
    std::vector<double> F;           // polynomial coefficients f_0..f_d
    Side side = Side::check;
    int truncation = 20;             // series order N
    double radius_guard = 0.5;

    // sign of tau on the side: |tau| = eta_s * tau
    double eta_s() const { return tau_sign(side); }
};

// The two Frobenius branches: phi_1 = tau h1(tau) (analytic) and
// phi_2 = h2(tau) - c^2 |tau| h1(tau) ln|tau| (log-coupled), with
// h1(0) = h2(0) = 1 and the resonant coefficient of h2 set to zero.
struct SeriesPair {
    std::vector<double> a;     // h1: a_0..a_N, a_0 = 1
    std::vector<double> b;     // h2: b_0..b_{N+1}, b_0 = 1, b_1 = h2'(0)
    double log_coupling = 0.0; // = c^2
    double h2_prime0 = 0.0;    // = b_1
};

inline std::vector<double> h1_series(const FuchsProblem& p) {
    if (p.truncation < 2) throw validation_error("h1_series: truncation must be >= 2");
    const int N = p.truncation;
    const double es = p.eta_s();
    std::vector<double> a(N + 1, 0.0);
    a[0] = 1.0;
    for (int j = 1; j <= N; ++j) {
        double conv = 0.0;
        for (size_t k = 0; k < p.F.size(); ++k) {
            int i = j - 2 - int(k);
            if (i >= 0) conv += p.F[k] * a[i];
        }
        double lam_term = j >= 2 ? p.lambda * a[j - 2] : 0.0;
        a[j] = -(es * p.c2 * a[j - 1] + lam_term + conv) / (double(j) * (j + 1));
    }
    return a;
}

inline SeriesPair h2_series(const FuchsProblem& p) {
    SeriesPair s;
    s.a = h1_series(p);
    s.log_coupling = p.c2;
    const int N = p.truncation;
    const double es = p.eta_s();
    s.b.assign(N + 2, 0.0);
    s.b[0] = 1.0;
    s.b[1] = 0.0;  // resonant coefficient: fixed by convention
    for (int j = 0; j <= N - 1; ++j) {
        double conv = 0.0;
        for (size_t k = 0; k < p.F.size(); ++k) {
            int i = j - int(k);
            if (i >= 0) conv += p.F[k] * s.b[i];
        }
        double rhs = es * p.c2 * (2.0 * j + 3.0) * s.a[j + 1] - p.lambda * s.b[j] -
                     es * p.c2 * s.b[j + 1] - conv;
        s.b[j + 2] = rhs / (double(j + 2) * (j + 1));
    }
    s.h2_prime0 = s.b[1];
    return s;
}

namespace detail {

struct SeriesEval {
    double S, dS, d2S;     // S = tau h1 and derivatives
    double h2, dh2, d2h2;
};

inline SeriesEval eval_series(const SeriesPair& s, double tau) {
    SeriesEval e{0, 0, 0, 0, 0, 0};
    // Horner from the top for S = sum a_j tau^{j+1}
    for (int j = int(s.a.size()) - 1; j >= 0; --j) {
        e.d2S = e.d2S * tau + double(j + 1) * j * s.a[j];
        e.dS = e.dS * tau + double(j + 1) * s.a[j];
        e.S = e.S * tau + s.a[j];
    }
    e.d2S /= tau;  // sum (j+1) j a_j tau^{j-1}
    e.S *= tau;
    for (int j = int(s.b.size()) - 1; j >= 0; --j) {
        if (j >= 2) e.d2h2 = e.d2h2 * tau + double(j) * (j - 1) * s.b[j];
        if (j >= 1) e.dh2 = e.dh2 * tau + double(j) * s.b[j];
        e.h2 = e.h2 * tau + s.b[j];
    }
    return e;
}

}  // namespace detail

// phi = C1 tau h1 + C2 [h2 - c^2 |tau| h1 ln|tau|] and its tau-derivative.
struct SolutionValue {
    cplx phi;
    cplx dphi;
};

inline SolutionValue eval_solution(const FuchsProblem& p, const SeriesPair& s, cplx C1, cplx C2,
                                   double tau) {
    double w = std::abs(tau);
    if (!(w > 0.0) || w >= p.radius_guard)
        throw validation_error("eval_solution: |tau| outside (0, radius_guard)");
    const double es = p.eta_s();
    auto e = detail::eval_series(s, tau);
    double L = std::log(w);
    // phi_2 = h2 - c^2 eta_s S L;   phi_2' = h2' - c^2 eta_s (S' L + S / tau)
    double phi2 = e.h2 - p.c2 * es * e.S * L;
    double dphi2 = e.dh2 - p.c2 * es * (e.dS * L + e.S / tau);
    return {C1 * e.S + C2 * phi2, C1 * e.dS + C2 * dphi2};
}

// Defect of the assembled solution in the ODE itself (series + log terms
// differentiated exactly); the acceptance gate for the series construction.
inline cplx ode_residual(const FuchsProblem& p, const SeriesPair& s, cplx C1, cplx C2,
                         double tau) {
    double w = std::abs(tau);
    const double es = p.eta_s();
    auto e = detail::eval_series(s, tau);
    double L = std::log(w);
    double d2phi2 = e.d2h2 - p.c2 * es * (e.d2S * L + 2.0 * e.dS / tau - e.S / (tau * tau));
    double Fv = 0.0;
    for (int k = int(p.F.size()) - 1; k >= 0; --k) Fv = Fv * tau + p.F[k];
    double V = p.lambda + p.c2 / w + Fv;
    double phi2 = e.h2 - p.c2 * es * e.S * L;
    cplx phi = C1 * e.S + C2 * phi2;
    cplx d2phi = C1 * e.d2S + C2 * d2phi2;
    return d2phi + V * phi;
}

// Least-squares recovery of (C1, C2) from (tau, phi, phi') samples near 0.
// Fits on alternate samples and reports the worst held-out reconstruction
// mismatch relative to the sample scale.
struct ConstantFit {
    cplx C1, C2;
    double holdout_residual = 0.0;
};

inline ConstantFit extract_constants(const FuchsProblem& p, const SeriesPair& s,
                                     const std::vector<std::pair<double, SolutionValue>>& samples) {
    if (samples.size() < 2) throw validation_error("extract_constants: need >= 2 samples");
    // normal equations sum over fitting rows: [S phi2; S' phi2'] [C1;C2] = [phi; phi']
    cplx a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
    auto add_row = [&](double x1, double x2, cplx y) {
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        r1 += x1 * y;
        r2 += x2 * y;
    };
    for (size_t i = 0; i < samples.size(); i += 2) {
        auto [tau, val] = samples[i];
        const double es = p.eta_s();
        auto e = detail::eval_series(s, tau);
        double L = std::log(std::abs(tau));
        double phi2 = e.h2 - p.c2 * es * e.S * L;
        double dphi2 = e.dh2 - p.c2 * es * (e.dS * L + e.S / tau);
        add_row(e.S, phi2, val.phi);
        add_row(e.dS, dphi2, val.dphi);
    }
    cplx det = a11 * a22 - a12 * a12;
    if (std::abs(det) == 0.0) throw numeric_error("extract_constants: singular fit");
    ConstantFit fit;
    fit.C1 = (a22 * r1 - a12 * r2) / det;
    fit.C2 = (a11 * r2 - a12 * r1) / det;

    double scale = 0.0, worst = 0.0;
    for (const auto& [tau, val] : samples)
        scale = std::max(scale, std::max(std::abs(val.phi), std::abs(val.dphi)));
    for (size_t i = 1; i < samples.size(); i += 2) {
        auto [tau, val] = samples[i];
        auto pred = eval_solution(p, s, fit.C1, fit.C2, tau);
        worst = std::max(worst, std::abs(pred.phi - val.phi));
        worst = std::max(worst, std::abs(pred.dphi - val.dphi));
    }
    fit.holdout_residual = scale > 0 ? worst / scale : worst;
    return fit;
}

// ---------------------------------------------------------------------------
// Closed-form Riccati solutions: A = -alpha'/alpha with
//   alpha = D1 tau k1 + D2 [k2 - c^2 |tau| k1 ln|tau|],
// k-series = h-series of the same problem with lambda = 0. Integrable iff
// D2 != 0, in which case int_0^tau A = ln|D2 / alpha(tau)| exactly.
// ---------------------------------------------------------------------------

inline FuchsProblem k_problem(const FuchsProblem& p) {
    FuchsProblem k = p;
    k.lambda = 0.0;
    return k;
}

// Raw evaluator, defined for any (D1, D2); used directly for the
// non-integrable branch diagnostics (D2 = 0 gives A ~ -1/tau).
inline std::function<double(double)> closed_form_A_eval(const FuchsProblem& p, double D1,
                                                        double D2) {
    FuchsProblem kp = k_problem(p);
    SeriesPair ks = h2_series(kp);
    double c2 = p.c2;
    double es = p.eta_s();
    return [ks, c2, es, D1, D2](double tau) {
        auto e = detail::eval_series(ks, tau);
        double L = std::log(std::abs(tau));
        double alpha = D1 * e.S + D2 * (e.h2 - c2 * es * e.S * L);
        double dalpha = D1 * e.dS + D2 * (e.dh2 - c2 * es * (e.dS * L + e.S / tau));
        return -dalpha / alpha;
    };
}

inline RiccatiSolution riccati_closed_form(const FuchsProblem& p, double D1, double D2,
                                           double h_request = 0.0) {
    if (D2 == 0.0)
        throw validation_error(
            "riccati_closed_form: D2 = 0 gives the non-integrable branch (A ~ -1/tau)");
    FuchsProblem kp = k_problem(p);
    SeriesPair ks = h2_series(kp);
    const double c2 = p.c2;
    const double es = p.eta_s();
    const double sgn = tau_sign(p.side);

    auto alpha_of = [ks, c2, es, D1, D2](double tau) {
        auto e = detail::eval_series(ks, tau);
        double L = std::log(std::abs(tau));
        return D1 * e.S + D2 * (e.h2 - c2 * es * e.S * L);
    };

    double h = h_request > 0 ? h_request : 0.5 * p.radius_guard;
    h = std::min(h, 0.9 * p.radius_guard);
    // shrink below any zero of alpha
    const double sign0 = D2 > 0 ? 1.0 : -1.0;
    for (int i = 0; i <= 400; ++i) {
        double w = h * std::pow(1e-13 / h, i / 400.0);
        if (alpha_of(sgn * w) * sign0 <= 0.0) h = 0.8 * w;
    }
    if (!(h > 1e-10))
        throw numeric_error("riccati_closed_form: alpha vanishes arbitrarily close to 0");

    RiccatiSolution sol;
    sol.side = p.side;
    sol.h = h;
    sol.tau_eps = 0.0;
    sol.provenance = RiccatiSolution::Provenance::closed_form;
    sol.alpha = 0.0;
    sol.A = closed_form_A_eval(p, D1, D2);
    sol.intA0 = [alpha_of, D2](double tau) { return std::log(std::abs(D2 / alpha_of(tau))); };
    return sol;
}

// ---------------------------------------------------------------------------
// The explicit transmission rule and its parameter
// ---------------------------------------------------------------------------

// (C1_check, C2_check) = (C1_hat + delta * C2_hat, C2_hat)
inline std::pair<cplx, cplx> oracle_transmission(cplx C1_hat, cplx C2_hat, double delta) {
    return {C1_hat + delta * C2_hat, C2_hat};
}

// delta = h2'(0)^ - h2'(0)v + k2'(0)v - k2'(0)^ + D1v/D2v - D1^/D2^
// (hat quantities marked ^, check marked v).
inline double delta_from_series(const FuchsProblem& hat, const FuchsProblem& check,
                                double D1_hat, double D2_hat, double D1_check,
                                double D2_check) {
    if (D2_hat == 0.0 || D2_check == 0.0)
        throw validation_error("delta_from_series: D2 components must be nonzero");
    SeriesPair hs = h2_series(hat);
    SeriesPair cs = h2_series(check);
    SeriesPair hk = h2_series(k_problem(hat));
    SeriesPair ck = h2_series(k_problem(check));
    return hs.h2_prime0 - cs.h2_prime0 + ck.h2_prime0 - hk.h2_prime0 +
           D1_check / D2_check - D1_hat / D2_hat;
}

// Asymptotic bang-surface pair of the assembled solution:
//   psi0 = lim phi = C2
//   psi1 = lim (phi' + A phi) = C1 + C2 (h2'(0) - k2'(0) - D1/D2)
// Useful as the frozen oracle for cross-module checks.
inline std::pair<cplx, cplx> oracle_bang_pair(const FuchsProblem& p, cplx C1, cplx C2,
                                              double D1, double D2) {
    SeriesPair hs = h2_series(p);
    SeriesPair ks = h2_series(k_problem(p));
    cplx psi1 = C1 + C2 * (hs.h2_prime0 - ks.h2_prime0 - D1 / D2);
    return {C2, psi1};
}

}  // namespace aeon

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "aeon/common.hpp"
#include "aeon/fft.hpp"
#include "aeon/mesh.hpp"
#include "aeon/riccati.hpp"
#include "aeon/rk45.hpp"

namespace aeon {

// Flat 3-torus pseudospectral grid with the two-thirds dealiasing rule.
struct TorusGrid3 {
    int N = 16;  // points per axis, power of two, >= 8
    std::array<double, 3> periods{2 * M_PI, 2 * M_PI, 2 * M_PI};

    TorusGrid3() = default;
    TorusGrid3(int n, std::array<double, 3> L) : N(n), periods(L) {
        if (N < 8 || (N & (N - 1)) != 0)
            throw validation_error("TorusGrid3: N must be a power of two >= 8");
        for (double p : periods)
            if (!(p > 0)) throw validation_error("TorusGrid3: periods must be positive");
    }

    size_t size() const { return size_t(N) * N * N; }
    double volume() const { return periods[0] * periods[1] * periods[2]; }
    int freq(int i) const { return i <= N / 2 ? i : i - N; }  // integer wavenumber

    double lambda_at(int ix, int iy, int iz) const {
        double kx = 2.0 * M_PI * freq(ix) / periods[0];
        double ky = 2.0 * M_PI * freq(iy) / periods[1];
        double kz = 2.0 * M_PI * freq(iz) / periods[2];
        return kx * kx + ky * ky + kz * kz;
    }

    bool dealias_keep(int ix, int iy, int iz) const {
        int m = N / 3;
        return std::abs(freq(ix)) <= m && std::abs(freq(iy)) <= m && std::abs(freq(iz)) <= m;
    }

    template <typename F>
    void for_modes(F&& f) const {
        for (int ix = 0; ix < N; ++ix)
            for (int iy = 0; iy < N; ++iy)
                for (int iz = 0; iz < N; ++iz)
                    f(size_t(iz) + size_t(N) * (iy + size_t(N) * ix), ix, iy, iz);
    }
};

// Field pair on the grid, physical space.
struct FieldState3 {
    double tau = 0.0;
    std::vector<cplx> phi, chi;
};

// ---------------------------------------------------------------------------
// cubic nonlinearity -kappa |phi|^2 phi, spectrally dealiased
// ---------------------------------------------------------------------------
inline std::vector<cplx> nonlinearity(const TorusGrid3& g, const std::vector<cplx>& phi,
                                      double kappa) {
    if (phi.size() != g.size()) throw validation_error("nonlinearity: size mismatch");
    std::vector<cplx> out(phi.size());
    if (kappa == 0.0) return out;
    for (size_t i = 0; i < phi.size(); ++i) out[i] = -kappa * std::norm(phi[i]) * phi[i];
    fft3(out, g.N, false);
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        if (!g.dealias_keep(ix, iy, iz)) out[idx] = cplx{};
    });
    fft3(out, g.N, true);
    return out;
}

// ---------------------------------------------------------------------------
// regular-region evolution: method of lines, spectral Laplacian,
// adaptive embedded Runge-Kutta stepping
// ---------------------------------------------------------------------------
namespace detail {

struct GridPair {
    std::vector<cplx> phi, chi;
    GridPair operator+(const GridPair& o) const {
        GridPair r = *this;
        for (size_t i = 0; i < phi.size(); ++i) {
            r.phi[i] += o.phi[i];
            r.chi[i] += o.chi[i];
        }
        return r;
    }
    GridPair operator*(double s) const {
        GridPair r = *this;
        for (size_t i = 0; i < phi.size(); ++i) {
            r.phi[i] *= s;
            r.chi[i] *= s;
        }
        return r;
    }
};
inline double norm_inf(const GridPair& p) {
    double m = 0;
    for (size_t i = 0; i < p.phi.size(); ++i)
        m = std::max({m, std::abs(p.phi[i]), std::abs(p.chi[i])});
    return m;
}

}  // namespace detail

struct SemilinearProblem {
    TorusGrid3 grid;
    double rho = 0.0;                    // (1/6) R_gamma; 0 on the flat torus
    std::function<double(double)> q;     // effective mass squared, time only
    double kappa = 1.0;

    double q_at(double tau) const { return q ? q(tau) : 0.0; }
};

inline FieldState3 evolve_semilinear(const SemilinearProblem& p, const FieldState3& s,
                                     double tau_end, double tol = 1e-10) {
    if (s.tau == tau_end) return s;
    if ((s.tau < 0.0) != (tau_end < 0.0) && s.tau != 0.0 && tau_end != 0.0)
        throw validation_error("evolve_semilinear: interval crosses tau = 0");
    const TorusGrid3& g = p.grid;
    std::vector<double> lam(g.size());
    g.for_modes([&](size_t idx, int ix, int iy, int iz) { lam[idx] = g.lambda_at(ix, iy, iz); });

    auto rhs = [&](double tau, const detail::GridPair& y) {
        detail::GridPair out;
        out.phi = y.chi;
        out.chi = y.phi;
        fft3(out.chi, g.N, false);
        for (size_t i = 0; i < out.chi.size(); ++i) out.chi[i] *= -lam[i];
        fft3(out.chi, g.N, true);
        double qv = p.q_at(tau);
        auto nl = nonlinearity(g, y.phi, p.kappa);
        for (size_t i = 0; i < out.chi.size(); ++i)
            out.chi[i] += -(p.rho + qv) * y.phi[i] + nl[i];
        return out;
    };
    Rk45Options opt;
    opt.rel_tol = tol;
    opt.abs_tol = tol * 1e-2;
    auto out = rk45_integrate(rhs, s.tau, tau_end, detail::GridPair{s.phi, s.chi}, opt);
    return {tau_end, std::move(out.phi), std::move(out.chi)};
}

// ---------------------------------------------------------------------------
// damped crossing layer on the grid, psi variables in the int_0 gauge:
//   psi'' + (-Delta + 1) psi = (1 - rho) psi + 2 Atilde psi'
//                              - kappa |psi|^2 psi e^{-2 int_0^tau Atilde} + Q-load
// ---------------------------------------------------------------------------
struct SemiLayerOptions {
    double du = 0.05;
    double cap_fraction = 1.0 / 20.0;
    double floor_w = 1e-10;
    double tol = 1e-9;
    int max_iter = 200;
    // H^1 -> L^6 embedding constant in the window budget. On the flat torus
    // the constant is bounded by max(V^{-1/3}, S_free) with the free Sobolev
    // constant ~ 0.42; 0.5 covers both for the volumes used here.
    double sobolev_K = 0.5;
};

namespace detail {

struct SemiLayerScratch {
    std::vector<double> tau;      // nodes, monotone, no 0
    std::vector<double> Acoef;    // Atilde at nodes (0 on the simple path)
    std::vector<double> Qcoef;    // kept q on the simple path
    std::vector<double> exp2IA;   // e^{-2 int_0^tau Atilde}
    std::vector<double> lam;      // per-mode eigenvalues
    std::vector<double> om;       // sqrt(lam+1)
};

// discrete H^1 x L^2 norm of a spectral pair
inline double pair_norm_h1l2(const TorusGrid3& g, const std::vector<double>& lam,
                             const std::vector<cplx>& psi_hat,
                             const std::vector<cplx>& chi_hat) {
    double acc = 0;
    for (size_t i = 0; i < psi_hat.size(); ++i)
        acc += (lam[i] + 1.0) * std::norm(psi_hat[i]) + std::norm(chi_hat[i]);
    return std::sqrt(acc * g.volume());
}

// One Picard window on node range [i0, i1], anchor pair (spectral) at node i0
// or at the origin. psi/chi are (node, mode) arrays over the whole mesh.
inline void semilinear_window(const SemilinearProblem& p, const SemiLayerScratch& sc,
                              size_t i0, size_t i1, std::vector<std::vector<cplx>>& psi,
                              std::vector<std::vector<cplx>>& chi,
                              const std::vector<cplx>& psi_a, const std::vector<cplx>& chi_a,
                              bool anchor_at_origin, const SemiLayerOptions& opt) {
    const TorusGrid3& g = p.grid;
    const size_t M = g.size();
    const size_t m = i1 - i0 + 1;
    std::vector<double> taus(sc.tau.begin() + i0, sc.tau.begin() + i0 + m);
    SegmentedQuad quad(taus);
    const double tau_anchor = anchor_at_origin ? 0.0 : taus[0];

    // initial iterate: free rotation of the anchor
    for (size_t j = 0; j < m; ++j) {
        double dt = taus[j] - tau_anchor;
        for (size_t k = 0; k < M; ++k) {
            double om = sc.om[k];
            double c = std::cos(om * dt), s = std::sin(om * dt);
            psi[i0 + j][k] = psi_a[k] * c + chi_a[k] * (s / om);
            chi[i0 + j][k] = -psi_a[k] * (om * s) + chi_a[k] * c;
        }
    }

    std::vector<std::vector<cplx>> load(m);
    std::vector<cplx> fc(m), fs(m), Ic(m), Is(m);
    double change = 1e300;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        // loads at all window nodes (physical-space cubic, spectral linear part)
        for (size_t j = 0; j < m; ++j) {
            size_t nj = i0 + j;
            std::vector<cplx> cube;
            if (p.kappa != 0.0) {
                cube = psi[nj];
                fft3(cube, g.N, true);  // coefficients -> physical/N^3
                double n3 = double(M);
                for (auto& v : cube) {
                    v *= n3;
                    v = -p.kappa * std::norm(v) * v;
                }
                fft3(cube, g.N, false);  // physical -> N^3 * coefficients
                g.for_modes([&](size_t idx, int ix, int iy, int iz) {
                    cube[idx] = g.dealias_keep(ix, iy, iz) ? cube[idx] / n3 : cplx{};
                });
            }
            load[j].resize(M);
            for (size_t k = 0; k < M; ++k) {
                cplx nl = p.kappa != 0.0 ? cube[k] * sc.exp2IA[nj] : cplx{};
                load[j][k] = (1.0 - p.rho - sc.Qcoef[nj]) * psi[nj][k] +
                             2.0 * sc.Acoef[nj] * chi[nj][k] + nl;
            }
        }
        // per-mode Duhamel update
        change = 0.0;
        double scale = 1.0;
        for (size_t k = 0; k < M; ++k) {
            double om = sc.om[k];
            for (size_t j = 0; j < m; ++j) {
                fc[j] = load[j][k] * std::cos(om * taus[j]);
                fs[j] = load[j][k] * std::sin(om * taus[j]);
            }
            auto IcV = quad.cumulative(fc);
            auto IsV = quad.cumulative(fs);
            cplx tail_c{}, tail_s{};
            if (anchor_at_origin) {
                double w0 = std::abs(taus[0]), w1 = std::abs(taus[1]);
                double sgn = taus[0] > 0 ? 1.0 : -1.0;
                tail_c = sgn * tail_integral_logfit(w0, fc[0], w1, fc[1]);
                tail_s = sgn * tail_integral_logfit(w0, fs[0], w1, fs[1]);
            }
            for (size_t j = 0; j < m; ++j) {
                double dt = taus[j] - tau_anchor;
                double cA = std::cos(om * dt), sA = std::sin(om * dt);
                double ct = std::cos(om * taus[j]), st = std::sin(om * taus[j]);
                cplx IcT = IcV[j] + tail_c, IsT = IsV[j] + tail_s;
                cplx npsi = psi_a[k] * cA + chi_a[k] * (sA / om) + (st * IcT - ct * IsT) / om;
                cplx nchi = -psi_a[k] * (om * sA) + chi_a[k] * cA + (ct * IcT + st * IsT);
                size_t nj = i0 + j;
                change = std::max(change, std::max(om * std::abs(npsi - psi[nj][k]),
                                                   std::abs(nchi - chi[nj][k])));
                scale = std::max({scale, om * std::abs(npsi), std::abs(nchi)});
                psi[nj][k] = npsi;
                chi[nj][k] = nchi;
            }
        }
        if (change < opt.tol * scale) return;
    }
    throw numeric_error("semilinear layer: Picard stalled, last sup-change=" +
                        std::to_string(change));
}

// value exactly at tau = 0 from the last inward window
inline void semilinear_close_at_origin(const SemilinearProblem& p, const SemiLayerScratch& sc,
                                       size_t i0, const std::vector<std::vector<cplx>>& psi,
                                       const std::vector<std::vector<cplx>>& chi,
                                       std::vector<cplx>& psi0, std::vector<cplx>& chi0) {
    const TorusGrid3& g = p.grid;
    const size_t M = g.size();
    const size_t K = sc.tau.size();
    const size_t m = K - i0;
    std::vector<double> taus(sc.tau.begin() + i0, sc.tau.end());
    SegmentedQuad quad(taus);

    // loads on the final window with the converged iterates
    std::vector<std::vector<cplx>> load(m);
    for (size_t j = 0; j < m; ++j) {
        size_t nj = i0 + j;
        std::vector<cplx> cube;
        if (p.kappa != 0.0) {
            cube = psi[nj];
            fft3(cube, g.N, true);
            double n3 = double(M);
            for (auto& v : cube) {
                v *= n3;
                v = -p.kappa * std::norm(v) * v;
            }
            fft3(cube, g.N, false);
            g.for_modes([&](size_t idx, int ix, int iy, int iz) {
                cube[idx] = g.dealias_keep(ix, iy, iz) ? cube[idx] / n3 : cplx{};
            });
        }
        load[j].resize(M);
        for (size_t k = 0; k < M; ++k) {
            cplx nl = p.kappa != 0.0 ? cube[k] * sc.exp2IA[nj] : cplx{};
            load[j][k] = (1.0 - p.rho - sc.Qcoef[nj]) * psi[nj][k] +
                         2.0 * sc.Acoef[nj] * chi[nj][k] + nl;
        }
    }
    psi0.resize(M);
    chi0.resize(M);
    std::vector<cplx> fc(m), fs(m);
    double sgn = taus.back() > 0 ? 1.0 : -1.0;
    double w_in = std::abs(taus[m - 1]), w_prev = std::abs(taus[m - 2]);
    for (size_t k = 0; k < M; ++k) {
        double om = sc.om[k];
        for (size_t j = 0; j < m; ++j) {
            fc[j] = load[j][k] * std::cos(om * taus[j]);
            fs[j] = load[j][k] * std::sin(om * taus[j]);
        }
        cplx Ic = quad.cumulative(fc).back();
        cplx Is = quad.cumulative(fs).back();
        Ic -= sgn * tail_integral_logfit(w_in, fc[m - 1], w_prev, fc[m - 2]);
        Is -= sgn * tail_integral_logfit(w_in, fs[m - 1], w_prev, fs[m - 2]);
        double cA = std::cos(om * taus[0]), sA = std::sin(om * taus[0]);
        psi0[k] = psi[i0][k] * cA - chi[i0][k] * (sA / om) - Is / om;
        chi0[k] = psi[i0][k] * (om * sA) + chi[i0][k] * cA + Ic;
    }
}

// Window cuts from the contraction budget
//   2 [ (1 + ||R||/6) + kappa e^{2||A||_{L1}} 6 K^3 rho^2 ] eps + 4 int |A| < 0.9,
// the sharp (pre-max) form of the ball criterion: the linear coefficient and
// the cubic Lipschitz term each carry their own constant, so kappa = 0
// degenerates to the linear budget instead of dragging rho^2 along.
inline std::vector<size_t> semilinear_windows(const SemilinearProblem& p,
                                              const SemiLayerScratch& sc, double rho_norm,
                                              double intA_total, const SemiLayerOptions& opt) {
    double Rsup = 6.0 * std::abs(p.rho);  // rho = R/6 on this grid
    double lin_coef = 1.0 + Rsup / 6.0;
    double K3 = opt.sobolev_K * opt.sobolev_K * opt.sobolev_K;
    double cub_coef = p.kappa * std::exp(2.0 * intA_total) * 6.0 * K3 * rho_norm * rho_norm;
    std::vector<size_t> cuts{0};
    double eps_acc = 0.0, intA_acc = 0.0;
    for (size_t i = 0; i + 1 < sc.tau.size(); ++i) {
        double dt = std::abs(sc.tau[i + 1] - sc.tau[i]);
        eps_acc += dt;
        intA_acc += dt * 0.5 * (std::abs(sc.Acoef[i]) + std::abs(sc.Acoef[i + 1])) +
                    dt * 0.5 * (sc.Qcoef[i] + sc.Qcoef[i + 1]);
        double bound = 2.0 * (lin_coef + cub_coef) * eps_acc + 4.0 * intA_acc;
        if (bound > 0.9 && i + 1 < sc.tau.size() - 1) {
            cuts.push_back(i + 1);
            eps_acc = 0.0;
            intA_acc = 0.0;
        }
    }
    cuts.push_back(sc.tau.size() - 1);
    return cuts;
}

inline SemiLayerScratch build_semilinear_nodes(const SemilinearProblem& p,
                                               const RiccatiSolution* A, Side side, double h,
                                               bool inward, const SemiLayerOptions& opt) {
    SemiLayerScratch sc;
    auto w = graded_nodes_desc(h, opt.floor_w, opt.du, h * opt.cap_fraction);
    if (!inward) std::reverse(w.begin(), w.end());
    const double sgn = tau_sign(side);
    size_t K = w.size();
    sc.tau.resize(K);
    sc.Acoef.resize(K);
    sc.Qcoef.resize(K);
    sc.exp2IA.resize(K);
    for (size_t i = 0; i < K; ++i) {
        double tau = sgn * w[i];
        sc.tau[i] = tau;
        sc.Acoef[i] = A ? A->A(tau) : 0.0;
        sc.Qcoef[i] = A ? 0.0 : p.q_at(tau);
        sc.exp2IA[i] = std::exp(-2.0 * (A ? A->intA0(tau) : 0.0));
    }
    const TorusGrid3& g = p.grid;
    sc.lam.resize(g.size());
    sc.om.resize(g.size());
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        sc.lam[idx] = g.lambda_at(ix, iy, iz);
        sc.om[idx] = std::sqrt(sc.lam[idx] + 1.0);
    });
    return sc;
}

}  // namespace detail

// Spectral psi pair at a time in the layer.
struct SemiPsiState {
    double tau = 0.0;
    std::vector<cplx> psi_hat, chi_hat;  // spectral coefficients
};

// Inward damped evolution: spectral psi pair at tau = sign*h -> pair at 0.
// Optionally records the trajectory (for two-sided continuity probes).
inline SemiPsiState damped_semilinear_to_origin(const SemilinearProblem& p,
                                                const RiccatiSolution* A, Side side, double h,
                                                const SemiPsiState& edge,
                                                const SemiLayerOptions& opt = {},
                                                std::vector<SemiPsiState>* traj = nullptr) {
    auto sc = detail::build_semilinear_nodes(p, A, side, h, true, opt);
    double intA_total = A ? std::abs(A->intA0(tau_sign(side) * h)) : 0.0;
    double rho_norm = detail::pair_norm_h1l2(p.grid, sc.lam, edge.psi_hat, edge.chi_hat);
    auto cuts = detail::semilinear_windows(p, sc, rho_norm, intA_total, opt);
    size_t K = sc.tau.size();
    std::vector<std::vector<cplx>> psi(K), chi(K);
    for (auto& v : psi) v.resize(p.grid.size());
    for (auto& v : chi) v.resize(p.grid.size());
    std::vector<cplx> pa = edge.psi_hat, ca = edge.chi_hat;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        detail::semilinear_window(p, sc, cuts[c], cuts[c + 1], psi, chi, pa, ca, false, opt);
        pa = psi[cuts[c + 1]];
        ca = chi[cuts[c + 1]];
    }
    if (traj) {
        traj->clear();
        for (size_t i = 0; i < K; ++i) traj->push_back({sc.tau[i], psi[i], chi[i]});
    }
    SemiPsiState out;
    out.tau = 0.0;
    detail::semilinear_close_at_origin(p, sc, cuts[cuts.size() - 2], psi, chi, out.psi_hat,
                                       out.chi_hat);
    return out;
}

inline SemiPsiState damped_semilinear_from_origin(const SemilinearProblem& p,
                                                  const RiccatiSolution* A, Side side,
                                                  double h, const SemiPsiState& origin,
                                                  const SemiLayerOptions& opt = {},
                                                  std::vector<SemiPsiState>* traj = nullptr) {
    auto sc = detail::build_semilinear_nodes(p, A, side, h, false, opt);
    double intA_total = A ? std::abs(A->intA0(tau_sign(side) * h)) : 0.0;
    double rho_norm = detail::pair_norm_h1l2(p.grid, sc.lam, origin.psi_hat, origin.chi_hat);
    auto cuts = detail::semilinear_windows(p, sc, rho_norm, intA_total, opt);
    size_t K = sc.tau.size();
    std::vector<std::vector<cplx>> psi(K), chi(K);
    for (auto& v : psi) v.resize(p.grid.size());
    for (auto& v : chi) v.resize(p.grid.size());
    std::vector<cplx> pa = origin.psi_hat, ca = origin.chi_hat;
    bool from_origin = true;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
        detail::semilinear_window(p, sc, cuts[c], cuts[c + 1], psi, chi, pa, ca, from_origin,
                                  opt);
        pa = psi[cuts[c + 1]];
        ca = chi[cuts[c + 1]];
        from_origin = false;
    }
    if (traj) {
        traj->clear();
        for (size_t i = 0; i < K; ++i) traj->push_back({sc.tau[i], psi[i], chi[i]});
    }
    return {sc.tau.back(), psi.back(), chi.back()};
}

// ---------------------------------------------------------------------------
// full semilinear crossing and its diagnostics
// ---------------------------------------------------------------------------
struct SemilinearCrossSpec {
    SemilinearProblem hat, check;        // q per side; grid/kappa/rho must match
    ConformalFactor omega_hat, omega_check;
    std::shared_ptr<RiccatiSolution> A_hat, A_check;  // null = simple path
    double h = 0.1;
    SemiLayerOptions layer;
    double regular_tol = 1e-10;
};

struct CrossDiagnostics {
    // two-sided extrapolation of psi = e^{int A} phi at the bang surface
    double continuity_mismatch = 0.0;
};

// u data at tau_- -> u data at tau_+ (n = 3 Liouville: phi = Omega u).
inline FieldState3 cross_semilinear(const SemilinearCrossSpec& spec, const FieldState3& data,
                                    CrossDiagnostics* diag = nullptr) {
    const TorusGrid3& g = spec.hat.grid;
    double tau_minus = spec.omega_hat.tau_edge, tau_plus = spec.omega_check.tau_edge;
    if (std::abs(data.tau - tau_minus) > 1e-12 * std::max(1.0, std::abs(tau_minus)))
        throw validation_error("cross_semilinear: data not at tau_-");

    // Liouville scale (n = 3): phi = Omega u, chi = Omega' u + Omega u'
    FieldState3 st;
    st.tau = tau_minus;
    st.phi.resize(g.size());
    st.chi.resize(g.size());
    double Om = spec.omega_hat(tau_minus), dOm = spec.omega_hat.domega(tau_minus);
    for (size_t i = 0; i < g.size(); ++i) {
        st.phi[i] = Om * data.phi[i];
        st.chi[i] = dOm * data.phi[i] + Om * data.chi[i];
    }

    st = evolve_semilinear(spec.hat, st, -spec.h, spec.regular_tol);

    // to psi (int_0 gauge), spectral
    const RiccatiSolution* Ah = spec.A_hat.get();
    double wgt_h = Ah ? std::exp(Ah->intA0(-spec.h)) : 1.0;
    double Aval_h = Ah ? Ah->A(-spec.h) : 0.0;
    SemiPsiState edge;
    edge.tau = -spec.h;
    edge.psi_hat.resize(g.size());
    edge.chi_hat.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        edge.psi_hat[i] = st.phi[i] * wgt_h;
        edge.chi_hat[i] = (st.chi[i] + Aval_h * st.phi[i]) * wgt_h;
    }
    fft3(edge.psi_hat, g.N, false);
    fft3(edge.chi_hat, g.N, false);
    for (auto& v : edge.psi_hat) v /= double(g.size());
    for (auto& v : edge.chi_hat) v /= double(g.size());

    std::vector<SemiPsiState> traj_in, traj_out;
    auto bang = damped_semilinear_to_origin(spec.hat, Ah, Side::hat, spec.h, edge, spec.layer,
                                            diag ? &traj_in : nullptr);

    const RiccatiSolution* Ac = spec.A_check.get();
    auto out_edge = damped_semilinear_from_origin(spec.check, Ac, Side::check, spec.h, bang,
                                                  spec.layer, diag ? &traj_out : nullptr);

    if (diag) {
        // two-sided extrapolation of the psi pair toward 0 (Richardson in |tau|)
        auto extrap = [&](const std::vector<SemiPsiState>& traj, bool from_end) {
            // pick two sample indices with |tau| near 1e-3 and 1e-4
            auto pick = [&](double target) {
                size_t best = 0;
                double bd = 1e300;
                for (size_t i = 0; i < traj.size(); ++i) {
                    double d = std::abs(std::abs(traj[i].tau) - target);
                    if (d < bd) {
                        bd = d;
                        best = i;
                    }
                }
                return best;
            };
            (void)from_end;
            size_t i1 = pick(1e-3), i2 = pick(1e-4);
            std::vector<cplx> v(2 * traj[i2].psi_hat.size());
            double w1 = std::abs(traj[i1].tau), w2 = std::abs(traj[i2].tau);
            size_t M = traj[i2].psi_hat.size();
            for (size_t k = 0; k < M; ++k) {
                cplx d1 = traj[i1].psi_hat[k], d2 = traj[i2].psi_hat[k];
                v[k] = d2 + (d2 - d1) * (w2 / (w1 - w2));
                cplx e1 = traj[i1].chi_hat[k], e2 = traj[i2].chi_hat[k];
                v[M + k] = e2 + (e2 - e1) * (w2 / (w1 - w2));
            }
            return v;
        };
        auto left = extrap(traj_in, true);
        auto right = extrap(traj_out, false);
        double num = 0, den = 0;
        for (size_t k = 0; k < left.size(); ++k) {
            num = std::max(num, std::abs(left[k] - right[k]));
            den = std::max(den, std::abs(left[k]));
        }
        diag->continuity_mismatch = den > 0 ? num / den : num;
    }

    // back to phi at +h
    double wgt_c = Ac ? std::exp(Ac->intA0(spec.h)) : 1.0;
    double Aval_c = Ac ? Ac->A(spec.h) : 0.0;
    FieldState3 chk;
    chk.tau = spec.h;
    chk.phi = out_edge.psi_hat;
    chk.chi = out_edge.chi_hat;
    fft3(chk.phi, g.N, true);
    fft3(chk.chi, g.N, true);
    for (size_t i = 0; i < g.size(); ++i) {
        chk.phi[i] *= double(g.size());
        chk.chi[i] *= double(g.size());
        chk.phi[i] /= wgt_c;
        chk.chi[i] = chk.chi[i] / wgt_c - Aval_c * chk.phi[i];
    }

    chk = evolve_semilinear(spec.check, chk, tau_plus, spec.regular_tol);

    // unscale
    FieldState3 out;
    out.tau = tau_plus;
    out.phi.resize(g.size());
    out.chi.resize(g.size());
    double Oc = spec.omega_check(tau_plus), dOc = spec.omega_check.domega(tau_plus);
    for (size_t i = 0; i < g.size(); ++i) {
        out.phi[i] = chk.phi[i] / Oc;
        out.chi[i] = (chk.chi[i] - dOc * out.phi[i]) / Oc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// energy functional and probes
// ---------------------------------------------------------------------------
inline double energy_functional(const TorusGrid3& g, const FieldState3& s, double kappa) {
    std::vector<cplx> ph = s.phi, ch = s.chi;
    fft3(ph, g.N, false);
    fft3(ch, g.N, false);
    double inv = 1.0 / double(g.size());
    double h1 = 0, l2 = 0;
    g.for_modes([&](size_t idx, int ix, int iy, int iz) {
        double lam = g.lambda_at(ix, iy, iz);
        h1 += (lam + 1.0) * std::norm(ph[idx] * inv);
        l2 += std::norm(ch[idx] * inv);
    });
    double l4 = 0;
    for (const auto& v : s.phi) l4 += std::norm(v) * std::norm(v);
    l4 *= g.volume() / double(g.size());
    return g.volume() * (h1 + l2) + 0.5 * kappa * l4;
}

inline double h1l2_norm(const TorusGrid3& g, const FieldState3& s) {
    return std::sqrt(energy_functional(g, s, 0.0));
}

struct LipschitzReport {
    std::vector<double> zetas;
    std::vector<double> ratios;  // |S(x+zeta d) - S(x)| / |zeta d| in H^1 x L^2
};

inline LipschitzReport lipschitz_probe(const SemilinearCrossSpec& spec, const FieldState3& data,
                                       const std::vector<double>& zetas, unsigned seed = 7) {
    const TorusGrid3& g = spec.hat.grid;
    auto base = cross_semilinear(spec, data);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    FieldState3 dir;
    dir.tau = data.tau;
    dir.phi.resize(g.size());
    dir.chi.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        dir.phi[i] = cplx(U(rng), U(rng));
        dir.chi[i] = cplx(U(rng), U(rng));
    }
    double dn = h1l2_norm(g, dir);
    LipschitzReport rep;
    for (double z : zetas) {
        FieldState3 pert = data;
        for (size_t i = 0; i < g.size(); ++i) {
            pert.phi[i] += z * dir.phi[i];
            pert.chi[i] += z * dir.chi[i];
        }
        auto out = cross_semilinear(spec, pert);
        FieldState3 diff;
        diff.tau = out.tau;
        diff.phi.resize(g.size());
        diff.chi.resize(g.size());
        for (size_t i = 0; i < g.size(); ++i) {
            diff.phi[i] = out.phi[i] - base.phi[i];
            diff.chi[i] = out.chi[i] - base.chi[i];
        }
        rep.zetas.push_back(z);
        rep.ratios.push_back(h1l2_norm(g, diff) / (z * dn));
    }
    return rep;
}

}  // namespace aeon

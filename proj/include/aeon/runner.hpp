#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "aeon/scenario.hpp"

namespace aeon {

struct RunOptions;
struct RunResult;
struct Scenario;
inline void write_manifest(const Scenario& sc, std::uint64_t seed, const RunOptions& opt,
                           const std::string& hash, const RunResult& res);
inline void write_field_binary(const std::filesystem::path& path, const TorusGrid3& g,
                               const FieldState3& s, const std::string& hash);

inline std::uint64_t fnv1a_hash(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

// fixed shortest-roundtrip formatting keeps outputs byte-stable
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
        : out_(path, std::ios::binary) {
        if (!out_) throw validation_error("cannot open output file: " + path.string());
        write_row(header);
    }
    void write_row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(cells[i]);
        }
        out_ << "\r\n";  // RFC 4180 record separator
    }

private:
    static std::string escape(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        return q + "\"";
    }
    std::ofstream out_;
};

struct RunOptions {
    std::string out_dir = "out";
    std::uint64_t seed_override = 0;  // 0 = use scenario's
    int threads = 1;
};

struct RunResult {
    std::string config_hash;
    TransmissionPath path = TransmissionPath::simple;
    double delta = 0.0;          // riccati path, vs the epsilon anchors
    bool has_delta = false;
    double norm_in = 0.0, norm_out = 0.0;  // H^1 x L^2
    double continuity = 0.0;     // semilinear two-sided extrapolation mismatch
    double seconds = 0.0;
    std::filesystem::path out_dir;
};

namespace detail {

inline FieldData generate_field(const Scenario& sc, const std::vector<Mode>& modes,
                                double tau, std::uint64_t seed) {
    FieldData d;
    d.tau = tau;
    if (sc.data_kind == "modes") {
        for (size_t i = 0; i < modes.size(); ++i)
            d.modes.push_back({sc.mode_values[i], sc.mode_derivs[i]});
        return d;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (size_t i = 0; i < modes.size(); ++i)
        d.modes.push_back({sc.scale * cplx(U(rng), U(rng)), sc.scale * cplx(U(rng), U(rng))});
    return d;
}

inline double field_norm_h1l2(const std::vector<Mode>& modes, const FieldData& d) {
    std::vector<std::pair<Mode, cplx>> v0, v1;
    for (size_t i = 0; i < modes.size(); ++i) {
        v0.push_back({modes[i], d.modes[i].value});
        v1.push_back({modes[i], d.modes[i].deriv});
    }
    double a = sobolev_norm(v0, 1.0), b = sobolev_norm(v1, 0.0);
    return std::sqrt(a * a + b * b);
}

// mode-parallel map (results written by index; order-independent)
template <typename F>
void parallel_over_modes(size_t count, int threads, F&& f) {
    if (threads <= 1 || count < 2) {
        for (size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    int n = std::min<int>(threads, int(count));
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) f(i);
        });
    for (auto& th : pool) th.join();
}

inline void write_riccati_table(const std::filesystem::path& path, const RiccatiSolution& A,
                                const std::string& hash) {
    CsvWriter csv(path, {"tau", "A", "intA0", "config_hash"});
    double sgn = tau_sign(A.side);
    for (double w = A.h; w > 1e-6; w *= 0.8) {
        double tau = sgn * w;
        csv.write_row({fmt_g17(tau), fmt_g17(A(tau)), fmt_g17(A.intA0(tau)), hash});
    }
}

}  // namespace detail

// Build the transmission spec (path resolution, Riccati construction,
// layer width) from a parsed scenario.
inline TransmissionSpec build_transmission(const Scenario& sc) {
    TransmissionSpec spec;
    spec.n = sc.spectrum.dimension;
    spec.spectrum = sc.spectrum;
    spec.cutoff = sc.cutoff;
    spec.omega_hat = sc.omega_hat;
    spec.omega_check = sc.omega_check;
    spec.q_hat = sc.q_hat;
    spec.q_check = sc.q_check;
    spec.layer = sc.layer;
    spec.regular_tol = sc.regular_tol;

    bool both_l1 = sc.q_hat.cls == IntegrabilityClass::L1 &&
                   sc.q_check.cls == IntegrabilityClass::L1;
    std::string path = sc.path_mode;
    if (path == "auto") path = both_l1 ? "simple" : "riccati";
    if (path == "simple") {
        spec.path = TransmissionPath::simple;
        spec.h = sc.h > 0 ? sc.h : default_layer_width(sc.omega_hat.tau_edge,
                                                       sc.omega_check.tau_edge);
        return spec;
    }

    spec.path = TransmissionPath::riccati;
    if (sc.riccati_kind == "picard") {
        auto Ah = picard_construct(sc.q_hat, sc.epsilon);
        auto Ac = picard_construct(sc.q_check, sc.epsilon);
        spec.A_hat = std::make_shared<RiccatiSolution>(
            sc.alpha_hat == 0.0 ? Ah : shift_to_alpha(Ah, sc.alpha_hat));
        spec.A_check = std::make_shared<RiccatiSolution>(
            sc.alpha_check == 0.0 ? Ac : shift_to_alpha(Ac, sc.alpha_check));
    } else if (sc.riccati_kind == "ivp") {
        spec.A_hat = std::make_shared<RiccatiSolution>(ivp_solve(sc.q_hat, sc.alpha_hat));
        spec.A_check = std::make_shared<RiccatiSolution>(ivp_solve(sc.q_check, sc.alpha_check));
    } else if (sc.riccati_kind == "closed_form") {
        if (!sc.q_hat_is_fuchs || !sc.q_check_is_fuchs)
            throw validation_error(
                "closed_form Riccati needs q.family = inverse_abs_tau on both sides");
        FuchsProblem ph;
        ph.c2 = sc.c2_hat;
        ph.F = sc.F_hat;
        ph.side = Side::hat;
        ph.truncation = sc.series_N;
        FuchsProblem pc;
        pc.c2 = sc.c2_check;
        pc.F = sc.F_check;
        pc.side = Side::check;
        pc.truncation = sc.series_N;
        spec.A_hat = std::make_shared<RiccatiSolution>(
            riccati_closed_form(ph, sc.D1_hat, sc.D2_hat));
        spec.A_check = std::make_shared<RiccatiSolution>(
            riccati_closed_form(pc, sc.D1_check, sc.D2_check));
    } else {
        throw validation_error("transmission.riccati.kind must be picard|ivp|closed_form");
    }
    spec.h = sc.h > 0 ? sc.h
                      : default_layer_width(sc.omega_hat.tau_edge, sc.omega_check.tau_edge,
                                            spec.A_hat.get(), spec.A_check.get());
    return spec;
}

inline RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t seed = opt.seed_override ? opt.seed_override : sc.seed;
    std::string hash = hash_hex(fnv1a_hash(sc.raw_text.empty() ? sc.name : sc.raw_text));

    RunResult res;
    res.config_hash = hash;
    res.out_dir = fs::path(opt.out_dir);

    if (sc.semilinear) {
        // semilinear crossing on the torus grid
        TorusGrid3 grid(sc.grid_N, {sc.spectrum.periods[0], sc.spectrum.periods[1],
                                    sc.spectrum.periods[2]});
        SemilinearCrossSpec cross;
        cross.hat.grid = cross.check.grid = grid;
        cross.hat.kappa = cross.check.kappa = sc.kappa;
        cross.hat.rho = cross.check.rho = curvature_potential(sc.spectrum);
        cross.hat.q = sc.q_hat.q;
        cross.check.q = sc.q_check.q;
        cross.omega_hat = sc.omega_hat;
        cross.omega_check = sc.omega_check;
        cross.layer = sc.semi_layer;
        bool both_l1 = sc.q_hat.cls == IntegrabilityClass::L1 &&
                       sc.q_check.cls == IntegrabilityClass::L1;
        std::string path = sc.path_mode == "auto" ? (both_l1 ? "simple" : "riccati")
                                                  : sc.path_mode;
        if (path == "riccati") {
            cross.A_hat = std::make_shared<RiccatiSolution>(picard_construct(sc.q_hat, sc.epsilon));
            cross.A_check =
                std::make_shared<RiccatiSolution>(picard_construct(sc.q_check, sc.epsilon));
            res.path = TransmissionPath::riccati;
        } else {
            if (!both_l1)
                throw validation_error(
                    "semilinear: the simple path needs q in L1 on both sides");
            res.path = TransmissionPath::simple;
        }
        cross.h = sc.h > 0 ? sc.h
                           : default_layer_width(sc.omega_hat.tau_edge, sc.omega_check.tau_edge,
                                                 cross.A_hat.get(), cross.A_check.get());

        // seeded random smooth data
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        FieldState3 data;
        data.tau = sc.omega_hat.tau_edge;
        data.phi.resize(grid.size());
        data.chi.resize(grid.size());
        std::vector<cplx> ph(grid.size()), ch(grid.size());
        grid.for_modes([&](size_t idx, int ix, int iy, int iz) {
            int m = std::abs(grid.freq(ix)) + std::abs(grid.freq(iy)) + std::abs(grid.freq(iz));
            if (m <= 2) {
                ph[idx] = sc.scale * cplx(U(rng), U(rng)) * double(grid.size());
                ch[idx] = sc.scale * cplx(U(rng), U(rng)) * double(grid.size());
            }
        });
        fft3(ph, grid.N, true);
        fft3(ch, grid.N, true);
        data.phi = ph;
        data.chi = ch;

        fs::create_directories(res.out_dir);
        CrossDiagnostics diag;
        auto out = cross_semilinear(cross, data, &diag);
        res.continuity = diag.continuity_mismatch;
        res.norm_in = h1l2_norm(grid, data);
        res.norm_out = h1l2_norm(grid, out);

        write_field_binary(res.out_dir / "field_in.bin", grid, data, hash);
        write_field_binary(res.out_dir / "field_out.bin", grid, out, hash);
        CsvWriter energy(res.out_dir / "energy.csv",
                         {"tau", "energy", "h1l2_norm", "config_hash"});
        for (const auto* s : {&data, &out}) {
            energy.write_row({fmt_g17(s->tau), fmt_g17(energy_functional(grid, *s, sc.kappa)),
                              fmt_g17(h1l2_norm(grid, *s)), hash});
        }
        CsvWriter summary(res.out_dir / "summary.csv",
                          {"name", "kind", "path", "norm_in", "norm_out", "continuity",
                           "config_hash"});
        summary.write_row({sc.name, "semilinear",
                           res.path == TransmissionPath::simple ? "simple" : "riccati",
                           fmt_g17(res.norm_in), fmt_g17(res.norm_out),
                           fmt_g17(res.continuity), hash});
        write_manifest(sc, seed, opt, hash, res);
        auto t1 = std::chrono::steady_clock::now();
        res.seconds = std::chrono::duration<double>(t1 - t0).count();
        return res;
    }

    auto spec = build_transmission(sc);
    spec.validate();
    res.path = spec.path;
    auto modes = enumerate_modes(sc.spectrum, sc.cutoff);
    auto data = detail::generate_field(sc, modes, spec.tau_minus(), seed);

    FieldData out;
    out.tau = spec.tau_plus();
    out.modes.resize(modes.size());
    detail::parallel_over_modes(modes.size(), opt.threads, [&](size_t i) {
        auto bang = mode_to_bang(spec, modes[i].lambda, i, data.modes[i]);
        out.modes[i] = bang_to_mode(spec, modes[i].lambda, i, bang);
    });

    res.norm_in = detail::field_norm_h1l2(modes, data);
    res.norm_out = detail::field_norm_h1l2(modes, out);

    if (spec.path == TransmissionPath::riccati &&
        spec.A_hat->provenance != RiccatiSolution::Provenance::ivp) {
        // delta against the epsilon anchors of the same q
        auto ref_h = picard_construct(sc.q_hat, sc.epsilon);
        auto ref_c = picard_construct(sc.q_check, sc.epsilon);
        res.delta = pair_delta(*spec.A_hat, *spec.A_check, ref_h, ref_c);
        res.has_delta = true;
    }

    fs::create_directories(res.out_dir);
    auto write_field = [&](const fs::path& p, const FieldData& d) {
        CsvWriter csv(p, {"mode_index", "lambda", "multiplicity", "re_u", "im_u", "re_du",
                          "im_du", "config_hash"});
        for (size_t i = 0; i < modes.size(); ++i) {
            csv.write_row({std::to_string(modes[i].index), fmt_g17(modes[i].lambda),
                           std::to_string(modes[i].multiplicity),
                           fmt_g17(d.modes[i].value.real()), fmt_g17(d.modes[i].value.imag()),
                           fmt_g17(d.modes[i].deriv.real()), fmt_g17(d.modes[i].deriv.imag()),
                           hash});
        }
    };
    write_field(res.out_dir / "field_in.csv", data);
    write_field(res.out_dir / "field_out.csv", out);

    if (spec.path == TransmissionPath::riccati) {
        detail::write_riccati_table(res.out_dir / "riccati_hat.csv", *spec.A_hat, hash);
        detail::write_riccati_table(res.out_dir / "riccati_check.csv", *spec.A_check, hash);
        CsvWriter d(res.out_dir / "delta_report.csv",
                    {"delta", "epsilon", "alpha_hat", "alpha_check", "h", "kind",
                     "config_hash"});
        d.write_row({res.has_delta ? fmt_g17(res.delta) : "nan", fmt_g17(sc.epsilon),
                     fmt_g17(sc.alpha_hat), fmt_g17(sc.alpha_check), fmt_g17(spec.h),
                     sc.riccati_kind, hash});
    }

    // optional per-mode trajectory dumps through the hat-side layer
    for (std::int64_t want : sc.dump_trajectories) {
        for (size_t i = 0; i < modes.size(); ++i) {
            if (modes[i].index != want) continue;
            auto p = detail::mode_problem(spec, Side::hat, modes[i].lambda, i);
            auto phi = liouville_scale(spec.n, spec.omega_hat, data.modes[i],
                                       spec.tau_minus());
            ModeState st{spec.tau_minus(), phi.value, phi.deriv};
            st = evolve_regular(p, st, -spec.h, spec.regular_tol);
            std::vector<ModeState> traj;
            limit_W(p, detail::layer_A(spec, Side::hat), st, Side::hat, spec.layer, &traj);
            CsvWriter csv(res.out_dir / ("trajectory_mode" + std::to_string(want) + ".csv"),
                          {"tau", "re_phi", "im_phi", "re_chi", "im_chi", "re_psi", "im_psi",
                           "config_hash"});
            const RiccatiSolution* A = detail::layer_A(spec, Side::hat);
            for (const auto& s : traj) {
                double wgt = A ? std::exp(A->intA0(s.tau)) : 1.0;
                cplx psi = s.phi * wgt;
                csv.write_row({fmt_g17(s.tau), fmt_g17(s.phi.real()), fmt_g17(s.phi.imag()),
                               fmt_g17(s.chi.real()), fmt_g17(s.chi.imag()),
                               fmt_g17(psi.real()), fmt_g17(psi.imag()), hash});
            }
        }
    }

    CsvWriter summary(res.out_dir / "summary.csv",
                      {"name", "kind", "path", "modes", "norm_in", "norm_out", "delta",
                       "class_hat", "class_check", "config_hash"});
    summary.write_row({sc.name, "linear",
                       spec.path == TransmissionPath::simple ? "simple" : "riccati",
                       std::to_string(modes.size()), fmt_g17(res.norm_in),
                       fmt_g17(res.norm_out), res.has_delta ? fmt_g17(res.delta) : "",
                       to_string(sc.q_hat.cls), to_string(sc.q_check.cls), hash});
    write_manifest(sc, seed, opt, hash, res);

    auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    return res;
}

inline void write_manifest(const Scenario& sc, std::uint64_t seed, const RunOptions& opt,
                           const std::string& hash, const RunResult& res) {
    CsvWriter m(res.out_dir / "manifest.csv", {"key", "value"});
    m.write_row({"config_hash", hash});
    m.write_row({"name", sc.name});
    m.write_row({"version", "aeon 0.1.0"});
    m.write_row({"seed", std::to_string(seed)});
    m.write_row({"threads", std::to_string(opt.threads)});
    m.write_row({"omega_sign_hat", fmt_g17(sc.omega_sign_hat)});
    m.write_row({"bang_gauge", "int_0 weight exp(int_0^tau A)"});
    m.write_row({"layer_du", fmt_g17(sc.layer.du)});
    m.write_row({"layer_floor", fmt_g17(sc.layer.floor_w)});
    m.write_row({"regular_tol", fmt_g17(sc.regular_tol)});
}

inline void write_field_binary(const std::filesystem::path& path, const TorusGrid3& g,
                               const FieldState3& s, const std::string& hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot open output file: " + path.string());
    out << "aeon-field-v1\n";
    out << "N " << g.N << "\n";
    out << "periods " << fmt_g17(g.periods[0]) << " " << fmt_g17(g.periods[1]) << " "
        << fmt_g17(g.periods[2]) << "\n";
    out << "tau " << fmt_g17(s.tau) << "\n";
    out << "endianness little\n";
    out << "layout row-major interleaved-re-im float64 phi-then-chi\n";
    out << "config_hash " << hash << "\n";
    out << "DATA\n";
    auto dump = [&](const std::vector<cplx>& v) {
        for (const auto& z : v) {
            double re = z.real(), im = z.imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof re);
            out.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
    };
    dump(s.phi);
    dump(s.chi);
}

// read back a binary field snapshot (round-trip checks and downstream use)
inline FieldState3 read_field_binary(const std::filesystem::path& path, TorusGrid3* grid_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open field file: " + path.string());
    std::string line;
    int N = 0;
    std::array<double, 3> periods{};
    double tau = 0;
    std::getline(in, line);
    if (line != "aeon-field-v1") throw validation_error("bad field file magic");
    while (std::getline(in, line) && line != "DATA") {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "N") ss >> N;
        else if (key == "periods") ss >> periods[0] >> periods[1] >> periods[2];
        else if (key == "tau") ss >> tau;
    }
    TorusGrid3 g(N, periods);
    if (grid_out) *grid_out = g;
    FieldState3 s;
    s.tau = tau;
    s.phi.resize(g.size());
    s.chi.resize(g.size());
    auto slurp = [&](std::vector<cplx>& v) {
        for (auto& z : v) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), sizeof re);
            in.read(reinterpret_cast<char*>(&im), sizeof im);
            z = cplx(re, im);
        }
    };
    slurp(s.phi);
    slurp(s.chi);
    if (!in) throw validation_error("truncated field file: " + path.string());
    return s;
}

// ---------------------------------------------------------------------------
// convergence ladders
// ---------------------------------------------------------------------------
struct LadderRow {
    double level = 0.0;
    double error = 0.0;
};

struct ConvergenceReport {
    std::string ladder;
    std::vector<LadderRow> rows;
    double observed_order = 0.0;  // log2(err ratio) between the last two rows
};

inline ConvergenceReport convergence_study(const Scenario& sc, const std::string& ladder,
                                           const RunOptions& opt = {}) {
    ConvergenceReport rep;
    rep.ladder = ladder;
    if (ladder == "mesh") {
        // limit_W accuracy on the hat-side singular layer vs a fine reference
        auto A = picard_construct(sc.q_hat, sc.epsilon);
        ModeProblem p;
        p.lambda = 1.0;
        p.rho = curvature_potential(sc.spectrum);
        p.q = sc.q_hat.q;
        double h = sc.h > 0 ? std::min(sc.h, A.h) : std::min(0.1, A.h);
        ModeState edge{-h, cplx(0.8, -0.3), cplx(0.2, 0.5)};
        LayerOptions ref_opt;
        ref_opt.du = 0.005;
        ref_opt.tol = 1e-13;
        const RiccatiSolution* Ap =
            sc.q_hat.cls == IntegrabilityClass::L1 ? nullptr : &A;
        auto ref = limit_W(p, Ap, edge, Side::hat, ref_opt);
        for (double du : {0.08, 0.04, 0.02, 0.01}) {
            LayerOptions o;
            o.du = du;
            o.tol = 1e-12;
            auto b = limit_W(p, Ap, edge, Side::hat, o);
            double err = std::abs(b.psi0 - ref.psi0) + std::abs(b.psi1 - ref.psi1);
            rep.rows.push_back({du, err});
        }
    } else if (ladder == "series") {
        // constant extraction error against a high-order reference; the
        // series converge factorially, so the probe uses a stiff c^2 and
        // samples near the radius guard where low orders are measurable
        double c2 = std::max(sc.q_hat_is_fuchs ? sc.c2_hat : 1.0, 4.0);
        FuchsProblem ref;
        ref.lambda = 6.0;
        ref.c2 = c2;
        ref.side = Side::check;
        ref.truncation = 80;
        auto rs = h2_series(ref);
        cplx C1(0.7, -0.1), C2(-0.4, 0.3);
        std::vector<std::pair<double, SolutionValue>> samples;
        for (int k = 0; k < 10; ++k) {
            double tau = 0.45 * std::pow(0.8, k);
            samples.push_back({tau, eval_solution(ref, rs, C1, C2, tau)});
        }
        for (int N : {10, 20, 40}) {
            FuchsProblem p = ref;
            p.truncation = N;
            auto fit = extract_constants(p, h2_series(p), samples);
            double err = std::abs(fit.C1 - C1) + std::abs(fit.C2 - C2);
            rep.rows.push_back({double(N), err});
        }
    } else if (ladder == "lambda") {
        // exact trigonometric cases: flat (already exact) across the ladder
        for (double lam : {0.0, 1.0, 4.0, 9.0}) {
            ModeProblem p;
            p.lambda = lam;
            double om = std::sqrt(lam);
            ModeState s{0.1, cplx(om == 0 ? 1.0 : std::cos(om * 0.1)),
                        cplx(om == 0 ? 0.5 : -om * std::sin(om * 0.1))};
            auto out = evolve_regular(p, s, 1.1, 1e-12);
            cplx exact_phi = om == 0 ? cplx(1.0 + 0.5 * 1.0) : cplx(std::cos(om * 1.1));
            rep.rows.push_back({lam, std::abs(out.phi - exact_phi)});
        }
    } else {
        throw validation_error("unknown ladder `" + ladder + "` (mesh|series|lambda)");
    }
    if (rep.rows.size() >= 2) {
        double e1 = rep.rows[rep.rows.size() - 2].error;
        double e2 = rep.rows.back().error;
        if (e1 > 0 && e2 > 0) rep.observed_order = std::log2(e1 / e2);
    }
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    std::string hash = hash_hex(fnv1a_hash(sc.raw_text.empty() ? sc.name : sc.raw_text));
    CsvWriter csv(fs::path(opt.out_dir) / ("converge_" + ladder + ".csv"),
                  {"level", "error", "config_hash"});
    for (auto& r : rep.rows) csv.write_row({fmt_g17(r.level), fmt_g17(r.error), hash});
    return rep;
}

}  // namespace aeon

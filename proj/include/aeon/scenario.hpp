#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeon/frobenius.hpp"
#include "aeon/profiles.hpp"
#include "aeon/semilinear.hpp"
#include "aeon/spectrum.hpp"
#include "aeon/toml.hpp"
#include "aeon/transmission.hpp"

namespace aeon {

// A fully parsed scenario: spectrum, profiles per side, transmission path,
// data recipe, solver knobs. Everything needed to run the pipeline.
struct Scenario {
    std::string name;
    std::string raw_text;  // hashed into output metadata

    SpectrumSpec spectrum;
    double cutoff = 10.0;

    ConformalFactor omega_hat, omega_check;
    EffectiveMassSq q_hat, q_check;
    double omega_sign_hat = 1.0;

    // q-family bookkeeping for the closed-form Riccati option
    bool q_hat_is_fuchs = false, q_check_is_fuchs = false;
    double c2_hat = 0.0, c2_check = 0.0;
    std::vector<double> F_hat, F_check;

    std::string path_mode = "auto";      // simple | riccati | auto
    double h = 0.0;                      // 0 -> default rule
    std::string riccati_kind = "picard"; // picard | ivp | closed_form
    double epsilon = 1.0;
    double alpha_hat = 0.0, alpha_check = 0.0;
    double D1_hat = 0.0, D2_hat = 1.0, D1_check = 0.0, D2_check = 1.0;

    std::string data_kind = "random";    // random | modes
    std::uint64_t seed = 1;
    double scale = 1.0;
    std::vector<cplx> mode_values, mode_derivs;

    LayerOptions layer;
    double regular_tol = 1e-11;
    int series_N = 20;

    bool semilinear = false;
    int grid_N = 16;
    double kappa = 1.0;
    SemiLayerOptions semi_layer;
    std::vector<std::int64_t> dump_trajectories;  // mode indices
};

namespace detail {

inline ConformalFactor omega_from_toml(const Toml& side, Side s, const std::string& ctx,
                                       double* sign_out) {
    if (!side.has("omega")) {
        double edge = side.at("tau").as_double(ctx + ".tau");
        return constant_factor(s, edge, 1.0);
    }
    const Toml& om = side.at("omega");
    std::string family = om.get_or("family", std::string("constant"));
    if (family == "constant") {
        double edge = side.at("tau").as_double(ctx + ".tau");
        return constant_factor(s, edge, om.get_or("value", 1.0));
    }
    if (family == "de_sitter") {
        if (s != Side::hat)
            throw validation_error(ctx + ": de_sitter is a hat-side (expanding) family");
        double sign = 1.0;
        if (om.has("sign")) {
            std::string sg = om.at("sign").as_string(ctx + ".omega.sign");
            if (sg == "negative")
                sign = -1.0;
            else if (sg != "positive")
                throw validation_error(ctx + ".omega.sign must be positive|negative");
        }
        if (sign_out) *sign_out = sign;
        return de_sitter_hat(om.get_or("C", 1.0), om.get_or("H", 1.0),
                             om.get_or("t_start", 0.0), sign);
    }
    if (family == "power_law") {
        if (s != Side::check)
            throw validation_error(ctx + ": power_law is a check-side (bang) family");
        return power_law_check(om.get_or("C", 1.0), om.get_or("eta", 0.5),
                               om.get_or("t_end", 1.0));
    }
    if (family == "tabulated") {
        auto taus = om.at("taus").as_double_array(ctx + ".omega.taus");
        auto vals = om.at("values").as_double_array(ctx + ".omega.values");
        return tabulated_factor(s, std::move(taus), std::move(vals));
    }
    throw validation_error(ctx + ": unknown omega family `" + family + "`");
}

struct QBuild {
    EffectiveMassSq q;
    bool fuchs = false;
    double c2 = 0.0;
    std::vector<double> F;
};

inline QBuild q_from_toml(const Toml& side, Side s, const ConformalFactor& omega,
                          const std::string& ctx) {
    QBuild out;
    double edge = omega.tau_edge;
    if (side.has("q")) {
        const Toml& q = side.at("q");
        std::string family = q.get_or("family", std::string("zero"));
        if (family == "zero") {
            out.q = effective_mass_from_q(s, edge, [](double) { return 0.0; });
        } else if (family == "constant") {
            double v = q.get_or("value", 1.0);
            if (v < 0) throw validation_error(ctx + ".q.value must be >= 0");
            out.q = effective_mass_from_q(s, edge, [v](double) { return v; });
        } else if (family == "inverse_abs_tau") {
            double c2 = q.get_or("c2", 1.0);
            std::vector<double> F;
            if (q.has("F")) F = q.at("F").as_double_array(ctx + ".q.F");
            out.fuchs = true;
            out.c2 = c2;
            out.F = F;
            out.q = effective_mass_from_q(s, edge, [c2, F](double tau) {
                double acc = 0.0;
                for (size_t k = F.size(); k-- > 0;) acc = acc * tau + F[k];
                return c2 / std::abs(tau) + acc;
            });
        } else if (family == "power") {
            double c2 = q.get_or("c2", 1.0);
            double p = q.get_or("exponent", -0.5);
            out.q = effective_mass_from_q(
                s, edge, [c2, p](double tau) { return c2 * std::pow(std::abs(tau), p); });
        } else {
            throw validation_error(ctx + ": unknown q family `" + family + "`");
        }
        return out;
    }
    if (side.has("mass")) {
        const Toml& m = side.at("mass");
        std::string family = m.get_or("family", std::string("zero"));
        MassProfile mp;
        if (family == "zero") {
            mp.m = [](double) { return 0.0; };
        } else if (family == "constant") {
            double v = m.get_or("value", 1.0);
            mp.m = [v](double) { return v; };
        } else if (family == "power") {
            // m = m0 |tau|^p
            double m0 = m.get_or("m0", 1.0);
            double p = m.get_or("exponent", 0.5);
            mp.m = [m0, p](double tau) { return m0 * std::pow(std::abs(tau), p); };
        } else {
            throw validation_error(ctx + ": unknown mass family `" + family + "`");
        }
        auto e = EffectiveMassSq::from_parts(mp, omega);
        e.cls = classify_integrability(e).cls;
        out.q = e;
        return out;
    }
    out.q = effective_mass_from_q(s, edge, [](double) { return 0.0; });
    return out;
}

}  // namespace detail

inline Scenario scenario_from_toml(const Toml& root, std::string raw_text = "") {
    Scenario sc;
    sc.raw_text = std::move(raw_text);
    sc.name = root.get_or("name", std::string("unnamed"));

    const Toml& sp = root.at("spectrum");
    std::string kind = sp.get_or("kind", std::string("flat_torus"));
    int dim = int(sp.get_or("dimension", std::int64_t(3)));
    if (kind == "flat_torus") {
        std::vector<double> periods(dim, 2.0 * M_PI);
        if (sp.has("periods")) periods = sp.at("periods").as_double_array("spectrum.periods");
        sc.spectrum = SpectrumSpec::flat_torus(dim, periods);
    } else if (kind == "round_sphere") {
        sc.spectrum = SpectrumSpec::round_sphere(dim, sp.get_or("radius", 1.0));
    } else if (kind == "explicit") {
        auto eig = sp.at("eigenvalues").as_double_array("spectrum.eigenvalues");
        std::vector<std::pair<double, int>> pairs;
        if (sp.has("multiplicities")) {
            auto mult = sp.at("multiplicities").as_double_array("spectrum.multiplicities");
            if (mult.size() != eig.size())
                throw validation_error("spectrum: eigenvalues/multiplicities length mismatch");
            for (size_t i = 0; i < eig.size(); ++i)
                pairs.emplace_back(eig[i], int(mult[i]));
        } else {
            for (double v : eig) pairs.emplace_back(v, 1);
        }
        sc.spectrum = SpectrumSpec::explicit_list(dim, pairs, sp.get_or("curvature", 0.0));
    } else {
        throw validation_error("spectrum: unknown kind `" + kind + "`");
    }
    sc.cutoff = sp.get_or("cutoff", 10.0);

    const Toml& hat = root.at("hat");
    const Toml& check = root.at("check");
    sc.omega_hat = detail::omega_from_toml(hat, Side::hat, "hat", &sc.omega_sign_hat);
    sc.omega_check = detail::omega_from_toml(check, Side::check, "check", nullptr);
    if (hat.has("tau")) {
        double t = hat.at("tau").as_double("hat.tau");
        if (!(t < 0)) throw validation_error("hat.tau must be negative");
        sc.omega_hat.tau_edge = std::max(sc.omega_hat.tau_edge, t);
        if (sc.omega_hat.tau_edge != t && std::abs(sc.omega_hat.tau_edge - t) > 1e-12)
            throw validation_error("hat.tau outside the conformal-time window");
        sc.omega_hat.tau_edge = t;
    }
    if (check.has("tau")) {
        double t = check.at("tau").as_double("check.tau");
        if (!(t > 0)) throw validation_error("check.tau must be positive");
        if (t > sc.omega_check.tau_edge + 1e-12)
            throw validation_error("check.tau outside the conformal-time window");
        sc.omega_check.tau_edge = t;
    }

    auto qh = detail::q_from_toml(hat, Side::hat, sc.omega_hat, "hat");
    auto qc = detail::q_from_toml(check, Side::check, sc.omega_check, "check");
    sc.q_hat = qh.q;
    sc.q_check = qc.q;
    sc.q_hat_is_fuchs = qh.fuchs;
    sc.q_check_is_fuchs = qc.fuchs;
    sc.c2_hat = qh.c2;
    sc.c2_check = qc.c2;
    sc.F_hat = qh.F;
    sc.F_check = qc.F;

    if (root.has("transmission")) {
        const Toml& tr = root.at("transmission");
        sc.path_mode = tr.get_or("path", std::string("auto"));
        if (sc.path_mode != "auto" && sc.path_mode != "simple" && sc.path_mode != "riccati")
            throw validation_error("transmission.path must be simple|riccati|auto");
        sc.h = tr.get_or("h", 0.0);
        if (tr.has("riccati")) {
            const Toml& rc = tr.at("riccati");
            sc.riccati_kind = rc.get_or("kind", std::string("picard"));
            sc.epsilon = rc.get_or("epsilon", 1.0);
            sc.alpha_hat = rc.get_or("alpha_hat", 0.0);
            sc.alpha_check = rc.get_or("alpha_check", 0.0);
            sc.D1_hat = rc.get_or("D1_hat", 0.0);
            sc.D2_hat = rc.get_or("D2_hat", 1.0);
            sc.D1_check = rc.get_or("D1_check", 0.0);
            sc.D2_check = rc.get_or("D2_check", 1.0);
        }
    }

    if (root.has("data")) {
        const Toml& d = root.at("data");
        sc.data_kind = d.get_or("kind", std::string("random"));
        sc.seed = std::uint64_t(d.get_or("seed", std::int64_t(1)));
        sc.scale = d.get_or("scale", 1.0);
        if (sc.data_kind == "modes") {
            auto re = d.at("re_u").as_double_array("data.re_u");
            auto im = d.at("im_u").as_double_array("data.im_u");
            auto red = d.at("re_du").as_double_array("data.re_du");
            auto imd = d.at("im_du").as_double_array("data.im_du");
            if (re.size() != im.size() || re.size() != red.size() || re.size() != imd.size())
                throw validation_error("data: mode arrays must have equal length");
            for (size_t i = 0; i < re.size(); ++i) {
                sc.mode_values.emplace_back(re[i], im[i]);
                sc.mode_derivs.emplace_back(red[i], imd[i]);
            }
        } else if (sc.data_kind != "random") {
            throw validation_error("data.kind must be random|modes");
        }
    }

    if (root.has("solver")) {
        const Toml& s = root.at("solver");
        sc.layer.du = s.get_or("layer_du", sc.layer.du);
        sc.layer.floor_w = s.get_or("layer_floor", sc.layer.floor_w);
        sc.layer.tol = s.get_or("layer_tol", sc.layer.tol);
        sc.regular_tol = s.get_or("regular_tol", sc.regular_tol);
        sc.series_N = int(s.get_or("series_order", std::int64_t(sc.series_N)));
        sc.semi_layer.du = s.get_or("semi_layer_du", sc.semi_layer.du);
        sc.semi_layer.floor_w = s.get_or("semi_layer_floor", sc.semi_layer.floor_w);
        sc.semi_layer.tol = s.get_or("semi_layer_tol", sc.semi_layer.tol);
        sc.semi_layer.sobolev_K = s.get_or("sobolev_K", sc.semi_layer.sobolev_K);
    }

    if (root.has("semilinear")) {
        const Toml& sl = root.at("semilinear");
        sc.semilinear = sl.get_or("enabled", true);
        sc.grid_N = int(sl.get_or("N", std::int64_t(16)));
        sc.kappa = sl.get_or("kappa", 1.0);
        if (sc.semilinear && sc.spectrum.kind != SpectrumSpec::Kind::flat_torus)
            throw validation_error("semilinear runs need a flat_torus spectrum");
        if (sc.semilinear && sc.spectrum.dimension != 3)
            throw validation_error("semilinear runs need dimension 3");
    }

    if (root.has("output")) {
        const Toml& o = root.at("output");
        if (o.has("trajectories")) {
            for (auto& e : o.at("trajectories").as_array("output.trajectories"))
                sc.dump_trajectories.push_back(e.as_int("output.trajectories"));
        }
    }

    // referential consistency
    if (sc.data_kind == "modes") {
        auto modes = enumerate_modes(sc.spectrum, sc.cutoff);
        if (modes.size() != sc.mode_values.size())
            throw validation_error("data: " + std::to_string(sc.mode_values.size()) +
                                   " mode pairs given but the cutoff enumerates " +
                                   std::to_string(modes.size()));
    }
    return sc;
}

inline Scenario scenario_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    return scenario_from_toml(toml_parse(text), text);
}

}  // namespace aeon

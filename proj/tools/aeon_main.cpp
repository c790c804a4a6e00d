#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aeon/frobenius.hpp"
#include "aeon/runner.hpp"
#include "aeon/verify.hpp"

namespace {

std::string env_or(const char* name, std::string dflt) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : dflt;
}

void apply_env(aeon::RunOptions& opt) {
    opt.out_dir = env_or("AEON_OUT", opt.out_dir);
    if (const char* s = std::getenv("AEON_SEED")) opt.seed_override = std::strtoull(s, nullptr, 10);
    if (const char* t = std::getenv("AEON_THREADS")) opt.threads = std::atoi(t);
}

int cmd_run(const std::string& config, aeon::RunOptions opt) {
    auto sc = aeon::scenario_from_file(config);
    auto res = aeon::run_scenario(sc, opt);
    std::cout << "run " << sc.name << ": path="
              << (res.path == aeon::TransmissionPath::simple ? "simple" : "riccati")
              << " norm_in=" << res.norm_in << " norm_out=" << res.norm_out;
    if (res.has_delta) std::cout << " delta=" << res.delta;
    if (sc.semilinear) std::cout << " continuity=" << res.continuity;
    std::cout << " (" << res.seconds << " s) -> " << res.out_dir.string() << "\n";
    return 0;
}

int cmd_verify(const std::string& tag, const std::string& out_dir) {
    auto results = aeon::run_acceptance(tag);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.id << " [" << r.tag << "] "
                  << r.name << ": measured=" << r.measured << " threshold=" << r.threshold
                  << " (" << r.seconds << " s)";
        if (!r.note.empty()) std::cout << " note: " << r.note;
        std::cout << "\n";
        all = all && r.pass;
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        aeon::CsvWriter csv(std::filesystem::path(out_dir) / "verify.csv",
                            {"id", "tag", "name", "pass", "measured", "threshold", "seconds",
                             "note"});
        for (const auto& r : results)
            csv.write_row({std::to_string(r.id), r.tag, r.name, r.pass ? "1" : "0",
                           aeon::fmt_g17(r.measured), aeon::fmt_g17(r.threshold),
                           aeon::fmt_g17(r.seconds), r.note});
    }
    std::cout << (all ? "all criteria passed" : "SOME CRITERIA FAILED") << "\n";
    return all ? 0 : 1;
}

int cmd_converge(const std::string& config, const std::string& ladder, aeon::RunOptions opt) {
    auto sc = aeon::scenario_from_file(config);
    auto rep = aeon::convergence_study(sc, ladder, opt);
    std::cout << "ladder " << rep.ladder << ":\n";
    for (auto& r : rep.rows)
        std::cout << "  level=" << r.level << " error=" << r.error << "\n";
    std::cout << "observed order: " << rep.observed_order << "\n";
    return 0;
}

int cmd_oracle(const std::string& config, const std::string& out_dir) {
    auto root = aeon::toml_parse_file(config);
    const auto& f = root.at("frobenius");
    aeon::FuchsProblem hat, check;
    hat.side = aeon::Side::hat;
    check.side = aeon::Side::check;
    hat.lambda = check.lambda = f.get_or("lambda", 1.0);
    hat.c2 = check.c2 = f.get_or("c2", 1.0);
    if (f.has("F")) hat.F = check.F = f.at("F").as_double_array("frobenius.F");
    hat.truncation = check.truncation = int(f.get_or("N", std::int64_t(20)));
    double D1h = f.get_or("D1_hat", 0.0), D2h = f.get_or("D2_hat", 1.0);
    double D1c = f.get_or("D1_check", 0.0), D2c = f.get_or("D2_check", 1.0);

    auto hs = aeon::h2_series(hat);
    auto cs = aeon::h2_series(check);
    double delta = aeon::delta_from_series(hat, check, D1h, D2h, D1c, D2c);
    std::cout << "delta = " << delta << "\n";
    std::cout << "h2'(0) hat = " << hs.h2_prime0 << ", check = " << cs.h2_prime0 << "\n";

    std::filesystem::create_directories(out_dir);
    std::string hash = aeon::hash_hex(aeon::fnv1a_hash(config));
    aeon::CsvWriter csv(std::filesystem::path(out_dir) / "series.csv",
                        {"j", "a_hat", "b_hat", "a_check", "b_check", "config_hash"});
    for (size_t j = 0; j < hs.a.size(); ++j)
        csv.write_row({std::to_string(j), aeon::fmt_g17(hs.a[j]),
                       aeon::fmt_g17(j < hs.b.size() ? hs.b[j] : 0.0),
                       aeon::fmt_g17(cs.a[j]),
                       aeon::fmt_g17(j < cs.b.size() ? cs.b[j] : 0.0), hash});
    aeon::CsvWriter dcsv(std::filesystem::path(out_dir) / "delta.csv",
                         {"delta", "D1_hat", "D2_hat", "D1_check", "D2_check", "config_hash"});
    dcsv.write_row({aeon::fmt_g17(delta), aeon::fmt_g17(D1h), aeon::fmt_g17(D2h),
                    aeon::fmt_g17(D1c), aeon::fmt_g17(D2c), hash});
    std::cout << "series tables -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bang-surface field transmission toolkit"};
    app.require_subcommand(1);

    aeon::RunOptions opt;
    apply_env(opt);

    std::string config, ladder, tag;

    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config, "scenario TOML file")->required();
    run->add_option("--out", opt.out_dir, "output directory");
    run->add_option("--seed", opt.seed_override, "seed override");
    run->add_option("--threads", opt.threads, "mode-parallel workers");

    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--tag", tag, "run only this tag");
    std::string verify_out;
    verify->add_option("--out", verify_out, "also write verify.csv here");

    auto* converge = app.add_subcommand("converge", "convergence ladders");
    converge->add_option("config", config, "scenario TOML file")->required();
    converge->add_option("ladder", ladder, "mesh | series | lambda")->required();
    converge->add_option("--out", opt.out_dir, "output directory");

    auto* oracle = app.add_subcommand("oracle", "Frobenius series oracle tables");
    oracle->add_option("config", config, "frobenius TOML file")->required();
    oracle->add_option("--out", opt.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config, opt);
        if (verify->parsed()) return cmd_verify(tag, verify_out);
        if (converge->parsed()) return cmd_converge(config, ladder, opt);
        if (oracle->parsed()) return cmd_oracle(config, opt.out_dir);
    } catch (const aeon::validation_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

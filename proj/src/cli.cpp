#include "fvtaxis/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fvtaxis/config.hpp"
#include "fvtaxis/errors.hpp"
#include "fvtaxis/runner.hpp"
#include "fvtaxis/verification.hpp"

namespace fvtaxis {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

fs::path resolve_out(const std::string& flag) {
    if (!flag.empty()) return fs::path(flag);
    if (const char* env = std::getenv("FVTAXIS_OUT"); env != nullptr && *env != '\0')
        return fs::path(env);
    return fs::path("out");
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

nlohmann::json load_json(const fs::path& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error({what + ": cannot open " + path.string()});
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error({what + ": " + e.what()});
    }
}

int do_run(const std::string& cfg_path, const std::string& out_flag,
           bool snapshots_set, double snapshots) {
    SimConfig cfg = load_config(cfg_path);
    if (snapshots_set) cfg.snapshot_dt = snapshots;
    const fs::path outdir = resolve_out(out_flag);
    const RunManifest man = run(cfg, outdir);
    std::cout << "run ok: config " << man.config_hash << ", "
              << num(man.wall_seconds) << " s, artifacts in " << outdir.string()
              << "\n";
    return exit_code::ok;
}

int do_sweep(const std::string& base_path, const std::string& overrides_path,
             const std::string& out_flag, int workers, bool snapshots_set,
             double snapshots) {
    SimConfig base = load_config(base_path);
    if (snapshots_set) base.snapshot_dt = snapshots;
    const nlohmann::json doc = load_json(overrides_path, "overrides");
    if (!doc.is_array())
        throw validation_error(
            {"overrides: document must be a JSON array of partial configs"});
    std::vector<nlohmann::json> overrides(doc.begin(), doc.end());
    const fs::path outdir = resolve_out(out_flag);
    const auto rows = sweep(base, overrides, outdir, static_cast<std::size_t>(workers));
    std::size_t good = 0;
    for (const auto& row : rows)
        if (row.ok) ++good;
    std::cout << "sweep: " << good << "/" << rows.size()
              << " members ok, summary in " << outdir.string() << "\n";
    return exit_code::ok;
}

int do_eps_study(const std::string& base_path, const std::vector<double>& eps,
                 const std::string& out_flag, int workers) {
    const SimConfig base = load_config(base_path);
    const auto rows = eps_limit_study(base, eps, static_cast<std::size_t>(workers));
    const fs::path outdir = resolve_out(out_flag);
    fs::create_directories(outdir);
    std::string csv = "eps_hi,eps_lo,delta\n";
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& row : rows) {
        csv += num(row.eps_hi) + "," + num(row.eps_lo) + "," + num(row.delta) + "\n";
        jrows.push_back({{"eps_hi", row.eps_hi},
                         {"eps_lo", row.eps_lo},
                         {"delta", row.delta}});
        std::cout << "delta(" << num(row.eps_hi) << " -> " << num(row.eps_lo)
                  << ") = " << num(row.delta) << "\n";
    }
    write_text(outdir / "eps_study.csv", csv);
    write_text(outdir / "eps_study.json", jrows.dump(2) + "\n");
    return exit_code::ok;
}

int do_converge(const std::string& base_path, const std::string& mode, int levels,
                const std::string& out_flag, int workers) {
    const SimConfig base = load_config(base_path);
    const fs::path outdir = resolve_out(out_flag);
    fs::create_directories(outdir);
    auto emit = [&](const std::string& name, const ConvergenceResult& result) {
        std::string csv = "level,h,dt,error,order\n";
        nlohmann::json jrows = nlohmann::json::array();
        for (const auto& row : result.rows) {
            csv += std::to_string(row.level) + "," + num(row.h) + "," +
                   num(row.dt) + "," + num(row.error) + "," + num(row.order) + "\n";
            jrows.push_back({{"level", row.level},
                             {"h", row.h},
                             {"dt", row.dt},
                             {"error", row.error},
                             {"order", row.order}});
        }
        nlohmann::json doc = {{"rows", jrows},
                              {"order_estimate", result.order_estimate},
                              {"conclusive", result.conclusive}};
        write_text(outdir / ("converge_" + name + ".csv"), csv);
        write_text(outdir / ("converge_" + name + ".json"), doc.dump(2) + "\n");
        std::cout << name << " order estimate " << num(result.order_estimate)
                  << (result.conclusive ? "" : " (inconclusive)") << "\n";
    };
    const std::size_t w = static_cast<std::size_t>(workers);
    if (mode == "spatial" || mode == "both")
        emit("spatial", self_convergence_spatial(base, static_cast<std::size_t>(levels), w));
    if (mode == "temporal" || mode == "both")
        emit("temporal", self_convergence_temporal(base, static_cast<std::size_t>(levels), w));
    return exit_code::ok;
}

int do_check(const std::string& cfg_path) {
    const nlohmann::json doc = load_json(cfg_path, "config");
    const SimConfig cfg = parse_config(doc);
    std::cout << "ok " << config_hash(emit_config(cfg)) << "\n";
    return exit_code::ok;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"finite-volume lab for the degenerate chemotaxis-consumption system"};
    app.name("fvtaxis");
    app.require_subcommand(1);

    std::string out_flag;
    int workers = 1;
    double snapshots = 0.0;
    std::string cfg_path;
    std::string base_path;
    std::string overrides_path;
    std::vector<double> eps_list{1e-1, 1e-2, 1e-3, 1e-4};
    int levels = 3;
    std::string mode = "both";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_flag,
                        "output directory (default $FVTAXIS_OUT, then ./out)");
        cmd->add_option("--workers", workers, "worker threads")
            ->check(CLI::PositiveNumber);
    };

    CLI::App* c_run = app.add_subcommand("run", "execute one configured run");
    c_run->add_option("config", cfg_path, "config JSON file")->required();
    add_common(c_run);
    CLI::Option* run_snap =
        c_run->add_option("--snapshots", snapshots,
                          "snapshot cadence override (<0 disables, 0 follows dt_out)");

    CLI::App* c_sweep =
        app.add_subcommand("sweep", "run a base config against an override list");
    c_sweep->add_option("base", base_path, "base config JSON file")->required();
    c_sweep->add_option("overrides", overrides_path, "JSON array of partial configs")
        ->required();
    add_common(c_sweep);
    CLI::Option* sweep_snap =
        c_sweep->add_option("--snapshots", snapshots,
                            "snapshot cadence override (<0 disables, 0 follows dt_out)");

    CLI::App* c_eps = app.add_subcommand("eps-study", "regularization gap study");
    c_eps->add_option("base", base_path, "base config JSON file")->required();
    c_eps->add_option("--eps", eps_list, "strictly decreasing eps values")
        ->delimiter(',');
    add_common(c_eps);

    CLI::App* c_conv = app.add_subcommand("converge", "self-convergence studies");
    c_conv->add_option("base", base_path, "base config JSON file")->required();
    c_conv->add_option("--levels", levels, "refinement levels")
        ->check(CLI::Range(2, 8));
    c_conv->add_option("--mode", mode, "spatial, temporal, or both")
        ->check(CLI::IsMember({"spatial", "temporal", "both"}));
    add_common(c_conv);

    CLI::App* c_check =
        app.add_subcommand("check", "validate a config and print its hash");
    c_check->add_option("config", cfg_path, "config JSON file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::invalid_config;
    }

    try {
        if (app.got_subcommand(c_run))
            return do_run(cfg_path, out_flag, run_snap->count() > 0, snapshots);
        if (app.got_subcommand(c_sweep))
            return do_sweep(base_path, overrides_path, out_flag, workers,
                            sweep_snap->count() > 0, snapshots);
        if (app.got_subcommand(c_eps))
            return do_eps_study(base_path, eps_list, out_flag, workers);
        if (app.got_subcommand(c_conv))
            return do_converge(base_path, mode, levels, out_flag, workers);
        if (app.got_subcommand(c_check)) return do_check(cfg_path);
    } catch (const validation_error& e) {
        std::cerr << e.what() << "\n";
        return exit_code::invalid_config;
    } catch (const hypothesis_violation& e) {
        std::cerr << e.what() << "\n";
        return exit_code::invalid_config;
    } catch (const solver_failure& e) {
        std::cerr << e.what() << "\n";
        return exit_code::nonconvergence;
    } catch (const invariant_violation& e) {
        std::cerr << e.what() << "\n";
        return exit_code::invariant;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return exit_code::failure;
    }
    return exit_code::failure;
}

}  // namespace fvtaxis

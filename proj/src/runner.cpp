#include "fvtaxis/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "fvtaxis/errors.hpp"
#include "fvtaxis/snapshot.hpp"
#include "fvtaxis/stepper.hpp"

namespace fvtaxis {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::string sanitized(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex mtx;
    int next = 0;
    std::vector<std::thread> pool;
    const int w = std::min(workers, count);
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= count) return;
                    i = next++;
                }
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

struct RunOutcome {
    RunManifest manifest;
    BoundednessVerdict verdict;
    long steps = 0;
    long rejections = 0;
    double dt_min_seen = 0.0;
    double dt_mean = 0.0;
    std::exception_ptr failure;
};

/// The full run pipeline with every failure captured instead of thrown, so
/// callers (single run, sweep member) decide how to surface it. Artifacts are
/// flushed before return no matter what; manifest.json is always last.
RunOutcome run_impl(const SimConfig& cfg, const fs::path& outdir) {
    RunOutcome out;
    RunManifest& man = out.manifest;
    const auto wall0 = std::chrono::steady_clock::now();
    man.started_at = iso_utc(std::chrono::system_clock::now());

    const nlohmann::json doc = emit_config(cfg);
    man.config_hash = config_hash(doc);

    std::optional<MonitorAccumulator> acc;
    std::ofstream steps_csv;
    std::vector<std::string> violations;
    MotilityBounds mb{};
    double mass0 = 0.0;
    double max_rel_drift = 0.0;
    bool mass_ok = true;
    bool maxp_ok = true;
    bool kappa_ok = true;
    bool energy_ok = true;
    bool finished = false;
    double sup_v_initial = 0.0;
    double min_v_seen = 0.0;
    double energy_lhs = 0.0;
    double energy_rhs = 0.0;
    double dt_seen = std::numeric_limits<double>::infinity();
    double dt_sum = 0.0;

    try {
        fs::create_directories(outdir);
        write_text(outdir / "config.json", doc.dump(2) + "\n");
        man.artifacts.push_back("config.json");

        auto [u0, v0] = initial_fields(cfg);
        const ModelParams p = cfg.params();
        const Motility phi = cfg.motility();
        const double vbar = std::max(0.0, field_max(v0));
        mb = compute_bounds(phi, vbar);
        acc.emplace(p, phi, mb, cfg.monitor.materialize(p));

        mass0 = integral(u0);
        const double v0_l2 = lp_norm(v0, 2.0);
        sup_v_initial = field_max(v0);
        min_v_seen = field_min(v0);
        double prev_sup_v = sup_v_initial;

        const bool snaps_on = cfg.snapshot_dt >= 0.0;
        long stride = 1;
        if (cfg.snapshot_dt > 0.0)
            stride = std::max<long>(1, std::lround(cfg.snapshot_dt / cfg.dt_out));
        if (snaps_on) fs::create_directories(outdir / "snapshots");

        steps_csv.open(outdir / "steps.csv", std::ios::binary);
        steps_csv << "t,dt,cg_iterations,rejections\n";
        man.artifacts.push_back("steps.csv");

        long event = 0;
        long last_written = -1;
        auto write_fields = [&](const State& s, long ev) {
            char name[32];
            std::snprintf(name, sizeof name, "u_%04ld.dat", ev);
            write_snapshot(outdir / "snapshots" / name, s.u);
            man.artifacts.push_back(std::string("snapshots/") + name);
            std::snprintf(name, sizeof name, "v_%04ld.dat", ev);
            write_snapshot(outdir / "snapshots" / name, s.v);
            man.artifacts.push_back(std::string("snapshots/") + name);
            last_written = ev;
        };

        StepObserver on_step = [&](const State& before, const State& after,
                                   const StepRecord& rec) {
            acc->on_step(before, after, rec.dt);
            steps_csv << num(rec.t) << ',' << num(rec.dt) << ','
                      << rec.cg_iterations << ',' << rec.rejections << '\n';
            ++out.steps;
            out.rejections += rec.rejections;
            dt_sum += rec.dt;
            dt_seen = std::min(dt_seen, rec.dt);
            const double sup = field_max(after.v);
            const double inf = field_min(after.v);
            if (maxp_ok && (sup > prev_sup_v || inf < 0.0)) {
                maxp_ok = false;
                violations.push_back("max principle violated at t=" + num(rec.t));
            }
            prev_sup_v = sup;
            min_v_seen = std::min(min_v_seen, inf);
        };
        SnapshotObserver on_snap = [&](const State& s) {
            const MonitorReport row = acc->observe(s);
            const double drift = std::abs(row.mass_u - mass0);
            const double rel = mass0 != 0.0 ? drift / std::abs(mass0) : drift;
            max_rel_drift = std::max(max_rel_drift, rel);
            if (mass_ok && rel > 1e-12) {
                mass_ok = false;
                violations.push_back("mass drift " + num(rel) + " at t=" + num(row.t));
            }
            if (kappa_ok && !row.kappa_ok) {
                kappa_ok = false;
                violations.push_back("motility bounds violated at t=" + num(row.t));
            }
            if (snaps_on && event % stride == 0) write_fields(s, event);
            ++event;
        };

        const State fin =
            advance(State{std::move(u0), std::move(v0), 0.0}, p, phi, cfg.control,
                    cfg.t_end, cfg.dt_out, on_step, on_snap);
        if (snaps_on && last_written != event - 1) write_fields(fin, event - 1);

        const double vT = lp_norm(fin.v, 2.0);
        energy_lhs = 0.5 * vT * vT + acc->cum_grad_v();
        energy_rhs = 0.5 * v0_l2 * v0_l2 + 1e-10;
        energy_ok = energy_lhs <= energy_rhs;
        if (!energy_ok)
            violations.push_back("energy inequality violated: lhs=" + num(energy_lhs) +
                                 " rhs=" + num(energy_rhs));
        finished = true;
    } catch (...) {
        out.failure = std::current_exception();
    }

    if (steps_csv.is_open()) steps_csv.close();
    out.dt_min_seen = out.steps > 0 ? dt_seen : 0.0;
    out.dt_mean = out.steps > 0 ? dt_sum / static_cast<double>(out.steps) : 0.0;

    if (acc && !acc->reports().empty()) {
        {
            std::ofstream mon(outdir / "monitors.csv", std::ios::binary);
            write_monitor_csv(mon, acc->reports(), acc->config());
        }
        man.artifacts.push_back("monitors.csv");

        out.verdict = boundedness_verdict(acc->reports());
        const nlohmann::json vd = {
            {"boundedness",
             {{"sup_all", out.verdict.sup_all},
              {"sup_early", out.verdict.sup_early},
              {"sup_late", out.verdict.sup_late},
              {"growth_ratio", out.verdict.growth_ratio},
              {"bounded", out.verdict.bounded}}},
            {"mass",
             {{"initial", mass0}, {"max_rel_drift", max_rel_drift}, {"ok", mass_ok}}},
            {"max_principle",
             {{"ok", maxp_ok},
              {"sup_v_initial", sup_v_initial},
              {"min_v_seen", min_v_seen}}},
            {"energy",
             {{"lhs", energy_lhs},
              {"rhs", energy_rhs},
              {"ok", energy_ok},
              {"evaluated", finished}}},
            {"kappa",
             {{"ok", kappa_ok},
              {"kappa1", mb.kappa1},
              {"kappa2", mb.kappa2},
              {"kappa3", mb.kappa3},
              {"vbar", mb.vbar}}},
        };
        write_text(outdir / "verdict.json", vd.dump(2) + "\n");
        man.artifacts.push_back("verdict.json");
    }

    if (out.failure) {
        try {
            std::rethrow_exception(out.failure);
        } catch (const validation_error& e) {
            man.exit_status = exit_code::invalid_config;
            man.error = e.what();
        } catch (const hypothesis_violation& e) {
            man.exit_status = exit_code::invalid_config;
            man.error = e.what();
        } catch (const solver_failure& e) {
            man.exit_status = exit_code::nonconvergence;
            man.error = e.what();
        } catch (const invariant_violation& e) {
            man.exit_status = exit_code::invariant;
            man.error = e.what();
        } catch (const std::exception& e) {
            man.exit_status = 1;
            man.error = e.what();
        }
    } else if (!violations.empty()) {
        man.exit_status = exit_code::invariant;
        std::string joined;
        for (const auto& v : violations) {
            if (!joined.empty()) joined += "; ";
            joined += v;
        }
        man.error = joined;
        out.failure = std::make_exception_ptr(invariant_violation(joined));
    }

    man.finished_at = iso_utc(std::chrono::system_clock::now());
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
            .count();
    man.artifacts.push_back("manifest.json");
    try {
        write_text(outdir / "manifest.json", man.to_json().dump(2) + "\n");
    } catch (...) {
        if (!out.failure) out.failure = std::current_exception();
    }
    return out;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
    return {{"config_hash", config_hash}, {"started_at", started_at},
            {"finished_at", finished_at}, {"wall_seconds", wall_seconds},
            {"exit_status", exit_status}, {"artifacts", artifacts},
            {"error", error}};
}

RunManifest run(const SimConfig& cfg, const fs::path& outdir) {
    RunOutcome out = run_impl(cfg, outdir);
    if (out.failure) std::rethrow_exception(out.failure);
    return out.manifest;
}

std::vector<SweepRow> sweep(const SimConfig& base,
                            std::span<const nlohmann::json> overrides,
                            const fs::path& outdir, int workers) {
    fs::create_directories(outdir);
    // the config echo materializes m-dependent monitor defaults; members that
    // override m must re-derive those, so defaulted entries are stripped from
    // the merge base
    nlohmann::json base_doc = emit_config(base);
    if (auto it = base_doc.find("monitor"); it != base_doc.end()) {
        if (base.monitor.p_list.empty()) it->erase("p_list");
        if (base.monitor.q == 0.0) it->erase("q");
        if (base.monitor.alpha_list.empty()) it->erase("alpha_list");
        if (it->empty()) base_doc.erase("monitor");
    }
    std::vector<SweepRow> rows(overrides.size());

    parallel_for(static_cast<int>(overrides.size()), workers, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        SweepRow& row = rows[i];
        row.index = i;
        row.overrides = overrides[i];
        char dirname[32];
        std::snprintf(dirname, sizeof dirname, "member_%03zu", i);
        const fs::path mdir = outdir / dirname;

        const nlohmann::json doc = merge_config(base_doc, overrides[i]);
        row.m = doc.contains("m") && doc["m"].is_number() ? doc["m"].get<double>()
                                                          : base.m;
        row.regime = row.m > 0.5 * base.dim;
        try {
            const SimConfig cfg = parse_config(doc);
            RunOutcome out = run_impl(cfg, mdir);
            row.verdict = out.verdict;
            row.steps = out.steps;
            row.rejections = out.rejections;
            row.dt_min_seen = out.dt_min_seen;
            row.dt_mean = out.dt_mean;
            if (out.failure) std::rethrow_exception(out.failure);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            if (!fs::exists(mdir / "manifest.json")) {
                RunManifest man;
                man.config_hash = config_hash(doc);
                man.started_at = man.finished_at =
                    iso_utc(std::chrono::system_clock::now());
                man.exit_status = exit_code::invalid_config;
                man.error = row.error;
                man.artifacts = {"manifest.json"};
                fs::create_directories(mdir);
                write_text(mdir / "manifest.json", man.to_json().dump(2) + "\n");
            }
        }
    });

    std::ofstream csv(outdir / "summary.csv", std::ios::binary);
    csv << "index,m,regime,ok,bounded,sup_all,growth_ratio,dt_min,dt_mean,steps,"
           "rejections,error\n";
    nlohmann::json sj = nlohmann::json::array();
    for (const SweepRow& r : rows) {
        csv << r.index << ',' << num(r.m) << ',' << (r.regime ? 1 : 0) << ','
            << (r.ok ? 1 : 0) << ',' << (r.verdict.bounded ? 1 : 0) << ','
            << num(r.verdict.sup_all) << ',' << num(r.verdict.growth_ratio) << ','
            << num(r.dt_min_seen) << ',' << num(r.dt_mean) << ',' << r.steps << ','
            << r.rejections << ',' << sanitized(r.error) << '\n';
        sj.push_back({{"index", r.index},
                      {"m", r.m},
                      {"regime", r.regime},
                      {"ok", r.ok},
                      {"bounded", r.verdict.bounded},
                      {"sup_all", r.verdict.sup_all},
                      {"sup_early", r.verdict.sup_early},
                      {"sup_late", r.verdict.sup_late},
                      {"growth_ratio", r.verdict.growth_ratio},
                      {"dt_min", r.dt_min_seen},
                      {"dt_mean", r.dt_mean},
                      {"steps", r.steps},
                      {"rejections", r.rejections},
                      {"error", r.error},
                      {"overrides", r.overrides}});
    }
    csv.close();
    write_text(outdir / "summary.json", sj.dump(2) + "\n");
    return rows;
}

std::vector<SweepRow> sweep_m(const SimConfig& base, std::span<const double> m_list,
                              const std::filesystem::path& outdir, int workers) {
    std::vector<nlohmann::json> overrides;
    overrides.reserve(m_list.size());
    for (double m : m_list) overrides.push_back(nlohmann::json{{"m", m}});
    return sweep(base, overrides, outdir, workers);
}

}  // namespace fvtaxis

#ifndef FVTAXIS_RUNNER_HPP
#define FVTAXIS_RUNNER_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvtaxis/config.hpp"
#include "fvtaxis/monitors.hpp"

namespace fvtaxis {

/// Provenance record written next to every run's artifacts.
struct RunManifest {
    std::string config_hash;
    std::string started_at;   ///< ISO 8601 UTC
    std::string finished_at;
    double wall_seconds = 0.0;
    int exit_status = 0;
    std::vector<std::string> artifacts;  ///< paths relative to the run directory
    std::string error;

    nlohmann::json to_json() const;
};

/// Executes one configured run into outdir: normalized config echo, monitor
/// CSV, step diagnostics CSV, field snapshots at the snapshot cadence,
/// boundedness verdict, and the manifest. Invariants (mass conservation,
/// maximum principle, energy inequality, kappa bounds) are audited at every
/// snapshot; a violation is recorded in the manifest and rethrown as
/// invariant_violation after all artifacts are flushed. Stepper
/// nonconvergence propagates the same way with exit status 3.
RunManifest run(const SimConfig& cfg, const std::filesystem::path& outdir);

/// One sweep member's outcome.
struct SweepRow {
    std::size_t index = 0;
    nlohmann::json overrides;
    double m = 0.0;
    bool regime = false;       ///< m > dim/2
    bool ok = false;
    std::string error;
    BoundednessVerdict verdict;
    double dt_min_seen = 0.0;
    double dt_mean = 0.0;
    long steps = 0;
    long rejections = 0;
};

/// Runs base + override members in a share-nothing worker pool, one output
/// directory per member, and writes summary.csv / summary.json. A failing
/// member is recorded and does not stop its siblings.
std::vector<SweepRow> sweep(const SimConfig& base,
                            std::span<const nlohmann::json> overrides,
                            const std::filesystem::path& outdir, int workers = 1);

/// Convenience m-sweep over the base config.
std::vector<SweepRow> sweep_m(const SimConfig& base, std::span<const double> m_list,
                              const std::filesystem::path& outdir, int workers = 1);

}  // namespace fvtaxis

#endif

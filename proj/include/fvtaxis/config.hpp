#ifndef FVTAXIS_CONFIG_HPP
#define FVTAXIS_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fvtaxis/grid.hpp"
#include "fvtaxis/monitors.hpp"
#include "fvtaxis/motility.hpp"
#include "fvtaxis/stepper.hpp"

namespace fvtaxis {

/// Initial-data recipe for one field.
struct ProfileSpec {
    std::string kind = "constant";  ///< constant | gaussian | checkerboard | file
    double value = 0.0;             ///< constant
    std::array<double, 3> center{0.5, 0.5, 0.5};
    double width = 0.1;             ///< gaussian: amplitude * exp(-|x-c|^2 / width^2)
    double amplitude = 1.0;
    double lo = 0.0;                ///< checkerboard
    double hi = 1.0;
    int block = 1;                  ///< checkerboard block edge, in cells
    std::string path;               ///< file: snapshot to load
};

/// Monitor overrides; empty lists mean "use the defaults for (m, dim)".
struct MonitorSpec {
    std::vector<double> p_list;
    double q = 0.0;  ///< 0 means dim + 1
    std::vector<double> alpha_list;

    MonitorConfig materialize(const ModelParams& p) const;
};

/// Complete run description. parse_config validates everything and
/// materializes defaults; emit_config writes the normalized document back.
struct SimConfig {
    int dim = 1;
    std::array<int, 3> n{64, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};
    double m = 2.0;
    double eps = 1e-3;
    std::string motility_name = "exp_decay";
    std::vector<double> motility_params{1.0};
    ProfileSpec u0;
    ProfileSpec v0;
    double t_end = 1.0;
    double dt_out = 0.05;
    double snapshot_dt = 0.0;  ///< field-file cadence; 0 follows dt_out, <0 disables
    StepControl control;
    MonitorSpec monitor;
    std::uint64_t seed = 0;

    Grid grid() const;
    ModelParams params() const { return ModelParams{m, eps, dim}; }
    Motility motility() const;
};

/// Parses and validates; throws validation_error carrying every issue found.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig load_config(const std::filesystem::path& path);

/// Normalized echo with all defaults materialized (sorted keys).
nlohmann::json emit_config(const SimConfig& cfg);

/// FNV-1a hash of the canonical (sorted-key) serialization, as hex. Stable
/// under key reordering of the input document.
std::string config_hash(const nlohmann::json& doc);

/// Builds (u0, v0) on cfg.grid(). Throws validation_error if a profile
/// produces negative or non-finite data or a file snapshot mismatches the grid.
std::pair<ScalarField, ScalarField> initial_fields(const SimConfig& cfg);

/// Shallow top-level merge of a partial document onto a base document.
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& override_doc);

}  // namespace fvtaxis

#endif

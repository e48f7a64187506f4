#include "fvtaxis/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "fvtaxis/errors.hpp"
#include "fvtaxis/snapshot.hpp"

namespace fvtaxis {

namespace {

using nlohmann::json;

class Issues {
public:
    void add(std::string msg) { list_.push_back(std::move(msg)); }
    bool empty() const { return list_.empty(); }
    std::vector<std::string> take() { return std::move(list_); }

private:
    std::vector<std::string> list_;
};

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed, Issues& issues) {
    for (const auto& [k, v] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (k == a) { known = true; break; }
        if (!known) issues.add(where + ": unknown key '" + k + "'");
    }
}

bool read_number(const json& obj, const char* key, double& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) return false;
    out = it->get<double>();
    return true;
}

/// Reads obj[key] into out if present; records an issue when the value is
/// missing the predicate. Returns true when the key was present and valid.
template <class Pred>
bool take_number(const json& obj, const std::string& where, const char* key,
                 double& out, Pred&& ok, const char* what, Issues& issues) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    double x = 0.0;
    if (!it->is_number() || !(read_number(obj, key, x), ok(x))) {
        issues.add(where.empty() ? std::string(key) + " " + what
                                 : where + "." + key + " " + what);
        return false;
    }
    out = x;
    return true;
}

bool take_int(const json& obj, const std::string& where, const char* key, int& out,
              int lo, Issues& issues) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number_integer() || it->get<long long>() < lo) {
        issues.add((where.empty() ? std::string(key) : where + "." + key) +
                   " must be an integer >= " + std::to_string(lo));
        return false;
    }
    out = static_cast<int>(it->get<long long>());
    return true;
}

std::vector<double> read_list(const json& obj, const std::string& where,
                              const char* key, double lo, Issues& issues) {
    std::vector<double> out;
    auto it = obj.find(key);
    if (it == obj.end()) return out;
    if (!it->is_array()) {
        issues.add(where + "." + key + " must be an array of numbers");
        return out;
    }
    for (const auto& e : *it) {
        if (!e.is_number() || !std::isfinite(e.get<double>()) || !(e.get<double>() >= lo)) {
            issues.add(where + "." + key + " entries must be finite numbers >= " +
                       std::to_string(lo));
            out.clear();
            return out;
        }
        out.push_back(e.get<double>());
    }
    return out;
}

ProfileSpec parse_profile(const json& doc, const std::string& where, int dim,
                          Issues& issues) {
    ProfileSpec p;
    if (!doc.is_object()) {
        issues.add(where + " must be an object");
        return p;
    }
    std::string kind = p.kind;
    if (auto it = doc.find("kind"); it != doc.end()) {
        if (!it->is_string()) {
            issues.add(where + ".kind must be a string");
            return p;
        }
        kind = it->get<std::string>();
    }

    const std::string scope = where + " (kind '" + kind + "')";
    if (kind == "constant") {
        check_keys(doc, scope, {"kind", "value"}, issues);
        take_number(doc, where, "value", p.value,
                    [](double x) { return std::isfinite(x) && x >= 0.0; },
                    "must be a finite number >= 0", issues);
    } else if (kind == "gaussian") {
        check_keys(doc, scope, {"kind", "center", "width", "amplitude"}, issues);
        if (auto it = doc.find("center"); it != doc.end()) {
            bool ok = it->is_array() && static_cast<int>(it->size()) == dim;
            if (ok)
                for (const auto& e : *it)
                    ok = ok && e.is_number() && std::isfinite(e.get<double>());
            if (!ok) {
                issues.add(where + ".center must be an array of " + std::to_string(dim) +
                           " finite numbers");
            } else {
                for (int a = 0; a < dim; ++a) p.center[a] = (*it)[a].get<double>();
            }
        }
        take_number(doc, where, "width", p.width,
                    [](double x) { return std::isfinite(x) && x > 0.0; },
                    "must be a finite number > 0", issues);
        take_number(doc, where, "amplitude", p.amplitude,
                    [](double x) { return std::isfinite(x) && x >= 0.0; },
                    "must be a finite number >= 0", issues);
    } else if (kind == "checkerboard") {
        check_keys(doc, scope, {"kind", "lo", "hi", "block"}, issues);
        take_number(doc, where, "lo", p.lo,
                    [](double x) { return std::isfinite(x) && x >= 0.0; },
                    "must be a finite number >= 0", issues);
        take_number(doc, where, "hi", p.hi,
                    [](double x) { return std::isfinite(x) && x >= 0.0; },
                    "must be a finite number >= 0", issues);
        if (p.hi < p.lo) issues.add(where + ".hi must be >= " + where + ".lo");
        take_int(doc, where, "block", p.block, 1, issues);
    } else if (kind == "file") {
        check_keys(doc, scope, {"kind", "path"}, issues);
        if (auto it = doc.find("path"); it != doc.end() && it->is_string())
            p.path = it->get<std::string>();
        if (p.path.empty()) issues.add(where + ".path must be a non-empty string");
    } else {
        issues.add(where + ".kind '" + kind +
                   "' is not one of constant, gaussian, checkerboard, file");
        return p;
    }
    p.kind = kind;
    return p;
}

json emit_profile(const ProfileSpec& p, int dim) {
    json j;
    j["kind"] = p.kind;
    if (p.kind == "constant") {
        j["value"] = p.value;
    } else if (p.kind == "gaussian") {
        json c = json::array();
        for (int a = 0; a < dim; ++a) c.push_back(p.center[a]);
        j["center"] = c;
        j["width"] = p.width;
        j["amplitude"] = p.amplitude;
    } else if (p.kind == "checkerboard") {
        j["lo"] = p.lo;
        j["hi"] = p.hi;
        j["block"] = p.block;
    } else if (p.kind == "file") {
        j["path"] = p.path;
    }
    return j;
}

void fill_profile(const ProfileSpec& p, const Grid& g, const std::string& where,
                  ScalarField& out, Issues& issues) {
    if (p.kind == "constant") {
        out = ScalarField(g, p.value);
    } else if (p.kind == "gaussian") {
        out = ScalarField::from_function(g, [&](const std::array<double, 3>& x) {
            double r2 = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                const double r = (x[a] - p.center[a]) / p.width;
                r2 += r * r;
            }
            return p.amplitude * std::exp(-r2);
        });
    } else if (p.kind == "checkerboard") {
        out = ScalarField(g);
        for (std::size_t c = 0; c < g.cells; ++c) {
            long parity = 0;
            for (int a = 0; a < g.dim; ++a) {
                const long i = static_cast<long>((c / g.stride[a]) %
                                                 static_cast<std::size_t>(g.n[a]));
                parity += i / p.block;
            }
            out[c] = parity % 2 == 0 ? p.lo : p.hi;
        }
    } else if (p.kind == "file") {
        try {
            ScalarField f = read_snapshot(std::filesystem::path(p.path));
            if (!(f.grid() == g)) {
                issues.add(where + ": snapshot grid in '" + p.path +
                           "' does not match the configured grid");
                return;
            }
            out = std::move(f);
        } catch (const validation_error& e) {
            for (const auto& s : e.issues()) issues.add(where + ": " + s);
            return;
        }
    }
    if (!field_finite(out))
        issues.add(where + ": initial data contains non-finite values");
    else if (field_min(out) < 0.0)
        issues.add(where + ": initial data has negative values (min = " +
                   std::to_string(field_min(out)) + ")");
}

std::vector<double> sorted_unique(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace

MonitorConfig MonitorSpec::materialize(const ModelParams& p) const {
    MonitorConfig cfg = default_monitor_config(p);
    if (!p_list.empty()) cfg.p_list = sorted_unique(p_list);
    if (q > 0.0) cfg.q = q;
    if (!alpha_list.empty()) cfg.alpha_list = sorted_unique(alpha_list);
    return cfg;
}

Grid SimConfig::grid() const {
    return Grid::box(dim, std::span<const int>(n.data(), static_cast<std::size_t>(dim)),
                     std::span<const double>(length.data(), static_cast<std::size_t>(dim)));
}

Motility SimConfig::motility() const {
    return builtin_motility(motility_name, motility_params);
}

SimConfig parse_config(const json& doc) {
    Issues issues;
    SimConfig cfg;
    if (!doc.is_object()) throw validation_error({"configuration root must be an object"});

    check_keys(doc, "config",
               {"dim", "n", "length", "m", "eps", "motility", "u0", "v0", "t_end",
                "dt_out", "snapshot_dt", "control", "monitor", "seed"},
               issues);

    int dim = cfg.dim;
    bool dim_ok = true;
    if (auto it = doc.find("dim"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > 3) {
            issues.add("dim must be 1, 2, or 3");
            dim_ok = false;
        } else {
            dim = it->get<int>();
        }
    }
    cfg.dim = dim;

    if (auto it = doc.find("n"); it != doc.end()) {
        bool ok = dim_ok && it->is_array() && static_cast<int>(it->size()) == dim;
        if (ok)
            for (const auto& e : *it) ok = ok && e.is_number_integer() && e.get<int>() >= 1;
        if (!ok) {
            issues.add("n must be an array of dim positive integers");
        } else {
            for (int a = 0; a < dim; ++a) cfg.n[a] = (*it)[a].get<int>();
            for (int a = dim; a < 3; ++a) cfg.n[a] = 1;
        }
    }

    if (auto it = doc.find("length"); it != doc.end()) {
        bool ok = dim_ok && it->is_array() && static_cast<int>(it->size()) == dim;
        if (ok)
            for (const auto& e : *it)
                ok = ok && e.is_number() && std::isfinite(e.get<double>()) &&
                     e.get<double>() > 0.0;
        if (!ok) {
            issues.add("length must be an array of dim positive numbers");
        } else {
            for (int a = 0; a < dim; ++a) cfg.length[a] = (*it)[a].get<double>();
            for (int a = dim; a < 3; ++a) cfg.length[a] = 1.0;
        }
    }

    take_number(doc, "", "m", cfg.m,
                [](double x) { return std::isfinite(x) && x > 1.0; },
                "must be a finite number > 1", issues);
    take_number(doc, "", "eps", cfg.eps,
                [](double x) { return std::isfinite(x) && x >= 0.0 && x < 1.0; },
                "must be a finite number in [0, 1)", issues);

    if (auto it = doc.find("motility"); it != doc.end()) {
        if (!it->is_object()) {
            issues.add("motility must be an object {name, params}");
        } else {
            check_keys(*it, "motility", {"name", "params"}, issues);
            if (auto nm = it->find("name"); nm != it->end() && nm->is_string())
                cfg.motility_name = nm->get<std::string>();
            else if (nm != it->end())
                issues.add("motility.name must be a string");
            if (auto pr = it->find("params"); pr != it->end()) {
                if (!pr->is_array()) {
                    issues.add("motility.params must be an array of numbers");
                } else {
                    cfg.motility_params.clear();
                    for (const auto& e : *pr) {
                        if (!e.is_number()) {
                            issues.add("motility.params must be an array of numbers");
                            break;
                        }
                        cfg.motility_params.push_back(e.get<double>());
                    }
                }
            }
        }
    }
    try {
        builtin_motility(cfg.motility_name, cfg.motility_params);
    } catch (const hypothesis_violation& e) {
        issues.add(std::string("motility: ") + e.what());
    }

    if (auto it = doc.find("u0"); it != doc.end())
        cfg.u0 = parse_profile(*it, "u0", dim, issues);
    if (auto it = doc.find("v0"); it != doc.end())
        cfg.v0 = parse_profile(*it, "v0", dim, issues);

    take_number(doc, "", "t_end", cfg.t_end,
                [](double x) { return std::isfinite(x) && x > 0.0; },
                "must be a finite number > 0", issues);
    take_number(doc, "", "dt_out", cfg.dt_out,
                [](double x) { return std::isfinite(x) && x > 0.0; },
                "must be a finite number > 0", issues);
    take_number(doc, "", "snapshot_dt", cfg.snapshot_dt,
                [](double x) { return std::isfinite(x); },
                "must be a finite number", issues);

    if (auto it = doc.find("control"); it != doc.end()) {
        if (!it->is_object()) {
            issues.add("control must be an object");
        } else {
            const json& jc = *it;
            check_keys(jc, "control",
                       {"cfl_safety", "dt_min", "dt_max", "cg_tol",
                        "cg_max_iter_factor", "tol_neg_rel"},
                       issues);
            take_number(jc, "control", "cfl_safety", cfg.control.cfl_safety,
                        [](double x) { return x > 0.0 && x <= 1.0; },
                        "must be in (0, 1]", issues);
            take_number(jc, "control", "dt_min", cfg.control.dt_min,
                        [](double x) { return std::isfinite(x) && x > 0.0; },
                        "must be a finite number > 0", issues);
            take_number(jc, "control", "dt_max", cfg.control.dt_max,
                        [](double x) { return std::isfinite(x) && x > 0.0; },
                        "must be a finite number > 0", issues);
            take_number(jc, "control", "cg_tol", cfg.control.cg_tol,
                        [](double x) { return x > 0.0 && x < 1.0; },
                        "must be in (0, 1)", issues);
            take_int(jc, "control", "cg_max_iter_factor",
                     cfg.control.cg_max_iter_factor, 1, issues);
            take_number(jc, "control", "tol_neg_rel", cfg.control.tol_neg_rel,
                        [](double x) { return std::isfinite(x) && x >= 0.0; },
                        "must be a finite number >= 0", issues);
        }
    }
    if (cfg.control.dt_max < cfg.control.dt_min)
        issues.add("control.dt_max must be >= control.dt_min");

    if (auto it = doc.find("monitor"); it != doc.end()) {
        if (!it->is_object()) {
            issues.add("monitor must be an object");
        } else {
            check_keys(*it, "monitor", {"p_list", "q", "alpha_list"}, issues);
            cfg.monitor.p_list = read_list(*it, "monitor", "p_list", 1.0, issues);
            take_number(*it, "monitor", "q", cfg.monitor.q,
                        [](double x) { return x == 0.0 || (std::isfinite(x) && x >= 1.0); },
                        "must be 0 (meaning dim + 1) or a number >= 1", issues);
            cfg.monitor.alpha_list = read_list(*it, "monitor", "alpha_list", 0.0, issues);
        }
    }

    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 0)
            issues.add("seed must be a nonnegative integer");
        else
            cfg.seed = it->get<std::uint64_t>();
    }

    if (!issues.empty()) throw validation_error(issues.take());
    return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw validation_error({"cannot open config file " + path.string()});
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw validation_error({path.string() + ": " + e.what()});
    }
    return parse_config(doc);
}

json emit_config(const SimConfig& cfg) {
    json j;
    j["dim"] = cfg.dim;
    json jn = json::array(), jl = json::array();
    for (int a = 0; a < cfg.dim; ++a) {
        jn.push_back(cfg.n[a]);
        jl.push_back(cfg.length[a]);
    }
    j["n"] = jn;
    j["length"] = jl;
    j["m"] = cfg.m;
    j["eps"] = cfg.eps;
    j["motility"] = {{"name", cfg.motility_name}, {"params", cfg.motility_params}};
    j["u0"] = emit_profile(cfg.u0, cfg.dim);
    j["v0"] = emit_profile(cfg.v0, cfg.dim);
    j["t_end"] = cfg.t_end;
    j["dt_out"] = cfg.dt_out;
    j["snapshot_dt"] = cfg.snapshot_dt;
    j["control"] = {{"cfl_safety", cfg.control.cfl_safety},
                    {"dt_min", cfg.control.dt_min},
                    {"dt_max", cfg.control.dt_max},
                    {"cg_tol", cfg.control.cg_tol},
                    {"cg_max_iter_factor", cfg.control.cg_max_iter_factor},
                    {"tol_neg_rel", cfg.control.tol_neg_rel}};
    MonitorConfig mc = cfg.monitor.materialize(cfg.params());
    j["monitor"] = {{"p_list", mc.p_list}, {"q", mc.q}, {"alpha_list", mc.alpha_list}};
    j["seed"] = cfg.seed;
    return j;
}

std::string config_hash(const json& doc) {
    const std::string s = doc.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= static_cast<std::uint64_t>(ch);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::pair<ScalarField, ScalarField> initial_fields(const SimConfig& cfg) {
    Issues issues;
    const Grid g = cfg.grid();
    ScalarField u0, v0;
    fill_profile(cfg.u0, g, "u0", u0, issues);
    fill_profile(cfg.v0, g, "v0", v0, issues);
    if (!issues.empty()) throw validation_error(issues.take());
    return {std::move(u0), std::move(v0)};
}

json merge_config(const json& base, const json& override_doc) {
    json out = base;
    for (const auto& [k, v] : override_doc.items()) out[k] = v;
    return out;
}

}  // namespace fvtaxis

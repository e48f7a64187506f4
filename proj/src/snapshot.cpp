#include "fvtaxis/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvtaxis/errors.hpp"

namespace fvtaxis {

namespace {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void write_snapshot(std::ostream& os, const ScalarField& f) {
    const Grid& g = f.grid();
    nlohmann::json header;
    header["dim"] = g.dim;
    header["N"] = std::vector<int>(g.n.begin(), g.n.begin() + g.dim);
    header["L"] = std::vector<double>(g.length.begin(), g.length.begin() + g.dim);
    os << header.dump() << "\n";
    for (double x : f.values()) os << format_double(x) << "\n";
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_snapshot(os, f);
}

ScalarField read_snapshot(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw validation_error({"snapshot: missing header line"});
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error({std::string("snapshot: bad header: ") + e.what()});
    }
    Grid g;
    try {
        int dim = header.at("dim").get<int>();
        auto n = header.at("N").get<std::vector<int>>();
        auto L = header.at("L").get<std::vector<double>>();
        g = Grid::box(dim, n, L);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error({std::string("snapshot: bad header: ") + e.what()});
    } catch (const std::invalid_argument& e) {
        throw validation_error({std::string("snapshot: ") + e.what()});
    }
    ScalarField f(g);
    for (std::size_t i = 0; i < g.cells; ++i) {
        if (!(is >> f[i]))
            throw validation_error({"snapshot: expected " + std::to_string(g.cells) +
                                    " values, got " + std::to_string(i)});
    }
    double extra;
    if (is >> extra)
        throw validation_error({"snapshot: trailing data after " +
                                std::to_string(g.cells) + " values"});
    return f;
}

ScalarField read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw validation_error({"snapshot: cannot open " + path.string()});
    return read_snapshot(is);
}

}  // namespace fvtaxis

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fvtaxis/config.hpp"
#include "fvtaxis/errors.hpp"
#include "fvtaxis/field.hpp"
#include "fvtaxis/motility.hpp"
#include "fvtaxis/runner.hpp"
#include "fvtaxis/stepper.hpp"
#include "fvtaxis/verification.hpp"

namespace py = pybind11;
using namespace fvtaxis;

namespace {

std::vector<py::ssize_t> array_shape(const Grid& g) {
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < g.dim; ++a) shape.push_back(g.n[a]);
    return shape;
}

py::array_t<double> field_to_array(const ScalarField& f) {
    py::array_t<double> arr(array_shape(f.grid()));
    double* dst = arr.mutable_data();
    for (std::size_t i = 0; i < f.size(); ++i) dst[i] = f[i];
    return arr;
}

ScalarField field_from_array(const Grid& g, const py::array& values) {
    py::array_t<double, py::array::c_style | py::array::forcecast> buf(values);
    if (static_cast<std::size_t>(buf.size()) != g.cells)
        throw std::invalid_argument("values size does not match the grid");
    ScalarField f(g);
    const double* src = buf.data();
    for (std::size_t i = 0; i < g.cells; ++i) f[i] = src[i];
    return f;
}

nlohmann::json parse_doc(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error({std::string("config: ") + e.what()});
    }
}

py::object json_to_py(const nlohmann::json& doc) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "finite-volume core for the degenerate chemotaxis-consumption system";

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<hypothesis_violation>(m, "HypothesisViolation",
                                                 PyExc_ValueError);
    py::register_exception<solver_failure>(m, "SolverFailure", PyExc_RuntimeError);
    py::register_exception<invariant_violation>(m, "InvariantViolation",
                                                PyExc_RuntimeError);

    py::class_<Grid>(m, "Grid")
        .def(py::init([](int dim, std::vector<int> n, std::vector<double> length) {
                 return Grid::box(dim, n, length);
             }),
             py::arg("dim"), py::arg("n"), py::arg("length"))
        .def_readonly("dim", &Grid::dim)
        .def_readonly("cells", &Grid::cells)
        .def_readonly("cell_volume", &Grid::cell_volume)
        .def_property_readonly("n",
                               [](const Grid& g) {
                                   return std::vector<int>(g.n.begin(),
                                                           g.n.begin() + g.dim);
                               })
        .def_property_readonly("length",
                               [](const Grid& g) {
                                   return std::vector<double>(
                                       g.length.begin(), g.length.begin() + g.dim);
                               })
        .def_property_readonly("h",
                               [](const Grid& g) {
                                   return std::vector<double>(g.h.begin(),
                                                              g.h.begin() + g.dim);
                               })
        .def("refined", &Grid::refined)
        .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; });

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init<const Grid&, double>(), py::arg("grid"), py::arg("value") = 0.0)
        .def(py::init(&field_from_array), py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &ScalarField::grid)
        .def_property_readonly("values", &field_to_array)
        .def("__len__", &ScalarField::size);

    m.def("laplacian", [](const ScalarField& f) { return laplacian_noflux(f); },
          py::arg("field"), "no-flux finite-volume laplacian");
    m.def("integral", &integral, py::arg("field"));
    m.def("lp_norm", &lp_norm, py::arg("field"), py::arg("p"));
    m.def("field_min", &field_min, py::arg("field"));
    m.def("field_max", &field_max, py::arg("field"));
    m.def("gradient_energy", &gradient_energy, py::arg("field"));

    py::class_<Motility>(m, "Motility")
        .def(py::init([](const std::string& name, std::vector<double> params) {
                 return builtin_motility(name, params);
             }),
             py::arg("name"), py::arg("params"))
        .def("__call__", [](const Motility& phi, double v) { return phi(v); })
        .def("deriv", [](const Motility& phi, double v) { return phi.deriv(v); })
        .def_property_readonly("name", &Motility::name);

    m.def(
        "motility_bounds",
        [](const Motility& phi, double vbar) {
            MotilityBounds b = compute_bounds(phi, vbar);
            py::dict d;
            d["kappa1"] = b.kappa1;
            d["kappa2"] = b.kappa2;
            d["kappa3"] = b.kappa3;
            d["vbar"] = b.vbar;
            return d;
        },
        py::arg("phi"), py::arg("vbar"));

    m.def(
        "validate_config",
        [](const std::string& text) {
            return config_hash(emit_config(parse_config(parse_doc(text))));
        },
        py::arg("text"), "parse and validate a config, returning its hash");

    m.def(
        "simulate",
        [](const std::string& text) {
            const Trajectory traj = simulate(parse_config(parse_doc(text)));
            py::list out;
            for (const State& s : traj.snaps)
                out.append(py::make_tuple(s.t, field_to_array(s.u),
                                          field_to_array(s.v)));
            return out;
        },
        py::arg("text"),
        "run a config in memory, returning (t, u, v) snapshot tuples");

    m.def(
        "run",
        [](const std::string& text, const std::filesystem::path& outdir) {
            const RunManifest man = run(parse_config(parse_doc(text)), outdir);
            return json_to_py(man.to_json());
        },
        py::arg("text"), py::arg("outdir"),
        "run a config with full artifacts on disk, returning the manifest");

    m.def(
        "advance",
        [](const ScalarField& u, const ScalarField& v, double m_exp, double eps,
           const Motility& phi, double t_end, double dt_out) {
            ModelParams p;
            p.m = m_exp;
            p.eps = eps;
            p.dim = u.grid().dim;
            const Trajectory traj =
                advance_collect({u, v, 0.0}, p, phi, StepControl{}, t_end, dt_out);
            py::list out;
            for (const State& s : traj.snaps)
                out.append(py::make_tuple(s.t, field_to_array(s.u),
                                          field_to_array(s.v)));
            return out;
        },
        py::arg("u"), py::arg("v"), py::arg("m"), py::arg("eps"), py::arg("phi"),
        py::arg("t_end"), py::arg("dt_out"),
        "march the split scheme from (u, v) at t = 0");
}

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfrc/config_io.hpp"
#include "dfrc/harness.hpp"
#include "dfrc/radar_dsp.hpp"

namespace py = pybind11;
using namespace dfrc;

namespace {

py::dict table_dict(const Table& t)
{
    py::dict d;
    d["columns"] = t.columns;
    d["rows"] = t.rows;
    py::dict notes;
    for (const auto& [k, v] : t.notes) notes[py::str(k)] = v;
    d["notes"] = notes;
    return d;
}

std::vector<Sweep> sweeps_from(const std::vector<std::string>& specs)
{
    std::vector<Sweep> out;
    for (const auto& s : specs) out.push_back(parse_sweep(s));
    return out;
}

}  // namespace

PYBIND11_MODULE(_dfrc, m)
{
    m.doc() = "Dual-function radar-communication simulator";
    m.attr("__version__") = DFRC_VERSION;

    py::register_exception<Infeasible>(m, "Infeasible", PyExc_RuntimeError);
    py::register_exception<GuardExceeded>(m, "GuardExceeded", PyExc_RuntimeError);

    py::class_<SystemConfig>(m, "Config")
        .def(py::init<>())
        .def_static("load", &load_config, py::arg("path"))
        .def_static("parse", &parse_config, py::arg("json_text"))
        .def("to_json", &config_to_json)
        .def("hash", &config_hash)
        .def("set", [](SystemConfig& cfg, const std::string& key, double value) { set_config_field(cfg, key, value); },
             py::arg("key"), py::arg("value"))
        .def_readwrite("seed", &SystemConfig::seed)
        .def("__repr__", [](const SystemConfig& cfg) { return "<dfrc.Config " + config_hash(cfg) + ">"; });

    m.attr("KINDS") = std::vector<std::string>(std::begin(kExperimentKinds), std::end(kExperimentKinds));

    m.def(
        "run",
        [](const std::string& kind, const SystemConfig& cfg, const std::vector<std::string>& sweeps) {
            const auto sw = sweeps_from(sweeps);
            Table t;
            {
                py::gil_scoped_release release;
                t = run_with_sweeps(kind, cfg, sw);
            }
            return table_dict(t);
        },
        py::arg("kind"), py::arg("config"), py::arg("sweeps") = std::vector<std::string>{},
        "Run one experiment; returns {'columns', 'rows', 'notes'} with cells as strings.");

    m.def(
        "render",
        [](const std::string& kind, const SystemConfig& cfg, const std::vector<std::string>& sweeps) {
            const auto sw = sweeps_from(sweeps);
            std::ostringstream out;
            {
                py::gil_scoped_release release;
                write_table(out, kind, cfg, run_with_sweeps(kind, cfg, sw), sw);
            }
            return out.str();
        },
        py::arg("kind"), py::arg("config"), py::arg("sweeps") = std::vector<std::string>{},
        "Same as run, rendered as the CLI's manifest + CSV text.");

    m.def("noise_for_snr", &noise_for_snr, py::arg("snr_db"));

    m.def(
        "resolution_report",
        [](const SystemConfig& cfg) {
            const ResolutionReport r = resolution_report(cfg);
            py::dict d;
            d["kappa"] = r.kappa;
            d["tau_w"] = r.tau_w;
            d["fd_w"] = r.fd_w;
            d["d_min"] = r.d_min;
            d["v_min"] = r.v_min;
            d["valid"] = r.valid;
            return d;
        },
        py::arg("config"));

    m.def("fresnel", &fresnel, py::arg("x"), "(C(x), S(x)) with the pi t^2 / 2 convention.");
    m.def("lfm_spectrum", &lfm_spectrum_closed_form, py::arg("f"), py::arg("config"));
}

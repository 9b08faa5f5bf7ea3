/*
 Copyright 2026 The dlqg Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dlqg/cli.hpp"
#include "dlqg/dual_solver.hpp"
#include "dlqg/errors.hpp"
#include "dlqg/info_structure.hpp"
#include "dlqg/io.hpp"
#include "dlqg/oracle.hpp"
#include "dlqg/simulate.hpp"
#include "dlqg/synthesis.hpp"

#include <string>

namespace py = pybind11;

namespace {

// Reports already have a stable JSON form; hand them over as Python objects.
py::object from_json(const std::string& text) {
    return py::module_::import("json").attr("loads")(text);
}

dlqg::StepSchedule parse_schedule(const std::string& name) {
    if (name == "diminishing") {
        return dlqg::StepSchedule::Diminishing;
    }
    if (name == "constant") {
        return dlqg::StepSchedule::Constant;
    }
    throw py::value_error("schedule must be 'diminishing' or 'constant'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = R"pbdoc(
        Constrained LQG synthesis for delayed-information two-player systems
        --------------------------------------------------------------------

        .. currentmodule:: dlqg

        .. autosummary::
           :toctree: _generate

           load_problem
           validate
           check_nestedness
           solve_dual
           synthesize
           simulate
           brute_force_search
    )pbdoc";

    auto error = py::register_exception<dlqg::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<dlqg::SchemaError>(m, "SchemaError", error.ptr());
    py::register_exception<dlqg::IoError>(m, "IoError", error.ptr());
    py::register_exception<dlqg::DimensionMismatch>(m, "DimensionMismatch", error.ptr());
    py::register_exception<dlqg::InvalidInstance>(m, "InvalidInstance", error.ptr());
    py::register_exception<dlqg::Unsupported>(m, "Unsupported", error.ptr());
    py::register_exception<dlqg::InfeasibleInstance>(m, "InfeasibleInstance", error.ptr());
    py::register_exception<dlqg::NotConverged>(m, "NotConverged", error.ptr());

    py::class_<dlqg::ProblemInstance>(m, "ProblemInstance")
        .def_property_readonly("A", [](const dlqg::ProblemInstance& p) { return p.system.A(); })
        .def_property_readonly("B", [](const dlqg::ProblemInstance& p) { return p.system.B(); })
        .def_property_readonly("sigma_x", [](const dlqg::ProblemInstance& p) { return p.system.sigma_x(); })
        .def_property_readonly("sigma_w", [](const dlqg::ProblemInstance& p) { return p.system.sigma_w(); })
        .def_property_readonly("Q", [](const dlqg::ProblemInstance& p) { return p.cost.Q(); })
        .def_property_readonly("Q_T", [](const dlqg::ProblemInstance& p) { return p.cost.Q_T(); })
        .def_property_readonly("horizon", [](const dlqg::ProblemInstance& p) { return p.cost.horizon(); })
        .def_property_readonly("nodes", [](const dlqg::ProblemInstance& p) { return p.system.node_count(); })
        .def_property_readonly("constraint_count",
                               [](const dlqg::ProblemInstance& p) { return p.constraints.size(); })
        .def("to_json", [](const dlqg::ProblemInstance& p) { return dlqg::io::emit_problem(p); })
        .def("__repr__", [](const dlqg::ProblemInstance& p) {
            return "<ProblemInstance nodes=" + std::to_string(p.system.node_count())
                   + " n=" + std::to_string(p.system.state_dim()) + " m=" + std::to_string(p.system.input_dim())
                   + " T=" + std::to_string(p.cost.horizon()) + ">";
        });

    py::class_<dlqg::DualCertificate>(m, "DualCertificate")
        .def_readonly("S", &dlqg::DualCertificate::S)
        .def_property_readonly("tau", [](const dlqg::DualCertificate& c) { return c.tau.values(); })
        .def_readonly("dual_value", &dlqg::DualCertificate::dual_value)
        .def_readonly("decomposed_dual_value", &dlqg::DualCertificate::decomposed_dual_value)
        .def_readonly("lmi_residuals", &dlqg::DualCertificate::lmi_residuals)
        .def_readonly("iterations", &dlqg::DualCertificate::iterations)
        .def_readonly("converged", &dlqg::DualCertificate::converged)
        .def_readonly("max_violation", &dlqg::DualCertificate::max_violation)
        .def_readonly("complementary_slackness", &dlqg::DualCertificate::complementary_slackness)
        .def("to_json", [](const dlqg::DualCertificate& c) { return dlqg::io::emit_certificate(c); });

    py::class_<dlqg::GainSchedule>(m, "GainSchedule")
        .def_readonly("L0", &dlqg::GainSchedule::L0)
        .def_readonly("L1", &dlqg::GainSchedule::L1)
        .def_readonly("L2", &dlqg::GainSchedule::L2)
        .def_property_readonly("horizon", &dlqg::GainSchedule::horizon)
        .def("to_json", [](const dlqg::GainSchedule& g) { return dlqg::io::emit_gains(g); });

    py::class_<dlqg::SynthesisResult>(m, "SynthesisResult")
        .def_readonly("gains", &dlqg::SynthesisResult::gains)
        .def_property_readonly("aggregate_covariances",
                               [](const dlqg::SynthesisResult& s) { return s.trajectory.aggregate; })
        .def_property_readonly("loads", [](const dlqg::SynthesisResult& s) { return s.trajectory.loads; })
        .def("cost", [](const dlqg::SynthesisResult& s, const dlqg::ProblemInstance& p) {
            return s.trajectory.cost(p.cost);
        });

    m.def("load_problem", [](const std::string& path) { return dlqg::io::load_problem(path); }, py::arg("path"),
          "Read a problem file.");
    m.def("parse_problem", [](const std::string& text) { return dlqg::io::parse_problem(text); }, py::arg("text"),
          "Parse a problem from JSON text.");

    m.def(
        "validate",
        [](const dlqg::ProblemInstance& p) {
            return from_json(
                dlqg::io::validation_json(dlqg::validate_instance(p.system, p.cost, p.constraints)));
        },
        py::arg("instance"), "Check the standing assumptions; returns the report as a dict.");

    m.def(
        "check_nestedness",
        [](const dlqg::ProblemInstance& p) {
            const auto& graph = p.system.graph();
            return from_json(dlqg::io::nestedness_json(dlqg::check_partial_nestedness(graph),
                                                       dlqg::all_pairs_distances(graph)));
        },
        py::arg("instance"), "Verify partial nestedness of the interconnection graph.");

    m.def(
        "solve_dual",
        [](const dlqg::ProblemInstance& p, int max_iters, double step, const std::string& schedule,
           double tol) {
            dlqg::DualOptions options;
            options.max_iters = max_iters;
            options.step = step;
            options.schedule = parse_schedule(schedule);
            options.relative_tolerance = tol;
            py::gil_scoped_release release;
            return dlqg::solve_dual(p, options);
        },
        py::arg("instance"), py::arg("max_iters") = 100000, py::arg("step") = 0.0,
        py::arg("schedule") = "diminishing", py::arg("tol") = 1e-6, "Compute the dual certificate.");

    m.def("synthesize", &dlqg::synthesize, py::arg("instance"), py::arg("certificate"),
          "Build the coordinator and local gains and propagate their covariances.");

    m.def(
        "simulate",
        [](const dlqg::ProblemInstance& p, const dlqg::GainSchedule& gains, std::int64_t trials,
           std::uint64_t seed, int threads) {
            dlqg::SimConfig config;
            config.trials = trials;
            config.seed = seed;
            config.threads = threads;
            std::string report;
            {
                py::gil_scoped_release release;
                report = dlqg::io::sim_report_json(
                    dlqg::run_monte_carlo(p.system, gains, p.cost, p.constraints, config));
            }
            return from_json(report);
        },
        py::arg("instance"), py::arg("gains"), py::arg("trials") = 1000, py::arg("seed") = 0,
        py::arg("threads") = 1, "Monte-Carlo run of the delayed protocol; returns the report as a dict.");

    m.def(
        "policy_cost",
        [](const dlqg::ProblemInstance& p, const dlqg::GainSchedule& gains) {
            return dlqg::oracle::exact_policy_cost(p.system, p.cost, p.constraints, gains).cost;
        },
        py::arg("instance"), py::arg("gains"), "Exact expected cost of a gain schedule.");

    m.def(
        "brute_force_search",
        [](const dlqg::ProblemInstance& p) {
            dlqg::oracle::SearchResult r;
            {
                py::gil_scoped_release release;
                r = dlqg::oracle::brute_force_search(p.system, p.cost, p.constraints);
            }
            py::dict out;
            out["cost"] = r.cost;
            out["feasible"] = r.feasible;
            out["parameters"] = r.parameter_count;
            out["evaluations"] = r.evaluations;
            out["gains"] = r.gains;
            return out;
        },
        py::arg("instance"), "Grid and pattern search over the decomposed policy class.");

    m.attr("__version__") = dlqg::cli::version();
}

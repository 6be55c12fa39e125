#include "relaycancel/cli.hpp"
#include "relaycancel/discretize.hpp"
#include "relaycancel/riccati.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace relaycancel;

namespace {

StateSpace make_ss(Matrix A, Matrix B, Matrix C, Matrix D, std::optional<double> period) {
    return {std::move(A), std::move(B), std::move(C), std::move(D),
            period ? TimeDomain::discrete(*period) : TimeDomain::continuous()};
}

py::dict synthesis_dict(const SynthesisResult& res) {
    py::list history;
    for (const auto& p : res.report.gamma_history) history.append(py::make_tuple(p.gamma, p.feasible));
    py::dict d;
    d["gamma"] = res.report.gamma_opt;
    d["order"] = res.report.order;
    d["closed_loop_radius"] = res.report.closed_loop_radius;
    d["open_loop_norm"] = res.report.open_loop_norm;
    d["residuals"] = py::make_tuple(res.controller.residuals.first, res.controller.residuals.second);
    d["gamma_history"] = history;
    d["controller"] = res.controller.K;
    d["controller_json"] = controller_to_json(res.controller);
    return d;
}

}  // namespace

PYBIND11_MODULE(_relaycancel, m) {
    m.doc() = "Sampled-data H-infinity cancelers for relay self-interference";

    static py::exception<Error> error_type(m, "RelayCancelError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::handle(error_type.ptr())(std::string(to_string(e.code())) + ": " + e.what());
            err.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    py::class_<StateSpace>(m, "StateSpace")
        .def(py::init(&make_ss), py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"),
             py::arg("period") = py::none())
        .def_property_readonly("A", &StateSpace::A)
        .def_property_readonly("B", &StateSpace::B)
        .def_property_readonly("C", &StateSpace::C)
        .def_property_readonly("D", &StateSpace::D)
        .def_property_readonly("period",
                               [](const StateSpace& s) -> std::optional<double> {
                                   if (!s.is_discrete()) return std::nullopt;
                                   return s.domain().period();
                               })
        .def_property_readonly("states", &StateSpace::states)
        .def_property_readonly("inputs", &StateSpace::inputs)
        .def_property_readonly("outputs", &StateSpace::outputs)
        .def("__call__", [](const StateSpace& s, Complex q) { return CMatrix(evaluate(s, q)); }, py::arg("q"))
        .def("__repr__", [](const StateSpace& s) {
            return "<StateSpace states=" + std::to_string(s.states()) + " inputs=" + std::to_string(s.inputs()) +
                   " outputs=" + std::to_string(s.outputs()) + (s.is_discrete() ? " discrete>" : " continuous>");
        });

    m.def("tf",
          [](std::vector<double> num, std::vector<double> den, std::optional<double> period) {
              return from_tf(num, den, period ? TimeDomain::discrete(*period) : TimeDomain::continuous());
          },
          py::arg("num"), py::arg("den"), py::arg("period") = py::none(),
          "Controllable canonical realization of num/den (descending powers).");
    m.def("series", &series, py::arg("first"), py::arg("second"));
    m.def("c2d_zoh", &c2d_zoh, py::arg("sys"), py::arg("h"));
    m.def("lift", &lift, py::arg("sys"), py::arg("N"));
    m.def("expm", &expm, py::arg("A"));
    m.def("spectral_radius", &spectral_radius, py::arg("A"));
    m.def("hinf_norm", [](const StateSpace& s, double tol) { return hinf_norm(s, tol).value; }, py::arg("sys"),
          py::arg("rel_tol") = 1e-6);
    m.def("solve_are",
          [](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, std::optional<Matrix> S) {
              return solve_are(A, B, Q, R, S ? *S : Matrix::Zero(A.rows(), B.cols())).X;
          },
          py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"), py::arg("S") = py::none());

    m.def("parse_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
          py::arg("text"), "Validate a run config and return it with defaults filled in.");

    m.def("design",
          [](const std::string& config_text) {
              const RunConfig c = parse_config(config_text);
              SynthesisOptions opts;
              opts.gamma_tol = c.gamma_tol;
              opts.require_stable_controller = c.mode == CancelerMode::Feedforward;
              SynthesisResult res = [&] {
                  py::gil_scoped_release release;
                  return synthesize(build_plant(make_problem(c), c.N), opts);
              }();
              return synthesis_dict(res);
          },
          py::arg("config"), "Synthesize a canceler from a JSON run config.");

    m.def("simulate",
          [](const std::string& config_text, std::optional<std::string> controller_json) {
              const RunConfig c = parse_config(config_text);
              std::optional<Controller> K;
              if (controller_json) K = controller_from_json(*controller_json);
              SimTrace tr = [&] {
                  py::gil_scoped_release release;
                  return run(make_sim_config(c, K));
              }();
              py::dict d;
              d["t"] = py::cast(tr.t);
              d["v"] = py::cast(tr.v);
              d["y"] = py::cast(tr.y);
              d["u"] = py::cast(tr.u);
              d["e"] = py::cast(tr.e);
              d["diverged"] = tr.diverged;
              d["l2_error"] = l2_norm(tr.e, tr.step());
              return d;
          },
          py::arg("config"), py::arg("controller") = py::none(),
          "Fast-rate simulation; returns the t, v, y, u, e columns.");
}

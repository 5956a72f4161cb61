#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "etmpc/analysis.hpp"
#include "etmpc/config.hpp"
#include "etmpc/controller.hpp"
#include "etmpc/errors.hpp"
#include "etmpc/lmi.hpp"
#include "etmpc/report.hpp"
#include "etmpc/sdp.hpp"

namespace py = pybind11;
using namespace etmpc;

namespace {

Eigen::MatrixXd Stack(const std::vector<StepRecord>& steps,
                      const Eigen::VectorXd StepRecord::*field) {
  if (steps.empty()) return {};
  Eigen::MatrixXd out(steps.size(), (steps.front().*field).size());
  for (std::size_t k = 0; k < steps.size(); ++k) out.row(k) = (steps[k].*field).transpose();
  return out;
}

py::dict MetricsDict(const Trajectory& tr, double zeta, double sample_time) {
  std::stringstream ss;
  write_metrics(ss, to_string(tr.mode), compute_metrics(tr, zeta, sample_time));
  py::dict d;
  for (const auto& [k, v] : read_metrics(ss)) d[py::str(k)] = v;
  return d;
}

// Dense copy of a program: (c, [(tag, F0, [F_1, ..., F_m])]).
py::tuple DenseProgram(const sdp::ConicProgram& p) {
  py::list blocks;
  for (const auto& b : p.blocks) {
    std::vector<Eigen::MatrixXd> coeffs(p.num_vars, Eigen::MatrixXd::Zero(b.size, b.size));
    for (const auto& c : b.coefficients) {
      for (const auto& e : c.entries) coeffs[c.var](e.row, e.col) = e.value;
    }
    blocks.append(py::make_tuple(b.tag, b.constant, coeffs));
  }
  return py::make_tuple(p.objective, blocks);
}

}  // namespace

PYBIND11_MODULE(_etmpc, m) {
  m.doc() = "Event-triggered robust MPC for delayed polytopic systems";

  py::register_exception<Error>(m, "EtmpcError");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("steps", &ScenarioConfig::steps)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("mu", &ScenarioConfig::mu)
      .def_readwrite("theta", &ScenarioConfig::theta)
      .def_readwrite("epsilon", &ScenarioConfig::epsilon)
      .def_readwrite("beta0", &ScenarioConfig::beta0)
      .def_readwrite("x0", &ScenarioConfig::x0)
      .def_readwrite("zeta", &ScenarioConfig::zeta)
      .def_readonly("n_x", &ScenarioConfig::n_x)
      .def_readonly("n_u", &ScenarioConfig::n_u)
      .def_property_readonly("modes",
                             [](const ScenarioConfig& c) {
                               std::vector<std::string> out;
                               for (auto mode : c.modes) out.push_back(to_string(mode));
                               return out;
                             })
      .def("to_text", [](const ScenarioConfig& c) {
        std::ostringstream out;
        write_scenario(out, c);
        return out.str();
      });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def(
      "parse_scenario",
      [](const std::string& text, const std::string& source_dir) {
        std::istringstream in(text);
        return parse_scenario(in, source_dir);
      },
      py::arg("text"), py::arg("source_dir") = ".");
  m.def(
      "validate",
      [](const ScenarioConfig& c) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& v : validate_scenario(c)) out.emplace_back(v.name, v.passed, v.detail);
        return out;
      },
      py::arg("config"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("mode", [](const Trajectory& t) { return to_string(t.mode); })
      .def_property_readonly("states", [](const Trajectory& t) { return Stack(t.steps, &StepRecord::x); })
      .def_property_readonly("inputs", [](const Trajectory& t) { return Stack(t.steps, &StepRecord::u); })
      .def_property_readonly("saturated_inputs",
                             [](const Trajectory& t) { return Stack(t.steps, &StepRecord::u_sat); })
      .def_property_readonly("disturbances",
                             [](const Trajectory& t) { return Stack(t.steps, &StepRecord::omega); })
      .def_property_readonly("beta",
                             [](const Trajectory& t) {
                               Eigen::VectorXd b(t.num_steps() + 1);
                               for (int k = 0; k <= t.num_steps(); ++k) b(k) = t.beta_at(k);
                               return b;
                             })
      .def_property_readonly("gaps",
                             [](const Trajectory& t) {
                               std::vector<double> g;
                               for (const auto& s : t.steps) g.push_back(s.gap);
                               return g;
                             })
      .def_property_readonly("final_state", [](const Trajectory& t) { return t.final_state; })
      .def_property_readonly("trigger_instants", &Trajectory::trigger_instants)
      .def_property_readonly("gammas",
                             [](const Trajectory& t) {
                               std::vector<double> g;
                               for (const auto& r : t.triggers) g.push_back(r.gamma);
                               return g;
                             })
      .def_property_readonly("gains",
                             [](const Trajectory& t) {
                               py::list out;
                               for (const auto& r : t.triggers) {
                                 py::dict d;
                                 d["k"] = r.k;
                                 d["F"] = r.gains.F;
                                 d["H"] = r.gains.H;
                                 d["Phi"] = r.gains.Phi;
                                 d["P"] = r.gains.P;
                                 d["P_tau"] = r.gains.P_tau;
                                 out.append(d);
                               }
                               return out;
                             })
      .def_readonly("certified", &Trajectory::certified)
      .def("__len__", &Trajectory::num_steps);

  m.def(
      "run",
      [](const ScenarioConfig& c, const std::string& mode) {
        const Scenario sc = c.build(parse_trigger_mode(mode));
        py::gil_scoped_release release;
        return run(sc);
      },
      py::arg("config"), py::arg("mode") = "adaptive");

  m.def("metrics", &MetricsDict, py::arg("trajectory"), py::arg("zeta") = 0.05,
        py::arg("sample_time") = 1.0);

  m.def(
      "initial_program",
      [](const ScenarioConfig& c) {
        const Scenario sc = c.build(TriggerMode::kAdaptive);
        const auto prob = assemble_problem(sc.model, sc.cost, sc.synthesis(), sc.initial_buffer(),
                                           sc.etm.beta0());
        return DenseProgram(prob.program);
      },
      py::arg("config"),
      "Synthesis program at k = 0 as (c, [(tag, F0, [F_i])]): minimize c'y with "
      "F0 + sum y_i F_i PSD for every block.");

  m.def(
      "solve_initial",
      [](const ScenarioConfig& c) {
        const Scenario sc = c.build(TriggerMode::kAdaptive);
        const auto sol = solve_at_trigger(sc, sc.initial_buffer(), sc.etm.beta0());
        if (sol.status != sdp::SdpStatus::kOptimal) {
          throw SolverError(sdp::to_string(sol.status), 0);
        }
        py::dict d;
        d["gamma"] = sol.gamma;
        d["values"] = sol.values;
        d["F"] = sol.gains.F;
        d["Phi"] = sol.gains.Phi;
        d["relative_gap"] = sol.diagnostics.relative_gap;
        return d;
      },
      py::arg("config"));
}

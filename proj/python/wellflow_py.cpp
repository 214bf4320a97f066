// Python bindings.  Structured inputs and outputs travel as JSON strings so
// the module stays a thin shim over the serialization layer already used by
// the CLI; callers go through json.loads / json.dumps on the Python side.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <sstream>

#include "wellflow/adapted.hpp"
#include "wellflow/io.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/turing.hpp"
#include "wellflow/well.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace wellflow;

namespace {

json parse(const std::string& s) { return json::parse(s); }

std::string simulate_flow(const std::string& flow_json,
                          const std::vector<double>& x0, double T, double dt) {
  TorusFlow flow = flow_from_json(parse(flow_json));
  Vec v = Eigen::Map<const Vec>(x0.data(), static_cast<long>(x0.size()));
  Trajectory tr = integrate(flow, v, T, dt);
  json out;
  out["times"] = tr.times;
  out["points"] = json::array();
  for (const auto& p : tr.points)
    out["points"].push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return out.dump();
}

std::string simulate_well(const std::string& potential_json,
                          const std::vector<double>& q0,
                          const std::vector<double>& p0, double T, double dt) {
  PotentialPtr V = potential_from_json(parse(potential_json));
  WellState s0{Eigen::Map<const Vec>(q0.data(), static_cast<long>(q0.size())),
               Eigen::Map<const Vec>(p0.data(), static_cast<long>(p0.size()))};
  WellTrajectory tr = integrate_well(*V, s0, T, dt);
  const WellState& f = tr.states.back();
  json out;
  out["t_final"] = tr.times.back();
  out["q"] = std::vector<double>(f.q.data(), f.q.data() + f.q.size());
  out["p"] = std::vector<double>(f.p.data(), f.p.data() + f.p.size());
  out["energy_initial"] = energy(*V, s0);
  out["energy_final"] = energy(*V, f);
  return out.dump();
}

std::string check_adapted_py(const std::string& flow_json,
                             const std::string& form_json) {
  TorusFlow flow = flow_from_json(parse(flow_json));
  OneForm theta = form_from_json(parse(form_json));
  AdaptationReport rep = check_adapted(flow, theta);
  json out;
  out["classification"] = rep.class_name();
  out["min_thetaY"] = rep.min_thetaY;
  out["exactness_residual"] = rep.exactness_residual;
  return out.dump();
}

std::string certify(const std::string& flow_json, int degree,
                    const std::string& eps, int grid_res) {
  TorusFlow flow = flow_from_json(parse(flow_json));
  AdaptedLP lp = build_lp(flow, degree, rat_from_string(eps), grid_res);
  AdaptedCertificate cert = solve(lp);
  return certificate_to_json(lp, cert).dump();
}

std::string average_py(const std::string& flow_json,
                       const std::string& form_json, int n_samples) {
  TorusFlow flow = flow_from_json(parse(flow_json));
  OneForm theta = form_from_json(parse(form_json));
  AveragedForm av = average(flow, theta, n_samples);
  json out;
  out["form"] = form_to_json(av.form);
  out["fit_residual"] = av.fit_residual;
  AdaptationReport rep = check_adapted(flow, av.form);
  out["classification"] = rep.class_name();
  return out.dump();
}

std::string tm_run(const std::string& tm_json, const std::string& tape_json,
                   long max_steps) {
  TuringMachine tm = tm_from_json(parse(tm_json));
  Tape tape = tape_from_json(parse(tape_json));
  RunResult r = symbolic_run(tm, tape, max_steps);
  json out;
  out["halted"] = r.halted;
  out["steps"] = r.steps;
  return out.dump();
}

std::string tm_orbit(const std::string& tm_json, const std::string& tape_json,
                     int b, long max_steps) {
  TuringMachine tm = tm_from_json(parse(tm_json));
  Tape tape = tape_from_json(parse(tape_json));
  CompiledDiffeo d = compile(tm, b);

  RunResult sym = symbolic_run(tm, tape, max_steps);
  json out;
  if (sym.halted) {
    const Tape& ft = sym.final_config.tape;
    long n = std::max<long>(
        std::max(std::abs(ft.window_first()), std::abs(ft.window_last())), 1);
    std::vector<int> window;
    for (long i = -n; i <= n; ++i) window.push_back(ft.at(i));
    HaltingSet U = halting_set(window, n, b);
    OrbitResult orb = run_orbit(d, tape, max_steps, &U);
    out["entered_U"] = orb.entered_U;
    out["step_index"] = orb.step_index;
    out["halted"] = orb.halted;
    out["budget_exhausted"] = orb.budget_exhausted;
  } else {
    OrbitResult orb = run_orbit(d, tape, max_steps, nullptr);
    out["entered_U"] = false;
    out["step_index"] = -1;
    out["halted"] = orb.halted;
    out["budget_exhausted"] = orb.budget_exhausted;
    out["min_distance_to_U"] = orb.min_distance_to_U;
  }
  out["symbolic_halted"] = sym.halted;
  out["symbolic_steps"] = sym.steps;
  return out.dump();
}

bool shift_check_py(const std::string& tape_json, int b) {
  return shift_check(tape_from_json(parse(tape_json)), b);
}

}  // namespace

PYBIND11_MODULE(wellflow_py, m) {
  m.doc() = "torus flows, adapted 1-forms, and compiled tape dynamics";
  m.def("simulate_flow", &simulate_flow, py::arg("flow_json"), py::arg("x0"),
        py::arg("T"), py::arg("dt"),
        "Integrate a torus flow; returns {times, points} as JSON.");
  m.def("simulate_well", &simulate_well, py::arg("potential_json"),
        py::arg("q0"), py::arg("p0"), py::arg("T"), py::arg("dt"),
        "Stormer-Verlet trajectory; returns final state and energies.");
  m.def("check_adapted", &check_adapted_py, py::arg("flow_json"),
        py::arg("form_json"),
        "Classify a 1-form against a flow: strong / weak / none.");
  m.def("certify", &certify, py::arg("flow_json"), py::arg("degree"),
        py::arg("eps"), py::arg("grid_res") = 64,
        "Exact LP certificate: adapted witness or Farkas infeasibility.");
  m.def("average", &average_py, py::arg("flow_json"), py::arg("form_json"),
        py::arg("n_samples") = 256,
        "Time-average a 1-form along the flow and re-classify it.");
  m.def("tm_run", &tm_run, py::arg("tm_json"), py::arg("tape_json"),
        py::arg("max_steps"), "Symbolic machine run.");
  m.def("tm_orbit", &tm_orbit, py::arg("tm_json"), py::arg("tape_json"),
        py::arg("b") = 10000, py::arg("max_steps") = 100000,
        "Exact orbit of the compiled torus map, watching the halting set.");
  m.def("shift_check", &shift_check_py, py::arg("tape_json"),
        py::arg("b") = 10000,
        "Verify the tape-shift conjugacy identity for one tape.");
}

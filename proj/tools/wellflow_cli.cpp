// command-line front end: simulation, certification, compilation and the
// release verification suite, with a reproducibility manifest per run
#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wellflow/acceptance.hpp"
#include "wellflow/adapted.hpp"
#include "wellflow/embed.hpp"
#include "wellflow/io.hpp"
#include "wellflow/nlw.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/turing.hpp"
#include "wellflow/well.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 3;
constexpr int kExitBudget = 4;

// FNV-1a 64-bit content fingerprint (manifest plumbing, not cryptographic)
std::string fingerprint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

struct Manifest {
  wellflow::json j;

  explicit Manifest(const std::string& subcommand, unsigned seed) {
    j["tool_version"] = kVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["inputs"] = wellflow::json::object();
    j["parameters"] = wellflow::json::object();
    j["outputs"] = wellflow::json::array();
  }
  void input(const std::string& path) { j["inputs"][path] = fingerprint(path); }
  template <class T>
  void param(const std::string& key, const T& v) {
    j["parameters"][key] = v;
  }
  void output(const std::string& path) { j["outputs"].push_back(path); }
  void write(const std::string& path) const {
    wellflow::save_json_file(path, j);
  }
};

wellflow::Vec parse_point(const std::vector<double>& xs) {
  wellflow::Vec v(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) v[i] = xs[i];
  return v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace wellflow;

  CLI::App app{"potential-well flow toolkit"};
  app.require_subcommand(1);
  unsigned seed = 20260826;
  std::string manifest_path;
  app.add_option("--seed", seed, "seed for randomized sampling");
  app.add_option("--manifest", manifest_path,
                 "manifest output path (default <subcommand>.manifest.json)");

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "integrate a system to CSV");
  std::string sim_kind, sim_spec, sim_out = "trajectory.csv";
  std::vector<double> sim_x0, sim_p0;
  double sim_T = 10.0, sim_dt = 1e-3;
  int sim_N = 64;
  sim->add_option("kind", sim_kind, "flow | well | nlw")->required();
  sim->add_option("--spec", sim_spec, "flow or potential spec file")->required();
  sim->add_option("--x0", sim_x0, "initial point (well/nlw: q0)")->required();
  sim->add_option("--p0", sim_p0, "initial momentum (well/nlw)");
  sim->add_option("--T", sim_T, "final time");
  sim->add_option("--dt", sim_dt, "time step");
  sim->add_option("--N", sim_N, "nlw grid size");
  sim->add_option("--out", sim_out, "output CSV");

  // --- lift --------------------------------------------------------------
  auto* lift_cmd = app.add_subcommand("lift", "cotangent lift + zero-section check");
  std::string lift_flow;
  double lift_T = 10.0;
  lift_cmd->add_option("--flow", lift_flow)->required();
  lift_cmd->add_option("--T", lift_T, "check horizon");

  // --- check-adapted -------------------------------------------------------
  auto* chk = app.add_subcommand("check-adapted", "classify a 1-form");
  std::string chk_flow, chk_form;
  double chk_eps = 1e-9;
  chk->add_option("--flow", chk_flow)->required();
  chk->add_option("--form", chk_form)->required();
  chk->add_option("--eps", chk_eps);

  // --- lp ------------------------------------------------------------------
  auto* lp_cmd = app.add_subcommand("lp", "adapted 1-form LP with certificates");
  std::string lp_flow, lp_eps = "1/1000", lp_out = "certificate.json";
  int lp_K = 0, lp_grid = 64;
  lp_cmd->add_option("--flow", lp_flow)->required();
  lp_cmd->add_option("--degree", lp_K, "trig degree K");
  lp_cmd->add_option("--eps", lp_eps, "rational positivity threshold");
  lp_cmd->add_option("--grid", lp_grid, "grid resolution");
  lp_cmd->add_option("--out", lp_out, "certificate JSON");

  // --- average ----------------------------------------------------------
  auto* avg = app.add_subcommand("average", "flow-average a 1-form");
  std::string avg_flow, avg_form, avg_out = "averaged.form.json";
  int avg_samples = 64;
  avg->add_option("--flow", avg_flow)->required();
  avg->add_option("--form", avg_form)->required();
  avg->add_option("--samples", avg_samples);
  avg->add_option("--out", avg_out);

  // --- embed ----------------------------------------------------------
  auto* emb = app.add_subcommand("embed", "metric, embedding, potential, check");
  std::string emb_flow, emb_form, emb_out = "embedding.json";
  bool emb_opt = false;
  int emb_m = 4, emb_degree = 2;
  double emb_T = 2.0, emb_tol = 1e-4;
  emb->add_option("--flow", emb_flow)->required();
  emb->add_option("--form", emb_form)->required();
  emb->add_flag("--optimize", emb_opt, "Gauss-Newton instead of flat NNLS");
  emb->add_option("--m", emb_m, "ambient dimension (with --optimize)");
  emb->add_option("--degree", emb_degree, "trig degree (with --optimize)");
  emb->add_option("--T", emb_T, "verification horizon");
  emb->add_option("--tol", emb_tol, "verification tolerance");
  emb->add_option("--out", emb_out);

  // --- tm ----------------------------------------------------------------
  auto* tm_cmd = app.add_subcommand("tm", "Turing machines and compiled maps");
  std::string tm_kind, tm_machine, tm_tape, tm_out = "orbit.csv";
  long tm_steps = 1000;
  long tm_window = 1;
  int tm_base = 0;
  tm_cmd->add_option("kind", tm_kind, "run | compile | orbit | suspend")->required();
  tm_cmd->add_option("--machine", tm_machine)->required();
  tm_cmd->add_option("--tape", tm_tape, "tape spec file");
  tm_cmd->add_option("--steps", tm_steps, "step budget");
  tm_cmd->add_option("--window", tm_window, "halting-set digit window n");
  tm_cmd->add_option("--base", tm_base, "encoding base (default 10k)");
  tm_cmd->add_option("--out", tm_out, "orbit CSV");

  // --- verify-all -----------------------------------------------------------
  auto* ver = app.add_subcommand("verify-all", "run the release criteria");
  std::string ver_data = "data";
  ver->add_option("--data", ver_data, "bundled spec directory");

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  if (manifest_path.empty())
    manifest_path = sub->get_name() + ".manifest.json";

  try {
    Manifest man(sub->get_name(), seed);

    if (sub == sim) {
      man.input(sim_spec);
      man.param("kind", sim_kind);
      man.param("T", sim_T);
      man.param("dt", sim_dt);
      std::ostringstream csv;
      if (sim_kind == "flow") {
        const TorusFlow flow = flow_from_json(load_json_file(sim_spec));
        const Trajectory tr = integrate(flow, parse_point(sim_x0), sim_T, sim_dt);
        write_trajectory_csv(csv, tr);
      } else if (sim_kind == "well") {
        const PotentialPtr V = potential_from_json(load_json_file(sim_spec));
        WellState s0{parse_point(sim_x0), parse_point(sim_p0)};
        if (s0.p.size() == 0) s0.p = Vec::Zero(s0.q.size());
        const WellTrajectory tr = integrate_well(*V, s0, sim_T, sim_dt);
        write_well_csv(csv, tr);
      } else if (sim_kind == "nlw") {
        const PotentialPtr V = potential_from_json(load_json_file(sim_spec));
        Vec q0 = parse_point(sim_x0);
        Vec p0 = sim_p0.empty() ? Vec(Vec::Zero(q0.size())) : parse_point(sim_p0);
        const NLWTrajectory tr =
            integrate_nlw(*V, constant_nlw_state(sim_N, q0, p0), sim_T, sim_dt);
        csv << "t,energy,q00,p00\n";
        for (size_t i = 0; i < tr.states.size(); ++i)
          csv << tr.times[i] << "," << nlw_energy(*V, tr.states[i]) << ","
              << tr.states[i].Q(0, 0) << "," << tr.states[i].P(0, 0) << "\n";
      } else {
        throw CLI::ValidationError("simulate: kind must be flow|well|nlw");
      }
      write_file(sim_out, csv.str());
      man.output(sim_out);
      man.write(manifest_path);
      std::cout << "wrote " << sim_out << "\n";
      return kExitOk;
    }

    if (sub == lift_cmd) {
      man.input(lift_flow);
      man.param("T", lift_T);
      const TorusFlow flow = flow_from_json(load_json_file(lift_flow));
      const LiftedSystem lift = cotangent_lift(flow);
      const Vec q0 = Vec::Constant(flow.dim, 0.3);
      const Trajectory tr = lift.integrate(lift.zero_section(q0), lift_T, 1e-3);
      double pmax = 0.0;
      for (const Vec& qp : tr.points)
        pmax = std::max(pmax, qp.tail(flow.dim).cwiseAbs().maxCoeff());
      man.param("zero_section_max_p", pmax);
      man.write(manifest_path);
      std::cout << "zero-section max |p| over T=" << lift_T << ": " << pmax
                << "\n";
      return pmax < 1e-10 ? kExitOk : kExitError;
    }

    if (sub == chk) {
      man.input(chk_flow);
      man.input(chk_form);
      man.param("eps", chk_eps);
      const TorusFlow flow = flow_from_json(load_json_file(chk_flow));
      const OneForm theta = form_from_json(load_json_file(chk_form));
      const AdaptationReport rep = check_adapted(flow, theta, chk_eps);
      man.param("classification", rep.class_name());
      man.write(manifest_path);
      std::cout << "classification: " << rep.class_name()
                << "\ncertified min theta(Y): " << rep.min_thetaY
                << "\nexactness residual: " << rep.exactness_residual << "\n";
      return rep.classification == AdaptationReport::Class::None
                 ? kExitInfeasible
                 : kExitOk;
    }

    if (sub == lp_cmd) {
      man.input(lp_flow);
      man.param("degree", lp_K);
      man.param("eps", lp_eps);
      man.param("grid", lp_grid);
      const TorusFlow flow = flow_from_json(load_json_file(lp_flow));
      const AdaptedLP lp = build_lp(flow, lp_K, rat_from_string(lp_eps), lp_grid);
      const AdaptedCertificate cert = solve(lp);
      save_json_file(lp_out, certificate_to_json(lp, cert));
      man.output(lp_out);
      man.write(manifest_path);
      const bool feasible =
          cert.verdict == AdaptedCertificate::Verdict::Feasible;
      std::cout << (feasible ? "feasible" : "infeasible-at-degree")
                << " (certificate: " << lp_out << ")\n";
      return feasible ? kExitOk : kExitInfeasible;
    }

    if (sub == avg) {
      man.input(avg_flow);
      man.input(avg_form);
      man.param("samples", avg_samples);
      const TorusFlow flow = flow_from_json(load_json_file(avg_flow));
      const OneForm theta = form_from_json(load_json_file(avg_form));
      const AveragedForm av = average(flow, theta, avg_samples);
      save_json_file(avg_out, form_to_json(av.form));
      man.output(avg_out);
      man.param("fit_residual", av.fit_residual);
      const AdaptationReport rep = check_adapted(flow, av.form);
      man.param("classification", rep.class_name());
      man.write(manifest_path);
      std::cout << "averaged form: " << avg_out
                << "\nfit residual: " << av.fit_residual
                << "\nclassification: " << rep.class_name() << "\n";
      return kExitOk;
    }

    if (sub == emb) {
      man.input(emb_flow);
      man.input(emb_form);
      man.param("optimize", emb_opt);
      man.param("T", emb_T);
      man.param("tol", emb_tol);
      const TorusFlow flow = flow_from_json(load_json_file(emb_flow));
      const OneForm theta = form_from_json(load_json_file(emb_form));
      const MetricField metric = build_metric(
          flow, theta, Eigen::MatrixXd::Identity(flow.dim, flow.dim));
      EmbeddingMap e = emb_opt
                           ? optimize_embedding(metric, emb_m, emb_degree)
                           : flat_embedding(metric);
      attach_momentum(e, flow);
      const ExactnessResult ex = is_exact(lie_derivative(flow, theta));
      if (!ex.exact) throw std::runtime_error("L_Y theta is not exact");
      const ExtendedPotential V = build_potential(e, flow, ex.potential);
      std::vector<Vec> y0s{Vec::Constant(flow.dim, 0.15),
                           Vec::Constant(flow.dim, 0.6)};
      const VerifyReport vr =
          verify_embedding(flow, e, V, y0s, emb_T, emb_tol);
      json out;
      out["metric"] = {{"C", metric.C},
                       {"exact", metric.exact},
                       {"duality_residual",
                        metric.duality_residual(flow, theta)},
                       {"min_eigenvalue", metric.pd.grid_min_eig}};
      json qj = json::array();
      for (const auto& qc : e.q) qj.push_back(trigpoly_to_json(qc));
      json pj = json::array();
      for (const auto& pc : e.p) pj.push_back(trigpoly_to_json(pc));
      out["embedding"] = {{"m", e.m},
                          {"q", qj},
                          {"p", pj},
                          {"isometry_residual", e.residual},
                          {"gram_min", e.gram_min}};
      out["potential"] = {{"tube_radius", V.tube_radius()},
                          {"reach_estimate", V.reach_estimate()},
                          {"on_manifold_gradient_residual", V.uouo_residual()}};
      out["verification"] = {{"max_deviation", vr.max_deviation},
                             {"pass", vr.pass},
                             {"T", emb_T},
                             {"tol", emb_tol}};
      save_json_file(emb_out, out);
      man.output(emb_out);
      man.write(manifest_path);
      std::cout << "embedding report: " << emb_out
                << "\nmax deviation: " << vr.max_deviation << "\n";
      return vr.pass ? kExitOk : kExitError;
    }

    if (sub == tm_cmd) {
      man.input(tm_machine);
      man.param("kind", tm_kind);
      man.param("steps", tm_steps);
      const TuringMachine tm = tm_from_json(load_json_file(tm_machine));
      const int b = tm_base > 0 ? tm_base : 10 * tm.k;
      man.param("base", b);

      if (tm_kind == "compile") {
        const CompiledDiffeo d = compile(tm, b);
        man.write(manifest_path);
        std::cout << "states: " << tm.n_states()
                  << ", pieces: " << d.pieces.size()
                  << ", square side: " << d.square_side.get_str()
                  << ", subgrid: " << d.subgrid << "\n";
        return kExitOk;
      }

      if (tm_tape.empty())
        throw CLI::ValidationError("tm " + tm_kind + " requires --tape");
      man.input(tm_tape);
      const Tape tape = tape_from_json(load_json_file(tm_tape));

      if (tm_kind == "run") {
        const RunResult r = symbolic_run(tm, tape, tm_steps);
        man.param("halted", r.halted);
        man.param("steps", r.steps);
        man.write(manifest_path);
        std::cout << (r.halted ? "halted" : "no halt") << " after " << r.steps
                  << " steps\n";
        return r.halted ? kExitOk : kExitBudget;
      }

      if (tm_kind == "orbit" || tm_kind == "suspend") {
        const CompiledDiffeo d = compile(tm, b);
        // halting window from the symbolic oracle when it halts in budget
        const RunResult sym = symbolic_run(tm, tape, tm_steps);
        std::unique_ptr<HaltingSet> U;
        if (sym.halted) {
          std::vector<int> window;
          for (long i = -tm_window; i <= tm_window; ++i)
            window.push_back(sym.final_config.tape.at(i));
          U = std::make_unique<HaltingSet>(halting_set(window, tm_window, b));
        }
        const OrbitResult orb = run_orbit(d, tape, tm_steps, U.get());
        std::ostringstream csv;
        write_orbit_csv(csv, orb.orbit);
        write_file(tm_out, csv.str());
        man.output(tm_out);
        man.param("entered_U", orb.entered_U);
        man.param("entry_step", orb.step_index);
        if (tm_kind == "suspend" && !orb.orbit.empty()) {
          // cross-check: the suspension time-1 map from the starting point
          // agrees with the first orbit step
          const auto& [z0, w0] = orb.orbit.front();
          const SuspensionPoint sp =
              suspension_eval(suspend(d), z0, w0, 0, 1);
          const bool same =
              orb.orbit.size() < 2 ||
              (sp.z == orb.orbit[1].first && sp.w.u == orb.orbit[1].second.u &&
               sp.w.v == orb.orbit[1].second.v);
          man.param("suspension_time1_matches", same);
          std::cout << "suspension time-1 map matches step: "
                    << (same ? "yes" : "NO") << "\n";
        }
        man.write(manifest_path);
        std::cout << (orb.entered_U
                          ? "entered U at step " + std::to_string(orb.step_index)
                          : orb.halted ? "halted outside the digit window"
                                       : "no entry within budget")
                  << " (orbit: " << tm_out << ")\n";
        if (orb.entered_U) return kExitOk;
        return orb.budget_exhausted ? kExitBudget : kExitOk;
      }
      throw CLI::ValidationError("tm: kind must be run|compile|orbit|suspend");
    }

    if (sub == ver) {
      man.param("data", ver_data);
      AcceptanceOptions opt;
      opt.data_dir = ver_data;
      opt.seed = seed;
      const int failures = run_acceptance(std::cout, opt);
      man.param("failures", failures);
      man.write(manifest_path);
      return failures == 0 ? kExitOk : kExitError;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

#include "wellflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "wellflow/adapted.hpp"
#include "wellflow/embed.hpp"
#include "wellflow/io.hpp"
#include "wellflow/nlw.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/turing.hpp"
#include "wellflow/well.hpp"

namespace wellflow {

namespace {

struct CriterionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw CriterionFailure(msg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream ss;
  ss << std::setprecision(prec) << v;
  return ss.str();
}

struct Ctx {
  AcceptanceOptions opt;
  TorusFlow bryant, rotation, circle, product;

  TorusFlow load_flow(const std::string& name) const {
    return flow_from_json(load_json_file(opt.data_dir + "/" + name));
  }
  OneForm load_form(const std::string& name) const {
    return form_from_json(load_json_file(opt.data_dir + "/" + name));
  }
  TuringMachine load_tm(const std::string& name) const {
    return tm_from_json(load_json_file(opt.data_dir + "/" + name));
  }
};

// max absolute coefficient difference between two 1-forms
double form_coeff_distance(const OneForm& a, const OneForm& b) {
  require(a.dim == b.dim, "form dimension mismatch");
  double d = 0.0;
  for (int j = 0; j < a.dim; ++j) {
    TrigPoly diff = a.components[j];
    diff -= b.components[j];
    for (const auto& [k, cs] : diff.terms())
      d = std::max({d, std::abs(cs.c), std::abs(cs.s)});
  }
  return d;
}

// ---------------------------------------------------------------- 1: LP ---

std::string crit_obstruction_lp(const Ctx& ctx) {
  const Rat eps(1, 1000);
  std::ostringstream detail;
  detail << "bryant infeasible at K=";
  for (int K = 0; K <= 3; ++K) {
    const auto t0 = std::chrono::steady_clock::now();
    const AdaptedLP lp = build_lp(ctx.bryant, K, eps, 64);
    const AdaptedCertificate cert = solve(lp);  // verifies Farkas exactly
    const double dt = seconds_since(t0);
    require(cert.verdict == AdaptedCertificate::Verdict::InfeasibleAtDegree,
            "bryant flow must be infeasible at K=" + std::to_string(K));
    require(cert.farkas_gap > 0 && cert.farkas_residual == 0,
            "Farkas certificate not verified at K=" + std::to_string(K));
    require(dt < 60.0, "K=" + std::to_string(K) + " exceeded 60 s (" +
                           fmt(dt) + " s)");
    detail << K << (K < 3 ? "," : " ");
    if (K == 3) detail << "(" << fmt(dt, 2) << "s at K=3)";
  }

  const struct {
    const TorusFlow* flow;
    int grid;
    const char* name;
  } controls[] = {{&ctx.rotation, 64, "rotation"}, {&ctx.product, 16, "product"}};
  for (const auto& c : controls) {
    const auto t0 = std::chrono::steady_clock::now();
    const AdaptedLP lp = build_lp(*c.flow, 0, eps, c.grid);
    const AdaptedCertificate cert = solve(lp);
    const double dt = seconds_since(t0);
    require(cert.verdict == AdaptedCertificate::Verdict::Feasible,
            std::string(c.name) + " control must be feasible");
    require(cert.report.strong(),
            std::string(c.name) + " witness not strongly adapted");
    require(cert.report.min_thetaY >= 5e-4,
            std::string(c.name) + " witness margin below eps/2");
    require(dt < 10.0, std::string(c.name) + " control exceeded 10 s");
    detail << "; " << c.name << " witness margin "
           << fmt(cert.report.min_thetaY, 3);
  }
  return detail.str();
}

// -------------------------------------------------- 2: trajectory oracle ---

std::string crit_trajectory_oracle(const Ctx& ctx) {
  double worst = 0.0;
  for (const double x0 : {0.1, 0.25, 0.4}) {
    Vec p0(2);
    p0 << x0, 0.2;
    const Vec pT = flow_map(ctx.bryant, 5.0, p0, 1e-10);
    // closed form: tan(pi x(t)) = tan(pi x0) e^{2 pi t}
    const double oracle =
        std::atan(std::tan(std::numbers::pi * x0) *
                  std::exp(2.0 * std::numbers::pi * 5.0)) /
        std::numbers::pi;
    require(std::abs(pT[0] - 0.5) < 1e-6,
            "x(5) not within 1e-6 of 1/2 from x0=" + fmt(x0));
    require(std::abs(pT[0] - oracle) < 1e-6,
            "x(5) disagrees with the closed form from x0=" + fmt(x0));
    worst = std::max(worst, std::abs(pT[0] - oracle));
  }

  double drift = 0.0;
  for (const double xc : {0.0, 0.5}) {
    Vec p0(2);
    p0 << xc, 0.2;
    const Trajectory tr = integrate(ctx.bryant, p0, 10.0, 1e-3);
    for (const Vec& p : tr.points) drift = std::max(drift, std::abs(p[0] - xc));
  }
  require(drift < 1e-10, "invariant circle drift " + fmt(drift));
  return "closed-form error " + fmt(worst, 2) + ", circle drift " +
         fmt(drift, 2);
}

// ------------------------------------------------- 3: canonical 1-form ---

std::string crit_canonical_form(const Ctx& ctx) {
  std::mt19937 rng(ctx.opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<WellState> samples;
  for (int i = 0; i < 100; ++i) {
    WellState s;
    s.q = Vec(2);
    s.p = Vec(2);
    for (int d = 0; d < 2; ++d) {
      s.q[d] = u(rng);
      s.p[d] = u(rng);
    }
    samples.push_back(std::move(s));
  }
  const PotentialPtr harmonic = PolynomialPotential::harmonic(2);
  const auto quartic = std::make_shared<PolynomialPotential>(
      2, std::map<PolynomialPotential::Exponents, double>{
             {{4, 0}, 0.25}, {{0, 4}, 0.25}, {{2, 2}, 0.5}});
  const double r1 = canonical_form_check(*harmonic, samples, 1e-5);
  const double r2 = canonical_form_check(*quartic, samples, 1e-5);
  require(r1 < 1e-6, "harmonic residual " + fmt(r1));
  require(r2 < 1e-6, "quartic residual " + fmt(r2));
  return "residuals " + fmt(r1, 2) + " (harmonic), " + fmt(r2, 2) +
         " (quartic)";
}

// ------------------------------------------------------- 4: averaging ---

std::string crit_averaging(const Ctx& ctx) {
  const OneForm halfsin = ctx.load_form("halfsin.form.json");
  const AveragedForm av = average(ctx.circle, halfsin, 64);
  const double dist = form_coeff_distance(av.form, OneForm::coordinate(1, 0));
  require(dist < 1e-8, "averaged circle-shift form differs from dt by " +
                           fmt(dist));
  require(check_adapted(ctx.circle, av.form).strong(),
          "averaged circle-shift form not strongly adapted");

  // weakly adapted input on the rotation flow: theta = (1 - cos 2 pi x) dx
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({0, 0}, 1.0, 0.0);
  comps[0].add_term({1, 0}, -1.0, 0.0);
  const OneForm weak(2, std::move(comps));
  require(!check_adapted(ctx.rotation, weak).strong(),
          "weak example unexpectedly strong before averaging");
  const AveragedForm av2 = average(ctx.rotation, weak, 64);
  const AdaptationReport rep = check_adapted(ctx.rotation, av2.form);
  require(rep.strong() && rep.min_thetaY > 0,
          "averaged weak form not strongly adapted");
  return "dt recovered to " + fmt(dist, 2) + "; weak example margin " +
         fmt(rep.min_thetaY, 3);
}

// ------------------------------------------------- 5: symplectic suite ---

std::string crit_symplectic(const Ctx& ctx) {
  const PotentialPtr V = PolynomialPotential::harmonic(2);
  WellState s0;
  s0.q = Vec(2);
  s0.p = Vec(2);
  s0.q << 1.0, 0.0;
  s0.p << 0.0, 1.0;

  const WellTrajectory tr = integrate_well(*V, s0, 100.0, 1e-3);
  const double H0 = energy(*V, tr.states.front());
  double drift = 0.0;
  for (const auto& s : tr.states)
    drift = std::max(drift, std::abs(energy(*V, s) - H0));
  drift /= std::abs(H0);
  require(drift < 1e-6, "energy drift " + fmt(drift));

  const WellTrajectory fwd = integrate_well(*V, s0, 10.0, 1e-3);
  WellState back0 = fwd.states.back();
  back0.p = -back0.p;
  const WellTrajectory bwd = integrate_well(*V, back0, 10.0, 1e-3);
  const double rev = (bwd.states.back().q - s0.q).cwiseAbs().maxCoeff() +
                     (bwd.states.back().p + s0.p).cwiseAbs().maxCoeff();
  require(rev < 1e-8, "reversibility error " + fmt(rev));

  double pmax = 0.0;
  for (const TorusFlow* f : {&ctx.bryant, &ctx.rotation, &ctx.product}) {
    const LiftedSystem lift = cotangent_lift(*f);
    Vec q0 = Vec::Constant(f->dim, 0.3);
    const Trajectory tr2 = lift.integrate(lift.zero_section(q0), 10.0, 1e-3);
    for (const Vec& qp : tr2.points)
      pmax = std::max(pmax, qp.tail(f->dim).cwiseAbs().maxCoeff());
  }
  require(pmax < 1e-10, "zero section not preserved, max |p| = " + fmt(pmax));
  return "drift " + fmt(drift, 2) + ", reversibility " + fmt(rev, 2) +
         ", zero-section |p| " + fmt(pmax, 2);
}

// ------------------------------------------------------------- 6: NLW ---

std::string crit_nlw(const Ctx&) {
  const int N = 64;
  const PotentialPtr V = PolynomialPotential::harmonic(1);

  // spatially constant data reduces to the well
  WellState s0;
  s0.q = Vec::Constant(1, 0.3);
  s0.p = Vec::Constant(1, 0.2);
  const WellTrajectory wt = integrate_well(*V, s0, 5.0, 1e-3);
  const NLWTrajectory nt =
      integrate_nlw(*V, constant_nlw_state(N, s0.q, s0.p), 5.0, 1e-3);
  require(wt.states.size() == nt.states.size(), "trajectory lengths differ");
  double dev = 0.0;
  for (size_t i = 0; i < wt.states.size(); ++i) {
    const auto& ns = nt.states[i];
    dev = std::max(dev,
                   (ns.Q.array() - wt.states[i].q[0]).abs().maxCoeff());
    dev = std::max(dev,
                   (ns.P.array() - wt.states[i].p[0]).abs().maxCoeff());
  }
  require(dev < 1e-9, "constant-data reduction deviation " + fmt(dev));

  // linear wave oracle: u = cos(2 pi x - omega t), omega^2 = (2 pi)^2 + 1
  const double omega = std::sqrt(4.0 * std::numbers::pi * std::numbers::pi + 1.0);
  NLWState w0;
  w0.Q = Eigen::MatrixXd(N, 1);
  w0.P = Eigen::MatrixXd(N, 1);
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    w0.Q(i, 0) = std::cos(2.0 * std::numbers::pi * x);
    w0.P(i, 0) = omega * std::sin(2.0 * std::numbers::pi * x);
  }
  const NLWTrajectory lw = integrate_nlw(*V, w0, 1.0, 1e-4);
  double werr = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    werr = std::max(werr, std::abs(lw.states.back().Q(i, 0) -
                                   std::cos(2.0 * std::numbers::pi * x - omega)));
  }
  require(werr < 1e-6, "linear wave error " + fmt(werr));

  const NLWTrajectory en = integrate_nlw(*V, w0, 10.0, 5e-4);
  const double E0 = nlw_energy(*V, en.states.front());
  double edrift = 0.0;
  for (const auto& s : en.states)
    edrift = std::max(edrift, std::abs(nlw_energy(*V, s) - E0));
  edrift /= std::abs(E0);
  require(edrift < 1e-5, "NLW energy drift " + fmt(edrift));
  return "reduction " + fmt(dev, 2) + ", wave error " + fmt(werr, 2) +
         ", energy drift " + fmt(edrift, 2);
}

// ------------------------------------------------- 7: Turing conjugacy ---

Tape random_tape(std::mt19937& rng, int k) {
  std::uniform_int_distribution<int> len(0, 5), sym(0, k), first(-2, 0);
  const int L = len(rng);
  std::vector<int> window;
  for (int i = 0; i < L; ++i) window.push_back(sym(rng));
  if (window.empty()) window.push_back(sym(rng));
  return Tape(window, first(rng), 0, 0);
}

std::string crit_turing(const Ctx& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(ctx.opt.seed + 7);
  const char* names[] = {"writer.tm.json", "incrementer.tm.json",
                         "selfloop.tm.json", "copier.tm.json",
                         "counter.tm.json"};
  const long budget = 1000;
  int tapes_tested = 0, halted_cases = 0, nonhalt_cases = 0;
  double min_nonhalt_dist = std::numeric_limits<double>::infinity();

  for (const char* name : names) {
    const TuringMachine tm = ctx.load_tm(name);
    const int b = 10 * tm.k;
    const CompiledDiffeo d = compile(tm, b);
    for (int trial = 0; trial < 12; ++trial) {
      const Tape tape = random_tape(rng, tm.k);
      ++tapes_tested;

      // step-by-step conjugacy, exact rational equality on the tape factor
      Configuration c{tm.start, tape};
      Rat2 z = d.state_center(tm.start);
      TapePoint w = encode_tape(tape, b);
      long steps = 0;
      while (c.q != tm.halt && steps < budget) {
        const Configuration c2 = symbolic_step(tm, c);
        const StepPoint sp = step_point(d, z, w);
        require(sp.status == StepPoint::Status::Ok,
                std::string(name) + ": unexpected step status");
        const TapePoint enc = encode_tape(c2.tape, b);
        require(sp.w.u == enc.u && sp.w.v == enc.v,
                std::string(name) + ": conjugacy broken at step " +
                    std::to_string(steps));
        require(d.B[c2.q].contains(sp.z),
                std::string(name) + ": image outside the target state square");
        c = c2;
        z = sp.z;
        w = sp.w;
        ++steps;
      }

      // halting equivalence through the halting set
      const RunResult sym = symbolic_run(tm, tape, budget);
      if (sym.halted) {
        ++halted_cases;
        const Tape& ft = sym.final_config.tape;
        const long n = std::max({1L, -ft.window_first(), ft.window_last()});
        std::vector<int> window;
        for (long i = -n; i <= n; ++i) window.push_back(ft.at(i));
        const HaltingSet U = halting_set(window, n, b);
        const OrbitResult orb = run_orbit(d, tape, budget, &U);
        require(orb.entered_U, std::string(name) + ": orbit missed U");
        require(orb.step_index == sym.steps,
                std::string(name) + ": entry step " +
                    std::to_string(orb.step_index) + " != symbolic halt " +
                    std::to_string(sym.steps));
      } else {
        ++nonhalt_cases;
        const OrbitResult orb = run_orbit(d, tape, budget, nullptr);
        require(orb.budget_exhausted && !orb.entered_U,
                std::string(name) + ": halting equivalence broken");
        require(orb.min_distance_to_U >= 0.01,
                std::string(name) + ": orbit approaches U, distance " +
                    fmt(orb.min_distance_to_U));
        min_nonhalt_dist = std::min(min_nonhalt_dist, orb.min_distance_to_U);
      }
    }
  }
  const double dt = seconds_since(t0);
  require(tapes_tested >= 50, "corpus too small");
  require(halted_cases > 0 && nonhalt_cases > 0, "corpus not diverse");
  require(dt < 120.0, "runtime " + fmt(dt) + " s over the 2 min budget");
  return std::to_string(tapes_tested) + " tapes, " +
         std::to_string(halted_cases) + " halting, distance floor " +
         fmt(min_nonhalt_dist, 3) + " (" + fmt(dt, 2) + "s)";
}

// --------------------------------------------------- 8: shift relation ---

std::string crit_shift(const Ctx& ctx) {
  std::mt19937 rng(ctx.opt.seed + 13);
  std::uniform_int_distribution<int> kd(1, 3), len(1, 8), first(-4, 2);
  for (int i = 0; i < 100; ++i) {
    const int k = kd(rng);
    const int b = 10 * k;
    std::uniform_int_distribution<int> sym(0, k);
    std::vector<int> window;
    const int L = len(rng);
    for (int j = 0; j < L; ++j) window.push_back(sym(rng));
    const Tape tape(window, first(rng), sym(rng), sym(rng));
    require(shift_check(tape, b), "shift relation failed on tape " +
                                      std::to_string(i));
  }
  return "100 random eventually-constant tapes, exact";
}

// ------------------------------------------------------- 9: embedding ---

std::string crit_embedding(const Ctx& ctx) {
  std::ostringstream detail;

  // circle shift, exact flat path
  {
    const OneForm theta = OneForm::coordinate(1, 0);
    const MetricField metric =
        build_metric(ctx.circle, theta, Eigen::MatrixXd::Identity(1, 1));
    require(metric.exact && metric.duality_residual(ctx.circle, theta) == 0.0,
            "circle metric duality not exact");
    EmbeddingMap e = flat_embedding(metric);
    attach_momentum(e, ctx.circle);
    const ExactnessResult ex = is_exact(lie_derivative(ctx.circle, theta));
    require(ex.exact, "L_Y theta not exact on the circle");
    const ExtendedPotential V = build_potential(e, ctx.circle, ex.potential);
    require(V.uouo_residual() < 1e-8,
            "circle on-manifold gradient residual " + fmt(V.uouo_residual()));
    const VerifyReport vr = verify_embedding(
        ctx.circle, e, V, {Vec::Constant(1, 0.1), Vec::Constant(1, 0.62)},
        10.0, 1e-6);
    require(vr.pass, "circle end-to-end deviation " + fmt(vr.max_deviation));
    detail << "circle dev " << fmt(vr.max_deviation, 2);
  }

  // T^2 rotation with theta the g0-dual of Y: the metric is exactly I
  {
    std::vector<TrigPoly> comps;
    for (int i = 0; i < 2; ++i) comps.push_back(ctx.rotation.components[i]);
    const OneForm theta(2, std::move(comps));
    const MetricField metric =
        build_metric(ctx.rotation, theta, Eigen::MatrixXd::Identity(2, 2));
    require(metric.exact &&
                metric.duality_residual(ctx.rotation, theta) == 0.0,
            "rotation metric duality not exact");
    EmbeddingMap e = flat_embedding(metric);
    attach_momentum(e, ctx.rotation);
    const ExactnessResult ex = is_exact(lie_derivative(ctx.rotation, theta));
    require(ex.exact, "L_Y theta not exact on the rotation flow");
    const ExtendedPotential V = build_potential(e, ctx.rotation, ex.potential);
    require(V.uouo_residual() < 1e-8,
            "rotation on-manifold gradient residual " +
                fmt(V.uouo_residual()));
    Vec y0(2), y1(2);
    y0 << 0.15, 0.3;
    y1 << 0.7, 0.05;
    const VerifyReport vr =
        verify_embedding(ctx.rotation, e, V, {y0, y1}, 10.0, 1e-4);
    require(vr.pass, "rotation end-to-end deviation " + fmt(vr.max_deviation));
    detail << ", rotation dev " << fmt(vr.max_deviation, 2)
           << ", duality exact";
  }
  return detail.str();
}

// ------------------------------------------------ 10: pullback suite ---

std::string crit_pullback(const Ctx& ctx) {
  // projection of the product flow onto its first two coordinates
  const ChartMap proj = ChartMap::projection(3, {0, 1});
  const MorphismReport mr = check_morphism(proj, ctx.product, ctx.bryant, 16, 1e-12);
  require(mr.max_residual == 0.0,
          "projection morphism residual " + fmt(mr.max_residual));

  // pullback of dt along the circle-factor projection is strongly adapted
  const ChartMap proj_t = ChartMap::projection(3, {2});
  const PullbackResult pb = pullback(proj_t, OneForm::coordinate(1, 0));
  require(pb.exact, "projection pullback should be exact");
  require(check_adapted(ctx.product, pb.form).strong(),
          "pulled-back dt not strongly adapted upstream");

  // functoriality (phi o psi)^* = psi^* o phi^* for integer-affine maps,
  // exact because all coefficients stay dyadic
  Eigen::MatrixXi A1(2, 2), A2(2, 2);
  A1 << 1, 1, 0, 1;
  A2 << 2, 1, 1, 1;
  const ChartMap phi = ChartMap::affine_integer(A1, Vec::Zero(2));
  const ChartMap psi = ChartMap::affine_integer(A2, Vec::Zero(2));
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({1, 0}, 0.5, 0.25);
  comps[0].add_term({0, 2}, 1.0, -0.5);
  comps[1].add_term({1, -1}, 0.25, 0.75);
  const OneForm theta(2, std::move(comps));
  const OneForm lhs = pullback(ChartMap::compose(phi, psi), theta).form;
  const OneForm rhs = pullback(psi, pullback(phi, theta).form).form;
  const double d = form_coeff_distance(lhs, rhs);
  require(d == 0.0, "functoriality defect " + fmt(d));
  return "projection residual 0, dt pullback strong, functoriality exact";
}

}  // namespace

int run_acceptance(std::ostream& os, const AcceptanceOptions& opt) {
  Ctx ctx;
  ctx.opt = opt;
  ctx.bryant = ctx.load_flow("bryant.flow.json");
  ctx.rotation = ctx.load_flow("rotation.flow.json");
  ctx.circle = ctx.load_flow("circle.flow.json");
  ctx.product = ctx.load_flow("product.flow.json");

  const struct {
    const char* name;
    std::function<std::string(const Ctx&)> run;
  } criteria[] = {
      {"obstruction-lp", crit_obstruction_lp},
      {"trajectory-oracle", crit_trajectory_oracle},
      {"canonical-form", crit_canonical_form},
      {"averaging", crit_averaging},
      {"symplectic-suite", crit_symplectic},
      {"nlw-reduction", crit_nlw},
      {"turing-conjugacy", crit_turing},
      {"shift-relation", crit_shift},
      {"embedding-pipeline", crit_embedding},
      {"pullback-suite", crit_pullback},
  };

  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    std::string detail;
    bool ok = true;
    try {
      detail = c.run(ctx);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
      ++failures;
    }
    os << (ok ? "[PASS] " : "[FAIL] ") << std::setw(2) << index << " "
       << c.name << ": " << detail << "\n";
    os.flush();
  }
  return failures;
}

}  // namespace wellflow

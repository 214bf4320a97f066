#include <doctest.h>

#include <cmath>

#include "wellflow/nlw.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/well.hpp"

using namespace wellflow;

TEST_SUITE_BEGIN("well");

TEST_CASE("harmonic oscillator: q(t) = cos t") {
  const PotentialPtr V = PolynomialPotential::harmonic(1);
  WellState s0{Vec::Constant(1, 1.0), Vec::Zero(1)};
  const WellTrajectory tr = integrate_well(*V, s0, 2.0, 1e-4);
  for (size_t i = 0; i < tr.states.size(); i += 1000) {
    const double t = tr.times[i];
    CHECK(tr.states[i].q[0] == doctest::Approx(std::cos(t)).epsilon(1e-7));
    CHECK(tr.states[i].p[0] == doctest::Approx(-std::sin(t)).epsilon(1e-7));
  }
}

TEST_CASE("leapfrog conserves energy to second order") {
  const PotentialPtr V = PolynomialPotential::harmonic(2);
  WellState s0{Vec::Constant(2, 0.8), Vec::Constant(2, -0.3)};
  const WellTrajectory tr = integrate_well(*V, s0, 50.0, 1e-3);
  const double H0 = energy(*V, s0);
  for (const auto& s : tr.states)
    CHECK(std::abs(energy(*V, s) - H0) / std::abs(H0) < 1e-6);
}

TEST_CASE("cotangent lift: Hamiltonian constant, zero section invariant") {
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({1, 0}, 0.0, 1.0);
  comps[1].add_term({1, 0}, 1.0, 0.0);
  const TorusFlow f(2, comps);
  const LiftedSystem lift = cotangent_lift(f);

  Vec qp0(4);
  qp0 << 0.2, 0.5, 0.3, -0.4;
  const Trajectory tr = lift.integrate(qp0, 5.0, 1e-3);
  const double H0 = lift.hamiltonian(qp0);
  // momenta grow like e^{2 pi t} along this flow, so compare relative to
  // the size of the phase point rather than absolutely
  const Vec& qpT = tr.points.back();
  CHECK(std::abs(lift.hamiltonian(qpT) - H0) <
        1e-10 * (1.0 + qpT.cwiseAbs().maxCoeff()));

  const Trajectory zs =
      lift.integrate(lift.zero_section(qp0.head(2)), 5.0, 1e-3);
  for (const Vec& qp : zs.points) CHECK(qp.tail(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("canonical-form identity via finite differences") {
  std::vector<WellState> samples;
  for (int i = 0; i < 10; ++i) {
    WellState s;
    s.q = Vec::Constant(2, 0.1 * i - 0.5);
    s.p = Vec::Constant(2, 0.07 * i - 0.3);
    samples.push_back(s);
  }
  CHECK(canonical_form_check(*PolynomialPotential::harmonic(2), samples,
                             1e-5) < 1e-6);
}

TEST_CASE("constant NLW data reduces to the well") {
  const PotentialPtr V = PolynomialPotential::harmonic(1);
  WellState s0{Vec::Constant(1, 0.4), Vec::Constant(1, -0.1)};
  const WellTrajectory wt = integrate_well(*V, s0, 1.0, 1e-3);
  const NLWTrajectory nt =
      integrate_nlw(*V, constant_nlw_state(32, s0.q, s0.p), 1.0, 1e-3);
  REQUIRE(wt.states.size() == nt.states.size());
  for (size_t i = 0; i < wt.states.size(); i += 100) {
    CHECK((nt.states[i].Q.array() - wt.states[i].q[0]).abs().maxCoeff() <
          1e-10);
    CHECK((nt.states[i].P.array() - wt.states[i].p[0]).abs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("spectral Laplacian is exact on a pure mode") {
  const int N = 32;
  Eigen::MatrixXd Q(N, 1);
  for (int i = 0; i < N; ++i)
    Q(i, 0) = std::cos(2.0 * std::numbers::pi * 3.0 * i / N);
  const Eigen::MatrixXd L = spectral_laplacian(Q);
  const double lam = -std::pow(2.0 * std::numbers::pi * 3.0, 2);
  CHECK((L - lam * Q).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_SUITE_END();

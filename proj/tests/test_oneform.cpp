#include <doctest.h>

#include <cmath>
#include <random>

#include "wellflow/io.hpp"
#include "wellflow/oneform.hpp"

using namespace wellflow;

namespace {

TorusFlow load_flow(const char* name) {
  return flow_from_json(load_json_file(std::string(TEST_DATA_DIR) + "/" + name));
}

// numeric oracle for the Lie derivative: d/dt ((e^{tY})^* theta)(e_j) at t=0
double lie_fd(const TorusFlow& Y, const OneForm& theta, const Vec& y, int j) {
  const double t = 1e-5;
  auto pull = [&](double s) {
    Eigen::MatrixXd J;
    const Vec fy = flow_map_with_jacobian(Y, s, y, J, 1e-6);
    double acc = 0.0;
    for (int i = 0; i < theta.dim; ++i)
      acc += theta.components[i].eval(fy) * J(i, j);
    return acc;
  };
  return (pull(t) - pull(-t)) / (2.0 * t);
}

}  // namespace

TEST_SUITE_BEGIN("oneform");

TEST_CASE("coefficient-space Lie derivative matches the flow definition") {
  const TorusFlow Y = load_flow("bryant.flow.json");
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({0, 1}, 0.6, -0.3);
  comps[1].add_term({1, 1}, 0.2, 0.9);
  const OneForm theta(2, comps);
  const OneForm lie = lie_derivative(Y, theta);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 10; ++s) {
    Vec y(2);
    y << u(rng), u(rng);
    for (int j = 0; j < 2; ++j)
      CHECK(lie.components[j].eval(y) ==
            doctest::Approx(lie_fd(Y, theta, y, j)).epsilon(1e-4));
  }
}

TEST_CASE("is_exact recovers the potential of an exterior derivative") {
  TrigPoly L(2);
  L.add_term({1, 0}, 0.5, 0.0);
  L.add_term({1, 2}, -0.25, 1.5);
  const ExactnessResult r = is_exact(exterior_derivative(L));
  REQUIRE(r.exact);
  CHECK(r.residual < 1e-12);
  Vec y(2);
  y << 0.37, 0.11;
  CHECK(r.potential.eval(y) == doctest::Approx(L.eval(y)).epsilon(1e-12));
}

TEST_CASE("forms with periods are closed but not exact") {
  // dx on T^2: closed, but its cycle integral is 1
  const OneForm dx = OneForm::coordinate(2, 0);
  CHECK(!is_exact(dx).exact);
  CHECK(cycle_integral(dx, 0, Vec::Zero(2)) == doctest::Approx(1.0));
  CHECK(cycle_integral(dx, 1, Vec::Zero(2)) == doctest::Approx(0.0));
}

TEST_CASE("check_adapted classifies the standard examples") {
  const TorusFlow rot = load_flow("rotation.flow.json");
  CHECK(check_adapted(rot, OneForm::coordinate(2, 0)).strong());

  // theta(Y) = 1 - cos 2 pi x >= 0 with a zero: weak, not strong
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({0, 0}, 1.0, 0.0);
  comps[0].add_term({1, 0}, -1.0, 0.0);
  const AdaptationReport rep = check_adapted(rot, OneForm(2, comps));
  CHECK(rep.classification == AdaptationReport::Class::Weak);

  // theta(Y) changes sign: no adaptation
  std::vector<TrigPoly> neg(2, TrigPoly(2));
  neg[0].add_term({1, 0}, 1.0, 0.0);
  CHECK(check_adapted(rot, OneForm(2, neg)).classification ==
        AdaptationReport::Class::None);
}

TEST_CASE("averaging the circle-shift form gives dt exactly") {
  const TorusFlow circle = load_flow("circle.flow.json");
  const OneForm halfsin = form_from_json(
      load_json_file(std::string(TEST_DATA_DIR) + "/halfsin.form.json"));
  const AveragedForm av = average(circle, halfsin, 64);
  CHECK(av.fit_residual < 1e-10);
  TrigPoly diff = av.form.components[0];
  diff -= TrigPoly::constant(1, 1.0);
  for (const auto& [k, cs] : diff.terms()) {
    CHECK(std::abs(cs.c) < 1e-9);
    CHECK(std::abs(cs.s) < 1e-9);
  }
}

TEST_CASE("pullback along integer-affine maps is exact and functorial") {
  Eigen::MatrixXi A(2, 2);
  A << 1, 2, 0, 1;
  const ChartMap phi = ChartMap::affine_integer(A, Vec::Zero(2));
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({1, 0}, 0.5, 0.25);
  comps[1].add_term({0, 1}, -0.5, 1.0);
  const OneForm theta(2, comps);
  const PullbackResult pb = pullback(phi, theta);
  REQUIRE(pb.exact);

  // (phi^* theta)(v)|_y = theta(A v)|_{phi(y)}: compare pointwise
  for (const double t : {0.0, 0.3, 0.71}) {
    Vec y(2);
    y << t, 0.5 - t / 3;
    const Vec fy = phi.eval(y);
    for (int j = 0; j < 2; ++j) {
      double expect = 0.0;
      for (int i = 0; i < 2; ++i)
        expect += theta.components[i].eval(fy) * A(i, j);
      CHECK(pb.form.components[j].eval(y) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_SUITE_END();

#include <doctest.h>

#include "wellflow/embed.hpp"
#include "wellflow/io.hpp"
#include "wellflow/oneform.hpp"

using namespace wellflow;

namespace {

TorusFlow load_flow(const char* name) {
  return flow_from_json(load_json_file(std::string(TEST_DATA_DIR) + "/" + name));
}

}  // namespace

TEST_SUITE_BEGIN("embed");

TEST_CASE("metric duality g Y = theta, exact for constant flows") {
  const TorusFlow rot = load_flow("rotation.flow.json");
  std::vector<TrigPoly> comps;
  for (int i = 0; i < 2; ++i) comps.push_back(rot.components[i]);
  const OneForm theta(2, comps);  // theta = g0 Y with g0 = I
  const MetricField m =
      build_metric(rot, theta, Eigen::MatrixXd::Identity(2, 2));
  CHECK(m.exact);
  CHECK(m.duality_residual(rot, theta) == 0.0);
  CHECK(m.pd.certified);
  CHECK((m.constant_part() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("flat embedding of the identity metric is a torus of circles") {
  const TorusFlow rot = load_flow("rotation.flow.json");
  std::vector<TrigPoly> comps;
  for (int i = 0; i < 2; ++i) comps.push_back(rot.components[i]);
  const MetricField m = build_metric(rot, OneForm(2, comps),
                                     Eigen::MatrixXd::Identity(2, 2));
  const EmbeddingMap e = flat_embedding(m);
  CHECK(e.m == 4);
  CHECK(e.residual < 1e-12);
  CHECK(e.gram_min > 0);
  // isometry spot check: <d_i q, d_j q> = delta_ij at a random point
  Vec y(2);
  y << 0.23, 0.77;
  const Eigen::MatrixXd J = e.jac_q(y);
  CHECK((J.transpose() * J - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("attached momentum is the embedded velocity") {
  const TorusFlow circle = load_flow("circle.flow.json");
  const MetricField m = build_metric(circle, OneForm::coordinate(1, 0),
                                     Eigen::MatrixXd::Identity(1, 1));
  EmbeddingMap e = flat_embedding(m);
  attach_momentum(e, circle);
  const double h = 1e-6;
  for (const double y0 : {0.1, 0.45, 0.9}) {
    const Vec qp = e.eval_q(Vec::Constant(1, y0 + h));
    const Vec qm = e.eval_q(Vec::Constant(1, y0 - h));
    const Vec v = (qp - qm) / (2.0 * h);  // dq/dt along ydot = 1
    CHECK((e.eval_p(Vec::Constant(1, y0)) - v).norm() < 1e-8);
  }
}

TEST_CASE("extended potential: projection, tube and on-manifold gradient") {
  const TorusFlow circle = load_flow("circle.flow.json");
  const OneForm theta = OneForm::coordinate(1, 0);
  const MetricField m =
      build_metric(circle, theta, Eigen::MatrixXd::Identity(1, 1));
  EmbeddingMap e = flat_embedding(m);
  attach_momentum(e, circle);
  const ExactnessResult ex = is_exact(lie_derivative(circle, theta));
  REQUIRE(ex.exact);
  const ExtendedPotential V = build_potential(e, circle, ex.potential);

  CHECK(V.uouo_residual() < 1e-10);
  CHECK(V.tube_radius() > 1e-4);

  // projection returns the base point on the manifold
  const Vec y0 = Vec::Constant(1, 0.31);
  const Vec q0 = e.eval_q(y0);
  CHECK(std::abs(V.project(q0)[0] - 0.31) < 1e-9);

  // and the projection of a nudged point along the normal is unchanged
  const Vec n = (q0 / q0.norm()) * (0.3 * V.tube_radius());
  CHECK(std::abs(V.project(q0 + n)[0] - 0.31) < 1e-9);

  // gradient on the manifold equals -a = (2 pi)^2 q for the unit-speed circle
  const Vec g = V.grad(q0);
  CHECK((g - 4.0 * std::numbers::pi * std::numbers::pi * q0).norm() < 1e-8);

  // far away only the coercive tail acts
  const Vec far = Vec::Constant(2, 3.0);
  CHECK(V.eval(far) == doctest::Approx(V.tau * far.squaredNorm()));
}

TEST_CASE("gradient of the extended potential matches finite differences") {
  const TorusFlow circle = load_flow("circle.flow.json");
  const OneForm theta = OneForm::coordinate(1, 0);
  const MetricField m =
      build_metric(circle, theta, Eigen::MatrixXd::Identity(1, 1));
  EmbeddingMap e = flat_embedding(m);
  attach_momentum(e, circle);
  const ExtendedPotential V =
      build_potential(e, circle, is_exact(lie_derivative(circle, theta)).potential);

  const Vec y0 = Vec::Constant(1, 0.08);
  Vec z = e.eval_q(y0);
  z[0] += 0.2 * V.tube_radius();  // off the manifold, inside the tube
  const Vec g = V.grad(z);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vec zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    CHECK(g[i] == doctest::Approx((V.eval(zp) - V.eval(zm)) / (2 * h))
                      .epsilon(1e-4));
  }
}

TEST_CASE("short end-to-end verification on the circle") {
  const TorusFlow circle = load_flow("circle.flow.json");
  const OneForm theta = OneForm::coordinate(1, 0);
  const MetricField m =
      build_metric(circle, theta, Eigen::MatrixXd::Identity(1, 1));
  EmbeddingMap e = flat_embedding(m);
  attach_momentum(e, circle);
  const ExtendedPotential V =
      build_potential(e, circle, is_exact(lie_derivative(circle, theta)).potential);
  const VerifyReport r = verify_embedding(
      circle, e, V, {Vec::Constant(1, 0.62), Vec::Constant(1, 0.1)}, 1.0, 1e-7);
  CHECK(r.pass);
}

TEST_CASE("Gauss-Newton refinement reaches a mildly varying metric") {
  // g = I + 0.1 diag(cos 2 pi x, 0): not flat, needs the optimizer
  MetricField m;
  m.n = 2;
  m.g.assign(2, std::vector<TrigPoly>(2, TrigPoly(2)));
  m.g[0][0] = TrigPoly::constant(2, 1.0);
  m.g[0][0].add_term({1, 0}, 0.1, 0.0);
  m.g[1][1] = TrigPoly::constant(2, 1.0);
  m.pd = {true, 0.9, 0.0, 16};
  const EmbeddingMap e = optimize_embedding(m, 8, 4, 400, 1e-7);
  CHECK(e.converged);
  CHECK(e.residual < 1e-6);
  CHECK(e.gram_min > 0);
}

TEST_SUITE_END();

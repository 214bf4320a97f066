#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wellflow/flow.hpp"
#include "wellflow/io.hpp"

using namespace wellflow;

namespace {

TorusFlow bryant_flow() {
  return flow_from_json(load_json_file(std::string(TEST_DATA_DIR) +
                                       "/bryant.flow.json"));
}

}  // namespace

TEST_SUITE_BEGIN("flow");

TEST_CASE("x-dynamics matches tan(pi x(t)) = tan(pi x0) e^{2 pi t}") {
  const TorusFlow f = bryant_flow();
  for (const double x0 : {0.05, 0.2, 0.35}) {
    for (const double t : {0.1, 0.5, 1.0}) {
      Vec p0(2);
      p0 << x0, 0.4;
      const Vec pt = flow_map(f, t, p0, 1e-12);
      const double oracle = std::atan(std::tan(std::numbers::pi * x0) *
                                      std::exp(2.0 * std::numbers::pi * t)) /
                            std::numbers::pi;
      CHECK(pt[0] == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("nonsingularity certificates") {
  CHECK(bryant_flow().certify_nonsingular().certified);  // |Y| = 1 everywhere

  // Y = (sin 2 pi x, 0) vanishes at x = 0: certification must refuse
  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({1, 0}, 0.0, 1.0);
  const TorusFlow singular(2, comps);
  CHECK(!singular.certify_nonsingular().certified);
}

TEST_CASE("flow_map agrees with a fine fixed-step integration") {
  const TorusFlow f = bryant_flow();
  Vec p0(2);
  p0 << 0.3, 0.1;
  const Vec a = flow_map(f, 2.0, p0, 1e-12);
  const Trajectory tr = integrate(f, p0, 2.0, 1e-5);
  CHECK((a - tr.points.back()).norm() < 1e-8);
}

TEST_CASE("variational Jacobian solves the linearized equation") {
  const TorusFlow f = bryant_flow();
  Vec p0(2);
  p0 << 0.22, 0.9;
  Eigen::MatrixXd J;
  flow_map_with_jacobian(f, 1.0, p0, J);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vec pp = p0, pm = p0;
    pp[i] += h;
    pm[i] -= h;
    const Vec col =
        (flow_map(f, 1.0, pp, 1e-12) - flow_map(f, 1.0, pm, 1e-12)) / (2 * h);
    CHECK((J.col(i) - col).norm() < 1e-5);
  }
}

TEST_CASE("projection is a morphism from the product flow") {
  const TorusFlow prod = flow_from_json(
      load_json_file(std::string(TEST_DATA_DIR) + "/product.flow.json"));
  const MorphismReport r = check_morphism(ChartMap::projection(3, {0, 1}),
                                          prod, bryant_flow(), 16, 1e-12);
  CHECK(r.pass);
  CHECK(r.max_residual == 0.0);
}

TEST_SUITE_END();

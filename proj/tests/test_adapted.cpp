#include <doctest.h>

#include "wellflow/adapted.hpp"
#include "wellflow/io.hpp"

using namespace wellflow;

namespace {

TorusFlow load_flow(const char* name) {
  return flow_from_json(load_json_file(std::string(TEST_DATA_DIR) + "/" + name));
}

}  // namespace

TEST_SUITE_BEGIN("adapted");

TEST_CASE("nominal variable count: 2 n (2K+1)^n") {
  CHECK(nominal_variable_count(1, 0) == 2);
  CHECK(nominal_variable_count(2, 1) == 36);
  CHECK(nominal_variable_count(2, 3) == 196);
  CHECK(nominal_variable_count(3, 2) == 750);
}

TEST_CASE("build_lp validates its inputs") {
  const TorusFlow rot = load_flow("rotation.flow.json");
  CHECK_THROWS_AS(build_lp(rot, -1, Rat(1, 1000), 32), std::invalid_argument);
  CHECK_THROWS_AS(build_lp(rot, 0, Rat(0), 32), std::invalid_argument);
  CHECK_THROWS_AS(build_lp(rot, 0, Rat(-1, 2), 32), std::invalid_argument);

  std::vector<TrigPoly> comps(2, TrigPoly(2));
  comps[0].add_term({1, 0}, 0.0, 1.0);  // vanishes at x = 0
  CHECK_THROWS_AS(build_lp(TorusFlow(2, comps), 0, Rat(1, 1000), 32),
                  std::invalid_argument);
}

TEST_CASE("rotation flow is feasible at degree 0 with a strong witness") {
  const AdaptedLP lp = build_lp(load_flow("rotation.flow.json"), 0,
                                Rat(1, 1000), 32);
  const AdaptedCertificate cert = solve(lp);
  REQUIRE(cert.verdict == AdaptedCertificate::Verdict::Feasible);
  CHECK(cert.report.strong());
  CHECK(cert.report.min_thetaY > 0.5);  // normalized witness margin near 1
}

TEST_CASE("obstructed flow is infeasible with an exact Farkas certificate") {
  const TorusFlow f = load_flow("bryant.flow.json");
  for (int K = 0; K <= 1; ++K) {
    const AdaptedLP lp = build_lp(f, K, Rat(1, 1000), 64);
    const AdaptedCertificate cert = solve(lp);
    REQUIRE(cert.verdict == AdaptedCertificate::Verdict::InfeasibleAtDegree);
    CHECK(cert.margin == 0.0);
    CHECK(cert.farkas_residual == 0);
    CHECK(cert.farkas_gap > 0);
    for (const Rat& y : cert.farkas_pos) CHECK(y >= 0);
  }
}

TEST_CASE("verdicts are stable across grid resolutions") {
  const TorusFlow bry = load_flow("bryant.flow.json");
  const TorusFlow rot = load_flow("rotation.flow.json");
  for (const int res : {32, 64, 128}) {
    CHECK(solve(build_lp(bry, 1, Rat(1, 1000), res)).verdict ==
          AdaptedCertificate::Verdict::InfeasibleAtDegree);
    CHECK(solve(build_lp(rot, 0, Rat(1, 1000), res)).verdict ==
          AdaptedCertificate::Verdict::Feasible);
  }
}

TEST_CASE("infeasibility is monotone in the degree cap") {
  // a witness at degree K embeds into degree K+1, so infeasibility at K+1
  // implies infeasibility at K; check the contrapositive ordering holds
  const TorusFlow f = load_flow("bryant.flow.json");
  const auto v0 = solve(build_lp(f, 0, Rat(1, 1000), 64)).verdict;
  const auto v1 = solve(build_lp(f, 1, Rat(1, 1000), 64)).verdict;
  const bool consistent =
      !(v1 == AdaptedCertificate::Verdict::InfeasibleAtDegree &&
        v0 == AdaptedCertificate::Verdict::Feasible);
  CHECK(consistent);
}

TEST_CASE("product flow keeps the constant witness dt") {
  const AdaptedLP lp =
      build_lp(load_flow("product.flow.json"), 0, Rat(1, 1000), 8);
  const AdaptedCertificate cert = solve(lp);
  REQUIRE(cert.verdict == AdaptedCertificate::Verdict::Feasible);
  CHECK(cert.report.strong());
}

TEST_SUITE_END();

#include <doctest.h>

#include <sstream>

#include "wellflow/io.hpp"

using namespace wellflow;

TEST_SUITE_BEGIN("io");

TEST_CASE("rational strings round-trip") {
  for (const char* s : {"0", "1", "-3", "22/7", "-1/262144"}) {
    CHECK(rat_to_string(rat_from_string(s)) == s);
  }
  CHECK_THROWS(rat_from_string("not-a-number"));
}

TEST_CASE("flow and form specs round-trip through JSON") {
  const json jf = load_json_file(std::string(TEST_DATA_DIR) + "/bryant.flow.json");
  const TorusFlow f = flow_from_json(jf);
  const TorusFlow f2 = flow_from_json(flow_to_json(f));
  Vec y(2);
  y << 0.13, 0.77;
  CHECK((f.eval(y) - f2.eval(y)).norm() == 0.0);

  const OneForm form = form_from_json(
      load_json_file(std::string(TEST_DATA_DIR) + "/halfsin.form.json"));
  const OneForm form2 = form_from_json(form_to_json(form));
  CHECK(form2.components[0].eval(Vec::Constant(1, 0.3)) ==
        form.components[0].eval(Vec::Constant(1, 0.3)));

  // a flow file is not accepted where a form is required
  CHECK_THROWS(form_from_json(jf));
}

TEST_CASE("malformed specs give field-level diagnostics") {
  CHECK_THROWS_WITH_AS(flow_from_json(json{{"components", json::array()}}),
                       doctest::Contains("dim"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(flow_from_json(json{{"dim", 1}}),
                       doctest::Contains("components"),
                       std::invalid_argument);
}

TEST_CASE("machine and tape specs round-trip") {
  const TuringMachine tm = tm_from_json(
      load_json_file(std::string(TEST_DATA_DIR) + "/incrementer.tm.json"));
  const TuringMachine tm2 = tm_from_json(tm_to_json(tm));
  CHECK(tm2.states == tm.states);
  CHECK(tm2.delta.size() == tm.delta.size());
  CHECK(tm2.k == tm.k);

  const Tape t({1, 0, 2}, -1, 0, 2);
  const Tape t2 = tape_from_json(tape_to_json(t));
  for (long n = -3; n <= 5; ++n) CHECK(t2.at(n) == t.at(n));
}

TEST_CASE("potential specs round-trip") {
  const PotentialPtr V = potential_from_json(
      load_json_file(std::string(TEST_DATA_DIR) + "/harmonic.potential.json"));
  const PotentialPtr V2 = potential_from_json(potential_to_json(*V));
  const Vec q = Vec::Constant(1, 0.7);
  CHECK(V2->eval(q) == V->eval(q));
  CHECK((V2->grad(q) - V->grad(q)).norm() == 0.0);
}

TEST_CASE("trajectory CSV has a header and one row per state") {
  Trajectory tr;
  tr.times = {0.0, 0.5};
  tr.points = {Vec::Zero(2), Vec::Constant(2, 0.25)};
  std::ostringstream ss;
  write_trajectory_csv(ss, tr);
  std::istringstream in(ss.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x1,x2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}

TEST_SUITE_END();

#include <doctest.h>

#include <random>

#include "wellflow/io.hpp"
#include "wellflow/turing.hpp"

using namespace wellflow;

namespace {

TuringMachine load_tm(const char* name) {
  return tm_from_json(load_json_file(std::string(TEST_DATA_DIR) + "/" + name));
}

}  // namespace

TEST_SUITE_BEGIN("turing");

TEST_CASE("encoding of simple tapes") {
  // all-zero tape maps to the origin
  const TapePoint z = encode_tape(Tape({0}, 0), 10);
  CHECK(z.u == 0);
  CHECK(z.v == 0);

  // t_0 = 3, rest 0: u = 0, v = 3/10
  const TapePoint p = encode_tape(Tape({3}, 0), 10);
  CHECK(p.u == 0);
  CHECK(p.v == mpq_class(3, 10));

  // eventually-constant tails sum as geometric series: all-ones at b = 10
  const TapePoint q = encode_tape(Tape({1}, 0, 1, 1), 10);
  CHECK(q.u == mpq_class(1, 9));  // 0.111... base 10 on both factors
  CHECK(q.v == mpq_class(1, 9));
}

TEST_CASE("shift relation on fixed and random tapes") {
  CHECK(shift_check(Tape({0}, 0), 10));   // fixed point
  CHECK(shift_check(Tape({3}, 0), 10));   // spec example, lands in R_3

  std::mt19937 rng(99);
  std::uniform_int_distribution<int> kd(1, 3), len(1, 7), first(-3, 2);
  for (int i = 0; i < 100; ++i) {
    const int k = kd(rng);
    std::uniform_int_distribution<int> sym(0, k);
    std::vector<int> w;
    const int L = len(rng);
    for (int j = 0; j < L; ++j) w.push_back(sym(rng));
    CHECK(shift_check(Tape(w, first(rng), sym(rng), sym(rng)), 10 * k));
  }
}

TEST_CASE("tape embedding is injective on distinct windows") {
  std::vector<Tape> tapes;
  for (int a = 0; a <= 1; ++a)
    for (int b2 = 0; b2 <= 1; ++b2)
      for (int c = 0; c <= 1; ++c) tapes.push_back(Tape({a, b2, c}, -1));
  for (size_t i = 0; i < tapes.size(); ++i)
    for (size_t j = i + 1; j < tapes.size(); ++j) {
      const TapePoint pi = encode_tape(tapes[i], 10);
      const TapePoint pj = encode_tape(tapes[j], 10);
      CHECK((pi.u != pj.u || pi.v != pj.v));
    }
}

TEST_CASE("compile: layout invariants and piece count") {
  const TuringMachine tm = load_tm("incrementer.tm.json");
  const CompiledDiffeo d = compile(tm, 20);
  CHECK(d.pieces.size() == size_t((tm.n_states() - 1) * (tm.k + 1)));
  CHECK(d.square_side == mpq_class(1, 2 * tm.n_states()));
  // state squares pairwise disjoint (closed squares, sup metric)
  for (size_t i = 0; i < d.B.size(); ++i)
    for (size_t j = i + 1; j < d.B.size(); ++j) {
      const bool apart = d.B[i].x + d.B[i].side < d.B[j].x ||
                         d.B[j].x + d.B[j].side < d.B[i].x ||
                         d.B[i].y + d.B[i].side < d.B[j].y ||
                         d.B[j].y + d.B[j].side < d.B[i].y;
      CHECK(apart);
    }
}

TEST_CASE("one-state writer advances the tape factor by 1/b") {
  const TuringMachine tm = load_tm("writer.tm.json");
  const CompiledDiffeo d = compile(tm, 10);
  const Tape zero({0}, 0);
  const TapePoint w0 = encode_tape(zero, 10);
  const StepPoint sp = step_point(d, d.state_center(tm.start), w0);
  REQUIRE(sp.status == StepPoint::Status::Ok);
  CHECK(d.B[tm.halt].contains(sp.z));
  // writes 1 at the head with no shift: v gains 1/10
  CHECK(sp.w.v == w0.v + mpq_class(1, 10));
  CHECK(sp.w.u == w0.u);
}

TEST_CASE("points in the halt region signal Halted") {
  const TuringMachine tm = load_tm("writer.tm.json");
  const CompiledDiffeo d = compile(tm, 10);
  const StepPoint sp =
      step_point(d, d.state_center(tm.halt), encode_tape(Tape({0}, 0), 10));
  CHECK(sp.status == StepPoint::Status::Halted);
}

TEST_CASE("conjugacy with the symbolic simulator on random runs") {
  std::mt19937 rng(5);
  for (const char* name :
       {"writer.tm.json", "incrementer.tm.json", "copier.tm.json",
        "counter.tm.json"}) {
    const TuringMachine tm = load_tm(name);
    const int b = 10 * tm.k;
    const CompiledDiffeo d = compile(tm, b);
    std::uniform_int_distribution<int> sym(0, tm.k), len(1, 4);
    for (int trial = 0; trial < 15; ++trial) {
      std::vector<int> w;
      const int L = len(rng);
      for (int j = 0; j < L; ++j) w.push_back(sym(rng));
      const Tape tape(w, 0);

      Configuration c{tm.start, tape};
      Rat2 z = d.state_center(tm.start);
      TapePoint wp = encode_tape(tape, b);
      for (int s = 0; s < 30 && c.q != tm.halt; ++s) {
        const Configuration c2 = symbolic_step(tm, c);
        const StepPoint sp = step_point(d, z, wp);
        REQUIRE(sp.status == StepPoint::Status::Ok);
        const TapePoint enc = encode_tape(c2.tape, b);
        CHECK(sp.w.u == enc.u);
        CHECK(sp.w.v == enc.v);
        CHECK(d.B[c2.q].contains(sp.z));
        c = c2;
        z = sp.z;
        wp = sp.w;
      }
    }
  }
}

TEST_CASE("orbit of the incrementer enters U exactly at the halting step") {
  const TuringMachine tm = load_tm("incrementer.tm.json");
  const Tape tape({1, 1}, 0);
  const RunResult sym = symbolic_run(tm, tape, 100);
  REQUIRE(sym.halted);
  CHECK(sym.steps == 3);

  const CompiledDiffeo d = compile(tm, 10);
  std::vector<int> window;
  for (long i = -1; i <= 1; ++i) window.push_back(sym.final_config.tape.at(i));
  const HaltingSet U = halting_set(window, 1, 10);
  const OrbitResult orb = run_orbit(d, tape, 100, &U);
  REQUIRE(orb.entered_U);
  CHECK(orb.step_index == sym.steps);
}

TEST_CASE("non-halting orbit keeps a positive distance from U") {
  const TuringMachine tm = load_tm("selfloop.tm.json");
  const OrbitResult orb = run_orbit(compile(tm, 10), Tape({1, 0, 1}, 0), 1000);
  CHECK(orb.budget_exhausted);
  CHECK(!orb.entered_U);
  CHECK(orb.min_distance_to_U > 0.1);
}

TEST_CASE("suspension time-1 map equals the compiled map") {
  const TuringMachine tm = load_tm("writer.tm.json");
  const CompiledDiffeo d = compile(tm, 10);
  const Rat2 z0 = d.state_center(tm.start);
  const TapePoint w0 = encode_tape(Tape({0}, 0), 10);
  const StepPoint direct = step_point(d, z0, w0);
  const SuspensionPoint sp = suspension_eval(suspend(d), z0, w0, 0, 1);
  CHECK(sp.z == direct.z);
  CHECK(sp.w.u == direct.w.u);
  CHECK(sp.w.v == direct.w.v);
  CHECK(sp.s == 0);
}

TEST_SUITE_END();

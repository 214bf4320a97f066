#include <doctest.h>

#include "wellflow/simplex.hpp"

using namespace wellflow;

namespace {

QMat mat(std::initializer_list<std::initializer_list<int>> rows) {
  QMat A;
  for (const auto& r : rows) {
    QVec row;
    for (int v : r) row.push_back(Rat(v));
    A.push_back(std::move(row));
  }
  return A;
}

QVec vec(std::initializer_list<int> xs) {
  QVec v;
  for (int x : xs) v.push_back(Rat(x));
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("simplex");

TEST_CASE("optimal vertex of a small standard-form program") {
  // max x1 + 2 x2  s.t.  x1 + x2 + s1 = 4,  x2 + s2 = 3
  const QMat A = mat({{1, 1, 1, 0}, {0, 1, 0, 1}});
  const LpResult r = simplex_solve(A, vec({4, 3}), vec({1, 2, 0, 0}));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == Rat(7));
  CHECK(r.x[0] == Rat(1));
  CHECK(r.x[1] == Rat(3));
}

TEST_CASE("dual vector satisfies strong duality at the optimum") {
  const QMat A = mat({{1, 1, 1, 0}, {0, 1, 0, 1}});
  const QVec b = vec({4, 3});
  const LpResult r = simplex_solve(A, b, vec({1, 2, 0, 0}));
  REQUIRE(r.status == LpStatus::Optimal);
  Rat yb(0);
  for (size_t i = 0; i < r.y.size(); ++i) yb += r.y[i] * b[i];
  CHECK(yb == r.objective);
}

TEST_CASE("infeasible program returns a verified Farkas vector") {
  // x1 + x2 = 2 and x1 + x2 = 3 cannot hold together
  const QMat A = mat({{1, 1}, {1, 1}});
  const QVec b = vec({2, 3});
  const LpResult r = simplex_solve(A, b, vec({0, 0}));
  REQUIRE(r.status == LpStatus::Infeasible);
  // y^T A <= 0 and y^T b > 0
  for (size_t j = 0; j < 2; ++j) {
    Rat acc(0);
    for (size_t i = 0; i < 2; ++i) acc += r.y[i] * A[i][j];
    CHECK(acc <= 0);
  }
  Rat yb(0);
  for (size_t i = 0; i < 2; ++i) yb += r.y[i] * b[i];
  CHECK(yb > 0);
}

TEST_CASE("negative right-hand sides are handled by row flips") {
  // x1 - x2 = -1, x1 + x2 = 3  ->  x = (1, 2)
  const QMat A = mat({{1, -1}, {1, 1}});
  const LpResult r = simplex_solve(A, vec({-1, 3}), vec({0, -1}));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == Rat(1));
  CHECK(r.x[1] == Rat(2));
}

TEST_CASE("unbounded direction is reported") {
  // max x1 with only x1 - x2 = 0: ray (t, t)
  const QMat A = mat({{1, -1}});
  const LpResult r = simplex_solve(A, vec({0}), vec({1, 0}));
  CHECK(r.status == LpStatus::Unbounded);
}

TEST_CASE("rational arithmetic is exact on an ill-conditioned instance") {
  // tiny pivots that would break double precision
  QMat A = mat({{1, 1, 1, 0}, {1, 1, 0, 1}});
  A[0][0] = Rat(1, 1000000000);
  const LpResult r =
      simplex_solve(A, vec({1, 2}), vec({0, 1, 0, 0}));
  REQUIRE(r.status == LpStatus::Optimal);
  // x2 = 1 forced through the tiny-pivot row: exact value survives
  CHECK(r.objective == Rat(1));
}

TEST_SUITE_END();

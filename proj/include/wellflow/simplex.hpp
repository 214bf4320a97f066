#pragma once

#include <gmpxx.h>

#include <vector>

namespace wellflow {

using Rat = mpq_class;
using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  QVec x;         // primal solution (Optimal)
  Rat objective;  // c^T x (Optimal)
  // Optimal: equality-row multipliers.  Infeasible: Farkas vector with
  // y^T A <= 0 componentwise and y^T b > 0, exactly.
  QVec y;
};

// maximize c^T x  subject to  A x = b,  x >= 0, in exact rational
// arithmetic.  Two-phase dense tableau with Bland's rule (no cycling).
LpResult simplex_solve(const QMat& A, const QVec& b, const QVec& c);

}  // namespace wellflow

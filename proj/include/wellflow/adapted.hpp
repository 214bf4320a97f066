#pragma once

#include "wellflow/oneform.hpp"
#include "wellflow/simplex.hpp"

namespace wellflow {

using QPoly = TrigPolyT<Rat>;

// one LP variable = one cos/sin coefficient of one component of theta
struct LpVariable {
  int component = 0;
  Freq freq;
  bool is_sin = false;
};

// Feasibility program for "theta of Fourier degree <= K strongly adapted to
// the flow": equality rows make L_Y theta exact, inequality rows put
// theta(Y) >= eps on a dyadic grid.  All entries exact rationals; the trig
// evaluations carry a dyadic rounding radius that is folded into eps.
struct AdaptedLP {
  TorusFlow flow;
  int K = 0;
  Rat eps;
  int grid_res = 0;
  std::vector<LpVariable> vars;
  QMat E;                      // E xi = 0  (exactness of L_Y theta)
  QMat R;                      // R xi >= scale*(eps - slack)  (grid positivity)
  std::vector<Vec> grid;       // grid point per R row
  Rat slack;                   // worst-case enclosure error, |xi|_1 <= 1
  Rat scale;                   // common integer scaling applied to R
};

struct AdaptedCertificate {
  enum class Verdict { Feasible, InfeasibleAtDegree };
  Verdict verdict = Verdict::InfeasibleAtDegree;

  // feasible side
  OneForm witness;
  AdaptationReport report;

  // infeasible side: y with y^T [E; R_rows] = 0 (exact), y_R >= 0, and
  // y^T b = (eps - slack) * sum y_R > 0
  QVec farkas_eq;              // multipliers on the E rows
  QVec farkas_pos;             // multipliers on the used R rows
  std::vector<int> farkas_rows;  // grid-row indices the multipliers refer to
  Rat farkas_gap;              // y^T b, positive when verified
  Rat farkas_residual;         // max |(y^T A)_j|, zero when verified

  double margin = 0.0;         // optimal normalized margin mu*
};

// bookkeeping count before canonicalization: 2 n (2K+1)^n
long nominal_variable_count(int n, int K);

AdaptedLP build_lp(const TorusFlow& flow, int K, const Rat& eps,
                   int grid_res = 64);

// exact-rational simplex with row generation on the positivity rows:
//   max mu  s.t.  E xi = 0,  R xi >= mu,  |xi|_1 <= 1
// Feasible when mu* clears eps plus the enclosure slack (witness re-checked
// through check_adapted); infeasible when mu* = 0, with a verified Farkas
// vector; anything between is reported as inconclusive (throws).
AdaptedCertificate solve(const AdaptedLP& lp);

}  // namespace wellflow

#include "wellflow/simplex.hpp"

#include <limits>
#include <stdexcept>

namespace wellflow {

namespace {

struct Tableau {
  int m, n;  // constraint rows, structural columns
  // layout: [ structural | artificial | rhs ], plus a cost row at the end
  std::vector<QVec> T;
  std::vector<int> basis;      // basic variable per row (column index)
  std::vector<int> orig_row;   // row -> caller row (for dual reporting)
  std::vector<bool> banned;    // columns barred from entering

  int art(int i) const { return n + i; }
  int rhs() const { return n + m; }
  Rat& cost(int j) { return T[m][j]; }

  void pivot(int r, int j) {
    const Rat piv = T[r][j];
    for (auto& v : T[r]) v /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == r) continue;
      const Rat f = T[i][j];
      if (f == 0) continue;
      for (int k = 0; k <= rhs(); ++k) T[i][k] -= f * T[r][k];
    }
    basis[r] = j;
  }

  enum class Step { Optimal, Pivoted, Unbounded };

  // Dantzig pricing (most negative reduced cost) for speed; the caller flips
  // to Bland's smallest-index rule once the objective stalls, which restores
  // the termination guarantee
  Step step(bool bland) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (!banned[j] && cost(j) < 0) {
        if (bland) {
          enter = j;
          break;
        }
        if (enter < 0 || cost(j) < cost(enter)) enter = j;
      }
    if (enter < 0) return Step::Optimal;
    int leave = -1;
    Rat best;
    for (int i = 0; i < m; ++i) {
      if (T[i][enter] <= 0) continue;
      const Rat ratio = T[i][rhs()] / T[i][enter];
      if (leave < 0 || ratio < best ||
          (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) return Step::Unbounded;
    pivot(leave, enter);
    return Step::Pivoted;
  }

  // returns false on an unbounded direction
  bool run() {
    Rat last = T[m][rhs()];
    long stalled = 0;
    for (long iter = 0; iter < 1000000; ++iter) {
      // degenerate pivots leave the objective flat; under a long stall use
      // Bland's rule, which cannot cycle, until the objective moves again
      const Step s = step(stalled > 100);
      if (s == Step::Optimal) return true;
      if (s == Step::Unbounded) return false;
      if (T[m][rhs()] == last) {
        ++stalled;
      } else {
        stalled = 0;
        last = T[m][rhs()];
      }
    }
    throw std::logic_error("simplex: cycling guard tripped");
  }
};

}  // namespace

LpResult simplex_solve(const QMat& A, const QVec& b, const QVec& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  for (const auto& row : A)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("simplex: ragged constraint matrix");
  if (static_cast<int>(b.size()) != m)
    throw std::invalid_argument("simplex: rhs size mismatch");

  Tableau t;
  t.m = m;
  t.n = n;
  t.T.assign(m + 1, QVec(n + m + 1, Rat(0)));
  t.basis.resize(m);
  t.orig_row.resize(m);
  t.banned.assign(n + m, false);
  for (int i = 0; i < m; ++i) {
    const bool flip = b[i] < 0;
    for (int j = 0; j < n; ++j) t.T[i][j] = flip ? Rat(-A[i][j]) : A[i][j];
    t.T[i][t.rhs()] = flip ? Rat(-b[i]) : b[i];
    t.T[i][t.art(i)] = 1;
    t.orig_row[i] = flip ? ~i : i;  // flipped rows need sign-adjusted duals
    t.basis[i] = t.art(i);
  }

  // phase 1: minimize sum of artificials; reduced costs r_j = c_j - sum rows
  for (int j = 0; j <= t.rhs(); ++j) {
    Rat s(0);
    for (int i = 0; i < m; ++i) s += t.T[i][j];
    t.cost(j) = (j >= n && j < n + m ? Rat(1) : Rat(0)) - s;
  }
  t.run();  // phase 1 is bounded below by 0: always terminates optimal

  LpResult out;
  const Rat infeas = -t.cost(t.rhs());  // current phase-1 objective value
  if (infeas > 0) {
    out.status = LpStatus::Infeasible;
    out.y.assign(m, Rat(0));
    // r_art_i = 1 - y_i (sign-adjusted when the row was negated)
    for (int i = 0; i < m; ++i) {
      Rat yi = Rat(1) - t.cost(t.art(i));
      if (t.orig_row[i] < 0) yi = -yi;
      out.y[t.orig_row[i] < 0 ? ~t.orig_row[i] : t.orig_row[i]] = yi;
    }
    return out;
  }

  // drive any basic artificials out (their value is zero here)
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < n) continue;
    int j = 0;
    while (j < n && t.T[i][j] == 0) ++j;
    if (j < n) t.pivot(i, j);
    // else: redundant row; artificial stays basic at zero, and artificials
    // are banned below so it can never take a positive value again
  }
  for (int i = 0; i < m; ++i) t.banned[t.art(i)] = true;

  // phase 2: minimize -c over the structural columns
  for (int j = 0; j <= t.rhs(); ++j) t.cost(j) = 0;
  for (int j = 0; j < n; ++j) t.cost(j) = -c[j];
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] >= n) continue;
    const Rat cb = -c[t.basis[i]];
    if (cb == 0) continue;
    for (int j = 0; j <= t.rhs(); ++j) t.cost(j) -= cb * t.T[i][j];
  }
  if (!t.run()) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  out.status = LpStatus::Optimal;
  out.x.assign(n, Rat(0));
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) out.x[t.basis[i]] = t.T[i][t.rhs()];
  out.objective = 0;
  for (int j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
  out.y.assign(m, Rat(0));
  for (int i = 0; i < m; ++i) {
    // r2_art_i = -y_i in the minimize convention; negate once more so the
    // reported dual matches the maximization LP (y^T b = objective)
    Rat yi = t.cost(t.art(i));
    if (t.orig_row[i] < 0) yi = -yi;
    out.y[t.orig_row[i] < 0 ? ~t.orig_row[i] : t.orig_row[i]] = yi;
  }
  return out;
}

}  // namespace wellflow

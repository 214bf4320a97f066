#pragma once

#include <vector>

#include "wellflow/flow.hpp"
#include "wellflow/potential.hpp"

namespace wellflow {

// phase point of Well(R^m, V)
struct WellState {
  Vec q;
  Vec p;
};

struct WellTrajectory {
  std::vector<double> times;
  std::vector<WellState> states;
  double step_size = 0.0;
  std::string method;
};

// Stormer-Verlet (kick-drift-kick) trajectory of qdot = p, pdot = -grad V(q).
WellTrajectory integrate_well(const Potential& V, const WellState& s0,
                              double T, double dt);

// H = |p|^2/2 + V(q)
double energy(const Potential& V, const WellState& s);

// Cotangent lift of a torus flow: the Hamiltonian system on T*(R/Z)^n with
// H = p . X(q), i.e. qdot_i = X_i(q), pdot_i = -sum_j p_j dX_j/dq_i
// (derived from Hamilton's equations for H = sum_j p_j X_j(q)).
class LiftedSystem {
 public:
  explicit LiftedSystem(TorusFlow base);

  const TorusFlow& base() const { return base_; }
  int phase_dim() const { return 2 * base_.dim; }

  // field on (q, p)
  Vec eval(const Vec& qp) const;
  double hamiltonian(const Vec& qp) const;

  // zero-section embedding q -> (q, 0)
  Vec zero_section(const Vec& q) const;

  // RK4 trajectory in (q, p); q reduced mod 1
  Trajectory integrate(const Vec& qp0, double T, double dt) const;

 private:
  TorusFlow base_;
  std::vector<std::vector<TrigPoly>> dX_;  // dX_[j][i] = dX_j/dq_i
};

LiftedSystem cotangent_lift(const TorusFlow& flow);

}  // namespace wellflow

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wellflow/chart.hpp"
#include "wellflow/trigpoly.hpp"

namespace wellflow {

// reduce torus coordinates to [0,1)
Vec reduce_mod1(Vec x);

// iterate a uniform grid over [0,1)^n with `res` points per dimension
void for_each_grid(int n, int res, const std::function<void(const Vec&)>& fn);

// Vector field on (R/Z)^n with trig-polynomial components.
struct TorusFlow {
  int dim = 0;
  std::vector<TrigPoly> components;

  TorusFlow() = default;
  TorusFlow(int n, std::vector<TrigPoly> comps);

  Vec eval(const Vec& x) const;                 // Y(x)
  Eigen::MatrixXd jacobian(const Vec& x) const; // dY_i/dx_j
  int degree() const;

  struct NonsingularCert {
    bool certified = false;
    double grid_min_sq = 0.0;  // min over grid of |Y|^2
    double margin = 0.0;       // Lipschitz-bound margin
    int grid_res = 0;
  };
  // grid min of |Y|^2 minus a derivative-based margin; certified if positive
  NonsingularCert certify_nonsingular(int grid_res = 0) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> points;
  double step_size = 0.0;
  std::string method;
};

Vec eval_field(const TorusFlow& flow, const Vec& x);

// Classical RK4 trajectory with points reduced mod 1; O(dt^4) per unit time.
Trajectory integrate(const TorusFlow& flow, const Vec& x0, double T, double dt);

// e^{tY} x with internally chosen dt = min(1e-3, tol^{1/4}) and a Richardson
// half-step check against tol.
Vec flow_map(const TorusFlow& flow, double t, const Vec& x, double tol = 1e-10);

// Flow map together with its Jacobian (variational equation integrated
// alongside with the same RK4 stepper).
Vec flow_map_with_jacobian(const TorusFlow& flow, double t, const Vec& x,
                           Eigen::MatrixXd& J, double dt = 1e-3);

struct MorphismReport {
  double max_residual = 0.0;
  bool pass = false;
  int grid_res = 0;
};

// max over grid of |dphi(X(y)) - X'(phi(y))| with exact Jacobians
MorphismReport check_morphism(const ChartMap& phi, const TorusFlow& src,
                              const TorusFlow& dst, int grid_res, double tol);

}  // namespace wellflow

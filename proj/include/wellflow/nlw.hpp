#pragma once

#include <vector>

#include "wellflow/potential.hpp"

namespace wellflow {

// State of NLW((R/Z)^1, R^m, V) sampled on the uniform N-point grid.
// Rows index grid points, columns the m target components.
struct NLWState {
  Eigen::MatrixXd Q;  // N x m
  Eigen::MatrixXd P;  // N x m

  int grid_size() const { return static_cast<int>(Q.rows()); }
  int target_dim() const { return static_cast<int>(Q.cols()); }
};

struct NLWTrajectory {
  std::vector<double> times;
  std::vector<NLWState> states;
  double step_size = 0.0;
};

// spectral d^2/dx^2 on the periodic grid (one column per component)
Eigen::MatrixXd spectral_laplacian(const Eigen::MatrixXd& Q);
// spectral d/dx
Eigen::MatrixXd spectral_dx(const Eigen::MatrixXd& Q);

// Method of lines, spectral Laplacian, leapfrog in time.  Requires the
// stability bound dt <= grid_spacing / pi; N must be a power of two.
NLWTrajectory integrate_nlw(const Potential& V, const NLWState& s0, double T,
                            double dt);

// trapezoid quadrature (exact for grid functions) of
// |p|^2/2 + |dq/dx|^2/2 + V(q)
double nlw_energy(const Potential& V, const NLWState& s);

// embed a Well state as the spatially constant NLW state
NLWState constant_nlw_state(int N, const Vec& q, const Vec& p);

}  // namespace wellflow

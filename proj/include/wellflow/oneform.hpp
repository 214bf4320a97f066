#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wellflow/chart.hpp"
#include "wellflow/flow.hpp"
#include "wellflow/well.hpp"

namespace wellflow {

// 1-form on (R/Z)^n with trig-polynomial coefficients of dy_1 .. dy_n.
struct OneForm {
  int dim = 0;
  std::vector<TrigPoly> components;

  OneForm() = default;
  OneForm(int n, std::vector<TrigPoly> comps);
  static OneForm zero(int n);
  static OneForm coordinate(int n, int axis);  // dy_axis

  int degree() const;
};

// theta(Y) as an exact trig-polynomial product
TrigPoly contract(const OneForm& theta, const TorusFlow& Y);

// exterior derivative of a scalar trig polynomial
OneForm exterior_derivative(const TrigPoly& L);

// L_Y theta = d(i_Y theta) + i_Y (d theta), computed in coefficient space
// with no truncation; output degree <= deg theta + deg Y.
OneForm lie_derivative(const TorusFlow& Y, const OneForm& theta);

struct ExactnessResult {
  bool exact = false;
  double residual = 0.0;  // max reconstruction defect in coefficient space
  TrigPoly potential;     // L with omega = dL (zero-mean), valid when exact
};

// omega = dL iff closed and all generator periods vanish; L recovered by
// coefficient division in the trig algebra.
ExactnessResult is_exact(const OneForm& omega, double tol = 1e-9);

struct AdaptationReport {
  enum class Class { Strong, Weak, None };
  Class classification = Class::None;
  double min_thetaY = 0.0;  // certified lower bound (grid min - margin)
  double grid_min = 0.0;
  double margin = 0.0;
  double exactness_residual = 0.0;
  bool has_potential = false;
  TrigPoly potential;

  bool strong() const { return classification == Class::Strong; }
  std::string class_name() const;
};

AdaptationReport check_adapted(const TorusFlow& flow, const OneForm& theta,
                               double eps = 1e-9);

struct PullbackResult {
  OneForm form;
  bool exact = false;        // exact trig-poly transport (affine/projection)
  double fit_residual = 0.0; // grid-fit residual otherwise
};

// (phi^* theta)(v) = theta(dphi v).  Exact for integer-affine maps,
// projections, and their products/compositions; otherwise a grid-sampled
// least-squares fit at `degree_cap` (rejected unless allow_fit).
PullbackResult pullback(const ChartMap& phi, const OneForm& theta,
                        bool allow_fit = false, int degree_cap = -1,
                        int grid_res = 0);

struct AveragedForm {
  OneForm form;
  double fit_residual = 0.0;
  int degree = 0;
  int n_samples = 0;
};

// int_0^1 (e^{tY})^* theta dt by midpoint quadrature of numerically
// computed pullbacks, then a least-squares trig fit at a stated degree.
AveragedForm average(const TorusFlow& flow, const OneForm& theta,
                     int n_samples, int degree_cap = -1, int grid_res = 0);

// exact integral of theta over the coordinate circle {y_axis free, rest at
// `fixed`}: only the k_axis = 0 terms of component `axis` survive.
double cycle_integral(const OneForm& theta, int axis, const Vec& fixed);

// Finite-difference audit of L_X theta = dL on T* R^m for Well(R^m, V),
// theta the canonical form and L = |p|^2/2 - V(q).  Returns the max
// residual over samples and coordinate directions (central differences,
// step h).
double canonical_form_check(const Potential& V,
                            const std::vector<WellState>& samples, double h);

// least-squares fit of regular-grid samples (for_each_grid order) by a trig
// polynomial of degree <= D; residual gets the max absolute misfit
TrigPoly fit_trig_grid(int n, int grid_res, const std::vector<double>& values,
                       int D, double* residual);

}  // namespace wellflow

#pragma once

#include "wellflow/adapted.hpp"
#include "wellflow/oneform.hpp"
#include "wellflow/well.hpp"

namespace wellflow {

// Riemannian metric on (R/Z)^n with trig-poly entries; built so that the
// flow field and theta are metric duals.  When flow and base metric are
// constant the rational mirror makes the duality check exact.
struct MetricField {
  int n = 0;
  std::vector<std::vector<TrigPoly>> g;    // symmetric n x n
  std::vector<std::vector<QPoly>> g_exact; // populated on the exact path
  bool exact = false;
  double C = 1.0;

  struct PdCert {
    bool certified = false;
    double grid_min_eig = 0.0;
    double margin = 0.0;
    int grid_res = 0;
  };
  PdCert pd;

  Eigen::MatrixXd at(const Vec& y) const;
  bool is_constant(double tol = 0.0) const;
  Eigen::MatrixXd constant_part() const;  // zero-frequency coefficients

  // max over grid |(g Y)_i - theta_i|; exactly zero coefficient-wise on the
  // exact path (checked there in rational arithmetic)
  double duality_residual(const TorusFlow& flow, const OneForm& theta) const;
};

MetricField build_metric(const TorusFlow& flow, const OneForm& theta,
                         const Eigen::MatrixXd& g0, double delta = 1e-3);

struct EmbeddingMap {
  int n = 0, m = 0;
  std::vector<TrigPoly> q;  // m output coordinates
  std::vector<TrigPoly> p;  // p = L_Y q, filled by attach_momentum
  double residual = 0.0;    // max |<d_i q, d_j q> - g_ij| over grid
  double gram_min = 0.0;    // immersion certificate: min Gram det over grid
  double min_pair_dist = 0.0;  // injectivity spot check
  bool converged = true;

  Vec eval_q(const Vec& y) const;
  Vec eval_p(const Vec& y) const;
  Eigen::MatrixXd jac_q(const Vec& y) const;  // m x n, columns d_i q
};

// exact isometric embedding of a flat torus as a sum of circles:
// q(y) = (r_i cos 2 pi l_i . y, r_i sin 2 pi l_i . y)_i with
// sum (2 pi r_i)^2 l_i l_i^T = G solved by NNLS over primitive frequencies
EmbeddingMap flat_embedding(const MetricField& metric, int max_freq = 4);

// p = L_Y q, exact in coefficient space
void attach_momentum(EmbeddingMap& e, const TorusFlow& flow);

// Gauss-Newton fit of <d_i q, d_j q> = g_ij over trig coefficients of q,
// seeded from the flat embedding of the constant part of the metric
EmbeddingMap optimize_embedding(const MetricField& metric, int m, int degree,
                                int iters = 40, double tol = 1e-10);

// V on R^m around q(N): nearest-point projection, linear normal term,
// smooth cutoff, coercive tail.  First-order data on the manifold matches
// v = |p|^2/2 - L and the normal field n = a + grad_{q(N)} v.
class ExtendedPotential final : public Potential {
 public:
  int dim() const override { return m_; }
  double eval(const Vec& z) const override;
  Vec grad(const Vec& z) const override;

  // nearest-point projection: returns base coordinates y*
  Vec project(const Vec& z) const;

  double tube_radius() const { return eps_; }
  double reach_estimate() const { return reach_; }
  double uouo_residual() const { return uouo_residual_; }
  const TrigPoly& v() const { return v_; }
  const std::vector<TrigPoly>& a() const { return a_; }
  Vec normal_field(const Vec& y) const;  // n(y) = a(y) + grad_{q(N)} v

  double stabilizer = 50.0;  // quadratic normal-penalty weight sigma
  double tau = 1.0;          // coercive tail coefficient

 private:
  friend ExtendedPotential build_potential(const EmbeddingMap&,
                                           const TorusFlow&, const TrigPoly&);
  int n_ = 0, m_ = 0;
  EmbeddingMap emb_;
  TorusFlow flow_;
  TrigPoly v_;                  // V0 on N, as a function of y
  std::vector<TrigPoly> a_;     // a = L_Y p per output coordinate
  std::vector<std::vector<TrigPoly>> dq_;   // dq_[i][c] = d_i q_c
  std::vector<std::vector<std::vector<TrigPoly>>> ddq_;  // d_i d_j q_c
  double eps_ = 0.0, reach_ = 0.0, uouo_residual_ = 0.0;
  int warm_res_ = 0;
  std::vector<Vec> warm_points_;  // q at warm-start grid, row-major
  mutable bool has_last_ = false;  // last projection, reused as warm start
  mutable Vec last_y_;

  struct Projection {
    Vec y;
    Vec qy;
    bool inside = true;  // |z - q(y)| < eps (chi == 1 region logic uses s)
  };
  Projection project_full(const Vec& z) const;
};

ExtendedPotential build_potential(const EmbeddingMap& e, const TorusFlow& flow,
                                  const TrigPoly& L);

struct VerifyReport {
  double max_deviation = 0.0;
  bool pass = false;
  std::vector<double> per_sample;
};

// integrate Well(R^m, V) from (q(y0), p(y0)) and compare with the source
// flow pushed through the embedding at 20 checkpoints
VerifyReport verify_embedding(const TorusFlow& flow, const EmbeddingMap& e,
                              const Potential& V,
                              const std::vector<Vec>& y0_samples, double T,
                              double tol, double dt = 2e-5);

}  // namespace wellflow

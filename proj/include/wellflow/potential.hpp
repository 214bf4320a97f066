#pragma once

#include <map>
#include <memory>
#include <vector>

#include "wellflow/trigpoly.hpp"

namespace wellflow {

// quintic smoothstep: 0 for u<=0, 1 for u>=1, C^2 in between
double smoothstep_quintic(double u);
double smoothstep_quintic_deriv(double u);

// Smooth potential V: R^m -> R with an analytic gradient.  Gradients are
// exact per representation; no finite differences enter the dynamics.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual int dim() const = 0;
  virtual double eval(const Vec& q) const = 0;
  virtual Vec grad(const Vec& q) const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

// V(q) = sum over multi-indices a of  coeff_a * q^a
class PolynomialPotential final : public Potential {
 public:
  using Exponents = std::vector<int>;
  PolynomialPotential(int m, std::map<Exponents, double> terms);

  int dim() const override { return m_; }
  double eval(const Vec& q) const override;
  Vec grad(const Vec& q) const override;
  const std::map<Exponents, double>& terms() const { return terms_; }

  static PotentialPtr harmonic(int m);  // V = |q|^2 / 2
  static PotentialPtr zero(int m);

 private:
  int m_;
  std::map<Exponents, double> terms_;
};

// trig polynomial in q (periodic potential)
class TrigPotential final : public Potential {
 public:
  explicit TrigPotential(TrigPoly f) : f_(std::move(f)) {}
  int dim() const override { return f_.dim(); }
  double eval(const Vec& q) const override { return f_.eval(q); }
  Vec grad(const Vec& q) const override;
  const TrigPoly& poly() const { return f_; }

 private:
  TrigPoly f_;
};

// RBF sum with a coercive quadratic tail activated outside radius R by a
// quintic cutoff:  V = sum_i w_i exp(-|q-c_i|^2/(2 sigma^2))
//                    + S((|q|-R)/R) * tau |q|^2
class RbfPotential final : public Potential {
 public:
  RbfPotential(Eigen::MatrixXd centers, Vec weights, double sigma, double tau,
               double radius);

  int dim() const override { return static_cast<int>(centers_.rows()); }
  double eval(const Vec& q) const override;
  Vec grad(const Vec& q) const override;

  // V(q) >= tau' |q|^2 - K for stated constants (tail analysis)
  struct CoercivityBound {
    double tau_prime;
    double offset;
  };
  CoercivityBound coercivity() const;

  const Eigen::MatrixXd& centers() const { return centers_; }
  const Vec& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }
  double radius() const { return radius_; }

 private:
  Eigen::MatrixXd centers_;  // m x K
  Vec weights_;
  double sigma_, tau_, radius_;
};

}  // namespace wellflow

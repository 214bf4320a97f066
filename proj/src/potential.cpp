#include "wellflow/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace wellflow {

double smoothstep_quintic(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_quintic_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return u * u * (30.0 + u * (-60.0 + 30.0 * u));
}

PolynomialPotential::PolynomialPotential(int m,
                                         std::map<Exponents, double> terms)
    : m_(m), terms_(std::move(terms)) {
  for (const auto& [e, c] : terms_) {
    if (static_cast<int>(e.size()) != m_)
      throw std::invalid_argument("PolynomialPotential: exponent size");
    for (int v : e)
      if (v < 0) throw std::invalid_argument("PolynomialPotential: exponent");
  }
}

double PolynomialPotential::eval(const Vec& q) const {
  double acc = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < m_; ++i)
      for (int r = 0; r < e[i]; ++r) t *= q[i];
    acc += t;
  }
  return acc;
}

Vec PolynomialPotential::grad(const Vec& q) const {
  Vec g = Vec::Zero(m_);
  for (const auto& [e, c] : terms_) {
    for (int i = 0; i < m_; ++i) {
      if (e[i] == 0) continue;
      double t = c * e[i];
      for (int j = 0; j < m_; ++j) {
        const int pw = (j == i) ? e[j] - 1 : e[j];
        for (int r = 0; r < pw; ++r) t *= q[j];
      }
      g[i] += t;
    }
  }
  return g;
}

PotentialPtr PolynomialPotential::harmonic(int m) {
  std::map<Exponents, double> t;
  for (int i = 0; i < m; ++i) {
    Exponents e(m, 0);
    e[i] = 2;
    t[e] = 0.5;
  }
  return std::make_shared<PolynomialPotential>(m, std::move(t));
}

PotentialPtr PolynomialPotential::zero(int m) {
  return std::make_shared<PolynomialPotential>(
      m, std::map<Exponents, double>{});
}

Vec TrigPotential::grad(const Vec& q) const {
  Vec g(f_.dim());
  for (int i = 0; i < f_.dim(); ++i) g[i] = f_.deriv(i).eval(q);
  return g;
}

RbfPotential::RbfPotential(Eigen::MatrixXd centers, Vec weights, double sigma,
                           double tau, double radius)
    : centers_(std::move(centers)),
      weights_(std::move(weights)),
      sigma_(sigma),
      tau_(tau),
      radius_(radius) {
  if (centers_.cols() != weights_.size())
    throw std::invalid_argument("RbfPotential: centers/weights mismatch");
  if (sigma_ <= 0.0 || radius_ <= 0.0)
    throw std::invalid_argument("RbfPotential: need sigma, R > 0");
}

double RbfPotential::eval(const Vec& q) const {
  double acc = 0.0;
  for (int i = 0; i < weights_.size(); ++i) {
    const double d2 = (q - centers_.col(i)).squaredNorm();
    acc += weights_[i] * std::exp(-d2 / (2.0 * sigma_ * sigma_));
  }
  const double r = q.norm();
  acc += smoothstep_quintic((r - radius_) / radius_) * tau_ * q.squaredNorm();
  return acc;
}

Vec RbfPotential::grad(const Vec& q) const {
  Vec g = Vec::Zero(q.size());
  for (int i = 0; i < weights_.size(); ++i) {
    const Vec d = q - centers_.col(i);
    const double e = std::exp(-d.squaredNorm() / (2.0 * sigma_ * sigma_));
    g -= (weights_[i] * e / (sigma_ * sigma_)) * d;
  }
  const double r = q.norm();
  const double u = (r - radius_) / radius_;
  const double S = smoothstep_quintic(u);
  g += (2.0 * tau_ * S) * q;
  if (r > 0.0) {
    const double Sp = smoothstep_quintic_deriv(u) / radius_;
    g += (Sp * tau_ * r) * q;  // S'(u) * |q|^2 * q/|q| / R
  }
  return g;
}

RbfPotential::CoercivityBound RbfPotential::coercivity() const {
  // outside 2R the tail is fully active: V >= tau |q|^2 - sum |w_i|;
  // inside 2R: V >= -sum |w_i| >= tau |q|^2 - (sum |w_i| + 4 tau R^2)
  double wsum = 0.0;
  for (int i = 0; i < weights_.size(); ++i) wsum += std::abs(weights_[i]);
  return {tau_, wsum + 4.0 * tau_ * radius_ * radius_};
}

}  // namespace wellflow

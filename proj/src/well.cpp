#include "wellflow/well.hpp"

#include <cmath>
#include <stdexcept>

namespace wellflow {

WellTrajectory integrate_well(const Potential& V, const WellState& s0,
                              double T, double dt) {
  if (dt <= 0.0 || T <= 0.0)
    throw std::invalid_argument("integrate_well: need dt > 0 and T > 0");
  if (s0.q.size() != V.dim() || s0.p.size() != V.dim())
    throw std::invalid_argument("integrate_well: state dimension mismatch");

  WellTrajectory traj;
  traj.step_size = dt;
  traj.method = "leapfrog";
  Vec q = s0.q, p = s0.p;
  Vec g = V.grad(q);
  if (!g.allFinite())
    throw std::runtime_error("integrate_well: gradient evaluation failed");
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back({q, p});
  const long nfull = static_cast<long>(std::floor(T / dt + 1e-12));
  const double tail = T - nfull * dt;
  auto step = [&](double h) {
    p -= 0.5 * h * g;
    q += h * p;
    g = V.grad(q);
    if (!g.allFinite())
      throw std::runtime_error("integrate_well: gradient evaluation failed");
    p -= 0.5 * h * g;
  };
  for (long k = 0; k < nfull; ++k) {
    step(dt);
    t = (k + 1) * dt;
    traj.times.push_back(t);
    traj.states.push_back({q, p});
  }
  if (tail > 1e-12 * std::max(1.0, T)) {
    step(tail);
    traj.times.push_back(T);
    traj.states.push_back({q, p});
  }
  return traj;
}

double energy(const Potential& V, const WellState& s) {
  return 0.5 * s.p.squaredNorm() + V.eval(s.q);
}

LiftedSystem::LiftedSystem(TorusFlow base) : base_(std::move(base)) {
  const int n = base_.dim;
  dX_.resize(n);
  for (int j = 0; j < n; ++j) {
    dX_[j].reserve(n);
    for (int i = 0; i < n; ++i) dX_[j].push_back(base_.components[j].deriv(i));
  }
}

Vec LiftedSystem::eval(const Vec& qp) const {
  const int n = base_.dim;
  if (qp.size() != 2 * n)
    throw std::invalid_argument("LiftedSystem::eval: dimension mismatch");
  const Vec q = qp.head(n);
  Vec out(2 * n);
  for (int i = 0; i < n; ++i) out[i] = base_.components[i].eval(q);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += qp[n + j] * dX_[j][i].eval(q);
    out[n + i] = -acc;
  }
  return out;
}

double LiftedSystem::hamiltonian(const Vec& qp) const {
  const int n = base_.dim;
  const Vec q = qp.head(n);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += qp[n + j] * base_.components[j].eval(q);
  return acc;
}

Vec LiftedSystem::zero_section(const Vec& q) const {
  Vec qp = Vec::Zero(2 * base_.dim);
  qp.head(base_.dim) = q;
  return qp;
}

Trajectory LiftedSystem::integrate(const Vec& qp0, double T, double dt) const {
  if (dt <= 0.0 || T <= 0.0)
    throw std::invalid_argument("LiftedSystem::integrate: dt, T > 0");
  const int n = base_.dim;
  auto renorm = [&](Vec v) {
    Vec q = reduce_mod1(v.head(n));
    v.head(n) = q;
    return v;
  };
  Trajectory traj;
  traj.step_size = dt;
  traj.method = "rk4-lift";
  Vec x = renorm(qp0);
  traj.times.push_back(0.0);
  traj.points.push_back(x);
  double t = 0.0;
  const long nfull = static_cast<long>(std::floor(T / dt + 1e-12));
  auto step = [&](const Vec& u, double h) {
    const Vec k1 = eval(u);
    const Vec k2 = eval(renorm(u + 0.5 * h * k1));
    const Vec k3 = eval(renorm(u + 0.5 * h * k2));
    const Vec k4 = eval(renorm(u + h * k3));
    return renorm(u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };
  for (long k = 0; k < nfull; ++k) {
    x = step(x, dt);
    t = (k + 1) * dt;
    if (!x.allFinite())
      throw std::runtime_error("LiftedSystem::integrate: non-finite state");
    traj.times.push_back(t);
    traj.points.push_back(x);
  }
  if (t < T - 1e-12 * std::max(1.0, T)) {
    x = step(x, T - t);
    traj.times.push_back(T);
    traj.points.push_back(x);
  }
  return traj;
}

LiftedSystem cotangent_lift(const TorusFlow& flow) { return LiftedSystem(flow); }

}  // namespace wellflow

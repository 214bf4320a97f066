#include "wellflow/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace wellflow {

Vec reduce_mod1(Vec x) {
  for (int i = 0; i < x.size(); ++i) {
    x[i] -= std::floor(x[i]);
    if (x[i] >= 1.0) x[i] = 0.0;  // floor rounding at the seam
  }
  return x;
}

void for_each_grid(int n, int res, const std::function<void(const Vec&)>& fn) {
  Vec x = Vec::Zero(n);
  std::vector<int> idx(n, 0);
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(idx[i]) / res;
    fn(x);
    int i = 0;
    while (i < n && ++idx[i] == res) idx[i++] = 0;
    if (i == n) break;
  }
}

TorusFlow::TorusFlow(int n, std::vector<TrigPoly> comps)
    : dim(n), components(std::move(comps)) {
  if (static_cast<int>(components.size()) != n)
    throw std::invalid_argument("TorusFlow: need one component per dimension");
  for (const auto& c : components)
    if (c.dim() != n)
      throw std::invalid_argument("TorusFlow: component dimension mismatch");
}

Vec TorusFlow::eval(const Vec& x) const {
  if (x.size() != dim)
    throw std::invalid_argument("TorusFlow::eval: dimension mismatch");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = components[i].eval(x);
  return v;
}

Eigen::MatrixXd TorusFlow::jacobian(const Vec& x) const {
  Eigen::MatrixXd J(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) J(i, j) = components[i].deriv(j).eval(x);
  return J;
}

int TorusFlow::degree() const {
  int d = 0;
  for (const auto& c : components) d = std::max(d, c.degree());
  return d;
}

TorusFlow::NonsingularCert TorusFlow::certify_nonsingular(int grid_res) const {
  NonsingularCert cert;
  if (grid_res <= 0) grid_res = std::max(16, 8 * std::max(1, degree()));
  cert.grid_res = grid_res;

  // f = |Y|^2 as a trig polynomial; its gradient bound gives the margin
  TrigPoly f(dim);
  for (const auto& c : components) f += c * c;
  double grad_sum = 0.0;
  for (int i = 0; i < dim; ++i) grad_sum += f.grad_bound(i);
  const double h = 1.0 / grid_res;
  cert.margin = 0.5 * h * grad_sum;

  double mn = std::numeric_limits<double>::infinity();
  for_each_grid(dim, grid_res, [&](const Vec& x) {
    mn = std::min(mn, f.eval(x));
  });
  cert.grid_min_sq = mn;
  cert.certified = (mn - cert.margin) > 0.0;
  return cert;
}

Vec eval_field(const TorusFlow& flow, const Vec& x) { return flow.eval(x); }

namespace {

Vec rk4_step(const TorusFlow& flow, const Vec& x, double dt) {
  const Vec k1 = flow.eval(x);
  const Vec k2 = flow.eval(reduce_mod1(x + 0.5 * dt * k1));
  const Vec k3 = flow.eval(reduce_mod1(x + 0.5 * dt * k2));
  const Vec k4 = flow.eval(reduce_mod1(x + dt * k3));
  return reduce_mod1(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace

Trajectory integrate(const TorusFlow& flow, const Vec& x0, double T,
                     double dt) {
  if (dt <= 0.0 || T <= 0.0)
    throw std::invalid_argument("integrate: need dt > 0 and T > 0");
  Trajectory traj;
  traj.step_size = dt;
  traj.method = "rk4";
  Vec x = reduce_mod1(x0);
  double t = 0.0;
  traj.times.push_back(t);
  traj.points.push_back(x);
  const auto push = [&](double tn, const Vec& xn) {
    if (!xn.allFinite())
      throw std::runtime_error("integrate: non-finite state");
    traj.times.push_back(tn);
    traj.points.push_back(xn);
  };
  const long nfull = static_cast<long>(std::floor(T / dt + 1e-12));
  for (long k = 0; k < nfull; ++k) {
    x = rk4_step(flow, x, dt);
    t = (k + 1) * dt;
    push(t, x);
  }
  if (t < T - 1e-12 * std::max(1.0, T)) {
    x = rk4_step(flow, x, T - t);
    push(T, x);
  }
  return traj;
}

Vec flow_map(const TorusFlow& flow, double t, const Vec& x, double tol) {
  if (t == 0.0) return reduce_mod1(x);
  double dt = std::min(1e-3, std::pow(tol, 0.25));
  const double at = std::abs(t);
  const double dir = t > 0 ? 1.0 : -1.0;
  // negative times via the reversed field
  TorusFlow f = flow;
  if (dir < 0)
    for (auto& c : f.components) c = c.scaled(-1.0);

  auto run = [&](double step) {
    return integrate(f, x, at, step).points.back();
  };
  Vec coarse = run(dt);
  for (int iter = 0; iter < 8; ++iter) {
    Vec fine = run(dt / 2.0);
    // torus distance, component-wise
    double err = 0.0;
    for (int i = 0; i < flow.dim; ++i) {
      double d = std::abs(coarse[i] - fine[i]);
      err = std::max(err, std::min(d, 1.0 - d));
    }
    if (err <= tol) return fine;
    coarse = fine;
    dt /= 2.0;
  }
  return coarse;
}

Vec flow_map_with_jacobian(const TorusFlow& flow, double t, const Vec& x,
                           Eigen::MatrixXd& J, double dt) {
  const int n = flow.dim;
  // augmented RK4: xdot = Y(x), Jdot = DY(x) J
  Vec u = reduce_mod1(x);
  J = Eigen::MatrixXd::Identity(n, n);
  const double dir = t >= 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  while (remaining > 1e-15) {
    const double h = dir * std::min(dt, remaining);
    const Vec k1 = flow.eval(u);
    const Eigen::MatrixXd K1 = flow.jacobian(u) * J;
    const Vec u2 = reduce_mod1(u + 0.5 * h * k1);
    const Vec k2 = flow.eval(u2);
    const Eigen::MatrixXd K2 = flow.jacobian(u2) * (J + 0.5 * h * K1);
    const Vec u3 = reduce_mod1(u + 0.5 * h * k2);
    const Vec k3 = flow.eval(u3);
    const Eigen::MatrixXd K3 = flow.jacobian(u3) * (J + 0.5 * h * K2);
    const Vec u4 = reduce_mod1(u + h * k3);
    const Vec k4 = flow.eval(u4);
    const Eigen::MatrixXd K4 = flow.jacobian(u4) * (J + h * K3);
    u = reduce_mod1(u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    J += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    remaining -= std::abs(h);
  }
  return u;
}

MorphismReport check_morphism(const ChartMap& phi, const TorusFlow& src,
                              const TorusFlow& dst, int grid_res, double tol) {
  if (phi.source_dim() != src.dim || phi.target_dim() != dst.dim)
    throw std::invalid_argument("check_morphism: dimension mismatch");
  MorphismReport rep;
  rep.grid_res = grid_res;
  double mx = 0.0;
  for_each_grid(src.dim, grid_res, [&](const Vec& y) {
    const Vec lhs = phi.jacobian(y) * src.eval(y);
    const Vec rhs = dst.eval(reduce_mod1(phi.eval(y)));
    mx = std::max(mx, (lhs - rhs).cwiseAbs().maxCoeff());
  });
  rep.max_residual = mx;
  rep.pass = mx <= tol;
  return rep;
}

}  // namespace wellflow

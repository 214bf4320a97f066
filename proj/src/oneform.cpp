#include "wellflow/oneform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wellflow {

OneForm::OneForm(int n, std::vector<TrigPoly> comps)
    : dim(n), components(std::move(comps)) {
  if (static_cast<int>(components.size()) != n)
    throw std::invalid_argument("OneForm: need one component per dimension");
  for (const auto& c : components)
    if (c.dim() != n)
      throw std::invalid_argument("OneForm: component dimension mismatch");
}

OneForm OneForm::zero(int n) {
  return OneForm(n, std::vector<TrigPoly>(n, TrigPoly(n)));
}

OneForm OneForm::coordinate(int n, int axis) {
  OneForm f = zero(n);
  f.components[axis] = TrigPoly::constant(n, 1.0);
  return f;
}

int OneForm::degree() const {
  int d = 0;
  for (const auto& c : components) d = std::max(d, c.degree());
  return d;
}

TrigPoly contract(const OneForm& theta, const TorusFlow& Y) {
  if (theta.dim != Y.dim)
    throw std::invalid_argument("contract: dimension mismatch");
  TrigPoly f(theta.dim);
  for (int i = 0; i < theta.dim; ++i)
    f += theta.components[i] * Y.components[i];
  return f;
}

OneForm exterior_derivative(const TrigPoly& L) {
  const int n = L.dim();
  std::vector<TrigPoly> comps;
  comps.reserve(n);
  for (int i = 0; i < n; ++i) comps.push_back(L.deriv(i));
  return OneForm(n, std::move(comps));
}

OneForm lie_derivative(const TorusFlow& Y, const OneForm& theta) {
  if (theta.dim != Y.dim)
    throw std::invalid_argument("lie_derivative: dimension mismatch");
  const int n = theta.dim;
  // Cartan: L_Y theta = d(i_Y theta) + i_Y(d theta)
  const TrigPoly iY = contract(theta, Y);
  std::vector<TrigPoly> comps;
  comps.reserve(n);
  for (int j = 0; j < n; ++j) {
    TrigPoly c = iY.deriv(j);
    for (int i = 0; i < n; ++i) {
      // (i_Y d theta)_j = sum_i Y_i (d_i theta_j - d_j theta_i)
      c += Y.components[i] * theta.components[j].deriv(i);
      c -= Y.components[i] * theta.components[i].deriv(j);
    }
    comps.push_back(c.pruned(0.0));
  }
  return OneForm(n, std::move(comps));
}

ExactnessResult is_exact(const OneForm& omega, double tol) {
  const int n = omega.dim;
  const double two_pi = 2.0 * std::numbers::pi;
  // collect candidate frequencies (canonical) across components
  std::map<Freq, bool> freqs;
  double scale = 1.0;
  for (const auto& c : omega.components) {
    scale = std::max(scale, c.max_abs_coeff());
    for (const auto& [k, cs] : c.terms()) freqs[k] = true;
  }
  TrigPoly L(n);
  for (const auto& [k, _] : freqs) {
    int axis = -1;
    for (int i = 0; i < n; ++i)
      if (k[i] != 0) {
        axis = i;
        break;
      }
    if (axis < 0) continue;  // zero frequency: a period obstruction if nonzero
    const auto cs = omega.components[axis].coeff(k);
    const double d = two_pi * k[axis];
    // omega_axis = d/dy_axis L  =>  L has (c,s) = (-s_w/d, c_w/d) at k
    L.add_term(k, -cs.s / d, cs.c / d);
  }
  ExactnessResult r;
  double resid = 0.0;
  for (int i = 0; i < n; ++i) {
    const TrigPoly diff = L.deriv(i) - omega.components[i];
    resid = std::max(resid, diff.max_abs_coeff());
  }
  r.residual = resid;
  r.exact = resid <= tol * scale;
  r.potential = L.pruned(0.0);
  return r;
}

std::string AdaptationReport::class_name() const {
  switch (classification) {
    case Class::Strong: return "strong";
    case Class::Weak: return "weak";
    case Class::None: return "none";
  }
  return "?";
}

AdaptationReport check_adapted(const TorusFlow& flow, const OneForm& theta,
                               double eps) {
  AdaptationReport rep;
  const TrigPoly f = contract(theta, flow);
  const ExactnessResult ex = is_exact(lie_derivative(flow, theta), eps);
  rep.exactness_residual = ex.residual;
  rep.has_potential = ex.exact;
  if (ex.exact) rep.potential = ex.potential;

  const int n = flow.dim;
  const int res = std::max(16, 8 * std::max(1, f.degree()));
  double grad_sum = 0.0;
  for (int i = 0; i < n; ++i) grad_sum += f.grad_bound(i);
  const double h = 1.0 / res;
  rep.margin = 0.5 * h * grad_sum;
  double mn = std::numeric_limits<double>::infinity();
  for_each_grid(n, res, [&](const Vec& x) { mn = std::min(mn, f.eval(x)); });
  rep.grid_min = mn;
  rep.min_thetaY = mn - rep.margin;

  if (ex.exact && rep.min_thetaY > 0.0)
    rep.classification = AdaptationReport::Class::Strong;
  else if (ex.exact && rep.grid_min >= -eps)
    rep.classification = AdaptationReport::Class::Weak;
  else
    rep.classification = AdaptationReport::Class::None;
  return rep;
}

namespace {

// flatten projections / integer-affine pieces to a single integer-affine map
std::optional<std::pair<Eigen::MatrixXi, Vec>> flatten_integer_affine(
    const ChartMap& phi) {
  using Kind = ChartMap::Kind;
  switch (phi.kind()) {
    case Kind::Affine:
      if (!phi.is_integer_affine()) return std::nullopt;
      return std::make_pair(phi.affine_matrix_int(), phi.affine_shift());
    case Kind::Projection: {
      Eigen::MatrixXi A =
          Eigen::MatrixXi::Zero(phi.target_dim(), phi.source_dim());
      for (int i = 0; i < phi.target_dim(); ++i)
        A(i, phi.kept_indices()[i]) = 1;
      return std::make_pair(A, Vec::Zero(phi.target_dim()));
    }
    case Kind::Product: {
      auto l = flatten_integer_affine(phi.left());
      auto r = flatten_integer_affine(phi.right());
      if (!l || !r) return std::nullopt;
      Eigen::MatrixXi A =
          Eigen::MatrixXi::Zero(phi.target_dim(), phi.source_dim());
      A.topLeftCorner(l->first.rows(), l->first.cols()) = l->first;
      A.bottomRightCorner(r->first.rows(), r->first.cols()) = r->first;
      Vec b(phi.target_dim());
      b.head(l->second.size()) = l->second;
      b.tail(r->second.size()) = r->second;
      return std::make_pair(A, b);
    }
    case Kind::Compose: {
      auto outer = flatten_integer_affine(phi.left());
      auto inner = flatten_integer_affine(phi.right());
      if (!outer || !inner) return std::nullopt;
      Eigen::MatrixXi A = outer->first * inner->first;
      Vec b = outer->first.cast<double>() * inner->second + outer->second;
      return std::make_pair(A, b);
    }
    case Kind::Trig:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::pair<Freq, bool>> trig_basis(int n, int D) {
  std::vector<std::pair<Freq, bool>> basis;
  Freq k(n, -D);
  while (true) {
    int lead = 0;
    for (int v : k)
      if (v != 0) {
        lead = v;
        break;
      }
    if (lead > 0) {
      basis.emplace_back(k, false);
      basis.emplace_back(k, true);
    } else if (lead == 0) {
      basis.emplace_back(k, false);  // constant
    }
    int i = 0;
    while (i < n && ++k[i] > D) k[i++] = -D;
    if (i == n) break;
  }
  return basis;
}

}  // namespace

TrigPoly fit_trig_grid(int n, int grid_res, const std::vector<double>& values,
                       int D, double* residual) {
  const auto basis = trig_basis(n, D);
  const int rows = static_cast<int>(values.size());
  Eigen::MatrixXd B(rows, basis.size());
  {
    int r = 0;
    const double two_pi = 2.0 * std::numbers::pi;
    for_each_grid(n, grid_res, [&](const Vec& y) {
      for (size_t c = 0; c < basis.size(); ++c) {
        double ph = 0.0;
        for (int i = 0; i < n; ++i) ph += basis[c].first[i] * y[i];
        ph *= two_pi;
        B(r, c) = basis[c].second ? std::sin(ph) : std::cos(ph);
      }
      ++r;
    });
    if (r != rows)
      throw std::invalid_argument("fit_trig_grid: wrong sample count");
  }
  Eigen::Map<const Eigen::VectorXd> v(values.data(), rows);
  const Eigen::VectorXd coef =
      B.colPivHouseholderQr().solve(v.eval()).eval();
  if (residual) *residual = (B * coef - v).cwiseAbs().maxCoeff();
  TrigPoly f(n);
  for (size_t c = 0; c < basis.size(); ++c) {
    if (coef[c] == 0.0) continue;
    if (basis[c].second)
      f.add_term(basis[c].first, 0.0, coef[c]);
    else
      f.add_term(basis[c].first, coef[c], 0.0);
  }
  return f.pruned(0.0);
}

PullbackResult pullback(const ChartMap& phi, const OneForm& theta,
                        bool allow_fit, int degree_cap, int grid_res) {
  if (phi.target_dim() != theta.dim)
    throw std::invalid_argument("pullback: target dim != form dim");
  const int nsrc = phi.source_dim();

  if (auto aff = flatten_integer_affine(phi)) {
    const auto& [A, b] = *aff;
    std::vector<TrigPoly> comps(nsrc, TrigPoly(nsrc));
    for (int j = 0; j < nsrc; ++j) {
      for (int i = 0; i < theta.dim; ++i) {
        if (A(i, j) == 0) continue;
        comps[j] += theta.components[i]
                        .compose_affine(A, b)
                        .scaled(static_cast<double>(A(i, j)));
      }
      comps[j] = comps[j].pruned(0.0);
    }
    return {OneForm(nsrc, std::move(comps)), true, 0.0};
  }

  if (!allow_fit)
    throw std::invalid_argument(
        "pullback: map class not exactly representable; pass allow_fit");

  if (degree_cap < 0) degree_cap = theta.degree() + 4;
  if (grid_res <= 0) grid_res = std::max(16, 4 * (degree_cap + 1));
  std::vector<std::vector<double>> samples(nsrc);
  for_each_grid(nsrc, grid_res, [&](const Vec& y) {
    const Vec z = phi.eval(y);
    const Eigen::MatrixXd J = phi.jacobian(y);
    for (int j = 0; j < nsrc; ++j) {
      double acc = 0.0;
      for (int i = 0; i < theta.dim; ++i)
        acc += theta.components[i].eval(reduce_mod1(z)) * J(i, j);
      samples[j].push_back(acc);
    }
  });
  PullbackResult out;
  std::vector<TrigPoly> comps;
  double worst = 0.0;
  for (int j = 0; j < nsrc; ++j) {
    double resid = 0.0;
    comps.push_back(
        fit_trig_grid(nsrc, grid_res, samples[j], degree_cap, &resid));
    worst = std::max(worst, resid);
  }
  out.form = OneForm(nsrc, std::move(comps));
  out.exact = false;
  out.fit_residual = worst;
  return out;
}

AveragedForm average(const TorusFlow& flow, const OneForm& theta,
                     int n_samples, int degree_cap, int grid_res) {
  if (n_samples < 1) throw std::invalid_argument("average: n_samples >= 1");
  const int n = flow.dim;
  if (degree_cap < 0) degree_cap = theta.degree() + flow.degree() + 4;
  if (grid_res <= 0) grid_res = std::max(16, 4 * (degree_cap + 1));

  std::vector<std::vector<double>> acc(n);
  const int npts = static_cast<int>(std::pow(grid_res, n));
  for (int j = 0; j < n; ++j) acc[j].assign(npts, 0.0);

  for (int s = 0; s < n_samples; ++s) {
    const double t = (s + 0.5) / n_samples;  // midpoint rule
    int r = 0;
    for_each_grid(n, grid_res, [&](const Vec& y) {
      Eigen::MatrixXd J;
      const Vec z = flow_map_with_jacobian(flow, t, y, J);
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
          v += theta.components[i].eval(z) * J(i, j);
        acc[j][r] += v / n_samples;
      }
      ++r;
    });
  }

  AveragedForm out;
  out.degree = degree_cap;
  out.n_samples = n_samples;
  std::vector<TrigPoly> comps;
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double resid = 0.0;
    comps.push_back(fit_trig_grid(n, grid_res, acc[j], degree_cap, &resid));
    worst = std::max(worst, resid);
  }
  out.form = OneForm(n, std::move(comps));
  out.fit_residual = worst;
  return out;
}

double cycle_integral(const OneForm& theta, int axis, const Vec& fixed) {
  if (axis < 0 || axis >= theta.dim)
    throw std::invalid_argument("cycle_integral: axis out of range");
  const double two_pi = 2.0 * std::numbers::pi;
  double acc = 0.0;
  for (const auto& [k, cs] : theta.components[axis].terms()) {
    if (k[axis] != 0) continue;  // integrates to zero over the cycle
    double ph = 0.0;
    for (int i = 0; i < theta.dim; ++i)
      if (i != axis) ph += k[i] * fixed[i];
    ph *= two_pi;
    acc += cs.c * std::cos(ph) + cs.s * std::sin(ph);
  }
  return acc;
}

namespace {

// one RK4 step of the well field (p, -grad V) over time t
Vec well_flow_step(const Potential& V, const Vec& x, double t) {
  const int m = V.dim();
  auto field = [&](const Vec& u) {
    Vec f(2 * m);
    f.head(m) = u.tail(m);
    f.tail(m) = -V.grad(u.head(m));
    return f;
  };
  const Vec k1 = field(x);
  const Vec k2 = field(x + 0.5 * t * k1);
  const Vec k3 = field(x + 0.5 * t * k2);
  const Vec k4 = field(x + t * k3);
  return x + (t / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ((e^{tX})^* theta)(e_dir) at x, theta the canonical form sum p_i dq_i
double canonical_pullback_component(const Potential& V, const Vec& x, double t,
                                    int dir) {
  const int m = V.dim();
  // the spatial probe cannot be too small: its roundoff noise is later
  // divided by the (smaller) time step h, so keep it at 1e-4 where the
  // truncation term is still O(probe^2) and cancels in the t-difference
  const double probe = 1e-4;
  Vec e = Vec::Zero(2 * m);
  e[dir] = 1.0;
  const Vec fp = well_flow_step(V, x + probe * e, t);
  const Vec fm = well_flow_step(V, x - probe * e, t);
  const Vec dphi_e = (fp - fm) / (2.0 * probe);
  const Vec mid = well_flow_step(V, x, t);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += mid[m + i] * dphi_e[i];
  return acc;
}

}  // namespace

double canonical_form_check(const Potential& V,
                            const std::vector<WellState>& samples, double h) {
  if (h <= 0.0) throw std::invalid_argument("canonical_form_check: h > 0");
  const int m = V.dim();
  auto lagrangian = [&](const Vec& x) {
    return 0.5 * x.tail(m).squaredNorm() - V.eval(x.head(m));
  };
  double worst = 0.0;
  for (const auto& s : samples) {
    Vec x(2 * m);
    x << s.q, s.p;
    for (int dir = 0; dir < 2 * m; ++dir) {
      const double lie = (canonical_pullback_component(V, x, h, dir) -
                          canonical_pullback_component(V, x, -h, dir)) /
                         (2.0 * h);
      Vec e = Vec::Zero(2 * m);
      e[dir] = 1.0;
      const double dL =
          (lagrangian(x + h * e) - lagrangian(x - h * e)) / (2.0 * h);
      worst = std::max(worst, std::abs(lie - dL));
    }
  }
  return worst;
}

}  // namespace wellflow

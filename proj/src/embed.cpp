#include "wellflow/embed.hpp"
#include <numeric>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace wellflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

QPoly to_rational(const TrigPoly& f) {
  QPoly r(f.dim());
  for (const auto& [k, cs] : f.terms()) r.add_term(k, Rat(cs.c), Rat(cs.s));
  return r;
}

bool is_constant_poly(const TrigPoly& f, double tol) {
  for (const auto& [k, cs] : f.terms()) {
    const bool zero_freq =
        std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    if (!zero_freq && (std::abs(cs.c) > tol || std::abs(cs.s) > tol))
      return false;
  }
  return true;
}

double constant_value(const TrigPoly& f) {
  return f.coeff(Freq(f.dim(), 0)).c;
}

}  // namespace

Eigen::MatrixXd MetricField::at(const Vec& y) const {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = g[i][j].eval(y);
  return G;
}

bool MetricField::is_constant(double tol) const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!is_constant_poly(g[i][j], tol)) return false;
  return true;
}

Eigen::MatrixXd MetricField::constant_part() const {
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = constant_value(g[i][j]);
  return G;
}

double MetricField::duality_residual(const TorusFlow& flow,
                                     const OneForm& theta) const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    TrigPoly defect(n);
    for (int j = 0; j < n; ++j) defect += g[i][j] * flow.components[j];
    defect -= theta.components[i];
    worst = std::max(worst, defect.pruned(0.0).max_abs_coeff());
  }
  return worst;
}

MetricField build_metric(const TorusFlow& flow, const OneForm& theta,
                         const Eigen::MatrixXd& g0, double delta) {
  const int n = flow.dim;
  if (g0.rows() != n || g0.cols() != n || !g0.isApprox(g0.transpose()))
    throw std::invalid_argument("build_metric: g0 must be symmetric n x n");
  const AdaptationReport rep = check_adapted(flow, theta);
  if (!rep.strong())
    throw std::invalid_argument("build_metric: theta is not strongly adapted");

  // a_i = (g0 Y)_i / g0(Y,Y); only constant g0(Y,Y) keeps entries polynomial
  std::vector<TrigPoly> g0Y(n, TrigPoly(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g0Y[i] += flow.components[j].scaled(g0(i, j));
  TrigPoly yy(n);
  for (int i = 0; i < n; ++i) yy += g0Y[i] * flow.components[i];
  yy = yy.pruned(1e-13);
  if (!is_constant_poly(yy, 0.0))
    throw std::invalid_argument(
        "build_metric: g0(Y,Y) must be constant for the polynomial path");
  const double c = constant_value(yy);
  if (c <= 0) throw std::invalid_argument("build_metric: g0(Y,Y) <= 0");
  std::vector<TrigPoly> a;
  for (int i = 0; i < n; ++i) a.push_back(g0Y[i].scaled(1.0 / c));

  const TrigPoly thetaY = contract(theta, flow);
  // g0(Z_i, Z_j) with Z_i = e_i - a_i Y
  std::vector<std::vector<TrigPoly>> g0Z(n, std::vector<TrigPoly>(n, TrigPoly(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TrigPoly t = TrigPoly::constant(n, g0(i, j));
      t -= a[i] * g0Y[j];
      t -= a[j] * g0Y[i];
      t += (a[i] * a[j]).scaled(c);
      g0Z[i][j] = t.pruned(1e-14);
    }

  MetricField M;
  M.n = n;
  M.g.assign(n, std::vector<TrigPoly>(n, TrigPoly(n)));
  std::vector<std::vector<TrigPoly>> base(n, std::vector<TrigPoly>(n, TrigPoly(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TrigPoly t = a[i] * theta.components[j];
      t += a[j] * theta.components[i];
      t -= (a[i] * a[j]) * thetaY;
      base[i][j] = t.pruned(1e-14);
    }

  for (double C = 1.0; C <= double(1LL << 40); C *= 2.0) {
    int deg = 1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        M.g[i][j] = (base[i][j] + g0Z[i][j].scaled(C)).pruned(1e-14);
        deg = std::max(deg, M.g[i][j].degree());
      }
    const int res = std::max(16, 8 * deg);
    double gsum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += M.g[i][j].grad_bound(d);
        gsum = std::max(gsum, s);
      }
    const double margin = n * 0.5 / res * gsum;
    double mn = std::numeric_limits<double>::infinity();
    for_each_grid(n, res, [&](const Vec& y) {
      Eigen::ArrayXd ev =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M.at(y))
              .eigenvalues();
      mn = std::min(mn, ev.minCoeff());
    });
    M.pd = {mn - margin >= delta, mn, margin, res};
    M.C = C;
    if (M.pd.certified) break;
  }
  if (!M.pd.certified)
    throw std::runtime_error("build_metric: positive definiteness not reached");

  // exact rational mirror when the flow is constant: duality is literal
  bool const_flow = true;
  for (const auto& comp : flow.components)
    if (!is_constant_poly(comp, 0.0)) const_flow = false;
  if (const_flow) {
    std::vector<Rat> Yq(n), g0Yq(n, Rat(0));
    for (int i = 0; i < n; ++i) Yq[i] = Rat(constant_value(flow.components[i]));
    Rat cq(0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g0Yq[i] += Rat(g0(i, j)) * Yq[j];
    }
    for (int i = 0; i < n; ++i) cq += g0Yq[i] * Yq[i];
    std::vector<QPoly> thq, aq;
    for (int i = 0; i < n; ++i) {
      thq.push_back(to_rational(theta.components[i]));
      QPoly ai = QPoly::constant(n, g0Yq[i] / cq);
      aq.push_back(ai);
    }
    QPoly thY(n);
    for (int i = 0; i < n; ++i) thY += thq[i] * QPoly::constant(n, Yq[i]);
    M.g_exact.assign(n, std::vector<QPoly>(n, QPoly(n)));
    const Rat Cq(M.C);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        QPoly t = aq[i] * thq[j];
        t += aq[j] * thq[i];
        QPoly corr = (aq[i] * aq[j]) * thY;
        t -= corr;
        // C g0(Z_i,Z_j) is constant here
        Rat zz = Rat(g0(i, j)) - g0Yq[i] * g0Yq[j] / cq;
        t += QPoly::constant(n, Cq * zz);
        M.g_exact[i][j] = t;
      }
    // exact duality: sum_j g_ij Y_j == theta_i coefficient-by-coefficient
    for (int i = 0; i < n; ++i) {
      QPoly dual(n);
      for (int j = 0; j < n; ++j)
        dual += M.g_exact[i][j] * QPoly::constant(n, Yq[j]);
      dual -= thq[i];
      for (const auto& [k, cs] : dual.terms())
        if (cs.c != 0 || cs.s != 0)
          throw std::logic_error("build_metric: exact duality violated");
    }
    M.exact = true;
  }
  return M;
}

Vec EmbeddingMap::eval_q(const Vec& y) const {
  Vec z(m);
  for (int c = 0; c < m; ++c) z[c] = q[c].eval(y);
  return z;
}

Vec EmbeddingMap::eval_p(const Vec& y) const {
  if (static_cast<int>(p.size()) != m)
    throw std::logic_error("EmbeddingMap: momentum not attached");
  Vec z(m);
  for (int c = 0; c < m; ++c) z[c] = p[c].eval(y);
  return z;
}

Eigen::MatrixXd EmbeddingMap::jac_q(const Vec& y) const {
  Eigen::MatrixXd J(m, n);
  for (int c = 0; c < m; ++c)
    for (int i = 0; i < n; ++i) J(c, i) = q[c].deriv(i).eval(y);
  return J;
}

namespace {

// Lawson-Hanson nonnegative least squares for A w = b
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     int max_iter = 400) {
  const int nc = static_cast<int>(A.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nc);
  std::vector<bool> inP(nc, false);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = A.transpose() * (b - A * w);
    int best = -1;
    double gmax = 1e-14;
    for (int j = 0; j < nc; ++j)
      if (!inP[j] && grad[j] > gmax) {
        gmax = grad[j];
        best = j;
      }
    if (best < 0) break;
    inP[best] = true;
    while (true) {
      std::vector<int> P;
      for (int j = 0; j < nc; ++j)
        if (inP[j]) P.push_back(j);
      Eigen::MatrixXd Ap(A.rows(), P.size());
      for (size_t c = 0; c < P.size(); ++c) Ap.col(c) = A.col(P[c]);
      const Eigen::VectorXd z =
          Ap.colPivHouseholderQr().solve(b);
      bool ok = true;
      for (size_t c = 0; c < P.size(); ++c)
        if (z[c] <= 0) ok = false;
      if (ok) {
        w.setZero();
        for (size_t c = 0; c < P.size(); ++c) w[P[c]] = z[c];
        break;
      }
      double alpha = 1.0;
      for (size_t c = 0; c < P.size(); ++c)
        if (z[c] <= 0)
          alpha = std::min(alpha, w[P[c]] / (w[P[c]] - z[c]));
      for (size_t c = 0; c < P.size(); ++c) {
        w[P[c]] += alpha * (z[c] - w[P[c]]);
        if (w[P[c]] <= 1e-15) {
          w[P[c]] = 0.0;
          inP[P[c]] = false;
        }
      }
    }
  }
  return w;
}

std::vector<Freq> primitive_candidates(int n, int max_freq) {
  std::vector<Freq> out;
  Freq k(n, -max_freq);
  while (true) {
    int lead = 0, gcd = 0;
    for (int v : k) {
      if (lead == 0 && v != 0) lead = v;
      gcd = std::gcd(gcd, std::abs(v));
    }
    if (lead > 0 && gcd == 1) out.push_back(k);
    int i = 0;
    while (i < n && ++k[i] > max_freq) k[i++] = -max_freq;
    if (i == n) break;
  }
  std::sort(out.begin(), out.end(), [](const Freq& a, const Freq& b) {
    long na = 0, nb = 0;
    for (int v : a) na += static_cast<long>(v) * v;
    for (int v : b) nb += static_cast<long>(v) * v;
    return na != nb ? na < nb : a < b;
  });
  return out;
}

void finish_embedding(EmbeddingMap& e, const MetricField& metric) {
  const int n = e.n;
  // residual against the metric, sampled
  const int res = 16;
  double worst = 0.0;
  double gram_min = std::numeric_limits<double>::infinity();
  for_each_grid(n, res, [&](const Vec& y) {
    const Eigen::MatrixXd J = e.jac_q(y);
    const Eigen::MatrixXd G = J.transpose() * J;
    worst = std::max(worst, (G - metric.at(y)).cwiseAbs().maxCoeff());
    gram_min = std::min(gram_min, G.determinant());
  });
  e.residual = worst;
  e.gram_min = gram_min;

  const int pres = n <= 2 ? 8 : 5;
  std::vector<Vec> pts;
  for_each_grid(n, pres, [&](const Vec& y) { pts.push_back(y); });
  double mind = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      mind = std::min(mind, (e.eval_q(pts[i]) - e.eval_q(pts[j])).norm());
  e.min_pair_dist = mind;
}

}  // namespace

EmbeddingMap flat_embedding(const MetricField& metric, int max_freq) {
  const int n = metric.n;
  if (!metric.is_constant(1e-11))
    throw std::invalid_argument("flat_embedding: metric must be constant");
  const Eigen::MatrixXd G = metric.constant_part();

  const auto cands = primitive_candidates(n, max_freq);
  const int nsym = n * (n + 1) / 2;
  Eigen::MatrixXd A(nsym, cands.size());
  Eigen::VectorXd b(nsym);
  {
    int r = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++r) {
        const double wgt = i == j ? 1.0 : std::numbers::sqrt2;
        b[r] = wgt * G(i, j);
        for (size_t c = 0; c < cands.size(); ++c)
          A(r, c) = wgt * cands[c][i] * cands[c][j];
      }
  }
  const Eigen::VectorXd w = nnls(A, b);
  const double resid = (A * w - b).cwiseAbs().maxCoeff();
  if (resid >= 1e-12)
    throw std::runtime_error(
        "flat_embedding: candidate frequencies exhausted, best residual " +
        std::to_string(resid));

  EmbeddingMap e;
  e.n = n;
  for (size_t c = 0; c < cands.size(); ++c) {
    if (w[c] <= 1e-14) continue;
    const double r = std::sqrt(w[c]) / kTwoPi;
    TrigPoly qc(n), qs(n);
    qc.add_term(cands[c], r, 0.0);
    qs.add_term(cands[c], 0.0, r);
    e.q.push_back(qc);
    e.q.push_back(qs);
  }
  e.m = static_cast<int>(e.q.size());
  finish_embedding(e, metric);
  return e;
}

void attach_momentum(EmbeddingMap& e, const TorusFlow& flow) {
  e.p.clear();
  for (int c = 0; c < e.m; ++c) {
    TrigPoly pc(e.n);
    for (int i = 0; i < e.n; ++i)
      pc += flow.components[i] * e.q[c].deriv(i);
    e.p.push_back(pc.pruned(1e-15));
  }
}

EmbeddingMap optimize_embedding(const MetricField& metric, int m, int degree,
                                int iters, double tol) {
  const int n = metric.n;
  if (m < 2 * n + 2)
    throw std::invalid_argument("optimize_embedding: m must be >= 2n+2");

  // basis of trig functions up to `degree`
  struct Basis {
    Freq k;
    bool sin;
  };
  std::vector<Basis> basis;
  {
    Freq k(n, -degree);
    while (true) {
      int lead = 0;
      for (int v : k)
        if (v != 0) {
          lead = v;
          break;
        }
      if (lead > 0) {
        basis.push_back({k, false});
        basis.push_back({k, true});
      } else if (lead == 0) {
        basis.push_back({k, false});
      }
      int i = 0;
      while (i < n && ++k[i] > degree) k[i++] = -degree;
      if (i == n) break;
    }
  }
  const int nb = static_cast<int>(basis.size());

  // seed: flat embedding of the constant part, padded to m coordinates
  MetricField flat = metric;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TrigPoly t(n);
      t.add_term(Freq(n, 0), constant_value(metric.g[i][j]), 0.0);
      flat.g[i][j] = t;
    }
  const EmbeddingMap seed = flat_embedding(flat, std::min(degree, 4));
  if (seed.m > m)
    throw std::invalid_argument("optimize_embedding: m below flat seed size");

  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(m, nb);
  for (int c = 0; c < seed.m; ++c)
    for (int j = 0; j < nb; ++j) {
      const auto cs = seed.q[c].coeff(basis[j].k);
      coef(c, j) = basis[j].sin ? cs.s : cs.c;
      if (!basis[j].sin && std::abs(cs.c) < 1e-15) coef(c, j) = 0.0;
    }
  // all-zero padded rows are a Gauss-Newton dead point (their Jacobian
  // columns vanish identically); a small deterministic kick makes them
  // usable for the oscillatory corrections
  std::mt19937 kick(12345);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int c = seed.m; c < m; ++c)
    for (int j = 0; j < nb; ++j)
      if (!(basis[j].k == Freq(n, 0))) coef(c, j) = u(kick);

  const int res = std::max(8, 4 * degree + 4);
  std::vector<Vec> grid;
  for_each_grid(n, res, [&](const Vec& y) { grid.push_back(y); });
  const int npts = static_cast<int>(grid.size());

  // tables of basis derivatives at grid points: db[i](pt, j)
  std::vector<Eigen::MatrixXd> db(n, Eigen::MatrixXd(npts, nb));
  for (int j = 0; j < nb; ++j) {
    TrigPoly bf(n);
    bf.add_term(basis[j].k, basis[j].sin ? 0.0 : 1.0, basis[j].sin ? 1.0 : 0.0);
    for (int i = 0; i < n; ++i) {
      const TrigPoly d = bf.deriv(i);
      for (int pt = 0; pt < npts; ++pt) db[i](pt, j) = d.eval(grid[pt]);
    }
  }
  Eigen::MatrixXd target(npts, n * (n + 1) / 2);
  for (int pt = 0; pt < npts; ++pt) {
    int col = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++col)
        target(pt, col) = metric.g[i][j].eval(grid[pt]);
  }

  const int nres = npts * n * (n + 1) / 2;
  const int npar = m * nb;
  auto residuals = [&](const Eigen::MatrixXd& X, Eigen::VectorXd& r) {
    r.resize(nres);
    int row = 0;
    std::vector<Eigen::MatrixXd> dq(n);
    for (int i = 0; i < n; ++i) dq[i] = db[i] * X.transpose();  // npts x m
    for (int pt = 0; pt < npts; ++pt) {
      int col = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++col) {
          const double wgt = i == j ? 1.0 : std::numbers::sqrt2;
          r[row++] = wgt * (dq[i].row(pt).dot(dq[j].row(pt)) -
                            target(pt, col));
        }
    }
  };

  Eigen::VectorXd r;
  residuals(coef, r);
  double lambda = 1e-6;
  for (int it = 0; it < iters && r.cwiseAbs().maxCoeff() > tol; ++it) {
    // Jacobian: d r / d coef(c, jb)
    Eigen::MatrixXd J(nres, npar);
    std::vector<Eigen::MatrixXd> dq(n);
    for (int i = 0; i < n; ++i) dq[i] = db[i] * coef.transpose();
    int row = 0;
    for (int pt = 0; pt < npts; ++pt) {
      int col = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++col) {
          const double wgt = i == j ? 1.0 : std::numbers::sqrt2;
          for (int c = 0; c < m; ++c)
            for (int jb = 0; jb < nb; ++jb)
              J(row, c * nb + jb) = wgt * (db[i](pt, jb) * dq[j](pt, c) +
                                           db[j](pt, jb) * dq[i](pt, c));
          ++row;
        }
    }
    const Eigen::MatrixXd H =
        J.transpose() * J +
        lambda * Eigen::MatrixXd::Identity(npar, npar);
    const auto Hfac = H.ldlt();
    const Eigen::VectorXd step = Hfac.solve(-J.transpose() * r);

    // geodesic acceleration: the residual is exactly quadratic in the
    // coefficients, so its second directional derivative along `step` is
    // 2 * (pure quadratic part evaluated at the step); the half-corrected
    // step avoids the slow crawl along the flat valley of isometries
    Eigen::MatrixXd dstep = Eigen::MatrixXd::Zero(m, nb);
    for (int c = 0; c < m; ++c)
      for (int jb = 0; jb < nb; ++jb) dstep(c, jb) = step[c * nb + jb];
    Eigen::VectorXd rvv(nres);
    {
      std::vector<Eigen::MatrixXd> dv(n);
      for (int i = 0; i < n; ++i) dv[i] = db[i] * dstep.transpose();
      int rr = 0;
      for (int pt = 0; pt < npts; ++pt)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            const double wgt = i == j ? 1.0 : std::numbers::sqrt2;
            rvv[rr++] = 2.0 * wgt * dv[i].row(pt).dot(dv[j].row(pt));
          }
    }
    const Eigen::VectorXd accel = Hfac.solve(-J.transpose() * rvv);
    Eigen::MatrixXd trial = coef + dstep;
    if (accel.norm() < 0.75 * step.norm())
      for (int c = 0; c < m; ++c)
        for (int jb = 0; jb < nb; ++jb)
          trial(c, jb) += 0.5 * accel[c * nb + jb];
    Eigen::VectorXd rt;
    residuals(trial, rt);
    if (rt.squaredNorm() < r.squaredNorm()) {
      coef = trial;
      r = rt;
      lambda = std::max(lambda / 10.0, 1e-14);
    } else {
      lambda *= 10.0;
      if (lambda > 1e8) break;
    }
  }

  EmbeddingMap e;
  e.n = n;
  e.m = m;
  for (int c = 0; c < m; ++c) {
    TrigPoly qc(n);
    for (int jb = 0; jb < nb; ++jb) {
      if (coef(c, jb) == 0.0) continue;
      qc.add_term(basis[jb].k, basis[jb].sin ? 0.0 : coef(c, jb),
                  basis[jb].sin ? coef(c, jb) : 0.0);
    }
    e.q.push_back(qc.pruned(0.0));
  }
  finish_embedding(e, metric);
  e.converged = e.residual < tol * 10 || r.cwiseAbs().maxCoeff() < tol;
  return e;
}

ExtendedPotential build_potential(const EmbeddingMap& e, const TorusFlow& flow,
                                  const TrigPoly& L) {
  ExtendedPotential V;
  V.n_ = e.n;
  V.m_ = e.m;
  V.emb_ = e;
  V.flow_ = flow;
  if (V.emb_.p.empty()) attach_momentum(V.emb_, flow);

  // v = |p|^2/2 - L on N
  TrigPoly v(e.n);
  for (const auto& pc : V.emb_.p) v += pc * pc;
  v = v.scaled(0.5);
  v -= L;
  V.v_ = v.pruned(1e-15);

  // a = L_Y p, exact trig products
  for (int c = 0; c < e.m; ++c) {
    TrigPoly ac(e.n);
    for (int i = 0; i < e.n; ++i)
      ac += flow.components[i] * V.emb_.p[c].deriv(i);
    V.a_.push_back(ac.pruned(1e-15));
  }

  V.dq_.assign(e.n, std::vector<TrigPoly>(e.m, TrigPoly(e.n)));
  V.ddq_.assign(e.n, std::vector<std::vector<TrigPoly>>(
                         e.n, std::vector<TrigPoly>(e.m, TrigPoly(e.n))));
  for (int i = 0; i < e.n; ++i)
    for (int c = 0; c < e.m; ++c) {
      V.dq_[i][c] = V.emb_.q[c].deriv(i);
      for (int j = 0; j < e.n; ++j) V.ddq_[i][j][c] = V.dq_[i][c].deriv(j);
    }

  // tangential identity (uouo): <a, d_i q> + d_i v = 0, in coefficient space
  double uouo = 0.0;
  for (int i = 0; i < e.n; ++i) {
    TrigPoly defect = V.v_.deriv(i);
    for (int c = 0; c < e.m; ++c) defect += V.a_[c] * V.dq_[i][c];
    uouo = std::max(uouo, defect.pruned(0.0).max_abs_coeff());
  }
  V.uouo_residual_ = uouo;

  // reach estimate: pairwise normal-collision distances over a grid
  const int res = std::max(24, 8 * std::max(1, V.emb_.q[0].degree()));
  std::vector<Vec> ys;
  std::vector<Vec> qs;
  for_each_grid(e.n, res, [&](const Vec& y) {
    ys.push_back(y);
    qs.push_back(V.emb_.eval_q(y));
  });
  double reach = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ys.size(); ++i) {
    const Eigen::MatrixXd J = V.emb_.jac_q(ys[i]);
    const Eigen::MatrixXd M0 = J.transpose() * J;
    const auto solver = M0.ldlt();
    for (size_t j = 0; j < ys.size(); ++j) {
      if (i == j) continue;
      const Vec d = qs[j] - qs[i];
      const Vec dn = d - J * solver.solve(J.transpose() * d);
      const double nn = dn.norm();
      if (nn > 1e-12)
        reach = std::min(reach, d.squaredNorm() / (2.0 * nn));
    }
  }
  V.reach_ = reach;
  V.eps_ = 0.5 * reach;
  if (!(V.eps_ > 1e-4))
    throw std::runtime_error("build_potential: tube radius too small");

  V.warm_res_ = res;
  V.warm_points_ = std::move(qs);
  return V;
}

Vec ExtendedPotential::normal_field(const Vec& y) const {
  const Eigen::MatrixXd J = emb_.jac_q(y);
  const Eigen::MatrixXd M0 = J.transpose() * J;
  Vec dv(n_);
  for (int i = 0; i < n_; ++i) dv[i] = v_.deriv(i).eval(y);
  Vec a(m_);
  for (int c = 0; c < m_; ++c) a[c] = a_[c].eval(y);
  return a + J * M0.ldlt().solve(dv);
}

ExtendedPotential::Projection ExtendedPotential::project_full(
    const Vec& z) const {
  // Newton on J^T (q(y) - z) = 0 with the curvature-corrected M
  auto newton = [&](Vec y, bool* converged) {
    for (int it = 0; it < 40; ++it) {
      Vec qy(m_);
      for (int c = 0; c < m_; ++c) qy[c] = emb_.q[c].eval(y);
      const Vec d = z - qy;
      Eigen::MatrixXd J(m_, n_);
      for (int i = 0; i < n_; ++i)
        for (int c = 0; c < m_; ++c) J(c, i) = dq_[i][c].eval(y);
      const Vec g = J.transpose() * d;
      if (g.cwiseAbs().maxCoeff() < 1e-13) {
        *converged = true;
        return y;
      }
      Eigen::MatrixXd M(n_, n_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          double s = J.col(i).dot(J.col(j));
          for (int c = 0; c < m_; ++c) s -= ddq_[i][j][c].eval(y) * d[c];
          M(i, j) = s;
        }
      y += M.ldlt().solve(g);
    }
    *converged = false;
    return y;
  };

  bool ok = false;
  Vec y;
  if (has_last_) {
    y = newton(last_y_, &ok);  // trajectories move slowly
    if (ok) {
      // Newton also converges to far critical points (e.g. the antipode on a
      // circle); trust the warm start only inside the tube, where the
      // nearest-point projection is the unique critical point this close
      Vec qy(m_);
      for (int c = 0; c < m_; ++c) qy[c] = emb_.q[c].eval(y);
      if ((z - qy).norm() >= eps_) ok = false;
    }
  }
  if (!ok) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < warm_points_.size(); ++i) {
      const double d2 = (warm_points_[i] - z).squaredNorm();
      if (d2 < bd) {
        bd = d2;
        best = static_cast<int>(i);
      }
    }
    Vec y0(n_);
    int idx = best;
    for (int i = 0; i < n_; ++i) {
      y0[i] = static_cast<double>(idx % warm_res_) / warm_res_;
      idx /= warm_res_;
    }
    y = newton(y0, &ok);
  }
  Projection pr;
  pr.y = reduce_mod1(y);
  last_y_ = pr.y;
  has_last_ = true;
  Vec qy(m_);
  for (int c = 0; c < m_; ++c) qy[c] = emb_.q[c].eval(pr.y);
  pr.qy = qy;
  pr.inside = (z - qy).norm() < eps_;
  return pr;
}

Vec ExtendedPotential::project(const Vec& z) const {
  return project_full(z).y;
}

double ExtendedPotential::eval(const Vec& z) const {
  const Projection pr = project_full(z);
  const Vec d = z - pr.qy;
  const double s = d.norm() / eps_;
  // chi = 1 for s <= 1/3, 0 for s >= 2/3
  const double chi = 1.0 - smoothstep_quintic(3.0 * s - 1.0);
  const double tail = tau * z.squaredNorm();
  if (chi == 0.0) return tail;
  const Vec n = normal_field(pr.y);
  const double W = v_.eval(pr.y) - n.dot(d) + stabilizer * d.squaredNorm();
  return chi * W + (1.0 - chi) * tail;
}

Vec ExtendedPotential::grad(const Vec& z) const {
  const Projection pr = project_full(z);
  const Vec d = z - pr.qy;
  const double dist = d.norm();
  const double s = dist / eps_;
  const double chi = 1.0 - smoothstep_quintic(3.0 * s - 1.0);
  const Vec tail_grad = 2.0 * tau * z;
  if (chi == 0.0) return tail_grad;

  const Eigen::MatrixXd J = emb_.jac_q(pr.y);
  Eigen::MatrixXd M(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      double acc = J.col(i).dot(J.col(j));
      for (int c = 0; c < m_; ++c) acc -= ddq_[i][j][c].eval(pr.y) * d[c];
      M(i, j) = acc;
    }
  const auto Msolve = M.ldlt();
  // Dy* = M^{-1} J^T (implicit function theorem at the projection)
  const Vec n = normal_field(pr.y);
  Vec dv(n_);
  for (int i = 0; i < n_; ++i) dv[i] = v_.deriv(i).eval(pr.y);

  // Dn^T d via finite differences in y (multiplies |d|, so fd error is dwarfed)
  Vec dnd(n_);
  {
    const double h = 1e-6;
    for (int i = 0; i < n_; ++i) {
      Vec yp = pr.y, ym = pr.y;
      yp[i] += h;
      ym[i] -= h;
      dnd[i] = (normal_field(yp) - normal_field(ym)).dot(d) / (2.0 * h);
    }
  }
  const Vec ytan = Msolve.solve(dv - dnd + J.transpose() * n);
  // grad of W = v(y*) - <n(y*), d> + sigma |d|^2
  const Vec gW = J * ytan - n + 2.0 * stabilizer * d;

  Vec g = chi * gW + (1.0 - chi) * tail_grad;
  if (chi > 0.0 && chi < 1.0 && dist > 0.0) {
    const double W =
        v_.eval(pr.y) - n.dot(d) + stabilizer * d.squaredNorm();
    const double dchi = -3.0 * smoothstep_quintic_deriv(3.0 * s - 1.0) / eps_;
    g += dchi * (W - tau * z.squaredNorm()) * (d / dist);
  }
  return g;
}

VerifyReport verify_embedding(const TorusFlow& flow, const EmbeddingMap& e,
                              const Potential& V,
                              const std::vector<Vec>& y0_samples, double T,
                              double tol, double dt) {
  VerifyReport rep;
  const long nsteps = static_cast<long>(std::llround(T / dt));
  const long stride = std::max(1L, nsteps / 20);
  for (const Vec& y0 : y0_samples) {
    Vec q = e.eval_q(y0);
    Vec p = e.eval_p(y0);
    Vec force = -V.grad(q);
    double dev = 0.0;
    for (long s = 1; s <= nsteps; ++s) {
      p += 0.5 * dt * force;
      q += dt * p;
      force = -V.grad(q);
      p += 0.5 * dt * force;
      if (s % stride == 0 || s == nsteps) {
        const double t = s * dt;
        const Vec yt = flow_map(flow, t, y0, 1e-12);
        dev = std::max(dev, (q - e.eval_q(yt)).cwiseAbs().maxCoeff());
        dev = std::max(dev, (p - e.eval_p(yt)).cwiseAbs().maxCoeff());
      }
    }
    rep.per_sample.push_back(dev);
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

}  // namespace wellflow

#include "wellflow/nlw.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace wellflow {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// apply a Fourier multiplier mult(k) to every column of Q
Eigen::MatrixXd apply_multiplier(const Eigen::MatrixXd& Q, bool derivative) {
  const int N = static_cast<int>(Q.rows());
  const int m = static_cast<int>(Q.cols());
  const int nc = N / 2 + 1;
  Eigen::MatrixXd out(N, m);
  std::vector<double> in(N);
  std::vector<std::complex<double>> spec(nc);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(
      N, in.data(), reinterpret_cast<fftw_complex*>(spec.data()),
      FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(
      N, reinterpret_cast<fftw_complex*>(spec.data()), in.data(),
      FFTW_ESTIMATE);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < N; ++j) in[j] = Q(j, c);
    fftw_execute(fwd);
    for (int k = 0; k < nc; ++k) {
      const double w = two_pi * k;
      if (derivative) {
        // odd multiplier: Nyquist mode has no well-defined first derivative
        if (k == N / 2)
          spec[k] = 0.0;
        else
          spec[k] *= std::complex<double>(0.0, w);
      } else {
        spec[k] *= -w * w;
      }
    }
    fftw_execute(bwd);
    for (int j = 0; j < N; ++j) out(j, c) = in[j] / N;
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

Eigen::MatrixXd grad_rows(const Potential& V, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd G(Q.rows(), Q.cols());
  for (int j = 0; j < Q.rows(); ++j)
    G.row(j) = V.grad(Q.row(j).transpose()).transpose();
  return G;
}

}  // namespace

Eigen::MatrixXd spectral_laplacian(const Eigen::MatrixXd& Q) {
  return apply_multiplier(Q, false);
}

Eigen::MatrixXd spectral_dx(const Eigen::MatrixXd& Q) {
  return apply_multiplier(Q, true);
}

NLWTrajectory integrate_nlw(const Potential& V, const NLWState& s0, double T,
                            double dt) {
  const int N = s0.grid_size();
  if (!is_power_of_two(N))
    throw std::invalid_argument("integrate_nlw: N must be a power of two");
  if (s0.target_dim() != V.dim())
    throw std::invalid_argument("integrate_nlw: target dim != potential dim");
  const double h = 1.0 / N;
  if (dt > h / std::numbers::pi + 1e-15)
    throw std::invalid_argument(
        "integrate_nlw: stability bound dt <= grid_spacing/pi violated");
  if (dt <= 0.0 || T <= 0.0)
    throw std::invalid_argument("integrate_nlw: need dt > 0 and T > 0");

  NLWTrajectory traj;
  traj.step_size = dt;
  Eigen::MatrixXd Q = s0.Q, P = s0.P;
  auto force = [&](const Eigen::MatrixXd& q) {
    return (spectral_laplacian(q) - grad_rows(V, q)).eval();
  };
  Eigen::MatrixXd F = force(Q);
  traj.times.push_back(0.0);
  traj.states.push_back({Q, P});
  const long nfull = static_cast<long>(std::floor(T / dt + 1e-12));
  double t = 0.0;
  auto step = [&](double s) {
    P += 0.5 * s * F;
    Q += s * P;
    F = force(Q);
    P += 0.5 * s * F;
  };
  for (long k = 0; k < nfull; ++k) {
    step(dt);
    t = (k + 1) * dt;
    if (!Q.allFinite() || !P.allFinite())
      throw std::runtime_error("integrate_nlw: non-finite state");
    traj.times.push_back(t);
    traj.states.push_back({Q, P});
  }
  if (t < T - 1e-12 * std::max(1.0, T)) {
    step(T - t);
    traj.times.push_back(T);
    traj.states.push_back({Q, P});
  }
  return traj;
}

double nlw_energy(const Potential& V, const NLWState& s) {
  const int N = s.grid_size();
  const Eigen::MatrixXd dQ = spectral_dx(s.Q);
  double acc = 0.0;
  for (int j = 0; j < N; ++j) {
    acc += 0.5 * s.P.row(j).squaredNorm();
    acc += 0.5 * dQ.row(j).squaredNorm();
    acc += V.eval(s.Q.row(j).transpose());
  }
  return acc / N;
}

NLWState constant_nlw_state(int N, const Vec& q, const Vec& p) {
  NLWState s;
  s.Q = q.transpose().replicate(N, 1);
  s.P = p.transpose().replicate(N, 1);
  return s;
}

}  // namespace wellflow

// SPDX-License-Identifier: Apache-2.0
#include "rydsim/steady_state.hpp"

#include <cmath>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

using Cplx = std::complex<double>;

Matrix16cd kron4(const Matrix4cd& a, const Matrix4cd& b) {
  Matrix16cd out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return out;
}

// Collapse operator sigma = |lo><hi| at the given rate, added to L as the
// canonical dissipator rate * (sigma rho sigma^dag - {sigma^dag sigma, rho}/2).
// Column-major vec: vec(A rho B) = (B^T kron A) vec(rho).
void add_decay(Matrix16cd& L, int lo, int hi, double rate) {
  if (rate == 0.0) return;
  Matrix4cd sigma = Matrix4cd::Zero();
  sigma(lo, hi) = 1.0;
  const Matrix4cd number = sigma.adjoint() * sigma;  // |hi><hi|
  const Matrix4cd id = Matrix4cd::Identity();
  L += rate * (kron4(sigma.conjugate(), sigma) -
               0.5 * kron4(id, number) -
               0.5 * kron4(number.transpose(), id));
}

Matrix16cd assemble(const AtomicSystem& sys, double omega_rf, double delta_p,
                    double delta_c, double* scale_out) {
  const Matrix4cd h = hamiltonian_over_hbar(sys, omega_rf, delta_p, delta_c);
  const Matrix4cd id = Matrix4cd::Identity();
  const Cplx minus_i(0.0, -1.0);

  Matrix16cd L = minus_i * (kron4(id, h) - kron4(h.transpose(), id));
  add_decay(L, 0, 1, sys.gamma2);
  add_decay(L, 1, 2, sys.gamma3);
  add_decay(L, 2, 3, sys.gamma4);

  double scale = L.cwiseAbs().maxCoeff();
  if (scale <= 0.0) scale = 1.0;
  if (scale_out) *scale_out = scale;
  return L / scale;
}

}  // namespace

Matrix4cd hamiltonian_over_hbar(const AtomicSystem& sys, double omega_rf,
                                double delta_p, double delta_c) {
  Matrix4cd h = Matrix4cd::Zero();
  h(0, 1) = h(1, 0) = 0.5 * sys.omega_p;
  h(1, 2) = h(2, 1) = 0.5 * sys.omega_c;
  h(2, 3) = h(3, 2) = 0.5 * omega_rf;
  h(1, 1) = -delta_p;
  h(2, 2) = -(delta_p + delta_c);
  h(3, 3) = -(delta_p + delta_c + sys.delta_rf);
  return h;
}

Matrix16cd liouvillian_scaled(const AtomicSystem& sys, double omega_rf,
                              double delta_p, double delta_c, double* scale_out) {
  return assemble(sys, omega_rf, delta_p, delta_c, scale_out);
}

DensityMatrix steady_state(const AtomicSystem& sys, double omega_rf,
                           double delta_p, double delta_c) {
  if (sys.gamma2 == 0.0 && sys.gamma3 == 0.0 && sys.gamma4 == 0.0)
    throw SingularLiouvillian("all decay rates are zero; steady state is non-unique");

  Matrix16cd A = assemble(sys, omega_rf, delta_p, delta_c, nullptr);
  // Replace the rho_11 equation by the trace constraint Tr(rho) = 1.
  A.row(0).setZero();
  for (int k = 0; k < 4; ++k) A(0, 5 * k) = 1.0;
  Vector16cd b = Vector16cd::Zero();
  b(0) = 1.0;

  Eigen::PartialPivLU<Matrix16cd> lu(A);
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() < 1e-12 * diag.maxCoeff())
    throw SingularLiouvillian(
        "constrained Liouvillian is rank deficient (degenerate decay configuration)");
  const Vector16cd v = lu.solve(b);

  DensityMatrix dm;
  dm.rho = Eigen::Map<const Matrix4cd>(v.data());
  dm.rho = ((dm.rho + dm.rho.adjoint()) / 2.0).eval();
  return dm;
}

DensityMatrix steady_state(const AtomicSystem& sys, double omega_rf) {
  return steady_state(sys, omega_rf, sys.delta_p, sys.delta_c);
}

double steady_state_residual(const AtomicSystem& sys, double omega_rf,
                             double delta_p, double delta_c,
                             const DensityMatrix& dm) {
  const Matrix16cd L = assemble(sys, omega_rf, delta_p, delta_c, nullptr);
  const Eigen::Map<const Vector16cd> v(dm.rho.data());
  return (L * v).norm();
}

double transmittance(double rho21_im, const AtomicSystem&) {
  return std::exp(rho21_im);
}

ProbeScanSolver::ProbeScanSolver(const AtomicSystem& sys, double omega_rf, double delta_c) {
  if (sys.gamma2 == 0.0 && sys.gamma3 == 0.0 && sys.gamma4 == 0.0)
    throw SingularLiouvillian("all decay rates are zero; steady state is non-unique");
  base_ = assemble(sys, omega_rf, 0.0, delta_c, &scale_);
  base_.row(0).setZero();
  for (int k = 0; k < 4; ++k) base_(0, 5 * k) = 1.0;
  // d/d(delta_p) enters only via the Hamiltonian diagonal (0,-1,-1,-1):
  // vec entry (r,c) picks up -i(D_rr - D_cc) * delta_p.
  const double d[4] = {0.0, -1.0, -1.0, -1.0};
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r)
      dp_coeff_[c * 4 + r] = Cplx(0.0, -(d[r] - d[c])) / scale_;
  dp_coeff_[0] = 0.0;  // row 0 is the trace constraint
}

std::complex<double> ProbeScanSolver::rho21(double delta_p) const {
  Matrix16cd a = base_;
  for (int v = 1; v < 16; ++v) a(v, v) += delta_p * dp_coeff_[v];
  Eigen::PartialPivLU<Matrix16cd> lu(a);
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() < 1e-12 * diag.maxCoeff())
    throw SingularLiouvillian(
        "constrained Liouvillian is rank deficient (degenerate decay configuration)");
  Vector16cd b = Vector16cd::Zero();
  b(0) = 1.0;
  const Vector16cd v = lu.solve(b);
  // vec index of rho(1,0) in column-major order
  return 0.5 * (v(1) + std::conj(v(4)));
}

DensityMatrix integrate_to_steady_state(const AtomicSystem& sys, double omega_rf,
                                        double delta_p, double delta_c,
                                        double rate_tol, long max_steps) {
  double scale = 1.0;
  const Matrix4cd h = hamiltonian_over_hbar(sys, omega_rf, delta_p, delta_c);
  (void)assemble(sys, omega_rf, delta_p, delta_c, &scale);  // coefficient scale only
  const Matrix4cd hs = h / scale;
  const double g2 = sys.gamma2 / scale, g3 = sys.gamma3 / scale, g4 = sys.gamma4 / scale;

  auto rhs = [&](const Matrix4cd& rho) -> Matrix4cd {
    const Cplx minus_i(0.0, -1.0);
    Matrix4cd d = minus_i * (hs * rho - rho * hs);
    auto decay = [&](int lo, int hi, double g) {
      if (g == 0.0) return;
      Matrix4cd t = Matrix4cd::Zero();
      t(lo, lo) = rho(hi, hi);
      d += g * t;
      d.row(hi) -= (g / 2.0) * rho.row(hi);
      d.col(hi) -= (g / 2.0) * rho.col(hi);
    };
    decay(0, 1, g2);
    decay(1, 2, g3);
    decay(2, 3, g4);
    return d;
  };

  Matrix4cd rho = Matrix4cd::Zero();
  rho(0, 0) = 1.0;
  const double dt = 0.05;  // in scaled time units; well inside RK4 stability
  for (long step = 0; step < max_steps; ++step) {
    const Matrix4cd k1 = rhs(rho);
    if (step % 64 == 0 && k1.norm() < rate_tol) break;
    const Matrix4cd k2 = rhs(rho + (dt / 2.0) * k1);
    const Matrix4cd k3 = rhs(rho + (dt / 2.0) * k2);
    const Matrix4cd k4 = rhs(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  DensityMatrix dm;
  dm.rho = ((rho + rho.adjoint()) / 2.0).eval();
  return dm;
}

}  // namespace rydsim

// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_STEADY_STATE_HPP
#define RYDSIM_STEADY_STATE_HPP

#include <Eigen/Dense>

#include <array>
#include <complex>

#include "rydsim/atomic_system.hpp"

namespace rydsim {

using Matrix4cd = Eigen::Matrix4cd;
using Matrix16cd = Eigen::Matrix<std::complex<double>, 16, 16>;
using Vector16cd = Eigen::Matrix<std::complex<double>, 16, 1>;

/// Ensemble density matrix with its defining invariants exposed for checking.
struct DensityMatrix {
  Matrix4cd rho;

  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double trace_error() const { return std::abs(rho.trace() - std::complex<double>(1.0, 0.0)); }
  /// Smallest eigenvalue of the Hermitian part (>= -1e-9 for a physical state).
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es((rho + rho.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
  }
  std::complex<double> rho21() const { return rho(1, 0); }
};

/// Rotating-wave Hamiltonian divided by hbar (entries in rad/s). The RF Rabi
/// frequency is passed separately because it is the scanned quantity.
Matrix4cd hamiltonian_over_hbar(const AtomicSystem& sys, double omega_rf,
                                double delta_p, double delta_c);

/// Liouvillian of the master equation, vectorized column-major so that
/// d vec(rho)/dt = L vec(rho). Ladder decay channels |2>->|1>, |3>->|2>,
/// |4>->|3> with the canonical dissipator. All entries are divided by
/// `scale` (the largest coefficient magnitude) so the operator is O(1);
/// `scale` is written to *scale_out when non-null.
Matrix16cd liouvillian_scaled(const AtomicSystem& sys, double omega_rf,
                              double delta_p, double delta_c,
                              double* scale_out = nullptr);

/// Steady state of the master equation, solved exactly: the 16x16 vectorized
/// Liouvillian with one row replaced by the trace constraint. Throws
/// SingularLiouvillian when the constrained system is rank deficient (decay
/// configuration leaves the steady state non-unique).
DensityMatrix steady_state(const AtomicSystem& sys, double omega_rf,
                           double delta_p, double delta_c);

/// Convenience overload using the system's own detunings.
DensityMatrix steady_state(const AtomicSystem& sys, double omega_rf = 0.0);

/// || L_scaled vec(rho) ||_2 for the unit-scaled Liouvillian; < 1e-9 for a
/// valid steady state.
double steady_state_residual(const AtomicSystem& sys, double omega_rf,
                             double delta_p, double delta_c,
                             const DensityMatrix& dm);

/// Eq.-(4) transmittance with the adopted unit prefactor: T = exp(Im rho21).
double transmittance(double rho21_im, const AtomicSystem& sys);

/// Steady-state solver specialized for probe-frequency scans: the Liouvillian
/// depends on delta_p only through 16 diagonal entries, so everything else is
/// assembled once. Produces the same steady state as steady_state() up to
/// rounding.
class ProbeScanSolver {
 public:
  ProbeScanSolver(const AtomicSystem& sys, double omega_rf, double delta_c);
  std::complex<double> rho21(double delta_p) const;

 private:
  Matrix16cd base_;  // scaled, trace row in place, delta_p = 0
  std::array<std::complex<double>, 16> dp_coeff_;
  double scale_ = 1.0;
};

/// Test oracle: fixed-step RK4 integration of the master equation from the
/// ground state until || drho/dt || (scaled) falls below `rate_tol`.
DensityMatrix integrate_to_steady_state(const AtomicSystem& sys, double omega_rf,
                                        double delta_p, double delta_c,
                                        double rate_tol = 1e-10,
                                        long max_steps = 40000000);

}  // namespace rydsim

#endif  // RYDSIM_STEADY_STATE_HPP

// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_DOPPLER_HPP
#define RYDSIM_DOPPLER_HPP

#include <complex>

#include "rydsim/atomic_system.hpp"

namespace rydsim {

/// rho21 of the velocity class `v`: probe detuning shifted by -2pi v/lambda_p,
/// coupling detuning by +2pi v/lambda_c (counter-propagating beams).
std::complex<double> rho21_at_velocity(const AtomicSystem& sys, double omega_rf, double v);

/// Gaussian-weighted trapezoid average of rho21 over v in [-3u, 3u] with a
/// fixed node count. Weights are normalized by their own quadrature sum, so
/// the truncated window introduces no normalization bias.
std::complex<double> doppler_average_fixed(const AtomicSystem& sys, double omega_rf, int nodes);

/// Adaptive version: doubles the node count until the result moves by less
/// than rel_tol (relative), starting from velocity_points (>= 16). Throws
/// NonConvergedQuadrature when max_nodes is reached first.
std::complex<double> doppler_average(const AtomicSystem& sys, double omega_rf,
                                     int velocity_points = 129, double rel_tol = 1e-6,
                                     int max_nodes = (1 << 20) + 1);

/// Node count the adaptive rule settles on (used to freeze a deterministic
/// count before a bulk tabulation).
int doppler_resolved_nodes(const AtomicSystem& sys, double omega_rf,
                           int velocity_points = 129, double rel_tol = 1e-6,
                           int max_nodes = (1 << 20) + 1);

}  // namespace rydsim

#endif  // RYDSIM_DOPPLER_HPP

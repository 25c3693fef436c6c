// SPDX-License-Identifier: Apache-2.0
#include "rydsim/doppler.hpp"

#include <cmath>

#include "rydsim/constants.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/steady_state.hpp"

namespace rydsim {

std::complex<double> rho21_at_velocity(const AtomicSystem& sys, double omega_rf, double v) {
  const double dp = sys.delta_p - constants::two_pi / sys.lambda_p * v;
  const double dc = sys.delta_c + constants::two_pi / sys.lambda_c * v;
  return steady_state(sys, omega_rf, dp, dc).rho21();
}

std::complex<double> doppler_average_fixed(const AtomicSystem& sys, double omega_rf, int nodes) {
  if (nodes < 2) throw InvalidArgument("doppler_average_fixed: need >= 2 nodes");
  const double u = sys.doppler_width();
  const double vmax = 3.0 * u;
  const double h = 2.0 * vmax / (nodes - 1);
  std::complex<double> acc(0.0, 0.0);
  double wsum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double v = -vmax + i * h;
    double w = std::exp(-(v * v) / (u * u));
    if (i == 0 || i == nodes - 1) w *= 0.5;  // trapezoid ends
    acc += w * rho21_at_velocity(sys, omega_rf, v);
    wsum += w;
  }
  return acc / wsum;
}

std::complex<double> doppler_average(const AtomicSystem& sys, double omega_rf,
                                     int velocity_points, double rel_tol, int max_nodes) {
  if (velocity_points < 16)
    throw InvalidArgument("doppler_average: velocity_points must be >= 16");
  if (!sys.doppler_enabled)
    throw InvalidArgument("doppler_average: doppler_enabled is off for this system");

  int n = velocity_points;
  std::complex<double> prev = doppler_average_fixed(sys, omega_rf, n);
  while (true) {
    const int next = 2 * n - 1;  // nested uniform refinement
    if (next > max_nodes)
      throw NonConvergedQuadrature("doppler_average: no convergence below " +
                                   std::to_string(max_nodes) + " nodes");
    const std::complex<double> cur = doppler_average_fixed(sys, omega_rf, next);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
    n = next;
  }
}

int doppler_resolved_nodes(const AtomicSystem& sys, double omega_rf, int velocity_points,
                           double rel_tol, int max_nodes) {
  if (velocity_points < 16)
    throw InvalidArgument("doppler_resolved_nodes: velocity_points must be >= 16");
  int n = velocity_points;
  std::complex<double> prev = doppler_average_fixed(sys, omega_rf, n);
  while (true) {
    const int next = 2 * n - 1;
    if (next > max_nodes)
      throw NonConvergedQuadrature("doppler_resolved_nodes: no convergence below " +
                                   std::to_string(max_nodes) + " nodes");
    const std::complex<double> cur = doppler_average_fixed(sys, omega_rf, next);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return next;
    prev = cur;
    n = next;
  }
}

}  // namespace rydsim

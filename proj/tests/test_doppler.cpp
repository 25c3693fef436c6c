// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rydsim/constants.hpp"
#include "rydsim/doppler.hpp"
#include "rydsim/steady_state.hpp"

using namespace rydsim;
using namespace rydsim::constants;

TEST_CASE("T -> 0 limit returns the un-averaged coherence") {
  AtomicSystem sys = AtomicSystem::rb85();
  sys.doppler_enabled = true;
  sys.temperature = 1e-6;
  const std::complex<double> averaged = doppler_average(sys, 0.0);
  const std::complex<double> still = steady_state(sys, 0.0).rho21();
  CHECK(std::abs(averaged - still) < 1e-6 * std::abs(still));
}

TEST_CASE("room-temperature average matches a 10x oversampled oracle") {
  AtomicSystem sys = AtomicSystem::rb85();
  sys.doppler_enabled = true;
  sys.delta_p = two_pi * 1.5e6;
  const int accepted = doppler_resolved_nodes(sys, two_pi * 4.0e6, 129, 1e-6);
  const std::complex<double> value = doppler_average_fixed(sys, two_pi * 4.0e6, accepted);
  // oversampled trapezoid oracle at ~10x the accepted node count
  const std::complex<double> oracle =
      doppler_average_fixed(sys, two_pi * 4.0e6, 10 * (accepted - 1) + 1);
  CHECK(std::abs(value - oracle) < 1e-6 * std::abs(oracle));
  CHECK(std::abs(value - oracle) < 1e-8);  // absolute, coherence is O(0.1)
}

TEST_CASE("adaptive average is converged: halving the step moves it < 1e-6") {
  AtomicSystem sys = AtomicSystem::rb85();
  sys.doppler_enabled = true;
  const int accepted = doppler_resolved_nodes(sys, two_pi * 2.0e6, 129, 1e-6);
  const std::complex<double> value = doppler_average_fixed(sys, two_pi * 2.0e6, accepted);
  const std::complex<double> refined = doppler_average_fixed(sys, two_pi * 2.0e6, 2 * accepted - 1);
  CHECK(std::abs(value - refined) <= 1e-6 * std::abs(refined));
}

TEST_CASE("symmetric configuration averages +-v pairs") {
  AtomicSystem sys = AtomicSystem::rb85();
  sys.doppler_enabled = true;
  sys.delta_p = 0.0;
  sys.delta_c = 0.0;
  sys.lambda_c = sys.lambda_p;
  const int nodes = 65;
  const std::complex<double> averaged = doppler_average_fixed(sys, 0.0, nodes);

  const double u = sys.doppler_width();
  const double vmax = 3.0 * u;
  const double h = 2.0 * vmax / (nodes - 1);
  std::complex<double> acc(0.0, 0.0);
  double wsum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double v = -vmax + i * h;
    double w = std::exp(-(v * v) / (u * u));
    if (i == 0 || i == nodes - 1) w *= 0.5;
    // average the +-v pair explicitly; the integrand symmetry makes this the
    // same sum in a different order
    acc += w * 0.5 *
           (rho21_at_velocity(sys, 0.0, v) + rho21_at_velocity(sys, 0.0, -v));
    wsum += w;
  }
  CHECK(std::abs(averaged - acc / wsum) < 1e-12);
}

TEST_CASE("precondition and convergence failures") {
  AtomicSystem sys = AtomicSystem::rb85();
  sys.doppler_enabled = true;
  CHECK_THROWS_AS(doppler_average(sys, 0.0, 8), InvalidArgument);
  AtomicSystem off = AtomicSystem::rb85();
  off.doppler_enabled = false;
  CHECK_THROWS_AS(doppler_average(off, 0.0), InvalidArgument);
  // a node cap below the required resolution must fail loudly
  CHECK_THROWS_AS(doppler_average(sys, two_pi * 4.0e6, 129, 1e-6, 257),
                  NonConvergedQuadrature);
}

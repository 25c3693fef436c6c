// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_TEST_UTIL_HPP
#define RYDSIM_TEST_UTIL_HPP

#include "rydsim/campaign.hpp"
#include "rydsim/parallel.hpp"

namespace rydsim::testing {

/// Shared acceptance-scale surface: Rb preset, Doppler off, Rabi/2pi up to
/// 22 MHz, detuning/2pi +-25 MHz. Built once per test binary.
inline const ResponseSurface& shared_surface() {
  static const ResponseSurface surface = [] {
    const AtomicSystem sys = AtomicSystem::rb85();
    const Eigen::VectorXd xg = ResponseSurface::graded_x_grid(sys, 22.0, 0.05);
    const int nf = 2501;
    Eigen::VectorXd fg(nf);
    for (int i = 0; i < nf; ++i) fg[i] = sys.f_p_resonance + (-25.0 + 0.02 * i) * 1e6;
    return ResponseSurface::build(sys, xg, fg, default_thread_count());
  }();
  return surface;
}

inline const AtomicSystem& shared_system() {
  static const AtomicSystem sys = AtomicSystem::rb85();
  return sys;
}

}  // namespace rydsim::testing

#endif  // RYDSIM_TEST_UTIL_HPP

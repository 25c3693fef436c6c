// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_CONSTANTS_HPP
#define RYDSIM_CONSTANTS_HPP

namespace rydsim::constants {

// 2019 SI exact values.
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K
inline constexpr double speed_of_light = 2.99792458e8; // m/s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double bohr_radius = 5.29177210903e-11;      // m

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace rydsim::constants

#endif  // RYDSIM_CONSTANTS_HPP

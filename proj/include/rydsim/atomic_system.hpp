// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_ATOMIC_SYSTEM_HPP
#define RYDSIM_ATOMIC_SYSTEM_HPP

#include <string>

#include "rydsim/config_file.hpp"

namespace rydsim {

/// Physical parameters of the four-level ladder sensor. Angular frequencies
/// (Rabi frequencies, detunings, decay rates) are in rad/s; dipole moments in
/// C*m; wavelengths in m.
struct AtomicSystem {
  double omega_p = 0.0;   // probe Rabi frequency
  double omega_c = 0.0;   // coupling Rabi frequency
  double delta_p = 0.0;   // probe detuning
  double delta_c = 0.0;   // coupling detuning
  double delta_rf = 0.0;  // RF detuning

  double gamma2 = 0.0;  // decay |2> -> |1>
  double gamma3 = 0.0;  // decay |3> -> |2>
  double gamma4 = 0.0;  // decay |4> -> |3>

  double mu_p = 0.0;   // |1>-|2> dipole moment
  double mu_c = 0.0;   // |2>-|3> dipole moment
  double mu_rf = 0.0;  // |3>-|4> dipole moment

  double lambda_p = 0.0;  // probe wavelength
  double lambda_c = 0.0;  // coupling wavelength

  double temperature = 0.0;  // K
  double atom_mass = 0.0;    // kg
  double f_p_resonance = 0.0;  // probe transition frequency, Hz

  bool doppler_enabled = false;

  /// Rb-85 ladder preset. Rabi frequencies follow the canonical weak-probe
  /// configuration (probe 2pi x 2 MHz, coupling 2pi x 4 MHz); decay rates,
  /// mass and wavelengths are standard Rb-85 values; the RF dipole moment is
  /// a representative Rydberg-transition magnitude (1000 e a0) and is meant
  /// to be overridden when modelling a specific transition.
  static AtomicSystem rb85();

  /// Thermal velocity width u = sqrt(kB T / m), m/s.
  double doppler_width() const;

  /// Field strength (V/m) equivalent to an RF Rabi frequency (rad/s).
  double field_from_rabi(double omega_rf) const;
  /// RF Rabi frequency (rad/s) for a field strength (V/m).
  double rabi_from_field(double x) const;

  /// Throws InvalidArgument when an invariant is violated (negative rates,
  /// non-positive temperature/mass/wavelengths, non-finite Doppler width).
  void validate() const;
};

/// Loads a system from the `[system]` section of a key/value config file.
/// Starts from the named preset (`preset = rb85`, default) and applies
/// per-field overrides. Frequency-like keys are given as plain frequencies
/// (`*_mhz` means value/2pi in MHz).
AtomicSystem load_system(const KeyValueFile& cfg);

/// Writes the `[system]` section entries corresponding to `sys` into `cfg`.
void save_system(const AtomicSystem& sys, KeyValueFile& cfg);

}  // namespace rydsim

#endif  // RYDSIM_ATOMIC_SYSTEM_HPP

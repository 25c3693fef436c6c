// SPDX-License-Identifier: Apache-2.0
#include "rydsim/atomic_system.hpp"

#include <cmath>

#include "rydsim/constants.hpp"

namespace rydsim {

namespace {
constexpr double mhz = 1.0e6;
}

AtomicSystem AtomicSystem::rb85() {
  using namespace constants;
  AtomicSystem s;
  s.omega_p = two_pi * 2.0 * mhz;
  s.omega_c = two_pi * 4.0 * mhz;
  s.delta_p = 0.0;
  s.delta_c = 0.0;
  s.delta_rf = 0.0;
  s.gamma2 = two_pi * 6.07 * mhz;
  s.gamma3 = two_pi * 0.01 * mhz;
  // effective relaxation of the RF-coupled Rydberg state; sets the split-peak
  // width (and with it the 2-5 MHz EIT-regime lineshapes the estimators see)
  s.gamma4 = two_pi * 1.8 * mhz;
  s.mu_p = 2.99 * elementary_charge * bohr_radius;
  s.mu_c = 0.011 * elementary_charge * bohr_radius;
  s.mu_rf = 1000.0 * elementary_charge * bohr_radius;
  s.lambda_p = 780.24e-9;
  s.lambda_c = 480.0e-9;
  s.temperature = 303.15;
  s.atom_mass = 1.4192e-25;
  s.f_p_resonance = speed_of_light / s.lambda_p;
  s.doppler_enabled = false;
  return s;
}

double AtomicSystem::doppler_width() const {
  return std::sqrt(constants::k_boltzmann * temperature / atom_mass);
}

double AtomicSystem::field_from_rabi(double omega_rf) const {
  return constants::hbar * omega_rf / mu_rf;
}

double AtomicSystem::rabi_from_field(double x) const {
  return x * mu_rf / constants::hbar;
}

void AtomicSystem::validate() const {
  if (omega_p < 0 || omega_c < 0)
    throw InvalidArgument("AtomicSystem: Rabi frequencies must be non-negative");
  if (gamma2 < 0 || gamma3 < 0 || gamma4 < 0)
    throw InvalidArgument("AtomicSystem: decay rates must be non-negative");
  if (!(temperature > 0) || !(atom_mass > 0))
    throw InvalidArgument("AtomicSystem: temperature and atom mass must be positive");
  if (!(lambda_p > 0) || !(lambda_c > 0))
    throw InvalidArgument("AtomicSystem: wavelengths must be positive");
  if (!(mu_rf > 0))
    throw InvalidArgument("AtomicSystem: RF dipole moment must be positive");
  const double u = doppler_width();
  if (!std::isfinite(u) || !(u > 0))
    throw InvalidArgument("AtomicSystem: Doppler width is not finite and positive");
}

AtomicSystem load_system(const KeyValueFile& cfg) {
  using namespace constants;
  const std::string preset = cfg.get("system", "preset", "rb85");
  AtomicSystem s;
  if (preset == "rb85") {
    s = AtomicSystem::rb85();
  } else {
    throw InvalidArgument("unknown system preset: " + preset);
  }
  auto ang = [&](const char* key, double fallback) {
    return cfg.has("system", key) ? two_pi * mhz * cfg.get_double("system", key, 0.0) : fallback;
  };
  s.omega_p = ang("omega_p_mhz", s.omega_p);
  s.omega_c = ang("omega_c_mhz", s.omega_c);
  s.delta_p = ang("delta_p_mhz", s.delta_p);
  s.delta_c = ang("delta_c_mhz", s.delta_c);
  s.delta_rf = ang("delta_rf_mhz", s.delta_rf);
  s.gamma2 = ang("gamma2_mhz", s.gamma2);
  s.gamma3 = ang("gamma3_mhz", s.gamma3);
  s.gamma4 = ang("gamma4_mhz", s.gamma4);
  const double ea0 = elementary_charge * bohr_radius;
  s.mu_p = cfg.has("system", "mu_p_ea0") ? ea0 * cfg.get_double("system", "mu_p_ea0", 0) : s.mu_p;
  s.mu_c = cfg.has("system", "mu_c_ea0") ? ea0 * cfg.get_double("system", "mu_c_ea0", 0) : s.mu_c;
  s.mu_rf = cfg.has("system", "mu_rf_ea0") ? ea0 * cfg.get_double("system", "mu_rf_ea0", 0) : s.mu_rf;
  s.lambda_p = cfg.has("system", "lambda_p_nm") ? 1e-9 * cfg.get_double("system", "lambda_p_nm", 0) : s.lambda_p;
  s.lambda_c = cfg.has("system", "lambda_c_nm") ? 1e-9 * cfg.get_double("system", "lambda_c_nm", 0) : s.lambda_c;
  s.temperature = cfg.get_double("system", "temperature_k", s.temperature);
  s.atom_mass = cfg.get_double("system", "atom_mass_kg", s.atom_mass);
  s.f_p_resonance = cfg.has("system", "f_p_resonance_hz")
                        ? cfg.get_double("system", "f_p_resonance_hz", 0)
                        : speed_of_light / s.lambda_p;
  s.doppler_enabled = cfg.get_flag("system", "doppler", s.doppler_enabled);
  s.validate();
  return s;
}

void save_system(const AtomicSystem& s, KeyValueFile& cfg) {
  using namespace constants;
  const double ea0 = elementary_charge * bohr_radius;
  auto mhz_of = [](double ang) { return format_double(ang / (two_pi * mhz)); };
  cfg.set("system", "preset", "rb85");
  cfg.set("system", "omega_p_mhz", mhz_of(s.omega_p));
  cfg.set("system", "omega_c_mhz", mhz_of(s.omega_c));
  cfg.set("system", "delta_p_mhz", mhz_of(s.delta_p));
  cfg.set("system", "delta_c_mhz", mhz_of(s.delta_c));
  cfg.set("system", "delta_rf_mhz", mhz_of(s.delta_rf));
  cfg.set("system", "gamma2_mhz", mhz_of(s.gamma2));
  cfg.set("system", "gamma3_mhz", mhz_of(s.gamma3));
  cfg.set("system", "gamma4_mhz", mhz_of(s.gamma4));
  cfg.set("system", "mu_p_ea0", format_double(s.mu_p / ea0));
  cfg.set("system", "mu_c_ea0", format_double(s.mu_c / ea0));
  cfg.set("system", "mu_rf_ea0", format_double(s.mu_rf / ea0));
  cfg.set("system", "lambda_p_nm", format_double(s.lambda_p * 1e9));
  cfg.set("system", "lambda_c_nm", format_double(s.lambda_c * 1e9));
  cfg.set("system", "temperature_k", format_double(s.temperature));
  cfg.set("system", "atom_mass_kg", format_double(s.atom_mass));
  cfg.set("system", "f_p_resonance_hz", format_double(s.f_p_resonance));
  cfg.set("system", "doppler", s.doppler_enabled ? "on" : "off");
}

}  // namespace rydsim

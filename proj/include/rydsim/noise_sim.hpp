// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_NOISE_SIM_HPP
#define RYDSIM_NOISE_SIM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "rydsim/marginal.hpp"
#include "rydsim/rng.hpp"

namespace rydsim {

/// Additive white Gaussian readout noise (Eq.-(7) model).
struct NoiseSpec {
  double sigma0 = 0.0;
  std::uint64_t seed = 0;
};

/// Counts raw noise draws so campaigns can audit the per-trial sample budget.
struct DrawCounter {
  std::uint64_t count = 0;
};

/// One frequency scan of a single split peak: paired frequency/voltage
/// vectors where every voltage is the average of `per_point_averages` raw
/// samples. Right-side scans hold every frequency above the resonance,
/// left-side scans below it.
struct ScanData {
  Eigen::VectorXd frequencies;  // Hz, length N_SF,1
  Eigen::VectorXd voltages;     // response units
  int per_point_averages = 1;   // N_SF,2
  PeakLineshape::Side side = PeakLineshape::Side::Right;

  void validate(double f_resonance) const;

  /// CSV `f,z` with `# side=`, `# n_avg=`, `# seed=` metadata lines.
  void save_csv(const std::string& path, std::uint64_t seed) const;
  static ScanData load_csv(const std::string& path, std::uint64_t* seed_out = nullptr);
};

/// How scan frequencies are placed for one peak.
struct SamplingPlan {
  enum class Strategy { Uniform, MaxSlope, Explicit };
  Strategy strategy = Strategy::Uniform;
  Eigen::VectorXd frequencies;  // absolute Hz, resolved placement
  PeakLineshape::Side side = PeakLineshape::Side::Right;
};

/// N i.i.d. direct-detection samples: mean F_I[x], std sigma0.
Eigen::VectorXd sample_idd(const MarginalCurve& f_i, double x, int n, const NoiseSpec& noise,
                           std::uint64_t stream, DrawCounter* counter = nullptr);

/// Superheterodyne waveform per Eq. (15): n1 periods of n2 samples,
/// z_k = F_I[x_lo] + F_I'[x_lo] * x * cos(2 pi k / n2 + phi) + n0.
/// The weak-signal regime x << x_lo is the caller's responsibility.
Eigen::VectorXd sample_isd(const MarginalCurve& f_i, double x_lo, double x, double phi,
                           int n1, int n2, const NoiseSpec& noise, std::uint64_t stream,
                           DrawCounter* counter = nullptr);

/// Scan of one peak: per plan frequency, the average of n_sf2 raw draws
/// around the lineshape value, so each voltage ~ Normal(F_S[f], sigma0^2/n_sf2).
ScanData sample_scan(const PeakLineshape& shape, const SamplingPlan& plan, int n_sf2,
                     const NoiseSpec& noise, std::uint64_t stream,
                     DrawCounter* counter = nullptr);

}  // namespace rydsim

#endif  // RYDSIM_NOISE_SIM_HPP

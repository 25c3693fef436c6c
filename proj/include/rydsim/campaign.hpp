// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_CAMPAIGN_HPP
#define RYDSIM_CAMPAIGN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rydsim/crlb.hpp"
#include "rydsim/estimators.hpp"
#include "rydsim/noise_sim.hpp"

namespace rydsim {

/// Fully resolved experiment description. Parsed from the plain-text config
/// format; every field echoes back into `config.echo` for reproducibility.
struct ExperimentConfig {
  AtomicSystem system;

  // surface grids
  double x_rabi_max_mhz = 25.0;
  double x_step_mhz = 0.05;
  double f_span_mhz = 30.0;
  double f_step_mhz = 0.02;

  std::vector<std::string> schemes = {"idd", "isd", "ue", "me", "5pf"};
  std::vector<double> signals_mhz = {15.0};  // Omega_RF / 2pi
  std::vector<double> sigmas = {0.01};
  long long trials = 10000;
  std::uint64_t master_seed = 20250810;

  int n_total = 20;
  int n_sf1 = 10, n_sf2 = 1;  // splitting: per-side frequencies x averages
  int n_sd1 = 5, n_sd2 = 4;   // superheterodyne: periods x samples/period

  std::string sampling = "uniform";  // or "maxslope"
  double uniform_span_mhz = 10.0;
  double intensity_delta_p_mhz = 0.0;  // F_I slice detuning
  double isd_phase = 0.3;             // beat phase used for synthetic waveforms

  ShiftSolverConfig shift;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_kv(const KeyValueFile& kv);
  KeyValueFile to_kv() const;
  void validate() const;

  Eigen::VectorXd surface_x_grid() const;
  Eigen::VectorXd surface_f_grid() const;
};

/// One (scheme, signal, noise) cell of a campaign.
struct CellResult {
  std::string scheme;
  std::string sampling;  // "uniform" | "maxslope" | "-"
  double signal_mhz = 0.0;
  double sigma0 = 0.0;
  int n_total = 0;
  long long trials = 0;
  long long failures = 0;
  double mse = 0.0;              // (V/m)^2 over successful trials
  double crlb = 0.0;             // (V/m)^2
  double mse_normalized = 0.0;
  double crlb_normalized = 0.0;
  double mse_rabi_mhz2 = 0.0;    // (Omega/2pi in MHz)^2
  double crlb_rabi_mhz2 = 0.0;
  std::uint64_t consistency_hash = 0;
  std::uint64_t stream_base = 0;
  bool valid = false;
  std::string note;
};

struct CampaignResult {
  std::uint64_t master_seed = 0;
  std::string config_echo;
  std::vector<CellResult> cells;

  static std::string csv_header();
  std::string to_csv() const;
};

/// Places scan frequencies for one peak. Uniform plans span
/// `uniform_span` centered on the peak (shifted inward when the window would
/// cross the resonance); max-slope plans split the points across the peak's
/// two maximum-|slope| flanks; explicit plans pass `explicit_freqs` through.
SamplingPlan make_plan(SamplingPlan::Strategy strategy, const PeakLineshape& shape, int n_sf1,
                       double uniform_span, double f_resonance,
                       const Eigen::VectorXd& explicit_freqs = Eigen::VectorXd());

/// Runs every (scheme, signal, noise) cell: seeded data generation, the
/// scheme's estimator, MSE aggregation against ground truth, and the matching
/// CRLB. Fully reproducible from (config, master seed) independent of the
/// thread count. Estimator failures are excluded from the MSE and counted;
/// a cell with > 5% failures is flagged invalid.
CampaignResult run_campaign(const ExperimentConfig& config, const ResponseSurface& surface,
                            unsigned threads = 0);

/// Builds the surface from the config grids, then runs.
CampaignResult run_campaign(const ExperimentConfig& config, unsigned threads = 0);

/// Fig. 4/5-style dataset: per signal, normalized CRLB and normalized MSE per
/// scheme, one row per signal value.
std::string sweep_normalized_csv(const ExperimentConfig& config, const ResponseSurface& surface,
                                 unsigned threads = 0);

/// CRLB-only sweep `x,crlb_idd,crlb_isd,crlb_ue,crlb_me,r0,r_x`; raw or
/// Section-VI-normalized values, flagged in the header comment.
std::string crlb_sweep_csv(const ExperimentConfig& config, const ResponseSurface& surface,
                           bool normalized);

/// Writes campaign.csv, config.echo and seeds.txt under `dir` (created when
/// missing). Byte-stable for identical inputs.
void export_campaign(const CampaignResult& result, const std::string& dir);

/// Reads back what export_campaign wrote.
CampaignResult import_campaign(const std::string& dir);

/// Field-for-field equality treating NaN as equal to NaN.
bool equivalent(const CampaignResult& a, const CampaignResult& b);

}  // namespace rydsim

#endif  // RYDSIM_CAMPAIGN_HPP

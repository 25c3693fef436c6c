// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_ESTIMATORS_HPP
#define RYDSIM_ESTIMATORS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "rydsim/noise_sim.hpp"

namespace rydsim {

/// Result of one estimator run. `estimate` is a field strength (V/m) for the
/// intensity and splitting estimators and a peak shift (absolute Hz) for the
/// single-peak shift estimators; `estimate_rabi` is the Eq.-(1) equivalent
/// Rabi frequency (rad/s) where applicable.
struct EstimateReport {
  std::string method;
  double estimate = 0.0;
  double estimate_rabi = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;               // final least-squares objective / mismatch
  std::vector<double> trace;           // per-step parameter values
  std::vector<double> objective_trace; // objective after each accepted step
  Eigen::VectorXd params;              // method-specific extras (fitted v, both ISD paths)
  std::string diagnostic;

  /// Key/value text block.
  std::string to_text() const;
  /// One CSV row: method,estimate,estimate_rabi,iterations,converged,residual
  std::string to_csv_row() const;
  static std::string csv_header();
};

/// Convergence policy for the iterative shift estimators.
struct ShiftSolverConfig {
  double epsilon = 1e3;      // Hz; stop when |delta f| drops below this
  int max_iterations = 100;  // per shift solve
  enum class Init { ArgmaxSmoothed, Explicit };
  Init init = Init::ArgmaxSmoothed;
  double init_value = 0.0;   // absolute Hz, used with Init::Explicit

  double joint_tolerance = 1e-8;  // multivariate: relative parameter change
  int max_rounds = 200;           // multivariate: alternation rounds

  void validate() const;
};

/// Maximal interval around x on which the curve derivative keeps one sign;
/// the natural branch hint for direct detection.
std::pair<double, double> monotone_branch_around(const MarginalCurve& curve, double x);

/// Intensity direct detection, Eq. (13): invert the sample mean through F_I
/// on the given monotone branch. Throws ValueOutOfRange when noise pushes the
/// mean outside the branch range (reported, not clamped).
EstimateReport estimate_idd(const Eigen::VectorXd& z, const MarginalCurve& f_i,
                            double branch_lo, double branch_hi);

/// Intensity superheterodyne detection: single DFT over the concatenated
/// periods at bin n1 (Lemma 1). Both the single-DFT value and the
/// coherently combined per-period value are computed and must agree;
/// params = [single_dft, per_period]. Throws ZeroSlope for |slope| ~ 0.
EstimateReport estimate_isd(const Eigen::VectorXd& z, double slope_at_xlo, int n1, int n2);

/// Univariate peak shift MLE: iterative update of Eqs. (34)-(35) with step
/// halving when a step would increase the Eq.-(33) objective. Returns the
/// best iterate with converged=false when max_iterations is exhausted.
EstimateReport estimate_shift_univariate(const ScanData& scan, const PeakLineshape& shape,
                                         const ShiftSolverConfig& config);

/// Multivariate peak shift MLE for the Gaussian-like family: alternates the
/// shift update at fixed lineshape parameters with a BFGS pass over the
/// parameters at fixed shift. params = fitted [v1, v2 (1/Hz^2), v3].
EstimateReport estimate_shift_multivariate(const ScanData& scan,
                                           const ShiftSolverConfig& config);

/// Context for combining two per-side shift estimates into a field estimate.
struct SplittingContext {
  const PeakLineshape* left = nullptr;   // required for univariate mode
  const PeakLineshape* right = nullptr;
  ShiftSolverConfig config;
  double kappa = 0.0;   // V/m per Hz
  double mu_rf = 0.0;   // for the Rabi-equivalent report
};

enum class SplittingMode { Univariate, Multivariate };

/// |E| = kappa (f_R - f_L) from per-side shift estimates (Eqs. (36)/(39)).
EstimateReport estimate_splitting(const ScanData& left, const ScanData& right,
                                  SplittingMode mode, const SplittingContext& ctx);

/// Fifth-order-polynomial baseline: least-squares fit of z against f on a
/// normalized domain, peak at the derivative root nearest the sample argmax.
/// converged=false (NoInteriorExtremum) when no root lies inside the span;
/// the sample argmax is then reported.
EstimateReport polyfit_peak(const ScanData& scan, int order = 5);

/// Deterministic noiseless Gaussian-like representation of a tabulated peak:
/// dense samples around the top are fitted with the multivariate estimator.
/// The returned lineshape carries the refitted center.
PeakLineshape fit_gaussian_like(const PeakLineshape& tabulated);

}  // namespace rydsim

#endif  // RYDSIM_ESTIMATORS_HPP

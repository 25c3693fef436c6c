// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_CRLB_HPP
#define RYDSIM_CRLB_HPP

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

#include "rydsim/marginal.hpp"

namespace rydsim {

/// Fisher information for theta = [f_R, v1, ..., vM] under the Gaussian scan
/// noise model; entries in the inverse squared units of the parameters.
struct FisherMatrix {
  Eigen::MatrixXd info;
  std::vector<std::string> labels;

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    return es.eigenvalues().minCoeff();
  }
};

/// A Cramer-Rao bound for one detection scheme. `bound` is in squared
/// field-strength units ((V/m)^2); per-peak constituents are shift variances
/// in Hz^2. Divergent bounds are reported as +inf with a diagnostic rather
/// than thrown, so sweeps can render divergences.
struct CrlbReport {
  std::string scheme;
  double bound = 0.0;
  double right_bound = 0.0;
  double left_bound = 0.0;
  double normalized = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;
};

/// Eq.-(49) unit change: field-strength variance to Rabi-frequency variance.
inline double rabi_variance(double field_variance, double mu_rf) {
  const double k = mu_rf / 1.054571817e-34;
  return field_variance * k * k;
}

/// Theorem 1: sigma0^2/N * (1/F_I'[x])^2. The slope comes from the curve's
/// derivative accessor (single source of truth with the simulator).
CrlbReport crlb_idd(const MarginalCurve& f_i, double x, double n, double sigma0);

/// Theorem 2: (2/N) sigma0^2 / (F_I'[x_LO])^2.
CrlbReport crlb_isd(const MarginalCurve& f_i, double x_lo, double n, double sigma0);

/// Theorem 3: kappa^2 (CRLB_UR + CRLB_UL) with per-peak sums of squared
/// lineshape slopes at the plan frequencies. Throws AllFlatSamples when a
/// side carries no slope at all.
CrlbReport crlb_univariate(const PeakLineshape& left, const PeakLineshape& right,
                           const Eigen::VectorXd& left_freqs,
                           const Eigen::VectorXd& right_freqs, double n_sf2, double sigma0,
                           double kappa_value);

/// Differentiable peak family F(u; v) for Fisher computations.
class PeakModel {
 public:
  virtual ~PeakModel() = default;
  virtual int param_count() const = 0;
  virtual double value(double u, const Eigen::VectorXd& v) const = 0;
  virtual double d_du(double u, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd d_dv(double u, const Eigen::VectorXd& v) const = 0;
};

/// v1 exp(-v2 u^2) + v3 (the Eq.-(32) family).
class GaussianLikePeakModel final : public PeakModel {
 public:
  int param_count() const override { return 3; }
  double value(double u, const Eigen::VectorXd& v) const override;
  double d_du(double u, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd d_dv(double u, const Eigen::VectorXd& v) const override;
};

/// Gaussian-noise Fisher matrix (N_SF,2/sigma0^2) sum_i g_i g_i^T for
/// theta = [f_R, v]; g_i = [dF/df_R, dF/dv] at u_i = f_i - f_R.
FisherMatrix fisher_multivariate(const PeakModel& family, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& plan_freqs, double n_sf2,
                                 double sigma0);

/// [J^{-1}]_{1,1} through the block form 1/(J_ff - J_fv C^+ J_vf) with a
/// spectral pseudo-inverse of the nuisance block (tolerates concentrated
/// plans that leave lineshape parameters unidentified while the shift is
/// still determined). Throws SingularFisher when the shift itself is not
/// identifiable.
double shift_crlb_from_fisher(const FisherMatrix& fisher);

/// Theorem 4: kappa^2 ([J_R^{-1}]_{1,1} + [J_L^{-1}]_{1,1}).
CrlbReport crlb_multivariate(const FisherMatrix& right, const FisherMatrix& left,
                             double kappa_value);

/// Operating points behind the constant comparison ratio r0.
struct SchemeComparison {
  double r0 = 0.0;
  double x_op_intensity = 0.0;   // argmax_x |F_I'| on the intensity slice
  double slope_intensity = 0.0;  // per (V/m)
  double x_op_splitting = 0.0;   // slice with the globally steepest F_S
  double f_op_splitting = 0.0;   // Hz
  double slope_splitting = 0.0;  // per Hz
};

/// r0 = sqrt(2) kappa max_x|dG/dx| / max|dG/df_p|: the weak-signal figure of
/// merit between superheterodyne and splitting detection. The intensity slope
/// is maximized along the slice at `slice_delta_p`; the splitting slope is
/// the global maximum over all tabulated slices.
SchemeComparison compare_r0(const ResponseSurface& surface, double kappa_value,
                            double slice_delta_p = 0.0);
double ratio_r0(const ResponseSurface& surface, double kappa_value,
                double slice_delta_p = 0.0);

/// r[x] = 2 kappa |F_I'[x]| / max_f|F_S'| at the slice x; +inf at zero
/// intensity slope.
double ratio_r(const ResponseSurface& surface, double x, double kappa_value,
               double slice_delta_p = 0.0);

/// Section-VI normalization reference sigma0^2 / (N max_xLO(F_I')^2), in
/// squared field units. Dividing a Rabi-converted value by the
/// Rabi-converted reference gives the same dimensionless number.
struct NormalizationReference {
  double sigma0 = 0.0;
  double n_total = 0.0;
  double max_intensity_slope = 0.0;  // max over x_LO of |F_I'|, per (V/m)

  double value() const {
    return sigma0 * sigma0 / (n_total * max_intensity_slope * max_intensity_slope);
  }
};

NormalizationReference make_normalization(const MarginalCurve& f_i, double n_total,
                                          double sigma0);

/// Dimensionless value/reference ratio.
double normalize_value(double field2_value, const NormalizationReference& ref);

/// Fills report.normalized in place and returns it.
CrlbReport& normalize_report(CrlbReport& report, const NormalizationReference& ref);

}  // namespace rydsim

#endif  // RYDSIM_CRLB_HPP

// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_MARGINAL_HPP
#define RYDSIM_MARGINAL_HPP

#include <Eigen/Dense>

#include <utility>

#include "rydsim/response_surface.hpp"

namespace rydsim {

/// A 1-D slice of the response surface with continuous evaluation and a
/// finite-difference derivative accessor.
class MarginalCurve {
 public:
  enum class Axis { FieldStrength, ProbeFrequency };

  MarginalCurve(Axis axis, double fixed_value, Eigen::VectorXd inputs, Eigen::VectorXd values);

  double operator()(double u) const { return interp_(u); }
  /// Centered difference of the evaluator on a refined stencil (step/64).
  double derivative(double u) const;

  const Eigen::VectorXd& inputs() const { return interp_.grid(); }
  const Eigen::VectorXd& samples() const { return interp_.values(); }
  double lo() const { return interp_.lo(); }
  double hi() const { return interp_.hi(); }
  double range() const { return range_; }
  Axis axis() const { return axis_; }
  double fixed_value() const { return fixed_; }

 private:
  Axis axis_;
  double fixed_;
  double range_;
  CubicInterpolant<double> interp_;
};

/// F_I[x] = G[x, f_p]|_{f_p = f_p_resonance + delta_p}; delta_p in Hz.
MarginalCurve intensity_marginal(const ResponseSurface& surface, double delta_p);

/// F_S[f_p] = G[x, f_p]|_x.
MarginalCurve frequency_marginal(const ResponseSurface& surface, double x);

/// One split peak, re-centered so its maximum sits at argument 0. Either a
/// tabulated profile extracted from F_S or the Gaussian-like parametric form
/// v1 exp(-v2 u^2) + v3.
class PeakLineshape {
 public:
  enum class Side { Left, Right };
  enum class Kind { Tabulated, GaussianLike };

  static PeakLineshape gaussian_like(Side side, const Eigen::Vector3d& v, double u_lo,
                                     double u_hi, double center_abs);
  static PeakLineshape tabulated(Side side, Eigen::VectorXd offsets, Eigen::VectorXd values,
                                 double center_abs);

  double value(double u) const;
  double slope(double u) const;

  Side side() const { return side_; }
  Kind kind() const { return kind_; }
  const Eigen::Vector3d& params() const { return v_; }
  double u_lo() const { return u_lo_; }
  double u_hi() const { return u_hi_; }
  /// Absolute frequency of the peak maximum (f_R or f_L), Hz.
  double center_abs() const { return center_abs_; }

  /// Offsets of the two maximum-|slope| flanks (inner first).
  std::pair<double, double> max_slope_offsets() const;

 private:
  PeakLineshape() = default;
  Side side_ = Side::Right;
  Kind kind_ = Kind::Tabulated;
  Eigen::Vector3d v_ = Eigen::Vector3d::Zero();
  double u_lo_ = 0.0, u_hi_ = 0.0;
  double center_abs_ = 0.0;
  CubicInterpolant<double> profile_;
};

/// Splits a two-peaked frequency marginal at `f_resonance` into re-centered
/// left/right lineshapes. A peak needs prominence >= 2% of the curve range;
/// throws UnresolvedSplitting when the two maxima are not separated by an
/// interior minimum.
std::pair<PeakLineshape, PeakLineshape> split_lineshapes(const MarginalCurve& curve,
                                                         double f_resonance);

/// Inverse of the curve on a certified monotone branch [branch_lo, branch_hi]
/// (derivative sign checked at 32 points). Bisection refined until the
/// response mismatch is below 1e-10 of the curve range.
double invert_intensity(const MarginalCurve& curve, double y, double branch_lo,
                        double branch_hi);

struct SlopePoint {
  double location = 0.0;
  double slope = 0.0;   // signed
  bool flat = false;    // curve constant over the interval
};

/// argmax of |derivative| over [lo, hi]: dense scan plus golden-section
/// refinement to 1e-4 of the scan step.
SlopePoint max_slope_point(const MarginalCurve& curve, double lo, double hi);

/// Splitting-to-field conversion constant kappa = 2 pi lambda_p hbar /
/// (lambda_c mu_RF), V/m per Hz.
double kappa(const AtomicSystem& sys);

}  // namespace rydsim

#endif  // RYDSIM_MARGINAL_HPP

// SPDX-License-Identifier: Apache-2.0
#include "rydsim/marginal.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rydsim/constants.hpp"
#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

template <typename F>
double golden_max(const F& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  // keep the target above the representable spacing at this magnitude
  tol = std::max(tol, 8.0 * std::numeric_limits<double>::epsilon() *
                          std::max({std::abs(a), std::abs(b), 1.0}));
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 400 && b - a > tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

MarginalCurve::MarginalCurve(Axis axis, double fixed_value, Eigen::VectorXd inputs,
                             Eigen::VectorXd values)
    : axis_(axis), fixed_(fixed_value) {
  interp_ = CubicInterpolant<double>(std::move(inputs), std::move(values));
  range_ = interp_.values().maxCoeff() - interp_.values().minCoeff();
}

double MarginalCurve::derivative(double u) const {
  const auto& x = interp_.grid();
  const double* begin = x.data();
  const double* end = begin + x.size();
  Eigen::Index i = std::upper_bound(begin, end, std::clamp(u, lo(), hi())) - begin - 1;
  i = std::clamp<Eigen::Index>(i, 0, x.size() - 2);
  const double h = (x[i + 1] - x[i]) / 64.0;
  if (u - h >= lo() && u + h <= hi()) return (interp_(u + h) - interp_(u - h)) / (2.0 * h);
  if (u + 2.0 * h <= hi())
    return (-3.0 * interp_(u) + 4.0 * interp_(u + h) - interp_(u + 2.0 * h)) / (2.0 * h);
  return (3.0 * interp_(u) - 4.0 * interp_(u - h) + interp_(u - 2.0 * h)) / (2.0 * h);
}

MarginalCurve intensity_marginal(const ResponseSurface& surface, double delta_p) {
  const double f = surface.f_reference() + delta_p;
  if (f < surface.f_lo() || f > surface.f_hi())
    throw OutOfRange("intensity_marginal: detuning outside surface f grid");
  const auto& xg = surface.x_grid();
  Eigen::VectorXd y(xg.size());
  for (Eigen::Index i = 0; i < xg.size(); ++i) y[i] = surface.value(xg[i], f);
  return MarginalCurve(MarginalCurve::Axis::FieldStrength, delta_p, xg, y);
}

MarginalCurve frequency_marginal(const ResponseSurface& surface, double x) {
  if (x < surface.x_lo() || x > surface.x_hi())
    throw OutOfRange("frequency_marginal: field strength outside surface x grid");
  const auto& fg = surface.f_grid();
  Eigen::VectorXd y(fg.size());
  for (Eigen::Index j = 0; j < fg.size(); ++j) y[j] = surface.value(x, fg[j]);
  return MarginalCurve(MarginalCurve::Axis::ProbeFrequency, x, fg, y);
}

PeakLineshape PeakLineshape::gaussian_like(Side side, const Eigen::Vector3d& v, double u_lo,
                                           double u_hi, double center_abs) {
  if (!(v[1] > 0)) throw InvalidArgument("gaussian-like lineshape requires v2 > 0");
  if (!(u_lo < 0 && u_hi > 0))
    throw InvalidArgument("lineshape window must bracket the peak (u=0)");
  PeakLineshape p;
  p.side_ = side;
  p.kind_ = Kind::GaussianLike;
  p.v_ = v;
  p.u_lo_ = u_lo;
  p.u_hi_ = u_hi;
  p.center_abs_ = center_abs;
  return p;
}

PeakLineshape PeakLineshape::tabulated(Side side, Eigen::VectorXd offsets,
                                       Eigen::VectorXd values, double center_abs) {
  PeakLineshape p;
  p.side_ = side;
  p.kind_ = Kind::Tabulated;
  p.center_abs_ = center_abs;
  p.profile_ = CubicInterpolant<double>(std::move(offsets), std::move(values));
  p.u_lo_ = p.profile_.lo();
  p.u_hi_ = p.profile_.hi();
  if (!(p.u_lo_ < 0 && p.u_hi_ > 0))
    throw InvalidArgument("tabulated lineshape window must bracket the peak (u=0)");
  return p;
}

double PeakLineshape::value(double u) const {
  if (kind_ == Kind::GaussianLike) return v_[0] * std::exp(-v_[1] * u * u) + v_[2];
  return profile_(u);
}

double PeakLineshape::slope(double u) const {
  if (kind_ == Kind::GaussianLike)
    return -2.0 * v_[0] * v_[1] * u * std::exp(-v_[1] * u * u);
  const auto& x = profile_.grid();
  const double* begin = x.data();
  const double* end = begin + x.size();
  Eigen::Index i = std::upper_bound(begin, end, std::clamp(u, u_lo_, u_hi_)) - begin - 1;
  i = std::clamp<Eigen::Index>(i, 0, x.size() - 2);
  const double h = (x[i + 1] - x[i]) / 64.0;
  if (u - h >= u_lo_ && u + h <= u_hi_) return (profile_(u + h) - profile_(u - h)) / (2.0 * h);
  if (u + 2.0 * h <= u_hi_)
    return (-3.0 * profile_(u) + 4.0 * profile_(u + h) - profile_(u + 2.0 * h)) / (2.0 * h);
  return (3.0 * profile_(u) - 4.0 * profile_(u - h) + profile_(u - 2.0 * h)) / (2.0 * h);
}

std::pair<double, double> PeakLineshape::max_slope_offsets() const {
  if (kind_ == Kind::GaussianLike) {
    const double u = 1.0 / std::sqrt(2.0 * v_[1]);
    return {std::max(-u, u_lo_), std::min(u, u_hi_)};
  }
  auto refine = [&](double a, double b) {
    const int n = 512;
    double best_u = a, best = -1.0;
    for (int k = 0; k <= n; ++k) {
      const double u = a + (b - a) * k / n;
      const double s = std::abs(slope(u));
      if (s > best) {
        best = s;
        best_u = u;
      }
    }
    const double step = (b - a) / n;
    return golden_max([&](double u) { return std::abs(slope(u)); },
                      std::max(a, best_u - step), std::min(b, best_u + step), 1e-4 * step);
  };
  return {refine(u_lo_, 0.0), refine(0.0, u_hi_)};
}

std::pair<PeakLineshape, PeakLineshape> split_lineshapes(const MarginalCurve& curve,
                                                         double f_resonance) {
  const auto& f = curve.inputs();
  const auto& y = curve.samples();
  const Eigen::Index n = f.size();
  if (f_resonance <= curve.lo() || f_resonance >= curve.hi())
    throw InvalidArgument("split_lineshapes: resonance outside curve domain");

  const double range = curve.range();
  // topographic prominence of an interior local maximum: drop to the lowest
  // valley on the shallower escape route toward higher terrain (or the edge)
  auto prominence = [&](Eigen::Index i) {
    double left_min = y[i], right_min = y[i];
    for (Eigen::Index j = i - 1; j >= 0; --j) {
      left_min = std::min(left_min, y[j]);
      if (y[j] > y[i]) break;
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      right_min = std::min(right_min, y[j]);
      if (y[j] > y[i]) break;
    }
    return y[i] - std::max(left_min, right_min);
  };
  // most prominent interior local maximum per side; the monotone far wings
  // never qualify (edge maxima are not local maxima)
  Eigen::Index iL = -1, iR = -1;
  double pl = 0.0, pr = 0.0;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(y[i] >= y[i - 1] && y[i] >= y[i + 1] && (y[i] > y[i - 1] || y[i] > y[i + 1])))
      continue;
    const double p = prominence(i);
    if (p < 0.02 * range) continue;
    if (f[i] < f_resonance && p > pl) {
      pl = p;
      iL = i;
    }
    if (f[i] > f_resonance && p > pr) {
      pr = p;
      iR = i;
    }
  }
  if (iL < 0 || iR < 0)
    throw UnresolvedSplitting(
        "split_lineshapes: no prominent transmission peak on each side of the resonance");

  const double valley = y.segment(iL, iR - iL + 1).minCoeff();
  if (y[iL] - valley < 0.02 * range || y[iR] - valley < 0.02 * range)
    throw UnresolvedSplitting(
        "split_lineshapes: maxima not separated by an interior minimum (prominence < 2%)");

  auto refine_peak = [&](Eigen::Index i) {
    const double a = f[std::max<Eigen::Index>(0, i - 2)];
    const double b = f[std::min<Eigen::Index>(n - 1, i + 2)];
    return golden_max([&](double t) { return curve(t); }, a, b, 1e-6 * (f[i + 1] - f[i]));
  };
  const double fL = refine_peak(iL);
  const double fR = refine_peak(iR);

  // Eq.-(30)-style branches: the right lineshape lives on f > f_resonance,
  // the left one on f < f_resonance, each re-centered at its own maximum.
  std::vector<double> uo, vo;
  for (Eigen::Index i = 0; i < n; ++i)
    if (f[i] > f_resonance) {
      uo.push_back(f[i] - fR);
      vo.push_back(y[i]);
    }
  Eigen::VectorXd u_r = Eigen::Map<Eigen::VectorXd>(uo.data(), uo.size());
  Eigen::VectorXd v_r = Eigen::Map<Eigen::VectorXd>(vo.data(), vo.size());
  PeakLineshape right = PeakLineshape::tabulated(PeakLineshape::Side::Right, u_r, v_r, fR);

  uo.clear();
  vo.clear();
  for (Eigen::Index i = 0; i < n; ++i)
    if (f[i] < f_resonance) {
      uo.push_back(f[i] - fL);
      vo.push_back(y[i]);
    }
  Eigen::VectorXd u_l = Eigen::Map<Eigen::VectorXd>(uo.data(), uo.size());
  Eigen::VectorXd v_l = Eigen::Map<Eigen::VectorXd>(vo.data(), vo.size());
  PeakLineshape left = PeakLineshape::tabulated(PeakLineshape::Side::Left, u_l, v_l, fL);

  return {left, right};
}

double invert_intensity(const MarginalCurve& curve, double y, double branch_lo,
                        double branch_hi) {
  if (branch_lo >= branch_hi || branch_lo < curve.lo() - 1e-9 * (curve.hi() - curve.lo()) ||
      branch_hi > curve.hi() + 1e-9 * (curve.hi() - curve.lo()))
    throw InvalidArgument("invert_intensity: bad branch interval");
  branch_lo = std::max(branch_lo, curve.lo());
  branch_hi = std::min(branch_hi, curve.hi());

  int sign = 0;
  for (int k = 0; k < 32; ++k) {
    const double t = branch_lo + (branch_hi - branch_lo) * k / 31.0;
    const double s = curve.derivative(t);
    if (s == 0.0) continue;
    const int sg = s > 0 ? 1 : -1;
    if (sign == 0) sign = sg;
    else if (sg != sign)
      throw NonMonotoneBranch("invert_intensity: derivative changes sign on branch");
  }

  double a = branch_lo, b = branch_hi;
  double fa = curve(a), fb = curve(b);
  const double ylo = std::min(fa, fb), yhi = std::max(fa, fb);
  const double tol = 1e-10 * std::max(curve.range(), 1e-300);
  if (y < ylo - tol || y > yhi + tol)
    throw ValueOutOfRange("invert_intensity: response value not attained on branch");
  y = std::clamp(y, ylo, yhi);

  for (int it = 0; it < 200; ++it) {
    const double m = (a + b) / 2.0;
    const double fm = curve(m);
    if (std::abs(fm - y) <= tol && it >= 40) return m;
    if ((fm > y) == (fa > y)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    if (b - a <= 8.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0}))
      return (a + b) / 2.0;
  }
  return (a + b) / 2.0;
}

SlopePoint max_slope_point(const MarginalCurve& curve, double lo, double hi) {
  if (lo >= hi || lo < curve.lo() - 1e-9 * (curve.hi() - curve.lo()) ||
      hi > curve.hi() + 1e-9 * (curve.hi() - curve.lo()))
    throw InvalidArgument("max_slope_point: bad interval");
  lo = std::max(lo, curve.lo());
  hi = std::min(hi, curve.hi());

  Eigen::Index nodes = 0;
  for (Eigen::Index i = 0; i < curve.inputs().size(); ++i)
    if (curve.inputs()[i] >= lo && curve.inputs()[i] <= hi) ++nodes;
  const int n = std::max<int>(512, 8 * static_cast<int>(nodes));

  double best_t = lo, best = -1.0;
  for (int k = 0; k <= n; ++k) {
    const double t = lo + (hi - lo) * k / n;
    const double s = std::abs(curve.derivative(t));
    if (s > best) {
      best = s;
      best_t = t;
    }
  }
  SlopePoint out;
  if (best * (hi - lo) < 1e-12 * std::max(curve.range(), 1e-300)) {
    out.location = (lo + hi) / 2.0;
    out.slope = 0.0;
    out.flat = true;
    return out;
  }
  const double step = (hi - lo) / n;
  out.location = golden_max([&](double t) { return std::abs(curve.derivative(t)); },
                            std::max(lo, best_t - step), std::min(hi, best_t + step),
                            1e-4 * step);
  out.slope = curve.derivative(out.location);
  return out;
}

double kappa(const AtomicSystem& sys) {
  if (!(sys.mu_rf > 0)) throw InvalidArgument("kappa: mu_rf must be positive");
  return constants::two_pi * sys.lambda_p * constants::hbar / (sys.lambda_c * sys.mu_rf);
}

}  // namespace rydsim

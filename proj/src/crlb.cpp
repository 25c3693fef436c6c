// SPDX-License-Identifier: Apache-2.0
#include "rydsim/crlb.hpp"

#include <cmath>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CrlbReport crlb_idd(const MarginalCurve& f_i, double x, double n, double sigma0) {
  if (f_i.axis() != MarginalCurve::Axis::FieldStrength)
    throw InvalidArgument("crlb_idd: expected an intensity marginal F_I[x]");
  if (!(n >= 1)) throw InvalidArgument("crlb_idd: n must be >= 1");
  CrlbReport rep;
  rep.scheme = "IDD";
  const double slope = f_i.derivative(x);
  if (std::abs(slope) < 1e-12) {
    rep.bound = kInf;
    rep.diagnostic = "ZeroSlope: |F_I'| < 1e-12 at x = " + format_double(x);
    return rep;
  }
  rep.bound = sigma0 * sigma0 / (n * slope * slope);
  return rep;
}

CrlbReport crlb_isd(const MarginalCurve& f_i, double x_lo, double n, double sigma0) {
  if (f_i.axis() != MarginalCurve::Axis::FieldStrength)
    throw InvalidArgument("crlb_isd: expected an intensity marginal F_I[x]");
  if (!(n >= 1)) throw InvalidArgument("crlb_isd: n must be >= 1");
  CrlbReport rep;
  rep.scheme = "ISD";
  const double slope = f_i.derivative(x_lo);
  if (std::abs(slope) < 1e-12) {
    rep.bound = kInf;
    rep.diagnostic = "ZeroSlope: |F_I'| < 1e-12 at x_LO = " + format_double(x_lo);
    return rep;
  }
  rep.bound = 2.0 * sigma0 * sigma0 / (n * slope * slope);
  return rep;
}

namespace {

double slope_sum_squares(const PeakLineshape& shape, const Eigen::VectorXd& freqs) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    const double u = freqs[i] - shape.center_abs();
    if (shape.kind() == PeakLineshape::Kind::Tabulated &&
        (u < shape.u_lo() || u > shape.u_hi()))
      continue;  // off-window samples carry no slope
    const double s = shape.slope(u);
    acc += s * s;
  }
  return acc;
}

}  // namespace

CrlbReport crlb_univariate(const PeakLineshape& left, const PeakLineshape& right,
                           const Eigen::VectorXd& left_freqs,
                           const Eigen::VectorXd& right_freqs, double n_sf2, double sigma0,
                           double kappa_value) {
  if (left_freqs.size() < 1 || right_freqs.size() < 1)
    throw InvalidArgument("crlb_univariate: empty sampling plan");
  if (!(n_sf2 >= 1)) throw InvalidArgument("crlb_univariate: n_sf2 must be >= 1");
  const double sum_r = slope_sum_squares(right, right_freqs);
  const double sum_l = slope_sum_squares(left, left_freqs);
  if (!(sum_r > 0.0) || !(sum_l > 0.0))
    throw AllFlatSamples("crlb_univariate: a side has no sampled lineshape slope");
  CrlbReport rep;
  rep.scheme = "UE";
  rep.right_bound = sigma0 * sigma0 / (n_sf2 * sum_r);
  rep.left_bound = sigma0 * sigma0 / (n_sf2 * sum_l);
  rep.bound = kappa_value * kappa_value * (rep.right_bound + rep.left_bound);
  return rep;
}

double GaussianLikePeakModel::value(double u, const Eigen::VectorXd& v) const {
  return v[0] * std::exp(-v[1] * u * u) + v[2];
}

double GaussianLikePeakModel::d_du(double u, const Eigen::VectorXd& v) const {
  return -2.0 * v[0] * v[1] * u * std::exp(-v[1] * u * u);
}

Eigen::VectorXd GaussianLikePeakModel::d_dv(double u, const Eigen::VectorXd& v) const {
  const double e = std::exp(-v[1] * u * u);
  Eigen::VectorXd g(3);
  g << e, -v[0] * u * u * e, 1.0;
  return g;
}

FisherMatrix fisher_multivariate(const PeakModel& family, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& plan_freqs, double n_sf2,
                                 double sigma0) {
  const int m = family.param_count();
  if (theta.size() != m + 1)
    throw InvalidArgument("fisher_multivariate: theta must be [f_R, v1..vM]");
  if (!(sigma0 > 0)) throw InvalidArgument("fisher_multivariate: sigma0 must be > 0");
  const double f_r = theta[0];
  const Eigen::VectorXd v = theta.tail(m);

  FisherMatrix fisher;
  fisher.info = Eigen::MatrixXd::Zero(m + 1, m + 1);
  fisher.labels.resize(m + 1);
  fisher.labels[0] = "f_R";
  for (int k = 0; k < m; ++k) fisher.labels[k + 1] = "v" + std::to_string(k + 1);

  Eigen::VectorXd g(m + 1);
  for (Eigen::Index i = 0; i < plan_freqs.size(); ++i) {
    const double u = plan_freqs[i] - f_r;
    g[0] = -family.d_du(u, v);  // dF(f_i - f_R)/df_R
    g.tail(m) = family.d_dv(u, v);
    fisher.info += g * g.transpose();
  }
  fisher.info *= n_sf2 / (sigma0 * sigma0);
  fisher.info = ((fisher.info + fisher.info.transpose()) / 2.0).eval();
  return fisher;
}

double shift_crlb_from_fisher(const FisherMatrix& fisher) {
  const Eigen::MatrixXd& j = fisher.info;
  const Eigen::Index m = j.rows();
  if (m < 1 || j.cols() != m) throw InvalidArgument("shift_crlb_from_fisher: bad matrix");
  if (!j.allFinite()) throw SingularFisher("Fisher matrix has non-finite entries");
  const double jff = j(0, 0);
  if (!(jff > 0)) throw SingularFisher("no information about the shift parameter");
  if (m == 1) return 1.0 / jff;

  const Eigen::VectorXd b = j.block(1, 0, m - 1, 1);
  Eigen::MatrixXd c = j.block(1, 1, m - 1, m - 1);

  // equilibrate the nuisance block so the mixed parameter units do not
  // distort the rank decision
  Eigen::VectorXd d(m - 1);
  for (Eigen::Index k = 0; k < m - 1; ++k) d[k] = c(k, k) > 0 ? 1.0 / std::sqrt(c(k, k)) : 1.0;
  const Eigen::MatrixXd cs = d.asDiagonal() * c * d.asDiagonal();
  const Eigen::VectorXd bs = d.asDiagonal() * b;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cs);
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  double correction = 0.0;
  if (lmax > 0) {
    const double thresh = 1e-12 * lmax;  // keeps the effective condition <= 1e12
    for (Eigen::Index k = 0; k < m - 1; ++k) {
      const double lambda = es.eigenvalues()[k];
      if (lambda > thresh) {
        const double proj = es.eigenvectors().col(k).dot(bs);
        correction += proj * proj / lambda;
      }
    }
  }
  const double schur = jff - correction;
  if (!(schur > 1e-12 * jff))
    throw SingularFisher("shift parameter not identifiable (Schur complement <= 0)");
  return 1.0 / schur;
}

CrlbReport crlb_multivariate(const FisherMatrix& right, const FisherMatrix& left,
                             double kappa_value) {
  CrlbReport rep;
  rep.scheme = "ME";
  rep.right_bound = shift_crlb_from_fisher(right);
  rep.left_bound = shift_crlb_from_fisher(left);
  rep.bound = kappa_value * kappa_value * (rep.right_bound + rep.left_bound);
  return rep;
}

SchemeComparison compare_r0(const ResponseSurface& surface, double kappa_value,
                            double slice_delta_p) {
  SchemeComparison cmp;
  const MarginalCurve f_i = intensity_marginal(surface, slice_delta_p);
  const SlopePoint mi = max_slope_point(f_i, f_i.lo(), f_i.hi());
  cmp.x_op_intensity = mi.location;
  cmp.slope_intensity = std::abs(mi.slope);

  // Splitting detection only operates where the two peaks resolve, so the
  // scheme-appropriate slope search runs over resolved slices and on the
  // re-centered peak lineshapes (the branches Theorem 3 samples). Coarse
  // x-stride scan first, then a stride-1 refinement around the winner.
  const auto& xg = surface.x_grid();
  const double f_res = surface.f_reference();
  auto slice_best = [&](Eigen::Index i, SchemeComparison& out) {
    try {
      const MarginalCurve f_s = frequency_marginal(surface, xg[i]);
      auto [left, right] = split_lineshapes(f_s, f_res);
      for (const PeakLineshape* shape : {&left, &right}) {
        const auto [u_below, u_above] = shape->max_slope_offsets();
        for (double u : {u_below, u_above}) {
          const double s = std::abs(shape->slope(u));
          if (s > out.slope_splitting) {
            out.slope_splitting = s;
            out.x_op_splitting = xg[i];
            out.f_op_splitting = shape->center_abs() + u;
          }
        }
      }
      return true;
    } catch (const UnresolvedSplitting&) {
      return false;
    }
  };
  SchemeComparison coarse = cmp;
  Eigen::Index best_i = -1;
  for (Eigen::Index i = 0; i < xg.size(); i += 4) {
    SchemeComparison probe = cmp;
    if (slice_best(i, probe) && probe.slope_splitting > coarse.slope_splitting) {
      coarse = probe;
      best_i = i;
    }
  }
  if (best_i < 0)
    throw UnresolvedSplitting("compare_r0: no slice with resolved splitting on this surface");
  for (Eigen::Index i = std::max<Eigen::Index>(0, best_i - 3);
       i <= std::min<Eigen::Index>(xg.size() - 1, best_i + 3); ++i)
    slice_best(i, cmp);
  if (!(cmp.slope_splitting > 0))
    throw UnresolvedSplitting("compare_r0: no usable splitting slope");
  cmp.r0 = std::sqrt(2.0) * kappa_value * cmp.slope_intensity / cmp.slope_splitting;
  return cmp;
}

double ratio_r0(const ResponseSurface& surface, double kappa_value, double slice_delta_p) {
  return compare_r0(surface, kappa_value, slice_delta_p).r0;
}

double ratio_r(const ResponseSurface& surface, double x, double kappa_value,
               double slice_delta_p) {
  const MarginalCurve f_i = intensity_marginal(surface, slice_delta_p);
  const double m_x = std::abs(f_i.derivative(x));
  const MarginalCurve f_s = frequency_marginal(surface, x);
  const SlopePoint ms = max_slope_point(f_s, f_s.lo(), f_s.hi());
  if (m_x < 1e-12) return kInf;  // ZeroSlope at x, reported as a divergence
  return 2.0 * kappa_value * m_x / std::abs(ms.slope);
}

NormalizationReference make_normalization(const MarginalCurve& f_i, double n_total,
                                          double sigma0) {
  NormalizationReference ref;
  ref.sigma0 = sigma0;
  ref.n_total = n_total;
  ref.max_intensity_slope = std::abs(max_slope_point(f_i, f_i.lo(), f_i.hi()).slope);
  return ref;
}

double normalize_value(double field2_value, const NormalizationReference& ref) {
  return field2_value / ref.value();
}

CrlbReport& normalize_report(CrlbReport& report, const NormalizationReference& ref) {
  report.normalized = normalize_value(report.bound, ref);
  return report;
}

}  // namespace rydsim

// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_INTERPOLATION_HPP
#define RYDSIM_INTERPOLATION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "rydsim/errors.hpp"

namespace rydsim {

/// Derivative at xs[a + i] of the Lagrange polynomial through the stencil
/// points (xs[a + k], ys[a + k]), k = 0..w-1.
template <typename Scalar>
Scalar lagrange_derivative(const Scalar* xs, const Scalar* ys, int a, int w, int i) {
  const Scalar xi = xs[a + i];
  Scalar d = 0;
  for (int k = 0; k < w; ++k) {
    Scalar denom = 1;
    for (int j = 0; j < w; ++j)
      if (j != k) denom *= xs[a + k] - xs[a + j];
    Scalar num = 0;
    for (int m = 0; m < w; ++m) {
      if (m == k) continue;
      Scalar prod = 1;
      for (int j = 0; j < w; ++j)
        if (j != k && j != m) prod *= xi - xs[a + j];
      num += prod;
    }
    d += ys[a + k] * num / denom;
  }
  return d;
}

/// Node tangent from the canonical local stencil: the five nearest nodes
/// (clipped at the ends), so the tangent is exact for quartic data and the
/// resulting Hermite interpolant has cubic precision and O(h^4) error.
/// The stencil depends only on the node index, which keeps the piecewise
/// interpolant C1 across segments.
template <typename Scalar>
Scalar canonical_tangent(const Scalar* xs, const Scalar* ys, int n, int i) {
  const int w = n < 5 ? n : 5;
  const int a = n < 5 ? 0 : std::clamp(i - 2, 0, n - 5);
  return lagrange_derivative(xs, ys, a, w, i - a);
}

/// Cubic Hermite segment [x0, x1] with node values/tangents.
template <typename Scalar>
Scalar hermite_eval(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar m0, Scalar m1,
                    Scalar t) {
  const Scalar h = x1 - x0;
  const Scalar s = (t - x0) / h;
  const Scalar s2 = s * s, s3 = s2 * s;
  return y0 * (2 * s3 - 3 * s2 + 1) + h * m0 * (s3 - 2 * s2 + s) + y1 * (-2 * s3 + 3 * s2) +
         h * m1 * (s3 - s2);
}

template <typename Scalar>
Scalar hermite_eval_derivative(Scalar x0, Scalar x1, Scalar y0, Scalar y1, Scalar m0,
                               Scalar m1, Scalar t) {
  const Scalar h = x1 - x0;
  const Scalar s = (t - x0) / h;
  const Scalar s2 = s * s;
  return (y0 * (6 * s2 - 6 * s) + h * m0 * (3 * s2 - 4 * s + 1) + y1 * (-6 * s2 + 6 * s) +
          h * m1 * (3 * s2 - 2 * s)) /
         h;
}

/// C1 piecewise-cubic Hermite interpolant on a strictly increasing, possibly
/// non-uniform grid, with canonical_tangent node slopes.
template <typename Scalar = double>
class CubicInterpolant {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CubicInterpolant() = default;

  CubicInterpolant(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    const Eigen::Index n = x_.size();
    if (n < 2 || y_.size() != n)
      throw InvalidArgument("CubicInterpolant: need >= 2 matching nodes");
    for (Eigen::Index i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw InvalidArgument("CubicInterpolant: grid must be strictly increasing");
    m_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      m_[i] = canonical_tangent(x_.data(), y_.data(), static_cast<int>(n), static_cast<int>(i));
    slack_ = Scalar(1e-9) * (x_[n - 1] - x_[0]);
  }

  Scalar operator()(Scalar t) const {
    const Eigen::Index i = segment(t);
    return hermite_eval(x_[i], x_[i + 1], y_[i], y_[i + 1], m_[i], m_[i + 1],
                        std::clamp(t, x_[0], x_[x_.size() - 1]));
  }

  /// Analytic derivative of the interpolating cubic (continuous across nodes).
  Scalar derivative(Scalar t) const {
    const Eigen::Index i = segment(t);
    return hermite_eval_derivative(x_[i], x_[i + 1], y_[i], y_[i + 1], m_[i], m_[i + 1],
                                   std::clamp(t, x_[0], x_[x_.size() - 1]));
  }

  const Vector& grid() const { return x_; }
  const Vector& values() const { return y_; }
  Scalar lo() const { return x_[0]; }
  Scalar hi() const { return x_[x_.size() - 1]; }
  bool empty() const { return x_.size() == 0; }

 private:
  Eigen::Index segment(Scalar t) const {
    if (t < x_[0] - slack_ || t > x_[x_.size() - 1] + slack_)
      throw OutOfRange("interpolant evaluation outside grid");
    t = std::clamp(t, x_[0], x_[x_.size() - 1]);
    const Scalar* begin = x_.data();
    const Scalar* end = begin + x_.size();
    Eigen::Index i = std::upper_bound(begin, end, t) - begin - 1;
    return std::clamp<Eigen::Index>(i, 0, x_.size() - 2);
  }

  Vector x_, y_, m_;
  Scalar slack_ = 0;
};

}  // namespace rydsim

#endif  // RYDSIM_INTERPOLATION_HPP

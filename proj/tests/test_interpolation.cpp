// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rydsim/interpolation.hpp"
#include "rydsim/rng.hpp"

using namespace rydsim;

namespace {

Eigen::VectorXd linspace(double a, double b, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("reproduces node values exactly") {
  const Eigen::VectorXd x = linspace(-2.0, 3.0, 17);
  Eigen::VectorXd y(17);
  for (int i = 0; i < 17; ++i) y[i] = std::sin(1.7 * x[i]);
  const CubicInterpolant<double> interp(x, y);
  for (int i = 0; i < 17; ++i) CHECK(interp(x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
}

TEST_CASE("cubic precision: exact on cubic polynomials") {
  const Eigen::VectorXd x = linspace(0.0, 4.0, 9);
  auto p = [](double t) { return 0.3 * t * t * t - 1.1 * t * t + 2.0 * t - 0.7; };
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) y[i] = p(x[i]);
  const CubicInterpolant<double> interp(x, y);
  for (double t = 0.05; t < 4.0; t += 0.173) {
    CHECK(interp(t) == doctest::Approx(p(t)).epsilon(1e-12));
    CHECK(interp.derivative(t) ==
          doctest::Approx(0.9 * t * t - 2.2 * t + 2.0).epsilon(1e-10));
  }
}

TEST_CASE("fourth-order convergence on a smooth function") {
  auto f = [](double t) { return std::exp(-t * t) * std::cos(3.0 * t); };
  auto max_err = [&](int n) {
    const Eigen::VectorXd x = linspace(-2.0, 2.0, n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = f(x[i]);
    const CubicInterpolant<double> interp(x, y);
    double worst = 0.0;
    for (double t = -2.0; t <= 2.0; t += 0.0037)
      worst = std::max(worst, std::abs(interp(t) - f(t)));
    return worst;
  };
  const double e1 = max_err(41);
  const double e2 = max_err(81);
  CHECK(e2 < e1 / 10.0);  // nominal factor 16
}

TEST_CASE("derivative is continuous across segment boundaries") {
  const Eigen::VectorXd x = linspace(0.0, 1.0, 11);
  Eigen::VectorXd y(11);
  const CounterRng rng(7, 0);
  for (int i = 0; i < 11; ++i) y[i] = rng.uniform(i);
  const CubicInterpolant<double> interp(x, y);
  for (int i = 1; i < 10; ++i) {
    const double left = interp.derivative(x[i] - 1e-10);
    const double right = interp.derivative(x[i] + 1e-10);
    CHECK(left == doctest::Approx(right).epsilon(1e-5));
  }
}

TEST_CASE("rejects bad grids and out-of-range evaluation") {
  Eigen::VectorXd x(3), y(3);
  x << 0.0, 1.0, 1.0;
  y << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(CubicInterpolant<double>(x, y), InvalidArgument);
  x << 0.0, 1.0, 2.0;
  const CubicInterpolant<double> interp(x, y);
  CHECK_THROWS_AS(interp(2.5), OutOfRange);
  CHECK_THROWS_AS(interp(-0.5), OutOfRange);
}

TEST_CASE("non-uniform grids keep node reproduction and smooth evaluation") {
  Eigen::VectorXd x(8), y(8);
  x << 0.0, 0.05, 0.15, 0.4, 1.0, 2.2, 2.5, 4.0;
  for (int i = 0; i < 8; ++i) y[i] = std::tanh(x[i]);
  const CubicInterpolant<double> interp(x, y);
  for (int i = 0; i < 8; ++i) CHECK(interp(x[i]) == doctest::Approx(y[i]).epsilon(1e-15));
  for (double t = 0.0; t <= 4.0; t += 0.013)
    CHECK(interp(t) == doctest::Approx(std::tanh(t)).epsilon(0.02));
}

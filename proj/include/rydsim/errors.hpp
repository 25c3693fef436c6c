// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_ERRORS_HPP
#define RYDSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rydsim {

/// Base class for all rydsim error conditions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The constrained Liouvillian system is rank deficient beyond the trace
/// constraint (degenerate decay configuration).
class SingularLiouvillian : public Error {
 public:
  using Error::Error;
};

/// Velocity quadrature did not reach the requested tolerance before the
/// node-count cap.
class NonConvergedQuadrature : public Error {
 public:
  using Error::Error;
};

/// Tabulation grid too coarse for the requested interpolation accuracy.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the tabulated domain.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Inversion requested on an interval where the curve changes direction.
class NonMonotoneBranch : public Error {
 public:
  using Error::Error;
};

/// Target response value not attained on the given branch.
class ValueOutOfRange : public Error {
 public:
  using Error::Error;
};

/// The frequency marginal does not show two separated maxima.
class UnresolvedSplitting : public Error {
 public:
  using Error::Error;
};

/// A slope in a denominator is numerically zero.
class ZeroSlope : public Error {
 public:
  using Error::Error;
};

/// Shift update denominator vanished (all samples on flat regions).
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// Quasi-Newton model of the lineshape fit broke down.
class IllConditionedFit : public Error {
 public:
  using Error::Error;
};

/// Fisher information does not identify the parameter of interest.
class SingularFisher : public Error {
 public:
  using Error::Error;
};

/// No sampled frequency carries lineshape slope.
class AllFlatSamples : public Error {
 public:
  using Error::Error;
};

/// Filesystem-level failure, annotated with the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydsim

#endif  // RYDSIM_ERRORS_HPP

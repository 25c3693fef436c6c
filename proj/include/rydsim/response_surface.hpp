// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_RESPONSE_SURFACE_HPP
#define RYDSIM_RESPONSE_SURFACE_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "rydsim/atomic_system.hpp"
#include "rydsim/interpolation.hpp"

namespace rydsim {

/// Tabulated normalized joint response G[x, f_p]: transmittance over a grid
/// of RF field strengths x (V/m) and probe frequencies f_p (Hz), divided by
/// the reference value at (0, f_p_resonance). Continuous evaluation uses a
/// separable non-uniform Catmull-Rom scheme (C1 in both axes); partial
/// derivatives come from centered differences of the evaluator on a refined
/// stencil.
class ResponseSurface {
 public:
  /// Tabulates G over the given grids. Requirements: x_grid starts at 0,
  /// both grids strictly increasing with >= 4 nodes, f_grid contains
  /// f_p_resonance. Throws GridTooCoarse when the Richardson estimate of the
  /// interpolation error exceeds 1e-4 of the surface range.
  static ResponseSurface build(const AtomicSystem& sys,
                               Eigen::VectorXd x_grid, Eigen::VectorXd f_grid,
                               unsigned threads = 0);

  /// Default grids: Rabi/2pi in [0, 25] MHz (graded: refined near zero, 0.1
  /// MHz steps in the bulk), detuning/2pi in [-30, 30] MHz at 0.02 MHz steps.
  static ResponseSurface build_default(const AtomicSystem& sys, unsigned threads = 0);

  static Eigen::VectorXd default_x_grid(const AtomicSystem& sys);
  static Eigen::VectorXd default_f_grid(const AtomicSystem& sys);
  /// Graded Rabi grid: 0.004 MHz steps to 0.2 MHz, 0.02 to 1 MHz, then
  /// `coarse_step_mhz` up to `max_rabi_mhz`.
  static Eigen::VectorXd graded_x_grid(const AtomicSystem& sys, double max_rabi_mhz,
                                       double coarse_step_mhz);

  double value(double x, double f) const;
  double ddx(double x, double f) const;
  double ddf(double x, double f) const;

  const Eigen::VectorXd& x_grid() const { return x_; }
  const Eigen::VectorXd& f_grid() const { return f_; }
  /// values()(i, j) = G[x_grid[i], f_grid[j]]
  const Eigen::MatrixXd& values() const { return g_; }
  double f_reference() const { return f_ref_; }
  double reference_raw_transmittance() const { return t_ref_; }
  const AtomicSystem& system() const { return sys_; }

  double x_lo() const { return x_[0]; }
  double x_hi() const { return x_[x_.size() - 1]; }
  double f_lo() const { return f_[0]; }
  double f_hi() const { return f_[f_.size() - 1]; }

  /// CSV export with header row `x,f_p,G` plus a sidecar metadata file
  /// carrying the grids and the normalization reference.
  void save_csv(const std::string& csv_path, const std::string& meta_path) const;
  static ResponseSurface load_csv(const std::string& csv_path, const std::string& meta_path);

 private:
  ResponseSurface() = default;
  void finish_setup();  // row interpolants + error estimate

  AtomicSystem sys_;
  Eigen::VectorXd x_, f_;
  Eigen::MatrixXd g_;
  double f_ref_ = 0.0;
  double t_ref_ = 1.0;
  int doppler_nodes_ = 0;
  std::vector<CubicInterpolant<double>> rows_;  // one per x node, over f
};

}  // namespace rydsim

#endif  // RYDSIM_RESPONSE_SURFACE_HPP

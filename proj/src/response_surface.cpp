// SPDX-License-Identifier: Apache-2.0
#include "rydsim/response_surface.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "rydsim/constants.hpp"
#include "rydsim/doppler.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/parallel.hpp"
#include "rydsim/steady_state.hpp"

namespace rydsim {

namespace {

constexpr double kMhz = 1.0e6;

// Centered difference of a 1-D evaluator with graceful one-sided fallback at
// the domain ends; h is already refined relative to the tabulation step.
template <typename F>
double fd_derivative(const F& eval, double t, double lo, double hi, double h) {
  if (t - h >= lo && t + h <= hi) return (eval(t + h) - eval(t - h)) / (2.0 * h);
  if (t + 2.0 * h <= hi)
    return (-3.0 * eval(t) + 4.0 * eval(t + h) - eval(t + 2.0 * h)) / (2.0 * h);
  return (3.0 * eval(t) - 4.0 * eval(t - h) + eval(t - 2.0 * h)) / (2.0 * h);
}

Eigen::Index locate(const Eigen::VectorXd& grid, double t, double slack) {
  if (t < grid[0] - slack || t > grid[grid.size() - 1] + slack)
    throw OutOfRange("surface evaluation outside grid");
  const double* begin = grid.data();
  const double* end = begin + grid.size();
  Eigen::Index i = std::upper_bound(begin, end, std::clamp(t, grid[0], grid[grid.size() - 1])) -
                   begin - 1;
  return std::clamp<Eigen::Index>(i, 0, grid.size() - 2);
}

}  // namespace

Eigen::VectorXd ResponseSurface::graded_x_grid(const AtomicSystem& sys, double max_rabi_mhz,
                                               double coarse_step_mhz) {
  // The weak decay out of the Rydberg states leaves a narrow dark-resonance
  // feature at x ~ 0 that a uniform coarse step cannot resolve; refine the
  // grid there and keep the requested step for the bulk of the range.
  std::vector<double> rabi{0.0};
  auto fill = [&](double upto, double step) {
    while (rabi.back() + step <= upto + 1e-9 && rabi.back() + step <= max_rabi_mhz + 1e-9)
      rabi.push_back(rabi.back() + step);
  };
  fill(std::min(0.2, max_rabi_mhz), 0.004);
  fill(std::min(1.0, max_rabi_mhz), 0.02);
  fill(max_rabi_mhz, coarse_step_mhz);
  Eigen::VectorXd x(rabi.size());
  for (std::size_t i = 0; i < rabi.size(); ++i)
    x[i] = sys.field_from_rabi(constants::two_pi * kMhz * rabi[i]);
  return x;
}

Eigen::VectorXd ResponseSurface::default_x_grid(const AtomicSystem& sys) {
  return graded_x_grid(sys, 25.0, 0.05);
}

Eigen::VectorXd ResponseSurface::default_f_grid(const AtomicSystem& sys) {
  // 0.02 MHz steps: the weak Rydberg decay produces ~0.05 MHz dark-resonance
  // notches and ~0.2 MHz AT flanks that a coarser grid cannot tabulate to
  // the 1e-4 accuracy gate.
  const int n = 3001;  // detuning/2pi -30..30 MHz
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i)
    f[i] = sys.f_p_resonance + (-30.0 + 0.02 * i) * kMhz;
  return f;
}

ResponseSurface ResponseSurface::build_default(const AtomicSystem& sys, unsigned threads) {
  return build(sys, default_x_grid(sys), default_f_grid(sys), threads);
}

ResponseSurface ResponseSurface::build(const AtomicSystem& sys, Eigen::VectorXd x_grid,
                                       Eigen::VectorXd f_grid, unsigned threads) {
  sys.validate();
  const Eigen::Index nx = x_grid.size(), nf = f_grid.size();
  if (nx < 4 || nf < 4)
    throw InvalidArgument("ResponseSurface: need >= 4 nodes per axis");
  for (Eigen::Index i = 1; i < nx; ++i)
    if (!(x_grid[i] > x_grid[i - 1]))
      throw InvalidArgument("ResponseSurface: x grid must be strictly increasing");
  for (Eigen::Index j = 1; j < nf; ++j)
    if (!(f_grid[j] > f_grid[j - 1]))
      throw InvalidArgument("ResponseSurface: f grid must be strictly increasing");
  if (std::abs(x_grid[0]) > 1e-12 * x_grid[nx - 1])
    throw InvalidArgument("ResponseSurface: x grid must start at 0 (normalization reference)");
  x_grid[0] = 0.0;

  Eigen::Index j_ref = -1;
  for (Eigen::Index j = 0; j < nf; ++j)
    if (std::abs(f_grid[j] - sys.f_p_resonance) < 1e-3) j_ref = j;
  if (j_ref < 0)
    throw InvalidArgument("ResponseSurface: f grid must contain f_p_resonance");

  ResponseSurface s;
  s.sys_ = sys;
  s.x_ = std::move(x_grid);
  s.f_ = std::move(f_grid);
  s.f_ref_ = s.f_[j_ref];
  s.g_.resize(nx, nf);

  if (sys.doppler_enabled) {
    // Freeze the velocity node count once so the tabulation is deterministic
    // and schedule independent.
    AtomicSystem probe = sys;
    probe.delta_p = 0.5 * sys.gamma2;
    s.doppler_nodes_ =
        doppler_resolved_nodes(probe, sys.rabi_from_field(s.x_[nx / 2]), 129, 1e-6);
  }

  parallel_for(
      static_cast<std::size_t>(nx),
      [&](std::size_t i) {
        const double omega_rf = sys.rabi_from_field(s.x_[static_cast<Eigen::Index>(i)]);
        AtomicSystem pt = sys;
        std::optional<ProbeScanSolver> scan;
        if (!sys.doppler_enabled) scan.emplace(sys, omega_rf, sys.delta_c);
        for (Eigen::Index j = 0; j < nf; ++j) {
          const double dp = constants::two_pi * (s.f_[j] - sys.f_p_resonance);
          double im;
          if (sys.doppler_enabled) {
            pt.delta_p = dp;
            im = doppler_average_fixed(pt, omega_rf, s.doppler_nodes_).imag();
          } else {
            im = scan->rho21(dp).imag();
          }
          s.g_(static_cast<Eigen::Index>(i), j) = transmittance(im, sys);
        }
      },
      threads);

  s.t_ref_ = s.g_(0, j_ref);
  s.g_ /= s.t_ref_;
  s.finish_setup();
  return s;
}

void ResponseSurface::finish_setup() {
  const Eigen::Index nx = x_.size(), nf = f_.size();
  rows_.clear();
  rows_.reserve(nx);
  for (Eigen::Index i = 0; i < nx; ++i)
    rows_.emplace_back(f_, g_.row(i).transpose());

  // Richardson-style coarseness check: interpolate from every other node and
  // compare at the skipped nodes. One halving of the O(h^4) scheme gains a
  // factor 16, so the fine-grid error is bounded by the observed error / 16.
  const double range = g_.maxCoeff() - g_.minCoeff();
  if (nx < 9 || nf < 9 || range <= 0.0) return;
  double worst = 0.0;
  std::string worst_where;
  auto check_axis = [&](const Eigen::VectorXd& grid, auto value_at, Eigen::Index count,
                        const char* axis) {
    const Eigen::Index half = (grid.size() + 1) / 2;
    Eigen::VectorXd cx(half), cy(half);
    for (Eigen::Index line = 0; line < count; ++line) {
      for (Eigen::Index k = 0; k < half; ++k) {
        cx[k] = grid[2 * k];
        cy[k] = value_at(line, 2 * k);
      }
      CubicInterpolant<double> coarse(cx, cy);
      for (Eigen::Index k = 1; k + 1 < grid.size(); k += 2) {
        const double err = std::abs(coarse(grid[k]) - value_at(line, k));
        if (err > worst) {
          worst = err;
          worst_where = std::string(axis) + " axis, line " + std::to_string(line) +
                        ", node " + format_double(grid[k]);
        }
      }
    }
  };
  const Eigen::Index row_stride = std::max<Eigen::Index>(1, nx / 16);
  Eigen::Index probe_rows = 0;
  for (Eigen::Index i = 0; i < nx; i += row_stride) ++probe_rows;
  check_axis(f_, [&](Eigen::Index line, Eigen::Index k) { return g_(line * row_stride, k); },
             probe_rows, "f");
  const Eigen::Index col_stride = std::max<Eigen::Index>(1, nf / 16);
  Eigen::Index probe_cols = 0;
  for (Eigen::Index j = 0; j < nf; j += col_stride) ++probe_cols;
  check_axis(x_, [&](Eigen::Index line, Eigen::Index k) { return g_(k, line * col_stride); },
             probe_cols, "x");

  if (worst / 16.0 > 1e-4 * range)
    throw GridTooCoarse("ResponseSurface: interpolation error estimate " +
                        format_double(worst / 16.0) + " exceeds 1e-4 of range " +
                        format_double(range) + " (" + worst_where + ")");
}

double ResponseSurface::value(double x, double f) const {
  const Eigen::Index nx = x_.size();
  const double slack = 1e-9 * (x_[nx - 1] - x_[0]);
  const Eigen::Index i = locate(x_, x, slack);
  // window covering the canonical tangent stencils of nodes i and i+1
  // (stencils clamp to the grid ends, so the window must too)
  Eigen::Index wlo = std::max<Eigen::Index>(0, i - 2);
  Eigen::Index whi = std::min<Eigen::Index>(nx - 1, i + 3);
  if (nx >= 5) {
    wlo = std::min<Eigen::Index>(wlo, std::clamp<Eigen::Index>(i - 2, 0, nx - 5));
    whi = std::max<Eigen::Index>(whi,
                                 std::clamp<Eigen::Index>(i - 1, 0, nx - 5) + 4);
  } else {
    wlo = 0;
    whi = nx - 1;
  }
  double xs[6], ys[6];
  for (Eigen::Index k = wlo; k <= whi; ++k) {
    xs[k - wlo] = x_[k];
    ys[k - wlo] = rows_[k](f);
  }
  // tangents follow the full-grid stencil rule, shifted into the window
  auto tangent = [&](Eigen::Index node) {
    const int n = static_cast<int>(nx);
    const int w = n < 5 ? n : 5;
    const int a = n < 5 ? 0 : std::clamp(static_cast<int>(node) - 2, 0, n - 5);
    return lagrange_derivative(xs, ys, static_cast<int>(a - wlo), w,
                               static_cast<int>(node - a));
  };
  const Eigen::Index li = i - wlo;
  return hermite_eval(xs[li], xs[li + 1], ys[li], ys[li + 1], tangent(i), tangent(i + 1),
                      std::clamp(x, x_[0], x_[nx - 1]));
}

double ResponseSurface::ddx(double x, double f) const {
  const Eigen::Index i = locate(x_, x, 1e-9 * (x_hi() - x_lo()));
  const double h = (x_[i + 1] - x_[i]) / 64.0;
  return fd_derivative([&](double t) { return value(t, f); }, x, x_lo(), x_hi(), h);
}

double ResponseSurface::ddf(double x, double f) const {
  const Eigen::Index j = locate(f_, f, 1e-9 * (f_hi() - f_lo()));
  const double h = (f_[j + 1] - f_[j]) / 64.0;
  return fd_derivative([&](double t) { return value(x, t); }, f, f_lo(), f_hi(), h);
}

void ResponseSurface::save_csv(const std::string& csv_path, const std::string& meta_path) const {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path);
  csv << "x,f_p,G\n";
  for (Eigen::Index i = 0; i < x_.size(); ++i)
    for (Eigen::Index j = 0; j < f_.size(); ++j)
      csv << format_double(x_[i]) << ',' << format_double(f_[j]) << ','
          << format_double(g_(i, j)) << '\n';
  if (!csv.flush()) throw IoError("failed writing " + csv_path);

  KeyValueFile meta;
  save_system(sys_, meta);
  meta.set("surface", "x_count", std::to_string(x_.size()));
  meta.set("surface", "f_count", std::to_string(f_.size()));
  meta.set("surface", "f_reference_hz", format_double(f_ref_));
  meta.set("surface", "reference_raw_transmittance", format_double(t_ref_));
  meta.set("surface", "doppler_nodes", std::to_string(doppler_nodes_));
  std::string xg, fg;
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    if (i) xg += ' ';
    xg += format_double(x_[i]);
  }
  for (Eigen::Index j = 0; j < f_.size(); ++j) {
    if (j) fg += ' ';
    fg += format_double(f_[j]);
  }
  meta.set("surface", "x_grid", xg);
  meta.set("surface", "f_grid", fg);
  std::ofstream mf(meta_path);
  if (!mf) throw IoError("cannot write " + meta_path);
  mf << meta.echo();
  if (!mf.flush()) throw IoError("failed writing " + meta_path);
}

ResponseSurface ResponseSurface::load_csv(const std::string& csv_path,
                                          const std::string& meta_path) {
  const KeyValueFile meta = KeyValueFile::parse_file(meta_path);
  ResponseSurface s;
  s.sys_ = load_system(meta);
  const Eigen::Index nx = meta.get_int("surface", "x_count", 0);
  const Eigen::Index nf = meta.get_int("surface", "f_count", 0);
  if (nx < 4 || nf < 4) throw IoError("surface metadata missing grid counts: " + meta_path);
  s.f_ref_ = meta.get_double("surface", "f_reference_hz", 0.0);
  s.t_ref_ = meta.get_double("surface", "reference_raw_transmittance", 1.0);
  s.doppler_nodes_ = static_cast<int>(meta.get_int("surface", "doppler_nodes", 0));

  auto parse_grid = [&](const std::string& key, Eigen::Index n) {
    Eigen::VectorXd g(n);
    std::istringstream ss(meta.get("surface", key, ""));
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(ss >> g[i])) throw IoError("surface metadata grid too short: " + key);
    return g;
  };
  s.x_ = parse_grid("x_grid", nx);
  s.f_ = parse_grid("f_grid", nf);
  s.g_.resize(nx, nf);

  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(csv, line) || line != "x,f_p,G")
    throw IoError("surface csv missing 'x,f_p,G' header: " + csv_path);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < nf; ++j) {
      if (!std::getline(csv, line)) throw IoError("surface csv truncated: " + csv_path);
      const char* p = line.c_str();
      char* end = nullptr;
      std::strtod(p, &end);  // x column; grid authoritative
      if (*end != ',') throw IoError("surface csv malformed row: " + line);
      p = end + 1;
      std::strtod(p, &end);
      if (*end != ',') throw IoError("surface csv malformed row: " + line);
      p = end + 1;
      s.g_(i, j) = std::strtod(p, &end);
    }
  s.rows_.clear();
  s.rows_.reserve(nx);
  for (Eigen::Index i = 0; i < nx; ++i) s.rows_.emplace_back(s.f_, s.g_.row(i).transpose());
  return s;
}

}  // namespace rydsim

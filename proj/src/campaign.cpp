// SPDX-License-Identifier: Apache-2.0
#include "rydsim/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "rydsim/constants.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/parallel.hpp"

namespace rydsim {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kMhz = 1.0e6;

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t hash_doubles(std::initializer_list<double> values, std::uint64_t h) {
  for (double v : values) h = fnv1a64(&v, sizeof(v), h);
  return h;
}

std::uint64_t hash_vector(const Eigen::VectorXd& v, std::uint64_t h) {
  return fnv1a64(v.data(), sizeof(double) * v.size(), h);
}

// Fixed-shape pairwise reduction: the result does not depend on which thread
// filled which slot, so campaigns stay byte-deterministic under parallelism.
double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  if (n == 2) return v[0] + v[1];
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double rabi_mhz2(double field_variance, double mu_rf) {
  const double w = constants::two_pi * kMhz;
  return rabi_variance(field_variance, mu_rf) / (w * w);
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

struct SignalContext {
  double x_true = 0.0;
  std::pair<double, double> idd_branch{0.0, 0.0};
  bool splitting_ok = false;
  std::string splitting_error;
  std::optional<PeakLineshape> gen_left, gen_right;
  SamplingPlan plan_left, plan_right;
  double truth_field = 0.0;
};

bool is_splitting_scheme(const std::string& s) { return s == "ue" || s == "me" || s == "5pf"; }

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KeyValueFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueFile& kv) {
  ExperimentConfig c;
  c.system = load_system(kv);
  c.x_rabi_max_mhz = kv.get_double("surface", "x_rabi_max_mhz", c.x_rabi_max_mhz);
  c.x_step_mhz = kv.get_double("surface", "x_step_mhz", c.x_step_mhz);
  c.f_span_mhz = kv.get_double("surface", "f_span_mhz", c.f_span_mhz);
  c.f_step_mhz = kv.get_double("surface", "f_step_mhz", c.f_step_mhz);

  c.schemes = kv.get_names("campaign", "schemes", c.schemes);
  c.signals_mhz = kv.get_list("campaign", "signals_mhz", c.signals_mhz);
  c.sigmas = kv.get_list("campaign", "sigmas", c.sigmas);
  c.trials = kv.get_int("campaign", "trials", c.trials);
  c.master_seed = static_cast<std::uint64_t>(
      kv.get_int("campaign", "seed", static_cast<long long>(c.master_seed)));
  c.n_total = static_cast<int>(kv.get_int("campaign", "n_total", c.n_total));
  c.n_sf1 = static_cast<int>(kv.get_int("campaign", "n_sf1", c.n_sf1));
  c.n_sf2 = static_cast<int>(kv.get_int("campaign", "n_sf2", c.n_sf2));
  c.n_sd1 = static_cast<int>(kv.get_int("campaign", "n_sd1", c.n_sd1));
  c.n_sd2 = static_cast<int>(kv.get_int("campaign", "n_sd2", c.n_sd2));
  c.sampling = kv.get("campaign", "sampling", c.sampling);
  c.uniform_span_mhz = kv.get_double("campaign", "uniform_span_mhz", c.uniform_span_mhz);
  c.intensity_delta_p_mhz =
      kv.get_double("campaign", "intensity_delta_p_mhz", c.intensity_delta_p_mhz);
  c.isd_phase = kv.get_double("campaign", "isd_phase", c.isd_phase);

  c.shift.epsilon = kv.get_double("solver", "epsilon_hz", c.shift.epsilon);
  c.shift.max_iterations =
      static_cast<int>(kv.get_int("solver", "max_iterations", c.shift.max_iterations));
  c.shift.joint_tolerance = kv.get_double("solver", "joint_tolerance", c.shift.joint_tolerance);
  c.shift.max_rounds = static_cast<int>(kv.get_int("solver", "max_rounds", c.shift.max_rounds));
  c.validate();
  return c;
}

KeyValueFile ExperimentConfig::to_kv() const {
  KeyValueFile kv;
  save_system(system, kv);
  kv.set("surface", "x_rabi_max_mhz", format_double(x_rabi_max_mhz));
  kv.set("surface", "x_step_mhz", format_double(x_step_mhz));
  kv.set("surface", "f_span_mhz", format_double(f_span_mhz));
  kv.set("surface", "f_step_mhz", format_double(f_step_mhz));
  std::string sch;
  for (const auto& s : schemes) {
    if (!sch.empty()) sch += ",";
    sch += s;
  }
  kv.set("campaign", "schemes", sch);
  std::string sig, sg;
  for (double v : signals_mhz) {
    if (!sig.empty()) sig += ",";
    sig += format_double(v);
  }
  for (double v : sigmas) {
    if (!sg.empty()) sg += ",";
    sg += format_double(v);
  }
  kv.set("campaign", "signals_mhz", sig);
  kv.set("campaign", "sigmas", sg);
  kv.set("campaign", "trials", std::to_string(trials));
  kv.set("campaign", "seed", std::to_string(master_seed));
  kv.set("campaign", "n_total", std::to_string(n_total));
  kv.set("campaign", "n_sf1", std::to_string(n_sf1));
  kv.set("campaign", "n_sf2", std::to_string(n_sf2));
  kv.set("campaign", "n_sd1", std::to_string(n_sd1));
  kv.set("campaign", "n_sd2", std::to_string(n_sd2));
  kv.set("campaign", "sampling", sampling);
  kv.set("campaign", "uniform_span_mhz", format_double(uniform_span_mhz));
  kv.set("campaign", "intensity_delta_p_mhz", format_double(intensity_delta_p_mhz));
  kv.set("campaign", "isd_phase", format_double(isd_phase));
  kv.set("solver", "epsilon_hz", format_double(shift.epsilon));
  kv.set("solver", "max_iterations", std::to_string(shift.max_iterations));
  kv.set("solver", "joint_tolerance", format_double(shift.joint_tolerance));
  kv.set("solver", "max_rounds", std::to_string(shift.max_rounds));
  return kv;
}

void ExperimentConfig::validate() const {
  system.validate();
  shift.validate();
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  if (signals_mhz.empty() || sigmas.empty())
    throw InvalidArgument("config: signal and noise grids must be non-empty");
  if (sampling != "uniform" && sampling != "maxslope")
    throw InvalidArgument("config: sampling must be uniform or maxslope");
  bool splitting = false, isd = false;
  for (const auto& s : schemes) {
    if (s == "ue" || s == "me" || s == "5pf") splitting = true;
    else if (s == "isd") isd = true;
    else if (s != "idd")
      throw InvalidArgument("config: unknown scheme: " + s);
  }
  if (splitting && n_total != 2 * n_sf1 * n_sf2)
    throw InvalidArgument("config: splitting budget requires n_total = 2*n_sf1*n_sf2");
  if (isd && n_total != n_sd1 * n_sd2)
    throw InvalidArgument("config: superheterodyne budget requires n_total = n_sd1*n_sd2");
  if (isd && n_sd2 < 4) throw InvalidArgument("config: n_sd2 must be >= 4");
}

Eigen::VectorXd ExperimentConfig::surface_x_grid() const {
  return ResponseSurface::graded_x_grid(system, x_rabi_max_mhz, x_step_mhz);
}

Eigen::VectorXd ExperimentConfig::surface_f_grid() const {
  const int half = static_cast<int>(std::lround(f_span_mhz / f_step_mhz));
  Eigen::VectorXd f(2 * half + 1);
  for (int i = 0; i <= 2 * half; ++i)
    f[i] = system.f_p_resonance + (-f_span_mhz + f_step_mhz * i) * kMhz;
  return f;
}

SamplingPlan make_plan(SamplingPlan::Strategy strategy, const PeakLineshape& shape, int n_sf1,
                       double uniform_span, double f_resonance,
                       const Eigen::VectorXd& explicit_freqs) {
  if (n_sf1 < 1) throw InvalidArgument("make_plan: n_sf1 must be >= 1");
  SamplingPlan plan;
  plan.strategy = strategy;
  plan.side = shape.side();
  const bool right = shape.side() == PeakLineshape::Side::Right;
  const double center = shape.center_abs();

  if (strategy == SamplingPlan::Strategy::Explicit) {
    plan.frequencies = explicit_freqs;
  } else if (strategy == SamplingPlan::Strategy::MaxSlope) {
    // Mirrored pairs clustered across the two maximum-|slope| flanks
    // (+-10% spread). The mirror symmetry cancels the shift/lineshape
    // cross-information, and the spread keeps the lineshape parameters
    // identifiable for the multivariate estimator.
    const auto [u_below, u_above] = shape.max_slope_offsets();
    plan.frequencies.resize(n_sf1);
    const int pairs = n_sf1 / 2;
    // largest pair scale that keeps every point on the correct side of the
    // resonance and inside the lineshape window; both flanks share it so the
    // pairs stay mirrored
    double cap = 1.4;
    if (right) cap = std::min(cap, 0.98 * (center - f_resonance) / std::max(-u_below, 1e-300));
    else cap = std::min(cap, 0.98 * (f_resonance - center) / std::max(u_above, 1e-300));
    cap = std::min(cap, 0.98 * shape.u_hi() / std::max(u_above, 1e-300));
    cap = std::min(cap, 0.98 * shape.u_lo() / std::min(u_below, -1e-300));
    const double s_max = std::max(cap, 1e-3);
    const double s_min = s_max * (3.0 / 7.0);
    int idx = 0;
    for (int k = 0; k < pairs; ++k) {
      const double scale =
          pairs > 1 ? s_min + (s_max - s_min) * k / (pairs - 1.0) : s_max;
      plan.frequencies[idx++] = center + u_below * scale;
      plan.frequencies[idx++] = center + u_above * scale;
    }
    if (idx < n_sf1) plan.frequencies[idx] = center + u_below * s_max;  // odd count
  } else {
    if (!(uniform_span > 0)) throw InvalidArgument("make_plan: uniform span must be > 0");
    const double guard = 1e-3 * uniform_span;
    double a_lo = center + shape.u_lo();
    double a_hi = center + shape.u_hi();
    if (right) a_lo = std::max(a_lo, f_resonance + guard);
    else a_hi = std::min(a_hi, f_resonance - guard);
    double lo = center - uniform_span / 2.0;
    double hi = center + uniform_span / 2.0;
    if (lo < a_lo) {
      hi = std::min(a_hi, a_lo + uniform_span);
      lo = a_lo;
    } else if (hi > a_hi) {
      lo = std::max(a_lo, a_hi - uniform_span);
      hi = a_hi;
    }
    if (!(hi > lo)) throw InvalidArgument("make_plan: no room for the uniform window");
    plan.frequencies.resize(n_sf1);
    for (int k = 0; k < n_sf1; ++k)
      plan.frequencies[k] = n_sf1 == 1 ? (lo + hi) / 2.0 : lo + (hi - lo) * k / (n_sf1 - 1);
  }

  std::sort(plan.frequencies.data(), plan.frequencies.data() + plan.frequencies.size());
  for (Eigen::Index i = 0; i < plan.frequencies.size(); ++i) {
    const double f = plan.frequencies[i];
    if ((right && !(f > f_resonance)) || (!right && !(f < f_resonance)))
      throw InvalidArgument("make_plan: plan frequency on the wrong side of the resonance");
  }
  return plan;
}

std::string CampaignResult::csv_header() {
  return "scheme,sampling,signal_mhz,sigma0,n_total,trials,failures,mse,crlb,"
         "mse_normalized,crlb_normalized,mse_rabi_mhz2,crlb_rabi_mhz2,"
         "consistency_hash,stream_base,valid,note";
}

std::string CampaignResult::to_csv() const {
  std::string out = csv_header() + "\n";
  for (const auto& c : cells) {
    out += c.scheme + "," + c.sampling + "," + format_double(c.signal_mhz) + "," +
           format_double(c.sigma0) + "," + std::to_string(c.n_total) + "," +
           std::to_string(c.trials) + "," + std::to_string(c.failures) + "," +
           format_double(c.mse) + "," + format_double(c.crlb) + "," +
           format_double(c.mse_normalized) + "," + format_double(c.crlb_normalized) + "," +
           format_double(c.mse_rabi_mhz2) + "," + format_double(c.crlb_rabi_mhz2) + "," +
           std::to_string(c.consistency_hash) + "," + std::to_string(c.stream_base) + "," +
           (c.valid ? "1" : "0") + "," + sanitize(c.note) + "\n";
  }
  return out;
}

CampaignResult run_campaign(const ExperimentConfig& config, unsigned threads) {
  return run_campaign(config, ResponseSurface::build(config.system, config.surface_x_grid(),
                                                     config.surface_f_grid(), threads),
                      threads);
}

CampaignResult run_campaign(const ExperimentConfig& config, const ResponseSurface& surface,
                            unsigned threads) {
  config.validate();
  const AtomicSystem& sys = config.system;
  const double kap = kappa(sys);
  const double f_res = surface.f_reference();

  const MarginalCurve f_i =
      intensity_marginal(surface, config.intensity_delta_p_mhz * kMhz);
  const SlopePoint lo_point = max_slope_point(f_i, f_i.lo(), f_i.hi());
  const double x_lo = lo_point.location;
  const double slope_lo = f_i.derivative(x_lo);
  const double max_slope = std::abs(lo_point.slope);

  const SamplingPlan::Strategy strategy = config.sampling == "maxslope"
                                              ? SamplingPlan::Strategy::MaxSlope
                                              : SamplingPlan::Strategy::Uniform;
  const bool any_splitting =
      std::any_of(config.schemes.begin(), config.schemes.end(), is_splitting_scheme);

  // per-signal ground truth, generating lineshapes and plans
  std::vector<SignalContext> contexts(config.signals_mhz.size());
  for (std::size_t si = 0; si < config.signals_mhz.size(); ++si) {
    SignalContext& ctx = contexts[si];
    ctx.x_true = sys.field_from_rabi(constants::two_pi * kMhz * config.signals_mhz[si]);
    ctx.idd_branch = monotone_branch_around(f_i, ctx.x_true);
    if (!any_splitting) continue;
    try {
      const MarginalCurve f_s = frequency_marginal(surface, ctx.x_true);
      auto [tab_left, tab_right] = split_lineshapes(f_s, f_res);
      ctx.gen_left = fit_gaussian_like(tab_left);
      ctx.gen_right = fit_gaussian_like(tab_right);
      ctx.plan_left = make_plan(strategy, *ctx.gen_left, config.n_sf1,
                                config.uniform_span_mhz * kMhz, f_res);
      ctx.plan_right = make_plan(strategy, *ctx.gen_right, config.n_sf1,
                                 config.uniform_span_mhz * kMhz, f_res);
      ctx.truth_field = kap * (ctx.gen_right->center_abs() - ctx.gen_left->center_abs());
      ctx.splitting_ok = true;
    } catch (const Error& e) {
      ctx.splitting_error = e.what();
    }
  }

  CampaignResult result;
  result.master_seed = config.master_seed;
  result.config_echo = config.to_kv().echo();

  const GaussianLikePeakModel gauss_model;
  for (const std::string& scheme : config.schemes) {
    for (std::size_t si = 0; si < config.signals_mhz.size(); ++si) {
      const SignalContext& ctx = contexts[si];
      for (std::size_t gi = 0; gi < config.sigmas.size(); ++gi) {
        const double sigma = config.sigmas[gi];
        const std::uint64_t pair_index = si * config.sigmas.size() + gi;
        const std::uint64_t stream_base = (pair_index + 1) << 36;

        CellResult cell;
        cell.scheme = scheme;
        cell.sampling = is_splitting_scheme(scheme) ? config.sampling : "-";
        cell.signal_mhz = config.signals_mhz[si];
        cell.sigma0 = sigma;
        cell.n_total = config.n_total;
        cell.trials = config.trials;
        cell.stream_base = stream_base;

        if (is_splitting_scheme(scheme) && !ctx.splitting_ok) {
          cell.mse = cell.crlb = cell.mse_normalized = cell.crlb_normalized = kNan;
          cell.mse_rabi_mhz2 = cell.crlb_rabi_mhz2 = kNan;
          cell.failures = config.trials;
          cell.valid = false;
          cell.note = ctx.splitting_error;
          result.cells.push_back(cell);
          continue;
        }

        const NoiseSpec noise{sigma, config.master_seed};
        const long long trials = config.trials;
        std::vector<double> sq(trials, kNan);

        std::uint64_t gen_hash = 0;
        if (is_splitting_scheme(scheme)) {
          gen_hash = hash_vector(ctx.plan_right.frequencies, 0xCBF29CE484222325ULL);
          gen_hash = hash_vector(ctx.plan_left.frequencies, gen_hash);
          gen_hash = hash_doubles({ctx.gen_right->params()[0], ctx.gen_right->params()[1],
                                   ctx.gen_right->params()[2], ctx.gen_right->center_abs(),
                                   ctx.gen_left->params()[0], ctx.gen_left->params()[1],
                                   ctx.gen_left->params()[2], ctx.gen_left->center_abs(),
                                   sigma, double(config.n_sf2), ctx.truth_field},
                                  gen_hash);
        } else {
          gen_hash = hash_doubles({ctx.x_true, double(config.n_total), sigma, x_lo, slope_lo},
                                  0xCBF29CE484222325ULL);
        }

        parallel_for(
            static_cast<std::size_t>(trials),
            [&](std::size_t t) {
              DrawCounter counter;
              try {
                double err = kNan;
                bool usable = false;
                if (scheme == "idd") {
                  const Eigen::VectorXd z = sample_idd(f_i, ctx.x_true, config.n_total, noise,
                                                       stream_base + 8 * t + 2, &counter);
                  const EstimateReport rep =
                      estimate_idd(z, f_i, ctx.idd_branch.first, ctx.idd_branch.second);
                  err = rep.estimate - ctx.x_true;
                  usable = rep.converged;
                  if (counter.count != static_cast<std::uint64_t>(config.n_total))
                    throw std::logic_error("idd budget mismatch");
                } else if (scheme == "isd") {
                  const Eigen::VectorXd z =
                      sample_isd(f_i, x_lo, ctx.x_true, config.isd_phase, config.n_sd1,
                                 config.n_sd2, noise, stream_base + 8 * t + 2, &counter);
                  const EstimateReport rep = estimate_isd(z, slope_lo, config.n_sd1, config.n_sd2);
                  err = rep.estimate - ctx.x_true;
                  usable = rep.converged;
                  if (counter.count != static_cast<std::uint64_t>(config.n_total))
                    throw std::logic_error("isd budget mismatch");
                } else {
                  const ScanData right = sample_scan(*ctx.gen_right, ctx.plan_right,
                                                     config.n_sf2, noise, stream_base + 8 * t,
                                                     &counter);
                  const ScanData left = sample_scan(*ctx.gen_left, ctx.plan_left, config.n_sf2,
                                                    noise, stream_base + 8 * t + 1, &counter);
                  if (counter.count != static_cast<std::uint64_t>(config.n_total))
                    throw std::logic_error("splitting budget mismatch");
                  if (scheme == "5pf") {
                    const EstimateReport r = polyfit_peak(right);
                    const EstimateReport l = polyfit_peak(left);
                    err = kap * (r.estimate - l.estimate) - ctx.truth_field;
                    usable = r.converged && l.converged;
                  } else {
                    SplittingContext sctx;
                    sctx.left = &*ctx.gen_left;
                    sctx.right = &*ctx.gen_right;
                    sctx.config = config.shift;
                    sctx.kappa = kap;
                    sctx.mu_rf = sys.mu_rf;
                    const EstimateReport rep = estimate_splitting(
                        left, right,
                        scheme == "ue" ? SplittingMode::Univariate : SplittingMode::Multivariate,
                        sctx);
                    err = rep.estimate - ctx.truth_field;
                    usable = rep.converged;
                  }
                }
                if (usable) sq[t] = err * err;
              } catch (const Error&) {
                // estimator failure: excluded from the MSE, counted below
              }
            },
            threads);

        long long successes = 0;
        std::vector<double> filled(sq.size(), 0.0);
        for (std::size_t t = 0; t < sq.size(); ++t)
          if (std::isfinite(sq[t])) {
            filled[t] = sq[t];
            ++successes;
          }
        cell.failures = trials - successes;
        cell.mse = successes > 0 ? pairwise_sum(filled.data(), filled.size()) / successes : kNan;

        // CRLB from the same surface/plan objects the generator used
        std::uint64_t crlb_hash = 0;
        if (scheme == "idd") {
          cell.crlb = crlb_idd(f_i, ctx.x_true, config.n_total, sigma).bound;
          crlb_hash = hash_doubles({ctx.x_true, double(config.n_total), sigma, x_lo, slope_lo},
                                   0xCBF29CE484222325ULL);
        } else if (scheme == "isd") {
          cell.crlb = crlb_isd(f_i, x_lo, config.n_total, sigma).bound;
          crlb_hash = hash_doubles({ctx.x_true, double(config.n_total), sigma, x_lo, slope_lo},
                                   0xCBF29CE484222325ULL);
        } else {
          crlb_hash = hash_vector(ctx.plan_right.frequencies, 0xCBF29CE484222325ULL);
          crlb_hash = hash_vector(ctx.plan_left.frequencies, crlb_hash);
          crlb_hash = hash_doubles({ctx.gen_right->params()[0], ctx.gen_right->params()[1],
                                    ctx.gen_right->params()[2], ctx.gen_right->center_abs(),
                                    ctx.gen_left->params()[0], ctx.gen_left->params()[1],
                                    ctx.gen_left->params()[2], ctx.gen_left->center_abs(),
                                    sigma, double(config.n_sf2), ctx.truth_field},
                                   crlb_hash);
          if (scheme == "ue" || scheme == "5pf") {
            cell.crlb = scheme == "ue"
                            ? crlb_univariate(*ctx.gen_left, *ctx.gen_right,
                                              ctx.plan_left.frequencies,
                                              ctx.plan_right.frequencies, config.n_sf2, sigma,
                                              kap)
                                  .bound
                            : kNan;
          } else {
            Eigen::VectorXd theta_r(4), theta_l(4);
            theta_r << ctx.gen_right->center_abs(), ctx.gen_right->params();
            theta_l << ctx.gen_left->center_abs(), ctx.gen_left->params();
            const FisherMatrix jr = fisher_multivariate(
                gauss_model, theta_r, ctx.plan_right.frequencies, config.n_sf2, sigma);
            const FisherMatrix jl = fisher_multivariate(
                gauss_model, theta_l, ctx.plan_left.frequencies, config.n_sf2, sigma);
            cell.crlb = crlb_multivariate(jr, jl, kap).bound;
          }
        }
        if (crlb_hash != gen_hash)
          throw std::logic_error("campaign: CRLB inputs diverged from generation inputs");
        cell.consistency_hash = gen_hash;

        NormalizationReference ref;
        ref.sigma0 = sigma;
        ref.n_total = config.n_total;
        ref.max_intensity_slope = max_slope;
        cell.mse_normalized = normalize_value(cell.mse, ref);
        cell.crlb_normalized = normalize_value(cell.crlb, ref);
        cell.mse_rabi_mhz2 = rabi_mhz2(cell.mse, sys.mu_rf);
        cell.crlb_rabi_mhz2 = rabi_mhz2(cell.crlb, sys.mu_rf);
        cell.valid = successes > 0 && cell.failures * 20 <= trials;  // <= 5% failures
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

std::string sweep_normalized_csv(const ExperimentConfig& config, const ResponseSurface& surface,
                                 unsigned threads) {
  ExperimentConfig c = config;
  c.sigmas = {config.sigmas.front()};
  const CampaignResult res = run_campaign(c, surface, threads);

  std::string out = "omega_mhz";
  for (const auto& s : c.schemes) out += ",crlb_norm_" + s + ",mse_norm_" + s;
  out += "\n";
  for (double signal : c.signals_mhz) {
    out += format_double(signal);
    for (const auto& s : c.schemes) {
      double crlb = kNan, mse = kNan;
      for (const auto& cell : res.cells)
        if (cell.scheme == s && cell.signal_mhz == signal) {
          crlb = cell.crlb_normalized;
          mse = cell.mse_normalized;
        }
      out += "," + format_double(crlb) + "," + format_double(mse);
    }
    out += "\n";
  }
  return out;
}

std::string crlb_sweep_csv(const ExperimentConfig& config, const ResponseSurface& surface,
                           bool normalized) {
  const AtomicSystem& sys = config.system;
  const double kap = kappa(sys);
  const double f_res = surface.f_reference();
  const double sigma = config.sigmas.front();
  const MarginalCurve f_i = intensity_marginal(surface, config.intensity_delta_p_mhz * kMhz);
  const SlopePoint lo_point = max_slope_point(f_i, f_i.lo(), f_i.hi());
  const double r0 = ratio_r0(surface, kap);
  const SamplingPlan::Strategy strategy = config.sampling == "maxslope"
                                              ? SamplingPlan::Strategy::MaxSlope
                                              : SamplingPlan::Strategy::Uniform;
  NormalizationReference ref;
  ref.sigma0 = sigma;
  ref.n_total = config.n_total;
  ref.max_intensity_slope = std::abs(lo_point.slope);
  const double scale = normalized ? 1.0 / ref.value() : 1.0;
  const GaussianLikePeakModel gauss_model;

  std::string out;
  out += std::string("# normalized=") + (normalized ? "true" : "false") + "\n";
  out += "# sigma0=" + format_double(sigma) + " n_total=" + std::to_string(config.n_total) +
         " sampling=" + config.sampling + "\n";
  out += "x,crlb_idd,crlb_isd,crlb_ue,crlb_me,r0,r_x\n";
  for (double signal : config.signals_mhz) {
    const double x = sys.field_from_rabi(constants::two_pi * kMhz * signal);
    const double idd = crlb_idd(f_i, x, config.n_total, sigma).bound * scale;
    const double isd = crlb_isd(f_i, lo_point.location, config.n_total, sigma).bound * scale;
    double ue = kNan, me = kNan;
    try {
      const MarginalCurve f_s = frequency_marginal(surface, x);
      auto [tab_l, tab_r] = split_lineshapes(f_s, f_res);
      const PeakLineshape gl = fit_gaussian_like(tab_l);
      const PeakLineshape gr = fit_gaussian_like(tab_r);
      const SamplingPlan pl =
          make_plan(strategy, gl, config.n_sf1, config.uniform_span_mhz * kMhz, f_res);
      const SamplingPlan pr =
          make_plan(strategy, gr, config.n_sf1, config.uniform_span_mhz * kMhz, f_res);
      ue = crlb_univariate(gl, gr, pl.frequencies, pr.frequencies, config.n_sf2, sigma, kap)
               .bound *
           scale;
      Eigen::VectorXd theta_r(4), theta_l(4);
      theta_r << gr.center_abs(), gr.params();
      theta_l << gl.center_abs(), gl.params();
      me = crlb_multivariate(
               fisher_multivariate(gauss_model, theta_r, pr.frequencies, config.n_sf2, sigma),
               fisher_multivariate(gauss_model, theta_l, pl.frequencies, config.n_sf2, sigma),
               kap)
               .bound *
           scale;
    } catch (const Error&) {
      // unresolved splitting at this signal: leave nan columns
    }
    const double rx = ratio_r(surface, x, kap);
    out += format_double(x) + "," + format_double(idd) + "," + format_double(isd) + "," +
           format_double(ue) + "," + format_double(me) + "," + format_double(r0) + "," +
           format_double(rx) + "\n";
  }
  return out;
}

void export_campaign(const CampaignResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);

  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out.flush()) throw IoError("failed writing " + path);
  };
  write("campaign.csv", result.to_csv());
  write("config.echo", result.config_echo);
  std::string seeds = "master_seed = " + std::to_string(result.master_seed) + "\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    seeds += "cell " + std::to_string(i) + " scheme=" + c.scheme +
             " signal_mhz=" + format_double(c.signal_mhz) + " sigma0=" + format_double(c.sigma0) +
             " stream_base=" + std::to_string(c.stream_base) + "\n";
  }
  write("seeds.txt", seeds);
}

CampaignResult import_campaign(const std::string& dir) {
  CampaignResult result;
  {
    std::ifstream in(dir + "/config.echo", std::ios::binary);
    if (!in) throw IoError("cannot open " + dir + "/config.echo");
    std::ostringstream ss;
    ss << in.rdbuf();
    result.config_echo = ss.str();
  }
  {
    std::ifstream in(dir + "/seeds.txt");
    if (!in) throw IoError("cannot open " + dir + "/seeds.txt");
    std::string line;
    while (std::getline(in, line))
      if (line.rfind("master_seed = ", 0) == 0)
        result.master_seed = std::strtoull(line.c_str() + 14, nullptr, 10);
  }
  std::ifstream in(dir + "/campaign.csv");
  if (!in) throw IoError("cannot open " + dir + "/campaign.csv");
  std::string line;
  if (!std::getline(in, line) || line != CampaignResult::csv_header())
    throw IoError("campaign.csv header mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> col;
    std::size_t pos = 0;
    for (int k = 0; k < 16; ++k) {
      const std::size_t next = line.find(',', pos);
      if (next == std::string::npos) throw IoError("campaign.csv malformed row: " + line);
      col.push_back(line.substr(pos, next - pos));
      pos = next + 1;
    }
    col.push_back(line.substr(pos));  // note (commas sanitized on export)
    CellResult c;
    c.scheme = col[0];
    c.sampling = col[1];
    c.signal_mhz = std::strtod(col[2].c_str(), nullptr);
    c.sigma0 = std::strtod(col[3].c_str(), nullptr);
    c.n_total = std::atoi(col[4].c_str());
    c.trials = std::atoll(col[5].c_str());
    c.failures = std::atoll(col[6].c_str());
    c.mse = std::strtod(col[7].c_str(), nullptr);
    c.crlb = std::strtod(col[8].c_str(), nullptr);
    c.mse_normalized = std::strtod(col[9].c_str(), nullptr);
    c.crlb_normalized = std::strtod(col[10].c_str(), nullptr);
    c.mse_rabi_mhz2 = std::strtod(col[11].c_str(), nullptr);
    c.crlb_rabi_mhz2 = std::strtod(col[12].c_str(), nullptr);
    c.consistency_hash = std::strtoull(col[13].c_str(), nullptr, 10);
    c.stream_base = std::strtoull(col[14].c_str(), nullptr, 10);
    c.valid = col[15] == "1";
    c.note = col[16];
    result.cells.push_back(c);
  }
  return result;
}

bool equivalent(const CampaignResult& a, const CampaignResult& b) {
  auto deq = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  if (a.master_seed != b.master_seed || a.config_echo != b.config_echo ||
      a.cells.size() != b.cells.size())
    return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& x = a.cells[i];
    const auto& y = b.cells[i];
    if (x.scheme != y.scheme || x.sampling != y.sampling || !deq(x.signal_mhz, y.signal_mhz) ||
        !deq(x.sigma0, y.sigma0) || x.n_total != y.n_total || x.trials != y.trials ||
        x.failures != y.failures || !deq(x.mse, y.mse) || !deq(x.crlb, y.crlb) ||
        !deq(x.mse_normalized, y.mse_normalized) || !deq(x.crlb_normalized, y.crlb_normalized) ||
        !deq(x.mse_rabi_mhz2, y.mse_rabi_mhz2) || !deq(x.crlb_rabi_mhz2, y.crlb_rabi_mhz2) ||
        x.consistency_hash != y.consistency_hash || x.stream_base != y.stream_base ||
        x.valid != y.valid || x.note != y.note)
      return false;
  }
  return true;
}

}  // namespace rydsim

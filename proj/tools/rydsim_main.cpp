// SPDX-License-Identifier: Apache-2.0
//
// rydsim: Rydberg-sensor response simulation, estimator benchmarking and
// CRLB comparison. Subcommands: surface, campaign, crlb, plan, compare.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rydsim/campaign.hpp"
#include "rydsim/constants.hpp"
#include "rydsim/parallel.hpp"

namespace {

using namespace rydsim;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out.flush()) throw IoError("failed writing " + path);
}

ResponseSurface build_surface(const ExperimentConfig& cfg) {
  return ResponseSurface::build(cfg.system, cfg.surface_x_grid(), cfg.surface_f_grid(),
                                default_thread_count());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-atom RF sensor simulation and estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  long long trials_override = -1;
  long long seed_override = -1;

  auto* surface_cmd = app.add_subcommand("surface", "tabulate and export the response surface");
  surface_cmd->add_option("--config", config_path, "config file")->required();
  surface_cmd->add_option("--out", out_path, "output directory")->required();

  auto* campaign_cmd = app.add_subcommand("campaign", "run a Monte Carlo estimator campaign");
  campaign_cmd->add_option("--config", config_path, "config file")->required();
  campaign_cmd->add_option("--out", out_path, "output directory")->required();
  campaign_cmd->add_option("--trials", trials_override, "override [campaign] trials");
  campaign_cmd->add_option("--seed", seed_override, "override [campaign] seed");

  auto* crlb_cmd = app.add_subcommand("crlb", "CRLB sweeps over the signal grid");
  crlb_cmd->add_option("--config", config_path, "config file")->required();
  crlb_cmd->add_option("--out", out_path, "output directory")->required();

  std::string plan_strategy = "uniform";
  int plan_n = 10;
  double plan_signal_mhz = 15.0;
  double plan_span_mhz = 10.0;
  std::string plan_side = "right";
  auto* plan_cmd = app.add_subcommand("plan", "emit a sampling plan for one peak");
  plan_cmd->add_option("--config", config_path, "config file")->required();
  plan_cmd->add_option("--strategy", plan_strategy, "uniform|maxslope");
  plan_cmd->add_option("--n", plan_n, "frequencies per side");
  plan_cmd->add_option("--signal-mhz", plan_signal_mhz, "Omega_RF/2pi in MHz");
  plan_cmd->add_option("--span-mhz", plan_span_mhz, "uniform window span in MHz");
  plan_cmd->add_option("--side", plan_side, "left|right");
  plan_cmd->add_option("--out", out_path, "output CSV file")->required();

  auto* compare_cmd = app.add_subcommand("compare", "r0 and r[x] scheme comparison report");
  compare_cmd->add_option("--config", config_path, "config file")->required();
  compare_cmd->add_option("--out", out_path, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (trials_override > 0) cfg.trials = trials_override;
    if (seed_override >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed_override);

    if (surface_cmd->parsed()) {
      ensure_dir(out_path);
      const ResponseSurface s = build_surface(cfg);
      s.save_csv(out_path + "/surface.csv", out_path + "/surface.meta");
      write_file(out_path + "/config.echo", cfg.to_kv().echo());
      std::printf("surface: %ld x %ld nodes -> %s/surface.csv\n",
                  static_cast<long>(s.x_grid().size()), static_cast<long>(s.f_grid().size()),
                  out_path.c_str());
    } else if (campaign_cmd->parsed()) {
      const ResponseSurface s = build_surface(cfg);
      const CampaignResult res = run_campaign(cfg, s, default_thread_count());
      export_campaign(res, out_path);
      long long bad = 0;
      for (const auto& c : res.cells) bad += c.valid ? 0 : 1;
      std::printf("campaign: %zu cells (%lld flagged) -> %s/campaign.csv\n", res.cells.size(),
                  bad, out_path.c_str());
    } else if (crlb_cmd->parsed()) {
      ensure_dir(out_path);
      const ResponseSurface s = build_surface(cfg);
      write_file(out_path + "/crlb_raw.csv", crlb_sweep_csv(cfg, s, false));
      write_file(out_path + "/crlb_normalized.csv", crlb_sweep_csv(cfg, s, true));
      write_file(out_path + "/config.echo", cfg.to_kv().echo());
      std::printf("crlb: %zu signals -> %s\n", cfg.signals_mhz.size(), out_path.c_str());
    } else if (plan_cmd->parsed()) {
      const ResponseSurface s = build_surface(cfg);
      const double x = cfg.system.field_from_rabi(constants::two_pi * 1e6 * plan_signal_mhz);
      const MarginalCurve f_s = frequency_marginal(s, x);
      auto [left, right] = split_lineshapes(f_s, s.f_reference());
      const PeakLineshape shape =
          fit_gaussian_like(plan_side == "left" ? left : right);
      const SamplingPlan plan = make_plan(plan_strategy == "maxslope"
                                              ? SamplingPlan::Strategy::MaxSlope
                                              : SamplingPlan::Strategy::Uniform,
                                          shape, plan_n, plan_span_mhz * 1e6, s.f_reference());
      std::string csv = "# side=" + plan_side + " strategy=" + plan_strategy + "\nf_hz\n";
      for (Eigen::Index i = 0; i < plan.frequencies.size(); ++i)
        csv += format_double(plan.frequencies[i]) + "\n";
      write_file(out_path, csv);
      std::printf("plan: %ld frequencies -> %s\n", static_cast<long>(plan.frequencies.size()),
                  out_path.c_str());
    } else if (compare_cmd->parsed()) {
      ensure_dir(out_path);
      const ResponseSurface s = build_surface(cfg);
      const double kap = kappa(cfg.system);
      const SchemeComparison cmp = compare_r0(s, kap);
      std::string csv = "omega_mhz,r_x\n";
      for (double signal : cfg.signals_mhz) {
        const double x = cfg.system.field_from_rabi(constants::two_pi * 1e6 * signal);
        csv += format_double(signal) + "," + format_double(ratio_r(s, x, kap)) + "\n";
      }
      write_file(out_path + "/compare_rx.csv", csv);
      std::string r0txt = "r0 = " + format_double(cmp.r0) + "\n";
      r0txt += "x_op_intensity = " + format_double(cmp.x_op_intensity) + "\n";
      r0txt += "slope_intensity = " + format_double(cmp.slope_intensity) + "\n";
      r0txt += "x_op_splitting = " + format_double(cmp.x_op_splitting) + "\n";
      r0txt += "f_op_splitting = " + format_double(cmp.f_op_splitting) + "\n";
      r0txt += "slope_splitting = " + format_double(cmp.slope_splitting) + "\n";
      write_file(out_path + "/compare_r0.txt", r0txt);
      std::printf("compare: r0 = %.6g -> %s\n", cmp.r0, out_path.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

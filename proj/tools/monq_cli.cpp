// Command-line front end: simulate ensembles, reproduce the three figure
// datasets, and run the validation suite. All outputs are plot-ready CSV plus
// a JSON manifest with content hashes, timings and subset sizes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "monq/acceptance.hpp"
#include "monq/analytic.hpp"
#include "monq/config_file.hpp"
#include "monq/csv.hpp"
#include "monq/estimators.hpp"
#include "monq/manifest.hpp"
#include "monq/past_state.hpp"
#include "monq/trajectory.hpp"

namespace fs = std::filesystem;
using namespace monq;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 1;
};

FileConfig load_file_config(const CommonOpts& opts) {
  FileConfig fc = opts.config_path.empty()
                      ? FileConfig{}
                      : parse_config_file(opts.config_path);
  if (opts.seed_set) fc.seed = opts.seed;
  return fc;
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& body, RunManifest& manifest) {
  const std::string path = (fs::path(dir) / name).string();
  csv::write_file(path, body);
  manifest.output_hashes.emplace_back(name, content_hash(body));
}

std::vector<double> nan_vector(std::size_t n) {
  return std::vector<double>(n, std::nan(""));
}

std::vector<double> bin_times_ns(const SimulationConfig& cfg, int count) {
  const double dt_ns = cfg.params.dt() * 1e9;
  std::vector<double> t(count);
  for (int m = 0; m < count; ++m) t[m] = m * dt_ns;
  return t;
}

int run_simulate(const CommonOpts& opts) {
  const FileConfig fc = load_file_config(opts);
  const SimulationConfig cfg = to_simulation_config(fc);
  fs::create_directories(opts.out_dir);

  RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.config = config_echo(fc);
  manifest.seed = fc.seed;
  manifest.threads = opts.threads;

  StageTimer sim_timer;
  const Ensemble ens = simulate_ensemble(cfg, opts.threads);
  manifest.timings_ms.emplace_back("simulate", sim_timer.elapsed_ms());

  long long n_plus = 0, n_minus = 0, post_plus = 0;
  for (const auto& rec : ens.records) {
    n_plus += rec.herald == HeraldOutcome::plus;
    n_minus += rec.herald == HeraldOutcome::minus;
    post_plus += rec.final_outcome.value_or(0);
  }
  manifest.subset_sizes.emplace_back("herald_plus", n_plus);
  manifest.subset_sizes.emplace_back("herald_minus", n_minus);
  manifest.subset_sizes.emplace_back("final_plus", post_plus);
  manifest.subset_sizes.emplace_back(
      "final_minus", static_cast<long long>(ens.size()) - post_plus);

  StageTimer emit_timer;
  write_output(opts.out_dir, "records.csv", csv::render_records(ens), manifest);
  write_output(opts.out_dir, "trajectories.csv",
               csv::render_trajectories(ens, cfg.params.dt() * 1e9), manifest);
  manifest.timings_ms.emplace_back("emit", emit_timer.elapsed_ms());
  manifest.write((fs::path(opts.out_dir) / "manifest.json").string());

  std::cout << "simulate: " << ens.size() << " trajectories x "
            << cfg.n_bins() << " bins -> " << opts.out_dir << "\n";
  return 0;
}

int run_fig1(const CommonOpts& opts) {
  FileConfig fc = load_file_config(opts);
  const SimulationConfig cfg = to_simulation_config(fc);
  fs::create_directories(opts.out_dir);

  RunManifest manifest;
  manifest.subcommand = "fig1";
  manifest.config = config_echo(fc);
  manifest.seed = fc.seed;
  manifest.threads = opts.threads;

  StageTimer sim_timer;
  const Ensemble ens = simulate_ensemble(cfg, opts.threads);
  manifest.timings_ms.emplace_back("simulate", sim_timer.elapsed_ms());

  StageTimer est_timer;
  const HeraldOutcome filter = cfg.herald == HeraldPolicy::minus
                                   ? HeraldOutcome::minus
                                   : HeraldOutcome::plus;
  const TimeSeriesStat pre = preselected_average(ens, filter);
  const TimeSeriesStat ps = postselected_average(ens, 1);
  const TimeSeriesStat wp = weighted_average(ens);
  const TimeSeriesStat zbar = state_series_stat(
      ens, [](const Hermitian2& s) { return 2.0 * s.m00 - 1.0; });

  const int m_bins = cfg.n_bins();
  const SimulationConfig eff = cfg.resolved();
  std::vector<double> analytic(m_bins, std::nan(""));
  if (eff.params.underdamped()) {
    for (int m = 0; m < m_bins; ++m)
      analytic[m] = 2.0 * analytic_rho(m * eff.params.dt(), eff.params).m00 - 1.0;
  }
  manifest.timings_ms.emplace_back("estimate", est_timer.elapsed_ms());

  write_output(opts.out_dir, "averages.csv",
               csv::render_averages(bin_times_ns(cfg, m_bins), pre.mean,
                                    ps.mean, wp.mean, analytic, pre.ci_lo,
                                    pre.ci_hi, pre.n_eff),
               manifest);

  // Fig 1(d): mean Bloch z of the conditioned trajectories, on the state grid.
  {
    std::string out = "time_ns,z_mean,ci_lo,ci_hi\n";
    const double dt_ns = cfg.params.dt() * 1e9;
    for (std::size_t m = 0; m < zbar.mean.size(); ++m) {
      csv::append_number(out, m * dt_ns);
      out.push_back(',');
      csv::append_number(out, zbar.mean[m]);
      out.push_back(',');
      csv::append_number(out, zbar.ci_lo[m]);
      out.push_back(',');
      csv::append_number(out, zbar.ci_hi[m]);
      out.push_back('\n');
    }
    write_output(opts.out_dir, "zmean.csv", out, manifest);
  }

  manifest.subset_sizes.emplace_back("herald_subset",
                                     static_cast<long long>(pre.n_eff[0]));
  manifest.write((fs::path(opts.out_dir) / "manifest.json").string());
  std::cout << "fig1: pre-selected average over "
            << static_cast<long long>(pre.n_eff[0]) << " runs -> "
            << opts.out_dir << "\n";
  return 0;
}

int run_fig2(const CommonOpts& opts) {
  FileConfig fc = load_file_config(opts);
  if (opts.config_path.empty()) fc.herald = "mixed";  // unheralded preparation is the fig2 default
  const SimulationConfig cfg = to_simulation_config(fc);
  fs::create_directories(opts.out_dir);

  RunManifest manifest;
  manifest.subcommand = "fig2";
  manifest.config = config_echo(fc);
  manifest.seed = fc.seed;
  manifest.threads = opts.threads;

  StageTimer sim_timer;
  const Ensemble ens = simulate_ensemble(cfg, opts.threads);
  // Heralded companion run for the time-reversed pre-selected reference.
  SimulationConfig ref_cfg = cfg;
  ref_cfg.herald = HeraldPolicy::plus;
  ref_cfg.seed = derive_seed(cfg.seed, 0xF162);
  const Ensemble ref = simulate_ensemble(ref_cfg, opts.threads);
  manifest.timings_ms.emplace_back("simulate", sim_timer.elapsed_ms());

  StageTimer est_timer;
  const TimeSeriesStat ps = postselected_average(ens, 1);
  const TimeSeriesStat wp = weighted_average(ens);
  const TimeSeriesStat pre = preselected_average(ref, HeraldOutcome::plus);

  const int m_bins = cfg.n_bins();
  std::vector<double> pre_reversed(m_bins, std::nan(""));
  for (int m = 1; m < m_bins; ++m) pre_reversed[m] = pre.mean[m_bins - m];

  const SimulationConfig eff = cfg.resolved();
  std::vector<double> analytic(m_bins, std::nan(""));
  if (eff.params.underdamped()) {
    // deterministic reference: 2 E00(t) - 1 anchored at T
    for (int m = 0; m < m_bins; ++m)
      analytic[m] =
          2.0 * analytic_effect(m * eff.params.dt(), cfg.total_time,
                                eff.params).m00 - 1.0;
  }
  manifest.timings_ms.emplace_back("estimate", est_timer.elapsed_ms());

  write_output(opts.out_dir, "averages.csv",
               csv::render_averages(bin_times_ns(cfg, m_bins), pre_reversed,
                                    ps.mean, wp.mean, analytic, wp.ci_lo,
                                    wp.ci_hi, ps.n_eff),
               manifest);

  // Agreement checks of the estimators module, as pass/fail rows.
  {
    std::string out = "check,pass,statistic,threshold\n";
    double worst_wp_ps = 0.0;
    for (int m = 0; m < m_bins; ++m) {
      const double se = std::hypot(wp.se[m], ps.se[m]);
      worst_wp_ps =
          std::max(worst_wp_ps, std::abs(wp.mean[m] - ps.mean[m]) /
                                    std::max(se, 1e-12));
    }
    double worst_rev = 0.0;
    for (int m = 1; m < m_bins; ++m) {
      const double se = std::hypot(ps.se[m], pre.se[m_bins - m]);
      worst_rev = std::max(worst_rev,
                           std::abs(ps.mean[m] - pre.mean[m_bins - m]) /
                               std::max(se, 1e-12));
    }
    const bool contrast =
        ps.ci_lo[m_bins - 1] <= 1.0 && 1.0 <= ps.ci_hi[m_bins - 1];
    auto row = [&](const char* name, bool pass, double stat, double thr) {
      out += name;
      out += pass ? ",1," : ",0,";
      csv::append_number(out, stat);
      out.push_back(',');
      csv::append_number(out, thr);
      out.push_back('\n');
    };
    row("weighted_vs_postselected_4se", worst_wp_ps <= 4.0, worst_wp_ps, 4.0);
    row("postselected_vs_reversed_pre_4se", worst_rev <= 4.0, worst_rev, 4.0);
    row("final_bin_full_contrast_ci", contrast, ps.mean[m_bins - 1], 1.0);
    write_output(opts.out_dir, "fig2_checks.csv", out, manifest);
  }

  long long n_ps = 0;
  for (const auto& rec : ens.records) n_ps += rec.final_outcome.value_or(0);
  manifest.subset_sizes.emplace_back("postselected_plus", n_ps);
  manifest.write((fs::path(opts.out_dir) / "manifest.json").string());
  std::cout << "fig2: post-selected subset " << n_ps << " of " << ens.size()
            << " -> " << opts.out_dir << "\n";
  return 0;
}

int run_fig3(const CommonOpts& opts) {
  FileConfig fc = load_file_config(opts);
  const SimulationConfig cfg = to_simulation_config(fc);
  fs::create_directories(opts.out_dir);

  RunManifest manifest;
  manifest.subcommand = "fig3";
  manifest.config = config_echo(fc);
  manifest.seed = fc.seed;
  manifest.threads = opts.threads;

  StageTimer sim_timer;
  const Ensemble ens = simulate_ensemble(cfg, opts.threads);
  manifest.timings_ms.emplace_back("simulate", sim_timer.elapsed_ms());

  StageTimer est_timer;
  const CorrelationGrid grid = hybrid_correlation_grid(ens);
  const int m_bins = cfg.n_bins();
  const double dt_ns = cfg.params.dt() * 1e9;

  std::vector<csv::CorrGridRow> rows;
  rows.reserve(static_cast<std::size_t>(m_bins) * (m_bins + 1));
  for (int tpb = 0; tpb <= m_bins; ++tpb)
    for (int t = 0; t < m_bins; ++t)
      rows.push_back({t * dt_ns, tpb * dt_ns, grid.value(t, tpb),
                      grid.weight_sum[tpb], "hybrid"});

  // Side panels at the configured t' values: the deterministic prediction for
  // t < t', the trajectory-only estimator for t >= t', and the signal-only
  // estimator for t < t'.
  std::vector<double> tprimes = fc.side_panel_tprimes_ns;
  if (tprimes.empty())
    tprimes = {0.5 * cfg.total_time * 1e9, cfg.total_time * 1e9};
  const SimulationConfig eff = cfg.resolved();
  for (double tp_ns : tprimes) {
    const int tpb = static_cast<int>(std::llround(tp_ns / dt_ns));
    if (tpb < 1 || tpb > m_bins)
      throw ConfigError("fig3: side-panel t' outside the time grid");
    for (int t = 0; t < tpb; ++t) {
      double pred = std::nan("");
      if (eff.params.underdamped())
        pred = predict_weighted_correlation(t * eff.params.dt(),
                                            tpb * eff.params.dt(), eff.params,
                                            eff.herald, eff.prep_fidelity);
      rows.push_back(
          {t * dt_ns, tp_ns, pred, grid.weight_sum[tpb], "prediction"});
    }
    if (tpb < m_bins) {  // signal-only needs a voltage bin at t'
      for (int t = 0; t < tpb; ++t)
        rows.push_back({t * dt_ns, tp_ns,
                        signal_correlation_estimator(ens, t, tpb),
                        grid.weight_sum[tpb], "signal-only"});
    }
    for (int t = tpb; t < m_bins; ++t)
      rows.push_back({t * dt_ns, tp_ns, state_state_correlation(ens, t, tpb),
                      grid.weight_sum[tpb], "state-state"});
    if (tpb >= 1 && tpb + 1 < m_bins) {
      const auto row = grid.row(tpb);
      std::cout << "fig3: kink second difference at t' = " << tp_ns
                << " ns: " << second_difference(row, tpb) << "\n";
    }
  }
  manifest.timings_ms.emplace_back("estimate", est_timer.elapsed_ms());

  write_output(opts.out_dir, "corrgrid.csv", csv::render_corrgrid(rows),
               manifest);
  manifest.write((fs::path(opts.out_dir) / "manifest.json").string());
  std::cout << "fig3: " << rows.size() << " grid rows -> " << opts.out_dir
            << "\n";
  return 0;
}

int run_validate(const CommonOpts& opts) {
  fs::create_directories(opts.out_dir);
  const auto results = acceptance::run_all(opts.threads, std::cout);
  const auto report = acceptance::report_json(results);
  {
    std::ofstream f((fs::path(opts.out_dir) / "validate_report.json").string());
    f << report.dump(2) << "\n";
  }
  bool all = true;
  for (const auto& r : results) all = all && r.pass;
  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "monq: continuously monitored qubit simulator with pre/post-selected "
      "statistics and past-state retrodiction"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--threads", opts.threads,
                    "worker count (affects speed only, never results)");
  };

  auto* sim = app.add_subcommand("simulate", "generate an ensemble and export it");
  auto* fig1 = app.add_subcommand(
      "fig1", "pre-selected average with analytic overlay");
  auto* fig2 = app.add_subcommand(
      "fig2", "post-selected vs weighted averages, time-reversed reference");
  auto* fig3 = app.add_subcommand("fig3", "hybrid two-time correlation grid");
  auto* validate =
      app.add_subcommand("validate", "run the acceptance suite");
  for (auto* sub : {sim, fig1, fig2, fig3, validate}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(opts);
    if (fig1->parsed()) return run_fig1(opts);
    if (fig2->parsed()) return run_fig2(opts);
    if (fig3->parsed()) return run_fig3(opts);
    if (validate->parsed()) return run_validate(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

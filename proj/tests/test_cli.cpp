// Config parsing, CSV round trips, manifests, and end-to-end runs of the
// command-line binary.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <gtest/gtest.h>

#include "monq/config_file.hpp"
#include "monq/csv.hpp"
#include "monq/estimators.hpp"
#include "monq/manifest.hpp"
#include "monq/trajectory.hpp"

using namespace monq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("monq_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MONQ_CLI_PATH) + " " + args +
                          " > /dev/null 2> /dev/null";
  return std::system(cmd.c_str());
}

}  // namespace

TEST(ConfigFile, ParsesCanonicalKeys) {
  std::istringstream in(
      "# reference defaults\n"
      "rabi_frequency_hz = 1.16e6\n"
      "measurement_rate_hz = 95e3\n"
      "efficiency = 0.35\n"
      "t2_star_us = 16\n"
      "dt_ns = 20\n"
      "total_time_us = 2\n"
      "n_trajectories = 128\n"
      "seed = 42\n"
      "prep_fidelity = 0.95\n"
      "herald = mixed\n"
      "integrator = bayesian\n"
      "oracle_mode = false\n"
      "side_panel_tprimes_ns = 1000, 2000\n");
  const FileConfig fc = parse_config_stream(in, "cfg");
  EXPECT_EQ(fc.n_trajectories, 128);
  EXPECT_EQ(fc.seed, 42u);
  EXPECT_EQ(fc.herald, "mixed");
  ASSERT_EQ(fc.side_panel_tprimes_ns.size(), 2u);
  EXPECT_DOUBLE_EQ(fc.side_panel_tprimes_ns[1], 2000.0);

  const SimulationConfig cfg = to_simulation_config(fc);
  EXPECT_NEAR(cfg.params.omega_rabi(), kTwoPi * 1.16e6, 1e-6);
  EXPECT_NEAR(cfg.params.gamma(), 1.0 / 16e-6, 1e-6);
  EXPECT_EQ(cfg.n_bins(), 100);
  EXPECT_EQ(cfg.herald, HeraldPolicy::mixed);
}

TEST(ConfigFile, LineAnchoredErrors) {
  {
    std::istringstream in("dt_ns = 20\nbogus_key = 1\n");
    try {
      parse_config_stream(in, "cfg");
      FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("cfg:2"), std::string::npos);
      EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
    }
  }
  {
    std::istringstream in("dt_ns twenty\n");
    EXPECT_THROW(parse_config_stream(in, "cfg"), ConfigError);
  }
  {
    std::istringstream in("efficiency = zero\n");
    EXPECT_THROW(parse_config_stream(in, "cfg"), ConfigError);
  }
}

TEST(ConfigFile, RejectsZeroEfficiencyWithExplicitMessage) {
  std::istringstream in("efficiency = 0\n");
  const FileConfig fc = parse_config_stream(in, "cfg");
  try {
    to_simulation_config(fc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a^2"), std::string::npos);
  }
}

TEST(ConfigFile, RejectsNonIntegerBinCount) {
  std::istringstream in("total_time_us = 2\ndt_ns = 30\n");
  const FileConfig fc = parse_config_stream(in, "cfg");
  EXPECT_THROW(to_simulation_config(fc), ConfigError);
}

TEST(Csv, NumberRoundTrip) {
  for (const double v : {0.0, -0.0, 1.0, 59.832685, -1.2345678901234567e-17,
                         0.1137613990577939, 1e300}) {
    std::string s;
    csv::append_number(s, v);
    EXPECT_EQ(csv::parse_double(s, "test"), v) << s;
  }
  std::string s;
  csv::append_number(s, std::nan(""));
  EXPECT_TRUE(std::isnan(csv::parse_double(s, "test")));
}

TEST(Csv, RecordsAndTrajectoriesRoundTrip) {
  SimulationConfig cfg;
  cfg.params = PhysicalParams::reference_defaults();
  cfg.total_time = 0.5e-6;
  cfg.n_trajectories = 40;
  cfg.seed = 7;
  cfg.herald = HeraldPolicy::mixed;
  const Ensemble ens = simulate_ensemble(cfg);

  const fs::path dir = temp_dir("roundtrip");
  const double dt_ns = cfg.params.dt() * 1e9;
  csv::write_file((dir / "records.csv").string(), csv::render_records(ens));
  csv::write_file((dir / "trajectories.csv").string(),
                  csv::render_trajectories(ens, dt_ns));

  const auto recs = csv::read_records((dir / "records.csv").string());
  const auto trajs = csv::read_trajectories((dir / "trajectories.csv").string());
  ASSERT_EQ(recs.traj_ids.size(), ens.size());
  ASSERT_EQ(trajs.traj_ids.size(), ens.size());

  // re-ingested data reproduces the estimators bit for bit
  Ensemble rebuilt;
  rebuilt.config = cfg;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    MeasurementRecord rec;
    rec.traj_id = recs.traj_ids[i];
    rec.voltages = recs.voltages[i];
    rec.herald = trajs.heralds[i];
    rec.final_outcome = trajs.final_outcomes[i];
    rebuilt.records.push_back(std::move(rec));
    Trajectory traj;
    traj.states = trajs.states[i];
    rebuilt.trajectories.push_back(std::move(traj));
  }
  const TimeSeriesStat wp_orig = weighted_average(ens);
  const TimeSeriesStat wp_back = weighted_average(rebuilt);
  const TimeSeriesStat ps_orig = postselected_average(ens, 1);
  const TimeSeriesStat ps_back = postselected_average(rebuilt, 1);
  for (std::size_t m = 0; m < wp_orig.mean.size(); ++m) {
    EXPECT_EQ(wp_orig.mean[m], wp_back.mean[m]);
    EXPECT_EQ(ps_orig.mean[m], ps_back.mean[m]);
  }
}

TEST(Manifest, HashesAreDeterministic) {
  EXPECT_EQ(content_hash("abc"), content_hash("abc"));
  EXPECT_NE(content_hash("abc"), content_hash("abd"));

  RunManifest m;
  m.subcommand = "simulate";
  m.seed = 5;
  m.output_hashes.emplace_back("records.csv", content_hash("xyz"));
  const auto j = m.to_json();
  EXPECT_EQ(j["subcommand"], "simulate");
  EXPECT_EQ(j["output_hashes"]["records.csv"], content_hash("xyz"));
}

TEST(CliBinary, SimulateIsSeedDeterministic) {
  const fs::path dir = temp_dir("cli");
  const fs::path cfg_path = dir / "small.cfg";
  {
    std::ofstream f(cfg_path);
    f << "n_trajectories = 150\nseed = 11\nherald = mixed\n";
  }
  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";
  ASSERT_EQ(run_cli("simulate --config " + cfg_path.string() + " --out " +
                    out1.string()),
            0);
  ASSERT_EQ(run_cli("simulate --config " + cfg_path.string() + " --out " +
                    out2.string() + " --threads 4"),
            0);
  ASSERT_TRUE(fs::exists(out1 / "records.csv"));
  ASSERT_TRUE(fs::exists(out1 / "trajectories.csv"));
  ASSERT_TRUE(fs::exists(out1 / "manifest.json"));
  EXPECT_EQ(slurp(out1 / "records.csv"), slurp(out2 / "records.csv"));
  EXPECT_EQ(slurp(out1 / "trajectories.csv"), slurp(out2 / "trajectories.csv"));

  // seed override changes the records
  const fs::path out3 = dir / "out3";
  ASSERT_EQ(run_cli("simulate --config " + cfg_path.string() + " --out " +
                    out3.string() + " --seed 12"),
            0);
  EXPECT_NE(slurp(out1 / "records.csv"), slurp(out3 / "records.csv"));

  // records.csv schema: header + n * bins rows
  std::istringstream rec(slurp(out1 / "records.csv"));
  std::string header;
  std::getline(rec, header);
  EXPECT_EQ(header, "traj_id,bin,v");
  std::size_t rows = 0;
  for (std::string line; std::getline(rec, line);) rows += !line.empty();
  EXPECT_EQ(rows, 150u * 100u);
}

namespace {

// split a CSV line into fields
std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST(CliBinary, FigureCommandsProduceSchemas) {
  const fs::path dir = temp_dir("cli_figs");
  const fs::path cfg_path = dir / "small.cfg";
  {
    std::ofstream f(cfg_path);
    f << "n_trajectories = 2000\nseed = 21\n";
  }
  const std::string cfg_arg = " --config " + cfg_path.string();

  ASSERT_EQ(run_cli("fig1" + cfg_arg + " --out " + (dir / "f1").string()), 0);
  {
    std::istringstream f(slurp(dir / "f1" / "averages.csv"));
    std::string header, first;
    std::getline(f, header);
    EXPECT_EQ(header, "time_ns,v_pre,v_post,v_wp,analytic,ci_lo,ci_hi,n_eff");
    EXPECT_TRUE(fs::exists(dir / "f1" / "zmean.csv"));
    // first bin: pre-selected mean near 2*0.95 - 1 = 0.90 at the default fidelity
    std::getline(f, first);
    const auto cols = fields(first);
    const double v0 = csv::parse_double(cols[1], "v_pre");
    const double lo = csv::parse_double(cols[5], "ci_lo");
    const double hi = csv::parse_double(cols[6], "ci_hi");
    EXPECT_LE(lo, 0.90);
    EXPECT_GE(hi, 0.90);
    EXPECT_NEAR(v0, 0.90, 0.6);
    EXPECT_DOUBLE_EQ(csv::parse_double(cols[4], "analytic"), 1.0);
  }
  {
    // mean conditioned z tracks the pre-selected signal bin by bin; this is
    // a wiring check on the emitted files (the estimator-level agreement has
    // its own 4-sigma tests), so gate at 5 sigma of the CI-derived errors
    std::istringstream fa(slurp(dir / "f1" / "averages.csv"));
    std::istringstream fz(slurp(dir / "f1" / "zmean.csv"));
    std::string la, lz;
    std::getline(fa, la);
    std::getline(fz, lz);
    while (std::getline(fa, la) && std::getline(fz, lz)) {
      const auto ca = fields(la);
      const auto cz = fields(lz);
      const double v = csv::parse_double(ca[1], "v_pre");
      const double se_v = (csv::parse_double(ca[6], "ci_hi") -
                           csv::parse_double(ca[5], "ci_lo")) / 3.92;
      const double z = csv::parse_double(cz[1], "z_mean");
      const double se_z = (csv::parse_double(cz[3], "ci_hi") -
                           csv::parse_double(cz[2], "ci_lo")) / 3.92;
      EXPECT_NEAR(z, v, 5.0 * std::hypot(se_v, se_z)) << la;
    }
  }

  ASSERT_EQ(run_cli("fig2" + cfg_arg + " --out " + (dir / "f2").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "f2" / "averages.csv"));
  EXPECT_TRUE(fs::exists(dir / "f2" / "fig2_checks.csv"));

  {
    std::ofstream f(cfg_path, std::ios::app);
    f << "side_panel_tprimes_ns = 1000\n";
  }
  ASSERT_EQ(run_cli("fig3" + cfg_arg + " --out " + (dir / "f3").string()), 0);
  {
    std::istringstream f(slurp(dir / "f3" / "corrgrid.csv"));
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "t_ns,tprime_ns,value,weight_sum,estimator");
  }
}

TEST(CliBinary, GridAnchorColumnMatchesFig2WeightedAverage) {
  // with one shared config, fig3's t' = T column reproduces fig2's v_wp
  // column bit for bit
  const fs::path dir = temp_dir("cli_anchor");
  const fs::path cfg_path = dir / "mixed.cfg";
  {
    std::ofstream f(cfg_path);
    f << "n_trajectories = 500\nseed = 33\nherald = mixed\n";
  }
  const std::string cfg_arg = " --config " + cfg_path.string();
  ASSERT_EQ(run_cli("fig2" + cfg_arg + " --out " + (dir / "f2").string()), 0);
  ASSERT_EQ(run_cli("fig3" + cfg_arg + " --out " + (dir / "f3").string()), 0);

  std::vector<std::string> wp;
  {
    std::istringstream f(slurp(dir / "f2" / "averages.csv"));
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line))
      if (!line.empty()) wp.push_back(fields(line)[3]);
  }
  std::vector<std::string> anchor;
  {
    std::istringstream f(slurp(dir / "f3" / "corrgrid.csv"));
    std::string line;
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto cols = fields(line);
      if (cols[4] == "hybrid" && cols[1] == "2000") anchor.push_back(cols[2]);
    }
  }
  ASSERT_EQ(wp.size(), 100u);
  ASSERT_EQ(anchor.size(), 100u);
  for (std::size_t m = 0; m < wp.size(); ++m) EXPECT_EQ(wp[m], anchor[m]);
}

TEST(CliBinary, ErrorsAreSignaled) {
  const fs::path dir = temp_dir("cli_err");
  const fs::path bad = dir / "bad.cfg";
  {
    std::ofstream f(bad);
    f << "efficiency = 0\n";
  }
  EXPECT_NE(run_cli("simulate --config " + bad.string() + " --out " +
                    (dir / "out").string()),
            0);
  EXPECT_NE(run_cli("simulate --config " + (dir / "missing.cfg").string()), 0);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("validate --help"), 0);
}

// Unit tests for the ensemble statistics and bootstrap machinery.

#include <algorithm>
#include <cmath>
#include <random>
#include <gtest/gtest.h>

#include "monq/analytic.hpp"
#include "monq/estimators.hpp"
#include "monq/past_state.hpp"
#include "monq/trajectory.hpp"

using namespace monq;

namespace {

SimulationConfig reference_config(HeraldPolicy h, int n, std::uint64_t seed,
                              double f = 0.95) {
  SimulationConfig cfg;
  cfg.params = PhysicalParams::reference_defaults();
  cfg.total_time = 2.0e-6;
  cfg.n_trajectories = n;
  cfg.seed = seed;
  cfg.prep_fidelity = f;
  cfg.herald = h;
  return cfg;
}

SimulationConfig qnd_config(HeraldPolicy h, int n, std::uint64_t seed) {
  SimulationConfig cfg = reference_config(h, n, seed, 1.0);
  cfg.params = PhysicalParams(0.0, kTwoPi * 95e3, 0.35, 0.0, 20e-9);
  return cfg;
}

}  // namespace

TEST(PreselectedAverage, QndFlatContrast) {
  const Ensemble plus = simulate_ensemble(qnd_config(HeraldPolicy::plus, 600, 1));
  const TimeSeriesStat stat = preselected_average(plus, HeraldOutcome::plus);
  for (std::size_t m = 0; m < stat.mean.size(); ++m) {
    EXPECT_NEAR(stat.mean[m], 1.0, 4.0 * stat.se[m]);
    EXPECT_GE(stat.mean[m], stat.ci_lo[m]);
    EXPECT_LE(stat.mean[m], stat.ci_hi[m]);
    EXPECT_DOUBLE_EQ(stat.n_eff[m], 600.0);
  }
}

TEST(PreselectedAverage, MixedIsCenteredAtZero) {
  const Ensemble mixed =
      simulate_ensemble(qnd_config(HeraldPolicy::mixed, 800, 2));
  EXPECT_THROW(preselected_average(mixed, HeraldOutcome::plus),
               EmptySubsetError);
  const TimeSeriesStat stat = preselected_average(mixed, HeraldOutcome::none);
  for (std::size_t m = 0; m < stat.mean.size(); ++m)
    EXPECT_NEAR(stat.mean[m], 0.0, 4.0 * stat.se[m]);
}

TEST(PreselectedAverage, OracleRegimeTracksAnalytic) {
  SimulationConfig cfg = reference_config(HeraldPolicy::plus, 5000, 3, 1.0);
  cfg.params = PhysicalParams::oracle_regime();
  const Ensemble ens = simulate_ensemble(cfg);
  const TimeSeriesStat stat = preselected_average(ens, HeraldOutcome::plus);
  for (int m = 0; m < cfg.n_bins(); ++m) {
    const double target =
        2.0 * analytic_rho(m * cfg.params.dt(), cfg.params).m00 - 1.0;
    EXPECT_NEAR(stat.mean[m], target, 4.0 * stat.se[m]) << "bin " << m;
  }
}

TEST(PostselectedAverage, FullContrastAtFinalTime) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 5000, 4));
  const TimeSeriesStat ps = postselected_average(mixed, 1);
  const int last = static_cast<int>(ps.mean.size()) - 1;
  EXPECT_NEAR(ps.mean[last], 1.0, 4.0 * ps.se[last]);
  EXPECT_GT(ps.n_eff[last], 1000.0);
}

TEST(PostselectedAverage, TimeReverseOfPreselected) {
  // the headline time-reversal symmetry at module scale, default fidelity
  const Ensemble herald =
      simulate_ensemble(reference_config(HeraldPolicy::plus, 10000, 5));
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 10000, 6));
  const TimeSeriesStat pre = preselected_average(herald, HeraldOutcome::plus);
  const TimeSeriesStat ps = postselected_average(mixed, 1);
  const int m_bins = static_cast<int>(ps.mean.size());
  for (int m = 1; m < m_bins; ++m) {
    const double se = std::hypot(ps.se[m], pre.se[m_bins - m]);
    EXPECT_NEAR(ps.mean[m], pre.mean[m_bins - m], 4.0 * se) << "bin " << m;
  }
}

TEST(PostselectedAverage, EmptySubsetReported) {
  const Ensemble plus = simulate_ensemble(qnd_config(HeraldPolicy::plus, 50, 7));
  // ideal QND heralded +z never yields a -z outcome
  try {
    postselected_average(plus, 0);
    FAIL() << "expected EmptySubsetError";
  } catch (const EmptySubsetError& e) {
    EXPECT_NE(std::string(e.what()).find("0 of 50"), std::string::npos);
  }
}

TEST(WeightedAverage, EqualWeightsReduceToPlainMean) {
  // QND ideal heralding: rho00(T) = 1 for every run
  const Ensemble plus =
      simulate_ensemble(qnd_config(HeraldPolicy::plus, 400, 8));
  const TimeSeriesStat wp = weighted_average(plus);
  const TimeSeriesStat plain = preselected_average(plus, HeraldOutcome::plus);
  for (std::size_t m = 0; m < wp.mean.size(); ++m)
    EXPECT_EQ(wp.mean[m], plain.mean[m]);
  EXPECT_DOUBLE_EQ(wp.n_eff[0], 400.0);
}

TEST(WeightedAverage, ZeroTotalWeightRejected) {
  // ideal QND heralding in -z pins every rho00(T) to exactly zero
  const Ensemble minus =
      simulate_ensemble(qnd_config(HeraldPolicy::minus, 50, 24));
  EXPECT_THROW(weighted_average(minus), DegenerateConditioningError);
}

TEST(WeightedAverage, AgreesWithPostselected) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 10000, 9));
  const TimeSeriesStat wp = weighted_average(mixed);
  const TimeSeriesStat ps = postselected_average(mixed, 1);
  for (std::size_t m = 0; m < wp.mean.size(); ++m) {
    const double se = std::hypot(wp.se[m], ps.se[m]);
    EXPECT_NEAR(wp.mean[m], ps.mean[m], 4.0 * se) << "bin " << m;
  }
}

TEST(WeightedAverage, EquivalenceAcrossIndependentEnsembles) {
  // over 20 independent ensembles the per-bin difference between the
  // weighted and post-selected averages has mean zero within 4 standard
  // errors of the seed-to-seed scatter (plain accumulation, no bootstrap)
  const int n_seeds = 20;
  const int m_bins = 100;
  std::vector<std::vector<double>> diffs(n_seeds);
  for (int s = 0; s < n_seeds; ++s) {
    const Ensemble e = simulate_ensemble(
        reference_config(HeraldPolicy::mixed, 10000, 3100 + s));
    std::vector<double> wp_acc(m_bins, 0.0), ps_acc(m_bins, 0.0);
    double wp_den = 0.0, ps_den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double w = e.trajectories[i].states.back().m00;
      const bool sel = e.records[i].final_outcome.value_or(0) == 1;
      wp_den += w;
      ps_den += sel;
      const auto& v = e.records[i].voltages;
      for (int m = 0; m < m_bins; ++m) {
        wp_acc[m] += w * v[m];
        if (sel) ps_acc[m] += v[m];
      }
    }
    diffs[s].resize(m_bins);
    for (int m = 0; m < m_bins; ++m)
      diffs[s][m] = wp_acc[m] / wp_den - ps_acc[m] / ps_den;
  }
  for (int m = 0; m < m_bins; ++m) {
    double mean = 0.0;
    for (int s = 0; s < n_seeds; ++s) mean += diffs[s][m];
    mean /= n_seeds;
    double var = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
      const double d = diffs[s][m] - mean;
      var += d * d;
    }
    const double se = std::sqrt(var / (n_seeds - 1) / n_seeds);
    EXPECT_NEAR(mean, 0.0, 4.0 * se) << "bin " << m;
  }
}

TEST(SignalCorrelation, NoisierThanHybridAtEqualSampleSize) {
  const Ensemble ens =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 5000, 22));
  const auto order = monq::detail::canonical_order(ens);
  const std::size_t n = order.size();
  const int t = 20, tp = 60;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j)
    w[j] = ens.trajectories[order[j]].states[tp].m00;

  auto fn = [&](const std::uint32_t* counts, double* out) {
    double hyb_num = 0.0, hyb_den = 0.0;
    double s_vv = 0.0, s_v = 0.0, s_vp = 0.0, cnt = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t c = counts[j];
      if (c == 0) continue;
      const auto& v = ens.records[order[j]].voltages;
      hyb_num += c * w[j] * v[t];
      hyb_den += c * w[j];
      s_vv += c * v[t] * v[tp];
      s_v += c * v[t];
      s_vp += c * v[tp];
      cnt += c;
    }
    out[0] = hyb_num / hyb_den;
    out[1] = (s_vv / cnt + s_v / cnt) / (s_vp / cnt + 1.0);
  };
  auto [point, boot] = bootstrap_vector_stat(n, 2, 200, 0.95, 909, fn);
  // both estimate the same quantity, but the signal-only route is far
  // noisier; record the measured ratio
  EXPECT_NEAR(point[0], point[1], 4.0 * std::hypot(boot[0].se, boot[1].se));
  EXPECT_GT(boot[1].se, 2.0 * boot[0].se);
  ::testing::Test::RecordProperty("se_ratio_signal_over_hybrid",
                                  boot[1].se / boot[0].se);
}

TEST(HybridGrid, AnchorColumnEqualsWeightedAverage) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 2000, 10));
  const CorrelationGrid grid = hybrid_correlation_grid(mixed);
  const TimeSeriesStat wp = weighted_average(mixed);
  const int m_bins = grid.m_bins;
  for (int t = 0; t < m_bins; ++t)
    EXPECT_EQ(grid.value(t, m_bins), wp.mean[t]) << "bin " << t;
}

TEST(HybridGrid, RetrodictedRegionMatchesPrediction) {
  const SimulationConfig cfg = reference_config(HeraldPolicy::plus, 10000, 11);
  const Ensemble ens = simulate_ensemble(cfg);
  const int tp = 50;
  const TimeSeriesStat row = hybrid_row_stat(ens, tp);
  for (int m = 0; m < tp; ++m) {
    const double pred = predict_weighted_correlation(
        m * cfg.params.dt(), tp * cfg.params.dt(), cfg.params, cfg.herald,
        cfg.prep_fidelity);
    EXPECT_NEAR(row.mean[m], pred, 4.0 * row.se[m]) << "bin " << m;
  }
}

TEST(HybridGrid, TrajectoryRegionMatchesStateState) {
  const Ensemble ens =
      simulate_ensemble(reference_config(HeraldPolicy::plus, 8000, 12));
  const int tp = 50;
  const TimeSeriesStat row = hybrid_row_stat(ens, tp);
  for (int m = tp + 1; m < static_cast<int>(row.mean.size()); m += 7) {
    const double ss = state_state_correlation(ens, m, tp);
    EXPECT_NEAR(row.mean[m], ss, 4.0 * row.se[m]) << "bin " << m;
  }
}

TEST(StateStateCorrelation, ConstantWeightsReduceToPlainMean) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 3000, 13));
  // at t' = 0 every trajectory carries weight 1/2 exactly
  const int t = 60;
  double acc = 0.0;
  for (const auto& traj : mixed.trajectories)
    acc += 2.0 * traj.states[t].m00 - 1.0;
  const double plain = acc / static_cast<double>(mixed.size());
  EXPECT_DOUBLE_EQ(state_state_correlation(mixed, t, 0), plain);
}

TEST(StateStateCorrelation, JensenGapOnTheDiagonal) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 5000, 14));
  const int tp = 50;
  double acc = 0.0;
  for (const auto& traj : mixed.trajectories)
    acc += 2.0 * traj.states[tp].m00 - 1.0;
  const double plain = acc / static_cast<double>(mixed.size());
  EXPECT_GT(state_state_correlation(mixed, tp, tp), plain);
  EXPECT_THROW(state_state_correlation(mixed, tp - 1, tp),
               ParameterDomainError);
}

TEST(SignalCorrelation, QndUnitValue) {
  SimulationConfig cfg = qnd_config(HeraldPolicy::plus, 20000, 15);
  cfg.params = PhysicalParams(0.0, kTwoPi * 95e3, 1.0, 0.0, 20e-9);
  const Ensemble ens = simulate_ensemble(cfg);
  const double est = signal_correlation_estimator(ens, 10, 60);
  EXPECT_NEAR(est, 1.0, 0.4);
  EXPECT_THROW(signal_correlation_estimator(ens, 60, 10),
               ParameterDomainError);
  EXPECT_THROW(signal_correlation_estimator(ens, 60, 60),
               ParameterDomainError);
}

TEST(SignalCorrelation, AgreesWithHybridBelowDiagonal) {
  const Ensemble ens =
      simulate_ensemble(reference_config(HeraldPolicy::plus, 20000, 16));
  const int tp = 50;
  const TimeSeriesStat row = hybrid_row_stat(ens, tp);
  // the signal-only estimator is far noisier; allow its own scale
  const double n = static_cast<double>(ens.size());
  const double sig_se =
      (ens.config.params.a2() + 1.0) / std::sqrt(n);  // conservative scale
  for (int m = 5; m < tp; m += 9) {
    const double est = signal_correlation_estimator(ens, m, tp);
    EXPECT_NEAR(est, row.mean[m], 4.0 * std::hypot(row.se[m], sig_se))
        << "bin " << m;
  }
}

TEST(SignalCorrelation, DegenerateDenominatorGuard) {
  // hand-built ensemble with V = -1 everywhere: avg V(t') + 1 = 0
  Ensemble ens;
  ens.config = reference_config(HeraldPolicy::mixed, 4, 17);
  ens.config.n_trajectories = 4;
  const int m_bins = ens.config.n_bins();
  for (int i = 0; i < 4; ++i) {
    MeasurementRecord rec;
    rec.traj_id = i;
    rec.herald = HeraldOutcome::none;
    rec.voltages.assign(m_bins, -1.0);
    rec.final_outcome = 0;
    ens.records.push_back(rec);
    Trajectory traj;
    traj.states.assign(m_bins + 1, Hermitian2::minus_z());
    ens.trajectories.push_back(traj);
  }
  EXPECT_THROW(signal_correlation_estimator(ens, 1, 5),
               DegenerateConditioningError);
}

TEST(RegressionOracle, CoincidenceLimitIsTracePlusShotNoise) {
  const PhysicalParams p = PhysicalParams::reference_defaults();
  for (const auto& initial :
       {Hermitian2::maximally_mixed(), Hermitian2::diagonal(0.95)}) {
    // distinct bins at vanishing separation: -> Tr(rho) = 1 for any state
    const double near_one =
        regression_correlation_oracle(0.4e-6, 0.4e-6 + 1e-12, p, initial);
    EXPECT_NEAR(near_one, 1.0, 1e-6);
    // coinciding bins add the readout variance a^2
    const double same =
        regression_correlation_oracle(0.4e-6, 0.4e-6, p, initial);
    EXPECT_NEAR(same, 1.0 + p.a2(), 1e-6);
  }
  EXPECT_THROW(regression_correlation_oracle(1e-6, 0.5e-6, p,
                                             Hermitian2::maximally_mixed()),
               ParameterDomainError);
}

TEST(RegressionOracle, MatchesMonteCarlo) {
  const SimulationConfig cfg = reference_config(HeraldPolicy::mixed, 20000, 18);
  const Ensemble ens = simulate_ensemble(cfg);
  const Hermitian2 initial = Hermitian2::maximally_mixed();
  const int pairs[3][2] = {{10, 40}, {10, 90}, {40, 90}};
  for (const auto& pr : pairs) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& rec : ens.records) {
      const double prod = rec.voltages[pr[0]] * rec.voltages[pr[1]];
      sum += prod;
      sum2 += prod * prod;
    }
    const double n = static_cast<double>(ens.size());
    const double mc = sum / n;
    const double se = std::sqrt((sum2 / n - mc * mc) / n);
    const double oracle = regression_correlation_oracle(
        pr[0] * cfg.params.dt(), pr[1] * cfg.params.dt(), cfg.params, initial);
    EXPECT_NEAR(mc, oracle, 4.0 * se) << "pair (" << pr[0] << "," << pr[1] << ")";
  }
}

TEST(BootstrapCi, KnownSamplingLaws) {
  // constant inputs: zero-width interval
  std::vector<double> constant(500, 3.25);
  const BootstrapSummary c = bootstrap_ci(constant, 200, 0.95, 1);
  EXPECT_DOUBLE_EQ(c.se, 0.0);
  EXPECT_DOUBLE_EQ(c.lo, 3.25);
  EXPECT_DOUBLE_EQ(c.hi, 3.25);

  // iid standard normals: SE within 15% of n^{-1/2}
  Rng rng(77);
  std::vector<double> values(10000);
  for (auto& v : values) v = rng.normal();
  const BootstrapSummary s = bootstrap_ci(values, 200, 0.95, 2);
  EXPECT_NEAR(s.se, 0.01, 0.0015);

  // doubling n halves the SE within 20%
  std::vector<double> half(values.begin(), values.begin() + 2500);
  const BootstrapSummary h = bootstrap_ci(half, 200, 0.95, 3);
  EXPECT_NEAR(h.se / s.se, 2.0, 0.4);

  std::vector<double> tiny(1, 1.0);
  EXPECT_THROW(bootstrap_ci(tiny, 200, 0.95, 4), InsufficientDataError);
  EXPECT_THROW(bootstrap_ci(constant, 50, 0.95, 5), ParameterDomainError);
}

TEST(Estimators, PermutationInvariance) {
  const Ensemble ens =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 2000, 19));
  Ensemble shuffled = ens;
  std::vector<std::size_t> perm(ens.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 gen(123);
  std::shuffle(perm.begin(), perm.end(), gen);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.records[i] = ens.records[perm[i]];
    shuffled.trajectories[i] = ens.trajectories[perm[i]];
  }

  const TimeSeriesStat wp_a = weighted_average(ens);
  const TimeSeriesStat wp_b = weighted_average(shuffled);
  const TimeSeriesStat ps_a = postselected_average(ens, 1);
  const TimeSeriesStat ps_b = postselected_average(shuffled, 1);
  for (std::size_t m = 0; m < wp_a.mean.size(); ++m) {
    EXPECT_EQ(wp_a.mean[m], wp_b.mean[m]);
    EXPECT_EQ(wp_a.se[m], wp_b.se[m]);
    EXPECT_EQ(ps_a.mean[m], ps_b.mean[m]);
  }
  EXPECT_EQ(state_state_correlation(ens, 60, 30),
            state_state_correlation(shuffled, 60, 30));
  EXPECT_EQ(signal_correlation_estimator(ens, 20, 70),
            signal_correlation_estimator(shuffled, 20, 70));
  const CorrelationGrid ga = hybrid_correlation_grid(ens);
  const CorrelationGrid gb = hybrid_correlation_grid(shuffled);
  for (std::size_t i = 0; i < ga.values.size(); ++i)
    EXPECT_EQ(ga.values[i], gb.values[i]);
}

TEST(ReliabilityDiagram, BinsAreConsistent) {
  const Ensemble mixed =
      simulate_ensemble(reference_config(HeraldPolicy::mixed, 20000, 20));
  const auto bins = reliability_diagram(mixed, 20);
  long long total = 0;
  int nonempty = 0;
  int inside = 0;
  for (const auto& b : bins) {
    total += b.count;
    if (b.count == 0) continue;
    ++nonempty;
    const auto [lo, hi] = wilson_interval(b.successes, b.count, 3.3);
    if (lo <= b.mean_pred && b.mean_pred <= hi) ++inside;
  }
  EXPECT_EQ(total, 20000);
  EXPECT_GE(nonempty, 10);
  EXPECT_EQ(inside, nonempty);
}

TEST(WilsonInterval, KnownValues) {
  // symmetric case
  const auto [lo, hi] = wilson_interval(50, 100, 1.96);
  EXPECT_NEAR(lo, 0.4038, 5e-4);
  EXPECT_NEAR(hi, 0.5962, 5e-4);
  // extreme counts stay inside [0, 1]
  const auto [lo0, hi0] = wilson_interval(0, 20, 2.5758);
  EXPECT_GE(lo0, 0.0);
  EXPECT_LT(hi0, 0.5);
}

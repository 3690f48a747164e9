#pragma once
// Ensemble statistics: pre/post-selected and weighted signal averages, the
// hybrid two-time correlation grid, the signal-only and state-state
// estimators, a quantum-regression oracle, and whole-trajectory bootstrap
// uncertainties.
//
// Every reduction walks the ensemble in canonical order (sorted by
// trajectory id), so estimator point values are bit-identical under any
// permutation of the stored trajectories and independent of how many workers
// generated them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "monq/errors.hpp"
#include "monq/master_equation.hpp"
#include "monq/params.hpp"
#include "monq/rng.hpp"
#include "monq/trajectory.hpp"

namespace monq {

struct TimeSeriesStat {
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<double> n_eff;
};

struct BootstrapSummary {
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

enum class EstimatorTag { hybrid, signal_only, state_state };

inline const char* estimator_tag_name(EstimatorTag t) {
  switch (t) {
    case EstimatorTag::hybrid: return "hybrid";
    case EstimatorTag::signal_only: return "signal-only";
    default: return "state-state";
  }
}

// Correlation estimator over (t, t') bin pairs. Rows run over the voltage
// bins t = 0..M-1; columns over the weighting bins t' = 0..M, the last column
// anchoring at the final time T.
struct CorrelationGrid {
  int m_bins = 0;
  EstimatorTag tag = EstimatorTag::hybrid;
  std::vector<double> values;      // values[tp * m_bins + t]
  std::vector<double> weight_sum;  // per t' column

  double value(int t_bin, int tp_bin) const {
    return values[static_cast<std::size_t>(tp_bin) * m_bins + t_bin];
  }
  std::vector<double> row(int tp_bin) const {
    const auto* base = values.data() + static_cast<std::size_t>(tp_bin) * m_bins;
    return std::vector<double>(base, base + m_bins);
  }
};

namespace detail {

inline std::vector<std::uint32_t> canonical_order(const Ensemble& ens) {
  std::vector<std::uint32_t> order(ens.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ens.records[a].traj_id < ens.records[b].traj_id;
  });
  return order;
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

// Evaluate a vector statistic under B whole-trajectory resamples. fn receives
// per-position multiplicities (n entries summing to n) and writes the
// statistic into its output span; the point estimate uses all-ones counts.
template <class Fn>
inline std::pair<std::vector<double>, std::vector<BootstrapSummary>>
bootstrap_vector_stat(std::size_t n, std::size_t dim, int B, double level,
                      std::uint64_t seed, Fn&& fn) {
  if (B < 100)
    throw ParameterDomainError("bootstrap: B must be >= 100");
  if (n < 2)
    throw InsufficientDataError("bootstrap: need at least 2 trajectories");

  std::vector<std::uint32_t> counts(n, 1u);
  std::vector<double> point(dim, 0.0);
  fn(counts.data(), point.data());

  std::vector<double> reps(static_cast<std::size_t>(B) * dim);
  Rng rng(seed);
  for (int b = 0; b < B; ++b) {
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
    fn(counts.data(), reps.data() + static_cast<std::size_t>(b) * dim);
  }

  std::vector<BootstrapSummary> summaries(dim);
  std::vector<double> column(B);
  const double q_lo = 0.5 * (1.0 - level);
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (int b = 0; b < B; ++b) {
      column[b] = reps[static_cast<std::size_t>(b) * dim + d];
      mean += column[b];
    }
    mean /= B;
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      const double r = column[b] - mean;
      var += r * r;
    }
    var /= (B - 1);
    std::sort(column.begin(), column.end());
    summaries[d].se = std::sqrt(var);
    summaries[d].lo = detail::quantile_sorted(column, q_lo);
    summaries[d].hi = detail::quantile_sorted(column, 1.0 - q_lo);
  }
  return {std::move(point), std::move(summaries)};
}

// Percentile bootstrap of the mean of scalar per-run values.
inline BootstrapSummary bootstrap_ci(std::span<const double> values, int B,
                                     double level, std::uint64_t seed) {
  const std::size_t n = values.size();
  auto [point, summaries] = bootstrap_vector_stat(
      n, 1, B, level, seed,
      [&](const std::uint32_t* counts, double* out) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += counts[i] * values[i];
        out[0] = s / static_cast<double>(n);
      });
  (void)point;
  return summaries[0];
}

namespace detail {

// Per-bin weighted signal means with bootstrap over the given subset.
// weights == nullptr means unit weights.
inline TimeSeriesStat signal_series_stat(const Ensemble& ens,
                                         const std::vector<std::uint32_t>& subset,
                                         const std::vector<double>* weights,
                                         int B, double level,
                                         std::uint64_t seed) {
  const int m_bins = ens.config.n_bins();
  const std::size_t n = subset.size();

  auto fn = [&](const std::uint32_t* counts, double* out) {
    std::vector<double> acc(m_bins, 0.0);
    double wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t c = counts[j];
      if (c == 0) continue;
      const double w = c * (weights ? (*weights)[j] : 1.0);
      if (w == 0.0) continue;
      wsum += w;
      const auto& v = ens.records[subset[j]].voltages;
      for (int m = 0; m < m_bins; ++m) acc[m] += w * v[m];
    }
    if (!(wsum > 0.0))
      throw DegenerateConditioningError(
          "signal average: total weight is zero");
    for (int m = 0; m < m_bins; ++m) out[m] = acc[m] / wsum;
  };

  auto [point, boot] = bootstrap_vector_stat(n, m_bins, B, level, seed, fn);

  double n_eff = static_cast<double>(n);
  if (weights) {
    double s1 = 0.0, s2 = 0.0;
    for (double w : *weights) {
      s1 += w;
      s2 += w * w;
    }
    if (!(s1 > 0.0))
      throw DegenerateConditioningError("signal average: total weight is zero");
    n_eff = s1 * s1 / s2;
  }

  TimeSeriesStat stat;
  stat.mean = std::move(point);
  stat.se.resize(m_bins);
  stat.ci_lo.resize(m_bins);
  stat.ci_hi.resize(m_bins);
  stat.n_eff.assign(m_bins, n_eff);
  for (int m = 0; m < m_bins; ++m) {
    stat.se[m] = boot[m].se;
    stat.ci_lo[m] = boot[m].lo;
    stat.ci_hi[m] = boot[m].hi;
  }
  return stat;
}

}  // namespace detail

// Mean signal over runs heralded in the filter state.
inline TimeSeriesStat preselected_average(const Ensemble& ens,
                                          HeraldOutcome filter, int B = 200,
                                          double level = 0.95) {
  const auto order = detail::canonical_order(ens);
  std::vector<std::uint32_t> subset;
  for (auto i : order)
    if (ens.records[i].herald == filter) subset.push_back(i);
  if (subset.empty())
    throw EmptySubsetError("preselected_average: empty selection (0 of " +
                           std::to_string(ens.size()) + " trajectories)");
  return detail::signal_series_stat(ens, subset, nullptr, B, level,
                                    derive_seed(ens.config.seed, 0xB001));
}

// Mean signal over runs whose final projective outcome matched (1 = +z).
inline TimeSeriesStat postselected_average(const Ensemble& ens, int outcome,
                                           int B = 200, double level = 0.95) {
  const auto order = detail::canonical_order(ens);
  std::vector<std::uint32_t> subset;
  for (auto i : order)
    if (ens.records[i].final_outcome && *ens.records[i].final_outcome == outcome)
      subset.push_back(i);
  if (subset.empty())
    throw EmptySubsetError("postselected_average: empty selection (0 of " +
                           std::to_string(ens.size()) + " trajectories)");
  return detail::signal_series_stat(ens, subset, nullptr, B, level,
                                    derive_seed(ens.config.seed, 0xB002));
}

// All runs, each signal weighted by its final excited-state population
// rho00(T): sum_i rho_i00(T) V_i(t) / sum_i rho_i00(T).
inline TimeSeriesStat weighted_average(const Ensemble& ens, int B = 200,
                                       double level = 0.95) {
  const auto order = detail::canonical_order(ens);
  std::vector<double> weights(order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    weights[j] = ens.trajectories[order[j]].states.back().m00;
  std::vector<std::uint32_t> subset(order.begin(), order.end());
  return detail::signal_series_stat(ens, subset, &weights, B, level,
                                    derive_seed(ens.config.seed, 0xB003));
}

// Hybrid two-time estimator V_WP(t, t') = sum_i rho_i00(t') V_i(t) / sum_i
// rho_i00(t') over the full grid. Cells of a t' column whose weight sum is
// negligible are set to NaN.
inline CorrelationGrid hybrid_correlation_grid(const Ensemble& ens) {
  const int m_bins = ens.config.n_bins();
  const auto order = detail::canonical_order(ens);
  const std::size_t n = order.size();

  CorrelationGrid grid;
  grid.m_bins = m_bins;
  grid.tag = EstimatorTag::hybrid;
  grid.values.assign(static_cast<std::size_t>(m_bins) * (m_bins + 1), 0.0);
  grid.weight_sum.assign(m_bins + 1, 0.0);

  std::vector<double> acc(m_bins);
  for (int tp = 0; tp <= m_bins; ++tp) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto i = order[j];
      const double w = ens.trajectories[i].states[tp].m00;
      wsum += w;
      const auto& v = ens.records[i].voltages;
      for (int m = 0; m < m_bins; ++m) acc[m] += w * v[m];
    }
    grid.weight_sum[tp] = wsum;
    double* out = grid.values.data() + static_cast<std::size_t>(tp) * m_bins;
    if (wsum > 1e-9 * static_cast<double>(n)) {
      for (int m = 0; m < m_bins; ++m) out[m] = acc[m] / wsum;
    } else {
      for (int m = 0; m < m_bins; ++m) out[m] = std::nan("");
    }
  }
  return grid;
}

// One fixed-t' row of the hybrid estimator with bootstrap uncertainties.
inline TimeSeriesStat hybrid_row_stat(const Ensemble& ens, int tp_bin,
                                      int B = 200, double level = 0.95) {
  const auto order = detail::canonical_order(ens);
  std::vector<double> weights(order.size());
  for (std::size_t j = 0; j < order.size(); ++j)
    weights[j] = ens.trajectories[order[j]].states[tp_bin].m00;
  std::vector<std::uint32_t> subset(order.begin(), order.end());
  return detail::signal_series_stat(
      ens, subset, &weights, B, level,
      derive_seed(ens.config.seed, 0xB004 + static_cast<std::uint64_t>(tp_bin)));
}

// Signal-only estimator of the same quantity for t < t':
// (avg[V(t)V(t')] + avg[V(t)]) / (avg[V(t')] + 1).
inline double signal_correlation_estimator(const Ensemble& ens, int t_bin,
                                           int tp_bin) {
  if (!(t_bin < tp_bin))
    throw ParameterDomainError(
        "signal_correlation_estimator: defined only for t < t'");
  const auto order = detail::canonical_order(ens);
  double s_vv = 0.0, s_v = 0.0, s_vp = 0.0;
  for (auto i : order) {
    const auto& v = ens.records[i].voltages;
    s_vv += v[t_bin] * v[tp_bin];
    s_v += v[t_bin];
    s_vp += v[tp_bin];
  }
  const double n = static_cast<double>(order.size());
  const double denom = s_vp / n + 1.0;
  if (std::abs(denom) <= 1e-6)
    throw DegenerateConditioningError(
        "signal_correlation_estimator: avg V(t') + 1 is below 1e-6");
  return (s_vv / n + s_v / n) / denom;
}

// Trajectory-only estimator for t >= t':
// sum_i rho_i00(t') (2 rho_i00(t) - 1) / sum_i rho_i00(t').
inline double state_state_correlation(const Ensemble& ens, int t_bin,
                                      int tp_bin) {
  if (!(t_bin >= tp_bin))
    throw ParameterDomainError(
        "state_state_correlation: defined only for t >= t'");
  const auto order = detail::canonical_order(ens);
  double num = 0.0, den = 0.0;
  for (auto i : order) {
    const double w = ens.trajectories[i].states[tp_bin].m00;
    num += w * (2.0 * ens.trajectories[i].states[t_bin].m00 - 1.0);
    den += w;
  }
  if (!(den > 0.0))
    throw DegenerateConditioningError(
        "state_state_correlation: zero weight sum");
  return num / den;
}

// Quantum-regression value of avg[V(t1) V(t2)] for t2 >= t1: propagate the
// symmetrized product (sigma_z rho(t1) + rho(t1) sigma_z)/2 = diag(rho00,
// -rho11) by the unconditioned master equation and take Tr(sigma_z .). At
// coinciding bins the readout shot noise adds a^2.
inline double regression_correlation_oracle(double t1, double t2,
                                            const PhysicalParams& p,
                                            const Hermitian2& initial) {
  if (t2 < t1)
    throw ParameterDomainError("regression_correlation_oracle: t2 >= t1");
  Hermitian2 rho_t1 = initial;
  if (t1 > 0.0) {
    const int sub = std::max(1, static_cast<int>(std::ceil(t1 / 1e-9)));
    rho_t1 = propagate_deterministic(initial, p, t1, sub);
  }
  Hermitian2 sym{rho_t1.m00, -rho_t1.m11, 0.0, 0.0};
  const double tau = t2 - t1;
  if (tau > 0.0) {
    const int sub = std::max(1, static_cast<int>(std::ceil(tau / 1e-9)));
    sym = propagate_deterministic(sym, p, tau, sub);
  }
  double value = sym.m00 - sym.m11;
  if (t1 == t2) value += p.a2();
  return value;
}

// Per-bin mean of a state functional over the ensemble (martingale checks).
template <class F>
inline TimeSeriesStat state_series_stat(const Ensemble& ens, F&& f,
                                        int B = 200, double level = 0.95,
                                        std::uint64_t stream = 0xB010) {
  const int m_states = ens.config.n_bins() + 1;
  const auto order = detail::canonical_order(ens);
  const std::size_t n = order.size();

  auto fn = [&](const std::uint32_t* counts, double* out) {
    std::vector<double> acc(m_states, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint32_t c = counts[j];
      if (c == 0) continue;
      const auto& states = ens.trajectories[order[j]].states;
      for (int m = 0; m < m_states; ++m) acc[m] += c * f(states[m]);
    }
    for (int m = 0; m < m_states; ++m) out[m] = acc[m] / static_cast<double>(n);
  };

  auto [point, boot] = bootstrap_vector_stat(
      n, m_states, B, level, derive_seed(ens.config.seed, stream), fn);

  TimeSeriesStat stat;
  stat.mean = std::move(point);
  stat.se.resize(m_states);
  stat.ci_lo.resize(m_states);
  stat.ci_hi.resize(m_states);
  stat.n_eff.assign(m_states, static_cast<double>(n));
  for (int m = 0; m < m_states; ++m) {
    stat.se[m] = boot[m].se;
    stat.ci_lo[m] = boot[m].lo;
    stat.ci_hi[m] = boot[m].hi;
  }
  return stat;
}

// Discrete second difference across the t = t' diagonal of a fixed-t' row:
// f(t'+dt) - 2 f(t') + f(t'-dt).
inline double second_difference(std::span<const double> row, int at) {
  return row[at + 1] - 2.0 * row[at] + row[at - 1];
}

struct ReliabilityBin {
  int count = 0;
  int successes = 0;
  double mean_pred = 0.0;
};

// Reliability diagram of the final projective outcome against the predicted
// probability rho00(T), in nbins equal probability bins.
inline std::vector<ReliabilityBin> reliability_diagram(const Ensemble& ens,
                                                       int nbins = 20) {
  std::vector<ReliabilityBin> bins(nbins);
  const auto order = detail::canonical_order(ens);
  for (auto i : order) {
    if (!ens.records[i].final_outcome) continue;
    const double p = ens.trajectories[i].states.back().m00;
    int b = static_cast<int>(p * nbins);
    if (b >= nbins) b = nbins - 1;
    if (b < 0) b = 0;
    bins[b].count += 1;
    bins[b].successes += *ens.records[i].final_outcome;
    bins[b].mean_pred += p;
  }
  for (auto& b : bins)
    if (b.count > 0) b.mean_pred /= b.count;
  return bins;
}

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(int successes, int n,
                                                 double z) {
  const double nn = static_cast<double>(n);
  const double phat = successes / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace monq

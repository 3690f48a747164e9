#pragma once
// CSV export and import for the fixed output schemas. Numbers are serialized
// with shortest round-trip precision via std::to_chars; no locale is ever
// consulted.
//
//   records.csv      traj_id, bin, v
//   trajectories.csv traj_id, time_ns, rho00, re_rho01, im_rho01, herald,
//                    final_outcome
//   averages.csv     time_ns, v_pre, v_post, v_wp, analytic, ci_lo, ci_hi,
//                    n_eff
//   corrgrid.csv     t_ns, tprime_ns, value, weight_sum, estimator

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "monq/errors.hpp"
#include "monq/trajectory.hpp"

namespace monq::csv {

inline void append_number(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline void append_number(std::string& out, long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline const char* herald_name(HeraldOutcome h) {
  switch (h) {
    case HeraldOutcome::plus: return "plus";
    case HeraldOutcome::minus: return "minus";
    default: return "none";
  }
}

inline HeraldOutcome herald_from_name(std::string_view s,
                                      const std::string& where) {
  if (s == "plus") return HeraldOutcome::plus;
  if (s == "minus") return HeraldOutcome::minus;
  if (s == "none") return HeraldOutcome::none;
  throw ConfigError(where + ": unknown herald '" + std::string(s) + "'");
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << body;
}

inline std::string render_records(const Ensemble& ens) {
  std::string out = "traj_id,bin,v\n";
  out.reserve(out.size() + ens.size() * ens.config.n_bins() * 24);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& rec = ens.records[i];
    for (std::size_t m = 0; m < rec.voltages.size(); ++m) {
      append_number(out, static_cast<long long>(rec.traj_id));
      out.push_back(',');
      append_number(out, static_cast<long long>(m));
      out.push_back(',');
      append_number(out, rec.voltages[m]);
      out.push_back('\n');
    }
  }
  return out;
}

inline std::string render_trajectories(const Ensemble& ens, double dt_ns) {
  std::string out = "traj_id,time_ns,rho00,re_rho01,im_rho01,herald,final_outcome\n";
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const auto& rec = ens.records[i];
    const auto& states = ens.trajectories[i].states;
    for (std::size_t m = 0; m < states.size(); ++m) {
      append_number(out, static_cast<long long>(rec.traj_id));
      out.push_back(',');
      append_number(out, static_cast<double>(m) * dt_ns);
      out.push_back(',');
      append_number(out, states[m].m00);
      out.push_back(',');
      append_number(out, states[m].re01);
      out.push_back(',');
      append_number(out, states[m].im01);
      out.push_back(',');
      out += herald_name(rec.herald);
      out.push_back(',');
      if (rec.final_outcome)
        append_number(out, static_cast<long long>(*rec.final_outcome));
      else
        out += "nan";
      out.push_back('\n');
    }
  }
  return out;
}

inline std::string render_averages(const std::vector<double>& time_ns,
                                   const std::vector<double>& v_pre,
                                   const std::vector<double>& v_post,
                                   const std::vector<double>& v_wp,
                                   const std::vector<double>& analytic,
                                   const std::vector<double>& ci_lo,
                                   const std::vector<double>& ci_hi,
                                   const std::vector<double>& n_eff) {
  std::string out = "time_ns,v_pre,v_post,v_wp,analytic,ci_lo,ci_hi,n_eff\n";
  for (std::size_t m = 0; m < time_ns.size(); ++m) {
    append_number(out, time_ns[m]);
    for (const auto* col : {&v_pre, &v_post, &v_wp, &analytic, &ci_lo, &ci_hi,
                            &n_eff}) {
      out.push_back(',');
      append_number(out, (*col)[m]);
    }
    out.push_back('\n');
  }
  return out;
}

struct CorrGridRow {
  double t_ns;
  double tprime_ns;
  double value;
  double weight_sum;
  std::string estimator;
};

inline std::string render_corrgrid(const std::vector<CorrGridRow>& rows) {
  std::string out = "t_ns,tprime_ns,value,weight_sum,estimator\n";
  for (const auto& r : rows) {
    append_number(out, r.t_ns);
    out.push_back(',');
    append_number(out, r.tprime_ns);
    out.push_back(',');
    append_number(out, r.value);
    out.push_back(',');
    append_number(out, r.weight_sum);
    out.push_back(',');
    out += r.estimator;
    out.push_back('\n');
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

// Read records.csv back into per-trajectory voltage vectors keyed by id.
struct ParsedRecords {
  std::vector<std::uint64_t> traj_ids;
  std::vector<std::vector<double>> voltages;
};

inline ParsedRecords read_records(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  ParsedRecords out;
  std::string line;
  std::getline(f, line);  // header
  std::size_t lineno = 1;
  std::uint64_t current = 0;
  bool have_current = false;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = detail::split(line, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (cols.size() != 3) throw ConfigError(where + ": expected 3 columns");
    const auto id = static_cast<std::uint64_t>(parse_double(cols[0], where));
    if (!have_current || id != current) {
      out.traj_ids.push_back(id);
      out.voltages.emplace_back();
      current = id;
      have_current = true;
    }
    out.voltages.back().push_back(parse_double(cols[2], where));
  }
  return out;
}

struct ParsedTrajectories {
  std::vector<std::uint64_t> traj_ids;
  std::vector<std::vector<Hermitian2>> states;
  std::vector<HeraldOutcome> heralds;
  std::vector<int> final_outcomes;  // -1 when absent
};

inline ParsedTrajectories read_trajectories(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  ParsedTrajectories out;
  std::string line;
  std::getline(f, line);
  std::size_t lineno = 1;
  std::uint64_t current = 0;
  bool have_current = false;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = detail::split(line, ',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (cols.size() != 7) throw ConfigError(where + ": expected 7 columns");
    const auto id = static_cast<std::uint64_t>(parse_double(cols[0], where));
    if (!have_current || id != current) {
      out.traj_ids.push_back(id);
      out.states.emplace_back();
      out.heralds.push_back(herald_from_name(cols[5], where));
      const bool has_final = cols[6] != "nan";
      out.final_outcomes.push_back(
          has_final ? static_cast<int>(parse_double(cols[6], where)) : -1);
      current = id;
      have_current = true;
    }
    const double rho00 = parse_double(cols[2], where);
    const double re01 = parse_double(cols[3], where);
    const double im01 = parse_double(cols[4], where);
    out.states.back().push_back({rho00, 1.0 - rho00, re01, im01});
  }
  return out;
}

}  // namespace monq::csv

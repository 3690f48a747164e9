#pragma once
// Flat key-value configuration files. Frequencies are entered in cycles (Hz)
// and converted to angular rates internally.
//
//   rabi_frequency_hz   = 1.16e6        # Omega_R / 2pi
//   measurement_rate_hz = 95e3          # k / 2pi
//   efficiency          = 0.35
//   t2_star_us          = 16
//   dt_ns               = 20
//   total_time_us       = 2
//   n_trajectories      = 20000
//   seed                = 1
//   prep_fidelity       = 0.95
//   herald              = plus | minus | mixed
//   integrator          = bayesian | euler-sme
//   oracle_mode         = false
//   side_panel_tprimes_ns = 1000, 2000  # optional, fig3 side panels

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "monq/errors.hpp"
#include "monq/params.hpp"
#include "monq/trajectory.hpp"

namespace monq {

struct FileConfig {
  double rabi_frequency_hz = 1.16e6;
  double measurement_rate_hz = 95.0e3;
  double efficiency = 0.35;
  double t2_star_us = 16.0;
  double dt_ns = 20.0;
  double total_time_us = 2.0;
  long long n_trajectories = 20000;
  std::uint64_t seed = 1;
  double prep_fidelity = 0.95;
  std::string herald = "plus";
  std::string integrator = "bayesian";
  bool oracle_mode = false;
  std::vector<double> side_panel_tprimes_ns;  // empty: default T/2 and T
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_config_double(std::string_view v, const std::string& where) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(where + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_config_bool(std::string_view v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + std::string(v) + "'");
}

}  // namespace detail

inline FileConfig parse_config_stream(std::istream& in,
                                      const std::string& name) {
  FileConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos)
      s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string_view value = detail::trim(s.substr(eq + 1));
    if (value.empty()) throw ConfigError(where + ": empty value");

    if (key == "rabi_frequency_hz")
      cfg.rabi_frequency_hz = detail::parse_config_double(value, where);
    else if (key == "measurement_rate_hz")
      cfg.measurement_rate_hz = detail::parse_config_double(value, where);
    else if (key == "efficiency")
      cfg.efficiency = detail::parse_config_double(value, where);
    else if (key == "t2_star_us")
      cfg.t2_star_us = detail::parse_config_double(value, where);
    else if (key == "dt_ns")
      cfg.dt_ns = detail::parse_config_double(value, where);
    else if (key == "total_time_us")
      cfg.total_time_us = detail::parse_config_double(value, where);
    else if (key == "n_trajectories")
      cfg.n_trajectories =
          static_cast<long long>(detail::parse_config_double(value, where));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(
          detail::parse_config_double(value, where));
    else if (key == "prep_fidelity")
      cfg.prep_fidelity = detail::parse_config_double(value, where);
    else if (key == "herald") {
      if (value != "plus" && value != "minus" && value != "mixed")
        throw ConfigError(where + ": herald must be plus, minus or mixed");
      cfg.herald = std::string(value);
    } else if (key == "integrator") {
      if (value != "bayesian" && value != "euler-sme")
        throw ConfigError(where + ": integrator must be bayesian or euler-sme");
      cfg.integrator = std::string(value);
    } else if (key == "oracle_mode")
      cfg.oracle_mode = detail::parse_config_bool(value, where);
    else if (key == "side_panel_tprimes_ns") {
      cfg.side_panel_tprimes_ns.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto tok = detail::trim(rest.substr(0, comma));
        if (!tok.empty())
          cfg.side_panel_tprimes_ns.push_back(
              detail::parse_config_double(tok, where));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    } else
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
  return cfg;
}

inline FileConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_stream(f, path);
}

inline SimulationConfig to_simulation_config(const FileConfig& f,
                                             const std::string& name = "config") {
  if (!(f.efficiency > 0.0))
    throw ConfigError(name +
                      ": efficiency must be > 0 (a^2 = 1/(4 k eta dt) would "
                      "divide by zero)");
  if (!(f.dt_ns > 0.0)) throw ConfigError(name + ": dt_ns must be > 0");
  if (!(f.total_time_us > 0.0))
    throw ConfigError(name + ": total_time_us must be > 0");
  const double ratio = f.total_time_us * 1000.0 / f.dt_ns;
  const auto m = static_cast<long long>(std::llround(ratio));
  if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * ratio)
    throw ConfigError(name +
                      ": total_time_us must be an integer number (>= 1) of "
                      "dt_ns bins");

  SimulationConfig cfg;
  cfg.params = PhysicalParams(kTwoPi * f.rabi_frequency_hz,
                              kTwoPi * f.measurement_rate_hz, f.efficiency,
                              1.0 / (f.t2_star_us * 1e-6), f.dt_ns * 1e-9);
  cfg.total_time = f.total_time_us * 1e-6;
  if (f.n_trajectories < 1)
    throw ConfigError(name + ": n_trajectories must be >= 1");
  cfg.n_trajectories = static_cast<int>(f.n_trajectories);
  cfg.seed = f.seed;
  cfg.prep_fidelity = f.prep_fidelity;
  cfg.herald = f.herald == "plus"
                   ? HeraldPolicy::plus
                   : (f.herald == "minus" ? HeraldPolicy::minus
                                          : HeraldPolicy::mixed);
  cfg.integrator = f.integrator == "bayesian" ? Integrator::bayesian
                                              : Integrator::euler_sme;
  cfg.oracle_mode = f.oracle_mode;
  cfg.validate();
  return cfg;
}

// Config echo for manifests: canonical keys in declaration order.
inline std::vector<std::pair<std::string, std::string>> config_echo(
    const FileConfig& f) {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("rabi_frequency_hz", num(f.rabi_frequency_hz));
  out.emplace_back("measurement_rate_hz", num(f.measurement_rate_hz));
  out.emplace_back("efficiency", num(f.efficiency));
  out.emplace_back("t2_star_us", num(f.t2_star_us));
  out.emplace_back("dt_ns", num(f.dt_ns));
  out.emplace_back("total_time_us", num(f.total_time_us));
  out.emplace_back("n_trajectories", std::to_string(f.n_trajectories));
  out.emplace_back("seed", std::to_string(f.seed));
  out.emplace_back("prep_fidelity", num(f.prep_fidelity));
  out.emplace_back("herald", f.herald);
  out.emplace_back("integrator", f.integrator);
  out.emplace_back("oracle_mode", f.oracle_mode ? "true" : "false");
  return out;
}

}  // namespace monq

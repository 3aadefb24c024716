/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "mmtc/domain.hpp"
#include "mmtc/simulator.hpp"

namespace mmtc {

/// Flat `key = value` configuration. Blank lines and text after '#' are
/// ignored. All network keys except `rho` are required; simulation keys
/// are optional and default to the preset.
///
///   lambda_b = 1.2732395447351627e-06
///   gamma1   = 0dB
struct RunConfig {
  NetworkParams params = default_params();
  SimConfig sim = SimConfig::desk();

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw ConfigError(std::string(key), "not a number: '" + std::string(text) + "'");
  return v;
}

inline long long parse_integer(std::string_view key, std::string_view text) {
  const double v = parse_real(key, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(trim(text)) + "'");
  return static_cast<long long>(v);
}

inline std::uint64_t parse_seed(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw ConfigError(std::string(key), "expected an unsigned 64-bit integer, got '" + std::string(text) + "'");
  return v;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Linear threshold from "1.5", "0dB" or "-3 dB".
inline double parse_threshold(std::string_view key, std::string_view text) {
  auto t = detail::trim(text);
  if (t.size() >= 2) {
    const auto tail = t.substr(t.size() - 2);
    if ((tail[0] == 'd' || tail[0] == 'D') && (tail[1] == 'b' || tail[1] == 'B')) {
      const double db = detail::parse_real(key, t.substr(0, t.size() - 2));
      return std::pow(10.0, db / 10.0);
    }
  }
  return detail::parse_real(key, t);
}

inline constexpr std::string_view kNetworkKeys[] = {"lambda_b", "lambda_a", "r_s",       "m_bar",
                                                    "n_channels", "alpha",  "m1",        "m2",
                                                    "gamma1",   "payload_d", "resource_tw"};

/// Parses `text` on top of `base`. With `require_network`, every network
/// key must appear.
inline RunConfig parse_config(std::string_view text, const RunConfig& base = {}, bool require_network = true) {
  RunConfig c = base;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    auto& p = c.params;
    auto& s = c.sim;
    if (key == "lambda_b") p.lambda_b = detail::parse_real(key, value);
    else if (key == "lambda_a") p.lambda_a = detail::parse_real(key, value);
    else if (key == "r_s") p.r_s = detail::parse_real(key, value);
    else if (key == "m_bar") p.m_bar = detail::parse_real(key, value);
    else if (key == "n_channels") p.n_channels = static_cast<int>(detail::parse_integer(key, value));
    else if (key == "alpha") p.alpha = detail::parse_real(key, value);
    else if (key == "m1") p.m1 = static_cast<int>(detail::parse_integer(key, value));
    else if (key == "m2") p.m2 = static_cast<int>(detail::parse_integer(key, value));
    else if (key == "gamma1") p.gamma1 = parse_threshold(key, value);
    else if (key == "payload_d") p.payload_d = detail::parse_real(key, value);
    else if (key == "resource_tw") p.resource_tw = detail::parse_real(key, value);
    else if (key == "rho") p.rho = detail::parse_real(key, value);
    else if (key == "scheme") {
      try {
        s.scheme = parse_scheme(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
      }
    } else if (key == "n_runs") s.n_runs = static_cast<long>(detail::parse_integer(key, value));
    else if (key == "master_seed") s.master_seed = detail::parse_seed(key, value);
    else if (key == "r_bs_sim") s.r_bs_sim = detail::parse_real(key, value);
    else if (key == "r_agg_sim") s.r_agg_sim = detail::parse_real(key, value);
    else if (key == "measurement_radius") s.measurement_radius = detail::parse_real(key, value);
    else throw ConfigError(key, "unknown key");
  }
  if (require_network) {
    for (auto k : kNetworkKeys) {
      if (!seen.count(std::string(k))) throw ConfigError(std::string(k), "missing required key");
    }
  }
  return c;
}

/// Inverse of parse_config; numbers keep all 17 significant digits.
inline std::string serialize_config(const RunConfig& c) {
  using detail::format_real;
  const auto& p = c.params;
  const auto& s = c.sim;
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  put("lambda_b", format_real(p.lambda_b));
  put("lambda_a", format_real(p.lambda_a));
  put("r_s", format_real(p.r_s));
  put("m_bar", format_real(p.m_bar));
  put("n_channels", std::to_string(p.n_channels));
  put("alpha", format_real(p.alpha));
  put("m1", std::to_string(p.m1));
  put("m2", std::to_string(p.m2));
  put("gamma1", format_real(p.gamma1));
  put("payload_d", format_real(p.payload_d));
  put("resource_tw", format_real(p.resource_tw));
  put("rho", format_real(p.rho));
  put("scheme", std::string(to_string(s.scheme)));
  put("n_runs", std::to_string(s.n_runs));
  put("master_seed", std::to_string(s.master_seed));
  put("r_bs_sim", format_real(s.r_bs_sim));
  put("r_agg_sim", format_real(s.r_agg_sim));
  put("measurement_radius", format_real(s.measurement_radius));
  return out;
}

inline RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "table1") {
    c.params = default_params();
    c.sim = SimConfig::table1();
  } else if (name == "desk") {
    c.params = desk_params();
    c.sim = SimConfig::desk();
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (expected table1 or desk)");
  }
  return c;
}

}  // namespace mmtc

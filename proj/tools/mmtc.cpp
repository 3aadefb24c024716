/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

// mmtc: analytic metrics, Monte-Carlo estimates and figure tables for the
// two-phase aggregation/relaying network.
//
// Exit codes: 0 ok, 2 invalid configuration or usage, 3 numerical failure,
// 4 degenerate topology.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmtc/mmtc.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using mmtc::RunConfig;
using mmtc::SchedulingScheme;
using mmtc::SimMetric;
using mmtc::SweepAxis;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTopology = 4;

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& op, const std::string& what)
      : std::runtime_error("numerical failure in " + op + ": " + what) {}
};

struct Options {
  std::string config_path;
  std::string preset;
  std::string scheme;
  std::string out;
  std::string tallies;
  std::string figure_id;
  long runs = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool with_sim = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mmtc::ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig resolve(const Options& o, std::string_view default_preset) {
  auto c = mmtc::preset(o.preset.empty() ? default_preset : std::string_view(o.preset));
  if (!o.config_path.empty()) c = mmtc::parse_config(read_file(o.config_path), c);
  if (!o.scheme.empty()) {
    try {
      c.sim.scheme = mmtc::parse_scheme(o.scheme);
    } catch (const std::invalid_argument& e) {
      throw mmtc::ConfigError("scheme", e.what());
    }
  }
  if (o.runs > 0) c.sim.n_runs = o.runs;
  if (o.seed_given) c.sim.master_seed = o.seed;
  mmtc::require_valid(c.params);
  try {
    mmtc::require_valid(c.sim);
  } catch (const std::invalid_argument& e) {
    throw mmtc::ConfigError("simulation", e.what());
  }
  return c;
}

void write_header(std::ostream& os, std::string_view command, const RunConfig& c) {
  os << "# mmtc " << mmtc::kVersion << '\n';
  os << "# command: " << command << '\n';
  mmtc::csv::comment_block(os, mmtc::serialize_config(c));
}

// Buffered so that a failing command leaves no partial file behind.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw mmtc::ConfigError("out", "cannot write '" + path + "'");
  f << text;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command_line;
  std::string started_at;
};

void write_manifest(const Manifest& m, const Options& o, const RunConfig& c, const std::string& path,
                    const std::vector<std::string>& outputs) {
  json j;
  j["config_path"] = o.config_path.empty() ? nullptr : json(o.config_path);
  j["preset"] = o.preset;
  j["command"] = m.command_line;
  j["master_seed"] = c.sim.master_seed;
  j["scheme"] = std::string(mmtc::to_string(c.sim.scheme));
  j["started_at"] = m.started_at;
  j["artifact_version"] = std::string(mmtc::kVersion);
  j["output_paths"] = outputs;
  if (path.empty()) {
    std::cerr << j.dump() << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw mmtc::ConfigError("out", "cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

std::string manifest_path_for(const std::string& out) {
  if (out.empty() || out == "-") return {};
  fs::path p(out);
  p.replace_extension(".manifest.json");
  return p.string();
}

// ---- analytic ------------------------------------------------------------

int cmd_analytic(const Options& o, const Manifest& m) {
  const auto c = resolve(o, "table1");
  mmtc::MetricsReport r;
  try {
    r = mmtc::evaluate(c.params, c.sim.scheme, mmtc::worker_count());
  } catch (const mmtc::InvalidParams&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalFailure("analytic evaluation", e.what());
  }
  std::ostringstream os;
  write_header(os, "analytic", c);
  os << "p_occupy,p_nondrop,p_suc1,p_suc2,mean_k1,p_mtd_success,avg_successful_mtds,p_channel_util,"
        "successful_mtds_per_km2\n";
  using mmtc::csv::number;
  os << number(r.p_occupy) << ',' << number(r.p_nondrop) << ',' << number(r.p_suc1) << ',' << number(r.p_suc2)
     << ',' << number(r.pmf_k1.mean()) << ',' << number(r.p_mtd_success) << ',' << number(r.avg_successful_mtds)
     << ',' << number(r.p_channel_util) << ',' << number(r.successful_mtds_per_km2) << '\n';
  emit(o.out, os.str());
  std::vector<std::string> outputs;
  if (!o.out.empty() && o.out != "-") outputs.push_back(o.out);
  write_manifest(m, o, c, manifest_path_for(o.out), outputs);
  return 0;
}

// ---- simulate ------------------------------------------------------------

int cmd_simulate(const Options& o, const Manifest& m) {
  const auto c = resolve(o, "desk");
  const std::vector<double> tws{c.params.resource_tw};
  const auto tallies = mmtc::run_realizations(c.params, c.sim, tws);
  const auto est = mmtc::detail::reduce(tallies, tws, c.params.n_channels).front();

  std::ostringstream os;
  write_header(os, "simulate", c);
  os << "metric,mean,stderr,n\n";
  bool undefined_se = false;
  for (std::size_t k = 0; k < mmtc::kSimMetricCount; ++k) {
    const auto& e = est.metrics[k];
    undefined_se |= std::isnan(e.standard_error);
    os << mmtc::kSimMetricNames[k] << ',' << mmtc::csv::number(e.mean) << ','
       << mmtc::csv::number(e.standard_error) << ',' << e.sample_count << '\n';
  }
  if (undefined_se) std::cerr << "mmtc: warning: standard error undefined with fewer than two realizations\n";
  if (est.resamples > 0)
    std::cerr << "mmtc: note: " << est.resamples << " topology redraw(s) with no BS in the window\n";
  emit(o.out, os.str());

  std::vector<std::string> outputs;
  if (!o.out.empty() && o.out != "-") outputs.push_back(o.out);
  if (!o.tallies.empty()) {
    std::ostringstream ts;
    write_header(ts, "simulate", c);
    mmtc::write_tallies_csv(ts, tallies, tws);
    emit(o.tallies, ts.str());
    outputs.push_back(o.tallies);
  }
  write_manifest(m, o, c, manifest_path_for(o.out), outputs);
  return 0;
}

// ---- figure --------------------------------------------------------------

struct Output {
  std::string file;    // e.g. "f4b"
  std::string metric;  // MetricsReport / SimMetric name
};

struct Panel {
  SweepAxis x_axis;
  std::vector<double> x_grid;
  std::vector<double> sim_x;  // coarse subset for the simulation overlay
  SweepAxis series_axis;
  std::vector<double> series;
  std::vector<SchedulingScheme> schemes;
  std::vector<Output> outputs;
  // Held fixed for the whole panel (e.g. TW for the density figures).
  std::vector<std::pair<SweepAxis, double>> fixed;
};

std::vector<double> channel_grid() {
  std::vector<double> g;
  for (int n = 1; n <= 10; ++n) g.push_back(n);
  for (int n = 15; n <= 120; n += 5) g.push_back(n);
  return g;
}

std::vector<double> tw_grid() {
  std::vector<double> g;
  for (int t = 10; t <= 300; t += 10) g.push_back(t);
  return g;
}

std::vector<double> decades(double lo_exp, double hi_exp, double step) {
  std::vector<double> g;
  for (double e = lo_exp; e <= hi_exp + 1e-9; e += step) g.push_back(std::pow(10.0, e));
  return g;
}

double db(double x) { return std::pow(10.0, x / 10.0); }

const std::vector<SchedulingScheme> kBoth{SchedulingScheme::RRS, SchedulingScheme::CRS};
const std::vector<SchedulingScheme> kRandom{SchedulingScheme::RRS};

std::vector<Panel> figure_panels(const std::string& id) {
  const auto n = channel_grid();
  const auto tw = tw_grid();
  if (id == "f2")
    return {{SweepAxis::NChannels, n, {2, 5, 10, 20}, SweepAxis::Gamma1, {db(-5), db(0), db(5)}, kBoth,
             {{"f2", "p_suc1"}}, {}}};
  if (id == "f3")
    return {{SweepAxis::ResourceTw, tw, {50, 150, 300}, SweepAxis::NChannels, {30, 70}, kBoth,
             {{"f3", "p_suc2"}}, {}}};
  if (id == "f4")
    return {{SweepAxis::ResourceTw, tw, {50, 150, 300}, SweepAxis::NChannels, {30, 70, 120}, kBoth,
             {{"f4a", "p_mtd_success"}, {"f4b", "avg_successful_mtds"}, {"f4c", "p_channel_util"}}, {}}};
  if (id == "f5")
    return {{SweepAxis::NChannels, n, {2, 5, 10, 20}, SweepAxis::ResourceTw, {50, 100, 300}, kRandom,
             {{"f5a", "p_channel_util"}, {"f5b", "p_mtd_success"}}, {}}};
  if (id == "f6")
    return {{SweepAxis::NChannels, n, {2, 5, 10, 20}, SweepAxis::Alpha, {3.0, 3.5, 4.0}, kRandom,
             {{"f6a", "p_mtd_success"}}, {{SweepAxis::ResourceTw, 100.0}}},
            {SweepAxis::NChannels, n, {2, 5, 10, 20}, SweepAxis::LambdaA, decades(-5.0, -4.0, 0.5), kRandom,
             {{"f6b", "p_mtd_success"}}, {{SweepAxis::ResourceTw, 100.0}}}};
  if (id == "f7")
    return {{SweepAxis::LambdaA, decades(-5.5, -3.5, 0.25), decades(-5.5, -4.5, 0.5), SweepAxis::NChannels,
             {30, 70}, kRandom,
             {{"f7a", "p_channel_util"}, {"f7b", "p_mtd_success"}, {"f7c", "successful_mtds_per_km2"}},
             {{SweepAxis::ResourceTw, 300.0}}}};
  throw mmtc::ConfigError("figure", "unknown figure id '" + id + "' (expected f2..f7)");
}

double report_metric(const mmtc::MetricsReport& r, const std::string& name) {
  if (name == "p_suc1") return r.p_suc1;
  if (name == "p_suc2") return r.p_suc2;
  if (name == "p_mtd_success") return r.p_mtd_success;
  if (name == "avg_successful_mtds") return r.avg_successful_mtds;
  if (name == "p_channel_util") return r.p_channel_util;
  if (name == "successful_mtds_per_km2") return r.successful_mtds_per_km2;
  throw std::logic_error("unknown metric " + name);
}

SimMetric sim_metric(const std::string& name) {
  for (std::size_t k = 0; k < mmtc::kSimMetricCount; ++k) {
    if (mmtc::kSimMetricNames[k] == name) return static_cast<SimMetric>(k);
  }
  throw std::logic_error("unknown metric " + name);
}

std::string series_label(SweepAxis axis, double v) {
  char buf[64];
  if (axis == SweepAxis::Gamma1)
    std::snprintf(buf, sizeof buf, "gamma1_db=%g", std::round(10.0 * std::log10(v) * 1e6) / 1e6);
  else
    std::snprintf(buf, sizeof buf, "%s=%g", std::string(mmtc::to_string(axis)).c_str(), v);
  return buf;
}

struct Row {
  double x;
  std::string series;
  SchedulingScheme scheme;
  std::string source;
  double value;
  double stderr_value;
};

// One (series, scheme) slice of a panel: reports along x. When TW is one of
// the axes the aggregation phase is shared across TW values.
std::vector<mmtc::MetricsReport> analytic_slice(const mmtc::NetworkParams& base, const Panel& panel,
                                                const std::vector<double>& xs, SchedulingScheme scheme) {
  std::vector<mmtc::MetricsReport> out(xs.size());
  if (panel.x_axis == SweepAxis::ResourceTw) return mmtc::evaluate_tw_grid(base, scheme, xs, mmtc::worker_count());
  mmtc::parallel_for(xs.size(), [&](std::size_t i) {
    out[i] = mmtc::evaluate(mmtc::with_axis(base, panel.x_axis, xs[i]), scheme);
  });
  return out;
}

std::vector<mmtc::SimEstimate> sim_slice(const mmtc::NetworkParams& base, const Panel& panel,
                                         const std::vector<double>& xs, mmtc::SimConfig sim, SchedulingScheme scheme) {
  sim.scheme = scheme;
  if (panel.x_axis == SweepAxis::ResourceTw) return mmtc::estimate_tw_grid(base, sim, xs);
  std::vector<mmtc::SimEstimate> out;
  for (double x : xs) out.push_back(mmtc::estimate(mmtc::with_axis(base, panel.x_axis, x), sim));
  return out;
}

void collect(std::vector<std::vector<Row>>& files, const Panel& panel, const mmtc::NetworkParams& params,
             const mmtc::SimConfig* sim, const std::string& source) {
  for (double s : panel.series) {
    auto base = mmtc::with_axis(params, panel.series_axis, s);
    for (const auto& [axis, v] : panel.fixed) base = mmtc::with_axis(base, axis, v);
    const auto label = series_label(panel.series_axis, s);
    for (auto scheme : panel.schemes) {
      const auto& xs = sim ? panel.sim_x : panel.x_grid;
      if (sim) {
        const auto est = sim_slice(base, panel, xs, *sim, scheme);
        for (std::size_t f = 0; f < panel.outputs.size(); ++f) {
          const auto metric = sim_metric(panel.outputs[f].metric);
          for (std::size_t i = 0; i < xs.size(); ++i)
            files[f].push_back({xs[i], label, scheme, source, est[i][metric].mean, est[i][metric].standard_error});
        }
        continue;
      }
      std::vector<mmtc::MetricsReport> reports;
      try {
        reports = analytic_slice(base, panel, xs, scheme);
      } catch (const mmtc::InvalidParams&) {
        throw;
      } catch (const std::exception& e) {
        throw NumericalFailure("figure sweep (" + label + ", " + std::string(mmtc::to_string(scheme)) + ")",
                               e.what());
      }
      for (std::size_t f = 0; f < panel.outputs.size(); ++f) {
        for (std::size_t i = 0; i < xs.size(); ++i)
          files[f].push_back({xs[i], label, scheme, source, report_metric(reports[i], panel.outputs[f].metric),
                              std::numeric_limits<double>::quiet_NaN()});
      }
    }
  }
}

int cmd_figure(const Options& o, const Manifest& m) {
  const auto panels = figure_panels(o.figure_id);
  const auto c = resolve(o, "table1");
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw mmtc::ConfigError("out", "cannot create directory '" + dir.string() + "'");

  // The overlay runs at desk scale so it stays tractable; analytic values at
  // the same parameters are written next to it.
  auto desk = mmtc::preset("desk");
  desk.sim.master_seed = c.sim.master_seed;
  if (o.runs > 0) desk.sim.n_runs = o.runs;

  std::vector<std::string> outputs;
  for (const auto& panel : panels) {
    std::vector<std::vector<Row>> files(panel.outputs.size());
    collect(files, panel, c.params, nullptr, "analytic");
    if (o.with_sim) {
      Panel coarse = panel;
      coarse.x_grid = panel.sim_x;
      collect(files, coarse, desk.params, nullptr, "analytic_desk");
      collect(files, panel, desk.params, &desk.sim, "simulation");
    }
    for (std::size_t f = 0; f < files.size(); ++f) {
      std::ostringstream os;
      write_header(os, "figure " + o.figure_id, c);
      if (o.with_sim) mmtc::csv::comment_block(os, "overlay (desk scale):\n" + mmtc::serialize_config(desk));
      os << "x,series,scheme,source,metric,value,stderr\n";
      for (const auto& r : files[f]) {
        os << mmtc::csv::number(r.x) << ',' << mmtc::csv::field(r.series) << ',' << mmtc::to_string(r.scheme) << ','
           << r.source << ',' << panel.outputs[f].metric << ',' << mmtc::csv::number(r.value) << ',';
        if (!std::isnan(r.stderr_value)) os << mmtc::csv::number(r.stderr_value);
        os << '\n';
      }
      const auto path = (dir / (panel.outputs[f].file + ".csv")).string();
      emit(path, os.str());
      outputs.push_back(path);
    }
  }
  write_manifest(m, o, c, (dir / (o.figure_id + ".manifest.json")).string(), outputs);
  return 0;
}

// ---- validate ------------------------------------------------------------

int cmd_validate(const Options& o) {
  auto c = mmtc::preset(o.preset.empty() ? std::string_view("table1") : std::string_view(o.preset));
  if (!o.config_path.empty()) c = mmtc::parse_config(read_file(o.config_path), c);
  const auto violations = mmtc::validate(c.params);
  for (const auto& v : violations) std::cerr << "mmtc: invalid: " << v.field << ": " << v.message << '\n';
  for (const auto& a : mmtc::advisories(c.params)) std::cerr << "mmtc: advisory: " << a << '\n';
  try {
    mmtc::require_valid(c.sim);
  } catch (const std::invalid_argument& e) {
    std::cerr << "mmtc: invalid: simulation: " << e.what() << '\n';
    return kExitInvalid;
  }
  if (!violations.empty()) return kExitInvalid;
  std::cout << mmtc::serialize_config(c);
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool sim_flags) {
  cmd->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "parameter preset")->check(CLI::IsMember({"table1", "desk"}));
  cmd->add_option("--scheme", o.scheme, "scheduling scheme")->check(CLI::IsMember({"rrs", "crs", "RRS", "CRS"}));
  cmd->add_option("--out", o.out, "output path ('-' for stdout)");
  if (sim_flags) {
    cmd->add_option("--runs", o.runs, "Monte-Carlo realizations")->check(CLI::PositiveNumber);
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&o](const std::uint64_t& s) { o.seed = s, o.seed_given = true; }, "master seed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase mMTC aggregation/relaying metrics and simulator"};
  app.set_version_flag("--version", std::string(mmtc::kVersion));
  app.require_subcommand(1);
  Options o;

  auto* analytic = app.add_subcommand("analytic", "evaluate the analytic metrics");
  add_common(analytic, o, false);
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimate of the metrics");
  add_common(simulate, o, true);
  simulate->add_option("--tallies", o.tallies, "also write per-realization tallies to this CSV");
  auto* figure = app.add_subcommand("figure", "write the sweep tables behind a figure");
  figure->add_option("id", o.figure_id, "f2, f3, f4, f5, f6 or f7")->required();
  add_common(figure, o, true);
  figure->add_flag("--with-sim", o.with_sim, "add a desk-scale simulation overlay");
  auto* validate = app.add_subcommand("validate", "check a configuration");
  validate->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  validate->add_option("--preset", o.preset, "parameter preset")->check(CLI::IsMember({"table1", "desk"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  Manifest m;
  m.started_at = utc_now();
  for (int i = 0; i < argc; ++i) m.command_line += (i ? " " : "") + std::string(argv[i]);

  try {
    if (*analytic) return cmd_analytic(o, m);
    if (*simulate) return cmd_simulate(o, m);
    if (*figure) return cmd_figure(o, m);
    if (*validate) return cmd_validate(o);
  } catch (const mmtc::ConfigError& e) {
    std::cerr << "mmtc: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const mmtc::InvalidParams& e) {
    std::cerr << "mmtc: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const mmtc::DegenerateTopologyError& e) {
    std::cerr << "mmtc: degenerate topology: " << e.what() << '\n';
    return kExitTopology;
  } catch (const std::exception& e) {
    std::cerr << "mmtc: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInvalid;
}

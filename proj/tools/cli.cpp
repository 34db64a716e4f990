#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tddsim/engine.hpp"
#include "tddsim/errors.hpp"
#include "tddsim/metrics.hpp"

namespace tddsim::cli {

namespace {

constexpr const char* kCsvHeader =
    "scheme,direction,theta_db,k_s,realizations,horizon,seed,"
    "mean_throughput,ci95_throughput,mean_delay,ci95_delay,"
    "pr_empty_q,ci95_pr_empty_q,resampled_topologies";

double parse_one(const std::string& token) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("values: malformed number '" + token + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

void require_increasing(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("values: empty list");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw ConfigError("values: must be strictly increasing");
    }
  }
}

struct CsvLine {
  Scheme scheme;
  Direction direction;
  const SimConfig* cfg;
  const DirectionSummary* summary;
  std::int64_t resampled;
};

void write_row(std::ostream& os, const CsvLine& row) {
  os << scheme_name(row.scheme) << ','
     << (row.direction == Direction::Downlink ? "dl" : "ul") << ','
     << csv_field(row.cfg->theta_db) << ',' << row.cfg->k_s << ','
     << row.cfg->realizations << ',' << row.cfg->horizon << ','
     << row.cfg->master_seed << ',' << csv_field(row.summary->throughput.mean)
     << ',' << csv_field(row.summary->throughput.ci95) << ','
     << csv_field(row.summary->delay.mean) << ','
     << csv_field(row.summary->delay.ci95) << ','
     << csv_field(row.summary->empty_queue.mean) << ','
     << csv_field(row.summary->empty_queue.ci95) << ',' << row.resampled
     << '\n';
}

}  // namespace

std::vector<double> parse_values(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    const std::vector<std::string> parts = split(spec, ':');
    if (parts.size() != 3) {
      throw ConfigError("values: expected lo:hi:step, got '" + spec + "'");
    }
    const double lo = parse_one(parts[0]);
    const double hi = parse_one(parts[1]);
    const double step = parse_one(parts[2]);
    if (!(step > 0.0)) throw ConfigError("values: step must be > 0");
    if (hi < lo) throw ConfigError("values: hi must be >= lo");
    const double eps = 1e-9 * std::max(1.0, std::fabs(step));
    for (int i = 0;; ++i) {
      const double v = lo + i * step;
      if (v > hi + eps) break;
      out.push_back(v);
    }
  } else {
    for (const std::string& token : split(spec, ',')) {
      out.push_back(parse_one(token));
    }
  }
  require_increasing(out);
  return out;
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name.empty()) return SweepVariable::None;
  if (name == "theta_db") return SweepVariable::ThetaDb;
  if (name == "k_s") return SweepVariable::Ks;
  throw ConfigError("sweep: expected theta_db or k_s, got '" + name + "'");
}

std::vector<Scheme> parse_scheme_selection(const std::string& name,
                                           Scheme fallback) {
  if (name.empty()) return {fallback};
  if (name == "all") {
    return {Scheme::Stdd, Scheme::DtddFixed, Scheme::DtddMwu};
  }
  return {parse_scheme(name)};
}

std::string csv_field(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string csv_field(const std::optional<double>& value) {
  return value ? csv_field(*value) : std::string();
}

namespace {

void apply_sweep_value(SimConfig& cfg, SweepVariable var, double value) {
  switch (var) {
    case SweepVariable::None:
      break;
    case SweepVariable::ThetaDb:
      cfg.theta_db = value;
      break;
    case SweepVariable::Ks: {
      const double rounded = std::round(value);
      if (std::fabs(value - rounded) > 1e-9 || rounded < 1.0) {
        throw ConfigError("values: k_s sweep needs integers >= 1");
      }
      cfg.k_s = static_cast<int>(rounded);
      break;
    }
  }
}

std::string preamble(const SimConfig& resolved_base, const SweepSpec& sweep,
                     const std::string& values_flag) {
  std::ostringstream os;
  os << describe(resolved_base);
  if (sweep.variable != SweepVariable::None) {
    os << "# sweep = "
       << (sweep.variable == SweepVariable::ThetaDb ? "theta_db" : "k_s")
       << "\n# sweep_values = " << values_flag << "\n";
  }
  os << "# schemes =";
  for (Scheme s : sweep.schemes) os << ' ' << scheme_name(s);
  os << "\n# note = in-flight packets at horizon end are excluded from the "
        "delay and throughput sums\n";
  return os.str();
}

int run_parsed(const std::string& config_path, const std::string& scheme_flag,
               const std::string& sweep_flag, const std::string& values_flag,
               std::optional<int> realizations,
               std::optional<std::uint64_t> seed,
               std::optional<std::int64_t> horizon, int threads,
               const std::string& out_path, bool describe_flag,
               std::ostream& out, std::ostream& err) {
  SimConfig raw;
  if (!config_path.empty()) raw = load_config(config_path);
  if (realizations) raw.realizations = *realizations;
  if (seed) raw.master_seed = *seed;
  if (horizon) raw.horizon = *horizon;

  SweepSpec sweep;
  sweep.variable = parse_sweep_variable(sweep_flag);
  if (sweep.variable != SweepVariable::None) {
    if (values_flag.empty()) {
      throw ConfigError("--sweep requires --values");
    }
    sweep.values = parse_values(values_flag);
  } else {
    if (!values_flag.empty()) {
      throw ConfigError("--values requires --sweep");
    }
    sweep.values = {0.0};  // single run, value unused
  }
  sweep.schemes = parse_scheme_selection(scheme_flag, raw.scheme);

  // Validates the base early so flag errors surface before any simulation.
  const SimConfig resolved_base = resolve(raw);

  std::ofstream file(out_path);
  if (!file) {
    err << "error: cannot open '" << out_path << "' for writing\n";
    return 1;
  }
  if (describe_flag) {
    const std::string header = preamble(resolved_base, sweep, values_flag);
    file << header;
    out << header;
  }
  file << kCsvHeader << '\n';

  for (Scheme scheme : sweep.schemes) {
    for (double value : sweep.values) {
      SimConfig cell = raw;
      cell.scheme = scheme;
      apply_sweep_value(cell, sweep.variable, value);
      const SimConfig cfg = resolve(cell);

      const auto start = std::chrono::steady_clock::now();
      const ExperimentSummary summary = run_experiment(cfg, threads);
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start;
      err << "done scheme=" << scheme_name(scheme)
          << " theta_db=" << cfg.theta_db << " k_s=" << cfg.k_s << " ("
          << elapsed.count() << " s)\n";

      write_row(file, {scheme, Direction::Downlink, &cfg, &summary.dl,
                       summary.resampled_topologies});
      write_row(file, {scheme, Direction::Uplink, &cfg, &summary.ul,
                       summary.resampled_topologies});
    }
  }
  if (!file.flush()) {
    err << "error: write to '" << out_path << "' failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Discrete-time Monte Carlo simulator for TDD small-cell "
               "channel access schemes"};
  std::string config_path;
  std::string scheme_flag;
  std::string sweep_flag;
  std::string values_flag;
  std::optional<int> realizations;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  int threads = 1;
  std::string out_path = "results.csv";
  bool describe_flag = false;

  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--scheme,--schemes", scheme_flag,
                 "stdd, dtdd-fixed, dtdd-mwu or all");
  app.add_option("--sweep", sweep_flag, "Sweep variable: theta_db or k_s");
  app.add_option("--values", values_flag, "lo:hi:step or comma list");
  app.add_option("--realizations", realizations, "Independent realizations");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--horizon", horizon, "Slots per realization");
  app.add_option("--threads", threads, "Worker threads (default 1)");
  app.add_option("--out", out_path, "Output CSV path (default results.csv)");
  app.add_flag("--describe", describe_flag,
               "Print the resolved config and embed it as a CSV preamble");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    return run_parsed(config_path, scheme_flag, sweep_flag, values_flag,
                      realizations, seed, horizon, threads, out_path,
                      describe_flag, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tddsim::cli

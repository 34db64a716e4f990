#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tddsim/config.hpp"

namespace tddsim::cli {

enum class SweepVariable { None, ThetaDb, Ks };

// One sweep request: which knob varies, over which values, for which schemes.
struct SweepSpec {
  SweepVariable variable = SweepVariable::None;
  std::vector<double> values;   // strictly increasing
  std::vector<Scheme> schemes;  // nonempty, emitted in this order
};

// "lo:hi:step" (hi inclusive, step > 0) or a comma list; values must come out
// strictly increasing. Throws ConfigError otherwise.
std::vector<double> parse_values(const std::string& spec);

SweepVariable parse_sweep_variable(const std::string& name);

// "all" expands to the three schemes in stdd, dtdd-fixed, dtdd-mwu order; an
// empty selection falls back to the config file's scheme.
std::vector<Scheme> parse_scheme_selection(const std::string& name,
                                           Scheme fallback);

// Shortest round-trip decimal form, empty string for a null metric.
std::string csv_field(double value);
std::string csv_field(const std::optional<double>& value);

// Full program entry: parses flags, runs the experiment or sweep, writes the
// CSV. Returns 0 on success, 2 on bad flags/config, 1 on runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace tddsim::cli

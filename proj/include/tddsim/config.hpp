#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tddsim/scheduling.hpp"

namespace tddsim {

/// Every scalar knob of the simulation. Defaults are the reference system
/// parameters; eta_s/eta_d/rho/warmup are "unset" sentinels resolved by
/// resolve(): the DL shares default to xi_dl/(xi_ul+xi_dl), rho tracks the
/// linear decode threshold, warmup is 10% of the horizon.
struct SimConfig {
  double side_m = 1600.0;   // square region side, meters
  double lambda_s = 1e-4;   // SAP density, per m^2
  double lambda_u = 1e-3;   // UE density, per m^2
  double p_sap_dbm = 2.0;   // SAP transmit power, dBm
  double p_ue_dbm = 17.0;   // UE transmit power, dBm
  double alpha = 3.8;       // path-loss exponent
  double theta_db = 0.0;    // decode threshold, dB
  double xi_ul = 0.05;      // UL arrival rate, packets/slot
  double xi_dl = 0.10;      // DL arrival rate, packets/slot
  int k_s = 3;              // max UEs served per SAP

  Scheme scheme = Scheme::Stdd;
  double eta_s = kUnsetReal;     // S-TDD DL share
  double eta_d = kUnsetReal;     // fixed D-TDD DL share
  double delta = 0.1;            // MWU learning rate
  double rho = kUnsetReal;       // MWU penalty normalizer
  double eta_sharp = 0.1;        // queue sensitivity inside the penalty

  std::int64_t horizon = 5000;   // slots per realization
  std::int64_t warmup = kUnsetInt;
  int realizations = 200;
  std::uint64_t master_seed = 1;
  bool literal_eq3_powers = false;
  bool count_idle_as_zero = false;

  static constexpr double kUnsetReal =
      std::numeric_limits<double>::quiet_NaN();
  static constexpr std::int64_t kUnsetInt = -1;

  double theta_linear() const { return std::pow(10.0, theta_db / 10.0); }
  double p_sap_w() const { return std::pow(10.0, (p_sap_dbm - 30.0) / 10.0); }
  double p_ue_w() const { return std::pow(10.0, (p_ue_dbm - 30.0) / 10.0); }
};

const char* scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);  // throws ConfigError

/// Parses the flat key=value format ('#' comments, blank lines ok). Keys are
/// exactly the SimConfig field names; unknown keys and out-of-range values
/// are rejected with the offending key and line number. Missing keys keep
/// their defaults.
SimConfig parse_config(std::string_view text);

/// parse_config over a file's contents. Throws ConfigError if unreadable.
SimConfig load_config(const std::filesystem::path& path);

/// Fills the unset fields (eta_s, eta_d, rho, warmup) from their default
/// rules and cross-validates. Throws ConfigError on violations.
SimConfig resolve(SimConfig cfg);

/// Re-checks every invariant on a fully resolved config; error messages name
/// the offending key. Used after CLI overrides.
void validate(const SimConfig& cfg);

/// Fully resolved config as "# key = value" lines, for provenance preambles.
std::string describe(const SimConfig& cfg);

}  // namespace tddsim

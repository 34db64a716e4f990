#include "tddsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tddsim/errors.hpp"

namespace tddsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view key, int line, std::string_view why) {
  std::ostringstream os;
  os << "config error: " << key;
  if (line > 0) os << " (line " << line << ")";
  os << ": " << why;
  throw ConfigError(os.str());
}

double parse_real(std::string_view key, std::string_view value, int line) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) fail(key, line, "malformed number");
  return out;
}

std::int64_t parse_int(std::string_view key, std::string_view value,
                       int line) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) fail(key, line, "malformed integer");
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value,
                         int line) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    fail(key, line, "malformed unsigned integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(key, line, "expected true/false");
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Shared per-key range checks, reused by the parser (with line numbers) and
// by validate() (line 0, e.g. after CLI overrides).
void check_field(const SimConfig& c, std::string_view key, int line) {
  auto positive = [&](double v, std::string_view k) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(k, line, "must be > 0");
  };
  if (key == "side_m") positive(c.side_m, key);
  if (key == "lambda_s" && (!(c.lambda_s >= 0.0) || !std::isfinite(c.lambda_s)))
    fail(key, line, "must be finite and >= 0");
  if (key == "lambda_u" && (!(c.lambda_u >= 0.0) || !std::isfinite(c.lambda_u)))
    fail(key, line, "must be finite and >= 0");
  if (key == "p_sap_dbm" && !std::isfinite(c.p_sap_dbm))
    fail(key, line, "must be finite");
  if (key == "p_ue_dbm" && !std::isfinite(c.p_ue_dbm))
    fail(key, line, "must be finite");
  if (key == "alpha" && !(c.alpha > 2.0 && std::isfinite(c.alpha)))
    fail(key, line, "path-loss exponent must be > 2");
  if (key == "theta_db" && !std::isfinite(c.theta_db))
    fail(key, line, "must be finite");
  if (key == "xi_ul" && !(c.xi_ul >= 0.0 && c.xi_ul <= 1.0))
    fail(key, line, "rate must lie in [0, 1]");
  if (key == "xi_dl" && !(c.xi_dl >= 0.0 && c.xi_dl <= 1.0))
    fail(key, line, "rate must lie in [0, 1]");
  if (key == "k_s" && c.k_s < 1) fail(key, line, "must be >= 1");
  if (key == "eta_s" && !std::isnan(c.eta_s) &&
      !(c.eta_s >= 0.0 && c.eta_s <= 1.0))
    fail(key, line, "probability must lie in [0, 1]");
  if (key == "eta_d" && !std::isnan(c.eta_d) &&
      !(c.eta_d >= 0.0 && c.eta_d <= 1.0))
    fail(key, line, "probability must lie in [0, 1]");
  if (key == "delta" && !(c.delta > 0.0 && c.delta < 1.0))
    fail(key, line, "learning rate must lie in (0, 1)");
  if (key == "rho" && !std::isnan(c.rho) && !(c.rho > 0.0))
    fail(key, line, "must be > 0");
  if (key == "eta_sharp" && !(c.eta_sharp > 0.0)) fail(key, line, "must be > 0");
  if (key == "horizon" && c.horizon < 1) fail(key, line, "must be >= 1");
  if (key == "warmup" && c.warmup != SimConfig::kUnsetInt && c.warmup < 0)
    fail(key, line, "must be >= 0");
  if (key == "realizations" && c.realizations < 1)
    fail(key, line, "must be >= 1");
}

void apply_key(SimConfig& c, std::string_view key, std::string_view value,
               int line) {
  if (key == "side_m") c.side_m = parse_real(key, value, line);
  else if (key == "lambda_s") c.lambda_s = parse_real(key, value, line);
  else if (key == "lambda_u") c.lambda_u = parse_real(key, value, line);
  else if (key == "p_sap_dbm") c.p_sap_dbm = parse_real(key, value, line);
  else if (key == "p_ue_dbm") c.p_ue_dbm = parse_real(key, value, line);
  else if (key == "alpha") c.alpha = parse_real(key, value, line);
  else if (key == "theta_db") c.theta_db = parse_real(key, value, line);
  else if (key == "xi_ul") c.xi_ul = parse_real(key, value, line);
  else if (key == "xi_dl") c.xi_dl = parse_real(key, value, line);
  else if (key == "k_s") c.k_s = static_cast<int>(parse_int(key, value, line));
  else if (key == "scheme") c.scheme = parse_scheme(value);
  else if (key == "eta_s") c.eta_s = parse_real(key, value, line);
  else if (key == "eta_d") c.eta_d = parse_real(key, value, line);
  else if (key == "delta") c.delta = parse_real(key, value, line);
  else if (key == "rho") c.rho = parse_real(key, value, line);
  else if (key == "eta_sharp") c.eta_sharp = parse_real(key, value, line);
  else if (key == "horizon") c.horizon = parse_int(key, value, line);
  else if (key == "warmup") c.warmup = parse_int(key, value, line);
  else if (key == "realizations")
    c.realizations = static_cast<int>(parse_int(key, value, line));
  else if (key == "master_seed") c.master_seed = parse_uint(key, value, line);
  else if (key == "literal_eq3_powers")
    c.literal_eq3_powers = parse_bool(key, value, line);
  else if (key == "count_idle_as_zero")
    c.count_idle_as_zero = parse_bool(key, value, line);
  else
    fail(key, line, "unknown key");
  check_field(c, key, line);
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Stdd: return "stdd";
    case Scheme::DtddFixed: return "dtdd-fixed";
    case Scheme::DtddMwu: return "dtdd-mwu";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "stdd") return Scheme::Stdd;
  if (name == "dtdd-fixed") return Scheme::DtddFixed;
  if (name == "dtdd-mwu") return Scheme::DtddMwu;
  throw ConfigError("config error: scheme: expected stdd, dtdd-fixed or "
                    "dtdd-mwu, got '" + std::string(name) + "'");
}

SimConfig parse_config(std::string_view text) {
  SimConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line, line_no, "expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail("<empty>", line_no, "missing key");
    if (value.empty()) fail(key, line_no, "missing value");
    apply_key(cfg, key, value, line_no);
  }
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config error: cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SimConfig resolve(SimConfig cfg) {
  const double total = cfg.xi_ul + cfg.xi_dl;
  const double dl_share = total > 0.0 ? cfg.xi_dl / total : 0.5;
  if (std::isnan(cfg.eta_s)) cfg.eta_s = dl_share;
  if (std::isnan(cfg.eta_d)) cfg.eta_d = dl_share;
  if (std::isnan(cfg.rho)) cfg.rho = cfg.theta_linear();
  if (cfg.warmup == SimConfig::kUnsetInt) cfg.warmup = cfg.horizon / 10;
  validate(cfg);
  return cfg;
}

void validate(const SimConfig& cfg) {
  static constexpr const char* keys[] = {
      "side_m", "lambda_s", "lambda_u", "p_sap_dbm", "p_ue_dbm", "alpha",
      "theta_db", "xi_ul", "xi_dl", "k_s", "eta_s", "eta_d", "delta", "rho",
      "eta_sharp", "horizon", "warmup", "realizations"};
  for (const char* k : keys) check_field(cfg, k, 0);
  if (cfg.warmup != SimConfig::kUnsetInt && cfg.warmup >= cfg.horizon) {
    fail("warmup", 0, "must be < horizon");
  }
}

std::string describe(const SimConfig& cfg) {
  std::ostringstream os;
  auto put = [&](std::string_view key, const std::string& value) {
    os << "# " << key << " = " << value << "\n";
  };
  put("side_m", format_real(cfg.side_m));
  put("lambda_s", format_real(cfg.lambda_s));
  put("lambda_u", format_real(cfg.lambda_u));
  put("p_sap_dbm", format_real(cfg.p_sap_dbm));
  put("p_ue_dbm", format_real(cfg.p_ue_dbm));
  put("alpha", format_real(cfg.alpha));
  put("theta_db", format_real(cfg.theta_db));
  put("xi_ul", format_real(cfg.xi_ul));
  put("xi_dl", format_real(cfg.xi_dl));
  put("k_s", std::to_string(cfg.k_s));
  put("scheme", scheme_name(cfg.scheme));
  put("eta_s", format_real(cfg.eta_s));
  put("eta_d", format_real(cfg.eta_d));
  put("delta", format_real(cfg.delta));
  put("rho", format_real(cfg.rho));
  put("eta_sharp", format_real(cfg.eta_sharp));
  put("horizon", std::to_string(cfg.horizon));
  put("warmup", std::to_string(cfg.warmup));
  put("realizations", std::to_string(cfg.realizations));
  put("master_seed", std::to_string(cfg.master_seed));
  put("literal_eq3_powers", cfg.literal_eq3_powers ? "true" : "false");
  put("count_idle_as_zero", cfg.count_idle_as_zero ? "true" : "false");
  return os.str();
}

}  // namespace tddsim

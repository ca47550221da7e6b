#include "scolab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace scolab {

namespace {

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError(key, "expected a number, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + text + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(LabConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const LabConfig&)> get;
};

template <typename T>
Field number(T LabConfig::*member) {
  return {[member](LabConfig& c, const std::string& key, const std::string& v) {
            c.*member = parse_number<T>(key, v);
          },
          [member](const LabConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt_double(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

Field relax_number(double Relax::*member) {
  return {[member](LabConfig& c, const std::string& key, const std::string& v) {
            c.relax.*member = parse_number<double>(key, v);
          },
          [member](const LabConfig& c) { return fmt_double(c.relax.*member); }};
}

Field boolean(bool LabConfig::*member) {
  return {[member](LabConfig& c, const std::string& key, const std::string& v) {
            c.*member = parse_bool(key, v);
          },
          [member](const LabConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field text(std::string LabConfig::*member) {
  return {[member](LabConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const LabConfig& c) { return c.*member; }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"code.rho_target", number(&LabConfig::rho_target)},
      {"code.seed", number(&LabConfig::code_seed)},
      {"code.max_retries", number(&LabConfig::max_retries)},
      {"instance.mode",
       {[](LabConfig& c, const std::string& key, const std::string& v) {
          if (v == "erm" || v == "ERM")
            c.mode = Mode::kErm;
          else if (v == "gd" || v == "GD")
            c.mode = Mode::kGd;
          else
            throw ConfigError(key, "expected 'erm' or 'gd', got '" + v + "'");
        },
        [](const LabConfig& c) { return std::string(c.mode == Mode::kErm ? "erm" : "gd"); }}},
      {"instance.m", number(&LabConfig::m)},
      {"instance.k", number(&LabConfig::k)},
      {"instance.allow_nonstandard", boolean(&LabConfig::allow_nonstandard)},
      {"instance.lambda", number(&LabConfig::lambda)},
      {"instance.epsilon", number(&LabConfig::epsilon)},
      {"instance.relax",
       {[](LabConfig& c, const std::string& key, const std::string& v) {
          c.relax.enabled = parse_bool(key, v);
        },
        [](const LabConfig& c) { return std::string(c.relax.enabled ? "true" : "false"); }}},
      {"instance.relax_erm_lambda_m_lo", relax_number(&Relax::erm_lambda_m_lo)},
      {"instance.relax_erm_lambda_m_hi", relax_number(&Relax::erm_lambda_m_hi)},
      {"instance.relax_gd_lambda_m", relax_number(&Relax::gd_lambda_m)},
      {"instance.relax_gd_gamma_c", relax_number(&Relax::gd_gamma_c)},
      {"instance.relax_gd_lambda_c", relax_number(&Relax::gd_lambda_c)},
      {"instance.gamma_m_margin", relax_number(&Relax::gamma_m_margin)},
      {"gd.eta", number(&LabConfig::eta)},
      {"gd.T", number(&LabConfig::T)},
      {"gd.suffix_s", number(&LabConfig::suffix_s)},
      {"gd.record_every", number(&LabConfig::record_every)},
      {"gd.abort_on_violation", boolean(&LabConfig::abort_on_violation)},
      {"harness.seed", number(&LabConfig::seed)},
      {"harness.trials", number(&LabConfig::trials)},
      {"harness.gd_trials", number(&LabConfig::gd_trials)},
      {"harness.optimality_trials", number(&LabConfig::optimality_trials)},
      {"harness.threads", number(&LabConfig::threads)},
      {"harness.brute_force_cap", number(&LabConfig::brute_force_cap)},
      {"harness.probes", number(&LabConfig::probes)},
      {"harness.eps_probes", number(&LabConfig::eps_probes)},
      {"harness.concentration_trials", number(&LabConfig::concentration_trials)},
      {"harness.pcert_queries", number(&LabConfig::pcert_queries)},
      {"harness.lipschitz_points", number(&LabConfig::lipschitz_points)},
      {"harness.sweep_trials", number(&LabConfig::sweep_trials)},
      {"harness.sweep_eta", number(&LabConfig::sweep_eta)},
      {"harness.sweep_j_min", number(&LabConfig::sweep_j_min)},
      {"harness.sweep_j_max", number(&LabConfig::sweep_j_max)},
      {"harness.plateau_scale", number(&LabConfig::plateau_scale)},
      {"harness.corollary3_scale", number(&LabConfig::corollary3_scale)},
      {"harness.out_dir", text(&LabConfig::out_dir)},
      {"harness.log_level", text(&LabConfig::log_level)},
  };
  return table;
}

// Bare keys resolve when exactly one section defines them.
std::string resolve_key(const std::string& key) {
  if (key.find('.') != std::string::npos) {
    if (!fields().count(key)) throw ConfigError(key, "unknown key");
    return key;
  }
  std::string found;
  for (const auto& [full, _] : fields()) {
    if (full.substr(full.find('.') + 1) != key) continue;
    if (!found.empty()) throw ConfigError(key, "ambiguous key; qualify it as section." + key);
    found = full;
  }
  if (found.empty()) throw ConfigError(key, "unknown key");
  return found;
}

void apply(LabConfig& cfg, const std::string& key, const std::string& value) {
  const std::string full = resolve_key(key);
  fields().at(full).set(cfg, full, trim(value));
}

}  // namespace

double LabConfig::lambda_value() const { return lambda > 0.0 ? lambda : theorem1_lambda(m); }

double LabConfig::epsilon_value(double rho) const {
  return epsilon > 0.0 ? epsilon : theorem1_epsilon(lambda_value(), rho);
}

int LabConfig::thread_count() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void LabConfig::validate() const {
  if (!(rho_target > 0.0 && rho_target < 0.5)) throw ConfigError("code.rho_target", "must lie in (0, 1/2)");
  if (max_retries < 1) throw ConfigError("code.max_retries", "must be positive");
  if (m < 1) throw ConfigError("instance.m", "must be positive");
  if (k < 2 || k > kMaxCodeK)
    throw ConfigError("instance.k", "must lie in [2, " + std::to_string(kMaxCodeK) + "]");
  if (k != 2 * m && !allow_nonstandard)
    throw ConfigError("instance.k", "k must equal 2m unless instance.allow_nonstandard = true");
  if (lambda < 0.0) throw ConfigError("instance.lambda", "must be >= 0");
  if (epsilon < 0.0) throw ConfigError("instance.epsilon", "must be >= 0");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("gd.eta", "must lie in (0, 1)");
  if (T < 1) throw ConfigError("gd.T", "must be positive");
  if (suffix_s >= T || suffix_s < -1) throw ConfigError("gd.suffix_s", "must lie in [0, T) (or -1 for T/2)");
  if (record_every < 0) throw ConfigError("gd.record_every", "must be >= 0");
  if (mode == Mode::kGd && !(eta * static_cast<double>(T) > std::sqrt(static_cast<double>(m))))
    throw ConfigError("gd.T", "GD lower bound requires eta*T > sqrt(m)");
  if (mode == Mode::kErm && lambda_value() > 1.0 / std::sqrt(static_cast<double>(m)))
    throw ConfigError("instance.lambda", "ERM lower bound requires lambda <= 1/sqrt(m)");
  if (trials < 0) throw ConfigError("harness.trials", "must be >= 0");
  if (gd_trials < 0) throw ConfigError("harness.gd_trials", "must be >= 0");
  if (optimality_trials < 0) throw ConfigError("harness.optimality_trials", "must be >= 0");
  if (sweep_trials < 1) throw ConfigError("harness.sweep_trials", "must be positive");
  if (brute_force_cap < 2) throw ConfigError("harness.brute_force_cap", "must be >= 2");
  if (sweep_j_min < 1 || sweep_j_max < sweep_j_min)
    throw ConfigError("harness.sweep_j_max", "sweep exponents must satisfy 1 <= j_min <= j_max");
  if (!(sweep_eta > 0.0 && sweep_eta < 1.0)) throw ConfigError("harness.sweep_eta", "must lie in (0, 1)");
}

LabConfig parse_config_text(const std::string& text, const Overrides& overrides) {
  LabConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "code" && section != "instance" && section != "gd" && section != "harness")
        throw ConfigError(section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno), "key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (!fields().count(key)) throw ConfigError(key, "unknown key");
    apply(cfg, key, line.substr(eq + 1));
  }
  for (const auto& [key, value] : overrides) apply(cfg, key, value);
  cfg.validate();
  return cfg;
}

LabConfig parse_config(const std::filesystem::path& path, const Overrides& overrides) {
  if (path.empty()) return parse_config_text("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::map<std::string, std::string> config_echo(const LabConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(cfg);
  return out;
}

}  // namespace scolab

#include "rtsim/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rtsim/cli/io.hpp"

namespace rtsim::cli {

namespace {

constexpr double kBig = 1e308;

Range positive(bool allow_inf = false) { return {0.0, kBig, true, false, allow_inf}; }
Range nonneg() { return {0.0, kBig, false, false, false}; }
Range at_least(double lo) { return {lo, kBig, false, false, false}; }
Range between(double lo, double hi) { return {lo, hi, false, false, false}; }
Range any_real() { return {}; }

KeySpec d(std::string sec, std::string key, std::string def, std::string doc, Range r = any_real()) {
  return {std::move(sec), std::move(key), ValueType::Double, std::move(def), std::move(doc), {}, r};
}
KeySpec u(std::string sec, std::string key, std::string def, std::string doc, Range r = nonneg()) {
  return {std::move(sec), std::move(key), ValueType::UInt, std::move(def), std::move(doc), {}, r};
}
KeySpec i(std::string sec, std::string key, std::string def, std::string doc, Range r) {
  return {std::move(sec), std::move(key), ValueType::Int, std::move(def), std::move(doc), {}, r};
}
KeySpec b(std::string sec, std::string key, std::string def, std::string doc) {
  return {std::move(sec), std::move(key), ValueType::Bool, std::move(def), std::move(doc), {}, {}};
}
KeySpec s(std::string sec, std::string key, std::string def, std::string doc) {
  return {std::move(sec), std::move(key), ValueType::String, std::move(def), std::move(doc), {}, {}};
}
KeySpec l(std::string sec, std::string key, std::string def, std::string doc, Range r = any_real()) {
  return {std::move(sec), std::move(key), ValueType::DoubleList, std::move(def), std::move(doc), {}, r};
}
KeySpec c(std::string sec, std::string key, std::string def, std::string doc,
          std::vector<std::string> choices) {
  return {std::move(sec), std::move(key), ValueType::Choice, std::move(def), std::move(doc),
          std::move(choices), {}};
}

std::vector<KeySpec> build_schema() {
  const Range pos_inf = positive(true);
  return {
      s("run", "out_dir", "out", "output directory"),
      u("run", "seed", "1", "master seed for all random streams"),
      u("run", "workers", "1", "worker threads", between(1, 1024)),
      s("run", "preset", "", "named parameter preset applied below the file"),
      u("run", "max_clamp_events", "1000", "rate clamps tolerated before exit status 3"),
      u("run", "progress_every", "100", "particles between progress lines on stderr", at_least(1)),

      d("two_state", "alpha1", "10", "exponent coefficient of the CCW->CW rate"),
      d("two_state", "alpha2", "-2", "exponent coefficient of the CW->CCW rate"),
      d("two_state", "t0", "300", "CCW->CW switching time", positive()),
      d("two_state", "t1", "30", "CW->CCW switching time", positive()),
      d("two_state", "ybar", "5", "mean concentration", positive()),
      d("two_state", "adaptation_time", "6000", "adaptation time (inf disables drift)", pos_inf),
      d("two_state", "sigma", "0.456", "noise intensity", nonneg()),
      d("two_state", "dt", "0.1", "time step", positive()),
      d("two_state", "horizon", "600000", "simulated time per particle", positive()),
      u("two_state", "n", "100", "number of particles", at_least(1)),
      c("two_state", "drift", "ou", "drift shape", {"ou", "sign"}),
      c("two_state", "flip_rule", "paper", "flip acceptance rule", {"paper", "exact"}),
      d("two_state", "hist_lo", "-150", "histogram lower edge"),
      d("two_state", "hist_hi", "150", "histogram upper edge"),
      u("two_state", "hist_bins", "300", "histogram bins", at_least(1)),

      d("one_state", "adaptation_time", "6000", "adaptation time (inf disables drift)", pos_inf),
      c("one_state", "drift", "sign", "drift shape", {"sign", "ou"}),
      d("one_state", "sigma", "0.456", "noise intensity", nonneg()),
      d("one_state", "dt", "0.1", "time step", positive()),
      d("one_state", "horizon", "600000", "simulated time per particle", positive()),
      u("one_state", "n", "100", "number of particles", at_least(1)),
      c("one_state", "rate", "step", "clock rate: indicator of m >= 0, or constant 1",
        {"step", "unit"}),
      d("one_state", "initial_state", "0", "initial internal state"),

      i("ibm", "dimension", "1", "space dimension", between(1, 3)),
      d("ibm", "speed", "0.02", "run speed", positive()),
      d("ibm", "adaptation_time", "inf", "adaptation time (inf disables drift)", pos_inf),
      c("ibm", "drift", "sign", "drift shape", {"sign", "ou"}),
      d("ibm", "sigma", "1.4142135623730951", "noise intensity", nonneg()),
      d("ibm", "dt", "1", "time step", positive()),
      d("ibm", "horizon", "1000000", "simulated time per particle", positive()),
      u("ibm", "n", "1000", "number of particles", at_least(1)),
      c("ibm", "rate", "step", "clock rate", {"step", "unit"}),
      l("ibm", "observation_times", "", "explicit snapshot times (empty: log-spaced)", nonneg()),
      u("ibm", "per_decade", "32", "log-spaced snapshots per decade", at_least(1)),
      l("ibm", "extra_times", "", "times merged into the log-spaced grid", nonneg()),
      c("ibm", "run_time_convention", "direction_change", "what delimits a run",
        {"direction_change", "firing"}),
      b("ibm", "store_full_state", "false", "also write m and v at each snapshot"),

      s("stats", "input_dir", "", "directory written by a simulate subcommand"),
      l("stats", "msd_windows", "", "MSD log-log fit windows as lo,hi pairs", positive()),
      c("stats", "survival_grid", "log", "survival grid spacing", {"log", "linear"}),
      u("stats", "survival_points", "64", "survival grid points", at_least(2)),
      l("stats", "survival_windows", "", "survival log-log fit windows as lo,hi pairs", nonneg()),
      l("stats", "semilog_windows", "", "survival semi-log fit windows as lo,hi pairs", nonneg()),
      b("stats", "kaplan_meier", "false", "censoring-corrected survival"),
      d("stats", "pdf_anchor", "0", "anchor time of the rescaled displacement", nonneg()),
      l("stats", "pdf_lags", "", "lags of the rescaled displacement (empty: skip)", positive()),
      d("stats", "pdf_beta", "1", "rescaling exponent", {0.0, 1.0, true, false, false}),
      u("stats", "pdf_bins", "0", "histogram bins (0: Rice rule)"),
      c("stats", "duration_kind", "all", "which durations to analyse",
        {"all", "ccw", "cw", "stopping_time", "run_time"}),

      l("oracle", "eps", "0.01,0.001,0.0001", "eps sweep", {0.0, 1.0, true, true, false}),
      d("oracle", "gamma", "1", "adaptation exponent"),
      d("oracle", "mu", "0", "time exponent", between(0, 1)),
      l("oracle", "s", "1", "Laplace variables", positive()),
      l("oracle", "xi", "1", "Fourier magnitudes"),
      i("oracle", "dimension", "1", "space dimension", between(1, 3)),
      u("oracle", "circle_nodes", "256", "trapezoid nodes for d = 2", at_least(8)),
      l("oracle", "profile_times", "1,2,3,4", "times of the 1-D profile (empty: skip)", positive()),
      u("oracle", "profile_points", "401", "x points per profile", at_least(3)),

      s("scaling", "input_dir", "", "simulate-ibm output to measure lengths from"),
      u("scaling", "table", "0", "use published lengths of table 1 or 2 (0: off)", between(0, 2)),
      d("scaling", "t_i", "100", "window start", nonneg()),
      d("scaling", "t_e1", "600", "first window end", positive()),
      d("scaling", "t_e2", "1000", "second window end", positive()),
      d("scaling", "t_lambda", "1", "characteristic tumbling time", positive()),
      d("scaling", "t_m", "inf", "adaptation time of the run", pos_inf),
      d("scaling", "L1", "0", "length over the first window", nonneg()),
      d("scaling", "L2", "0", "length over the second window", nonneg()),
      d("scaling", "delta_gamma", "0.05", "classification tolerance on gamma", nonneg()),
      d("scaling", "delta_mu", "0.2", "classification tolerance on mu", nonneg()),

      c("reproduce", "target", "table1", "what to reproduce",
        {"table1", "table2", "fig1", "fig6", "fig7a", "fig9"}),
      c("reproduce", "mode", "default", "default: arithmetic tables, desk-scale figures",
        {"default", "full"}),
  };
}

std::vector<PresetInfo> build_presets() {
  std::vector<PresetInfo> out;
  const std::vector<std::pair<std::string, std::string>> tms = {
      {"inf", "inf"}, {"1e-2", "0.01"}, {"1", "1"}, {"10", "10"}, {"100", "100"}, {"1000", "1000"}};
  for (const auto& [label, tm] : tms) {
    PresetInfo p;
    p.name = "fig7a-Tm-" + label;
    p.doc = "particle model, d = 1, adaptation time " + tm;
    p.values = {{"ibm.adaptation_time", tm},     {"ibm.sigma", "1.4142135623730951"},
                {"ibm.speed", "0.02"},           {"ibm.n", "1000"},
                {"ibm.horizon", "1000000"},      {"ibm.dt", label == "1e-2" ? "0.01" : "1"},
                {"ibm.dimension", "1"},          {"ibm.drift", "sign"},
                {"ibm.rate", "step"}};
    out.push_back(std::move(p));
  }
  const std::vector<std::pair<std::string, std::string>> two = {
      {"two_state.alpha1", "10"},       {"two_state.alpha2", "-2"},
      {"two_state.t0", "300"},          {"two_state.t1", "30"},
      {"two_state.ybar", "5"},          {"two_state.adaptation_time", "6000"},
      {"two_state.sigma", "0.456"},     {"two_state.dt", "0.1"},
      {"two_state.horizon", "600000"},  {"two_state.n", "100"},
      {"two_state.drift", "ou"}};
  out.push_back({"fig1-two-state", "two-state model at the reference parameters", two});
  auto ablation = [&](std::string name, std::string doc, std::string key, std::string value) {
    PresetInfo p{std::move(name), std::move(doc), two};
    for (auto& kv : p.values) {
      if (kv.first == key) kv.second = value;
    }
    out.push_back(std::move(p));
  };
  ablation("fig1-cond-alpha", "two-state model with alpha1 = 0.1", "two_state.alpha1", "0.1");
  ablation("fig1-cond-tm", "two-state model with adaptation time 60",
           "two_state.adaptation_time", "60");
  ablation("fig1-cond-sigma", "two-state model with sigma = 0.00456", "two_state.sigma",
           "0.00456");
  out.push_back({"fig6-one-state",
                 "one-state model at the reference parameters",
                 {{"one_state.adaptation_time", "6000"},
                  {"one_state.sigma", "0.456"},
                  {"one_state.dt", "0.1"},
                  {"one_state.horizon", "600000"},
                  {"one_state.n", "100"},
                  {"one_state.drift", "sign"},
                  {"one_state.rate", "step"}}});
  return out;
}

std::string trim(std::string_view v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  return std::string(v);
}

void check_range(const KeySpec& spec, double x) {
  const Range& r = spec.range;
  if (std::isnan(x)) {
    throw ConfigError(spec.full_name(), "nan is not allowed");
  }
  if (std::isinf(x)) {
    if (!(r.allow_inf && x > 0)) {
      throw ConfigError(spec.full_name(), "infinite value is not allowed");
    }
    return;
  }
  const bool lo_ok = r.lo_open ? x > r.lo : x >= r.lo;
  const bool hi_ok = r.hi_open ? x < r.hi : x <= r.hi;
  if (!lo_ok || !hi_ok) {
    std::ostringstream msg;
    msg << "value " << format_double_short(x) << " outside " << (r.lo_open ? "(" : "[")
        << (r.lo <= -kBig ? std::string("-inf") : format_double_short(r.lo)) << ", "
        << (r.hi >= kBig ? std::string("inf") : format_double_short(r.hi))
        << (r.hi_open ? ")" : "]");
    throw ConfigError(spec.full_name(), msg.str());
  }
}

long long parse_integer(const KeySpec& spec, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(spec.full_name(), "expected an integer, got '" + v + "'");
  }
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> kSchema = build_schema();
  return kSchema;
}

const KeySpec& key_spec(std::string_view full_name) {
  for (const KeySpec& k : schema()) {
    if (k.full_name() == full_name) return k;
  }
  throw ConfigError(std::string(full_name), "unknown key");
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> kSub = {
      "simulate-two-state", "simulate-one-state", "simulate-ibm", "stats",
      "oracle-sweep",       "scaling-report",     "reproduce"};
  return kSub;
}

std::string section_for(std::string_view subcommand) {
  if (subcommand == "simulate-two-state") return "two_state";
  if (subcommand == "simulate-one-state") return "one_state";
  if (subcommand == "simulate-ibm") return "ibm";
  if (subcommand == "stats") return "stats";
  if (subcommand == "oracle-sweep") return "oracle";
  if (subcommand == "scaling-report") return "scaling";
  if (subcommand == "reproduce") return "reproduce";
  throw ConfigError("", "unknown subcommand '" + std::string(subcommand) + "'");
}

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> kPresets = build_presets();
  return kPresets;
}

std::string canonicalize(const KeySpec& spec, std::string_view raw_in) {
  const std::string v = trim(raw_in);
  switch (spec.type) {
    case ValueType::Double: {
      double x = 0.0;
      try {
        x = parse_double(v);
      } catch (const std::invalid_argument&) {
        throw ConfigError(spec.full_name(), "expected a number, got '" + v + "'");
      }
      check_range(spec, x);
      return format_double_short(x);
    }
    case ValueType::Int:
    case ValueType::UInt: {
      const long long x = parse_integer(spec, v);
      if (spec.type == ValueType::UInt && x < 0) {
        throw ConfigError(spec.full_name(), "expected a non-negative integer, got '" + v + "'");
      }
      check_range(spec, static_cast<double>(x));
      return std::to_string(x);
    }
    case ValueType::Bool: {
      std::string low = v;
      std::transform(low.begin(), low.end(), low.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (low == "true" || low == "1" || low == "yes" || low == "on") return "true";
      if (low == "false" || low == "0" || low == "no" || low == "off") return "false";
      throw ConfigError(spec.full_name(), "expected true or false, got '" + v + "'");
    }
    case ValueType::String:
      return v;
    case ValueType::Choice: {
      if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
        std::string all;
        for (const auto& ch : spec.choices) all += (all.empty() ? "" : "|") + ch;
        throw ConfigError(spec.full_name(), "expected one of " + all + ", got '" + v + "'");
      }
      return v;
    }
    case ValueType::DoubleList: {
      std::string out;
      std::string item;
      std::istringstream in(v);
      while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) {
          throw ConfigError(spec.full_name(), "empty list element in '" + v + "'");
        }
        double x = 0.0;
        try {
          x = parse_double(t);
        } catch (const std::invalid_argument&) {
          throw ConfigError(spec.full_name(), "expected a number, got '" + t + "'");
        }
        check_range(spec, x);
        out += (out.empty() ? "" : ",") + format_double_short(x);
      }
      return out;
    }
  }
  throw ConfigError(spec.full_name(), "unhandled type");
}

Config::Config() {
  for (const KeySpec& k : schema()) {
    values_[k.full_name()] = canonicalize(k, k.default_value);
  }
}

void Config::set(std::string_view full_name, std::string_view raw_value) {
  const KeySpec& spec = key_spec(full_name);
  std::string canon = canonicalize(spec, raw_value);
  if (spec.full_name() == "run.preset" && !canon.empty()) {
    const auto& all = presets();
    if (std::none_of(all.begin(), all.end(), [&](const PresetInfo& p) { return p.name == canon; })) {
      throw ConfigError("run.preset", "unknown preset '" + canon + "'");
    }
  }
  values_[spec.full_name()] = std::move(canon);
}

const std::string& Config::raw(std::string_view full_name) const {
  auto it = values_.find(std::string(full_name));
  if (it == values_.end()) {
    throw ConfigError(std::string(full_name), "unknown key");
  }
  return it->second;
}

bool Config::is_default(std::string_view full_name) const {
  const KeySpec& spec = key_spec(full_name);
  return raw(full_name) == canonicalize(spec, spec.default_value);
}

double Config::get_double(std::string_view k) const { return parse_double(raw(k)); }
long long Config::get_int(std::string_view k) const { return std::stoll(raw(k)); }
unsigned long long Config::get_uint(std::string_view k) const { return std::stoull(raw(k)); }
bool Config::get_bool(std::string_view k) const { return raw(k) == "true"; }
std::string Config::get_string(std::string_view k) const { return raw(k); }

std::vector<double> Config::get_list(std::string_view k) const {
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw(k));
  while (std::getline(in, item, ',')) out.push_back(parse_double(item));
  return out;
}

void apply_preset(Config& config, std::string_view name) {
  for (const PresetInfo& p : presets()) {
    if (p.name == name) {
      for (const auto& [key, value] : p.values) config.set(key, value);
      config.set("run.preset", name);
      return;
    }
  }
  throw ConfigError("run.preset", "unknown preset '" + std::string(name) + "'");
}

namespace {

std::vector<std::pair<std::string, std::string>> read_ini_pairs(const std::string& text) {
  // '#' comments are accepted in addition to the parser's ';' comments.
  std::istringstream lines(text);
  std::string line, cleaned;
  while (std::getline(lines, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() == '#') continue;
    cleaned += line + "\n";
  }
  boost::property_tree::ptree tree;
  std::istringstream in(cleaned);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside a [section]");
    }
    for (const auto& [key, value] : body) {
      if (!value.empty()) {
        throw ConfigError(section + "." + key, "nested keys are not supported");
      }
      out.emplace_back(section + "." + key, value.data());
    }
  }
  return out;
}

}  // namespace

void apply_ini_text(Config& config, const std::string& text) {
  for (const auto& [key, value] : read_ini_pairs(text)) config.set(key, value);
}

void apply_ini_file(Config& config, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("", "cannot read config file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  apply_ini_text(config, text.str());
}

void apply_env(Config& config) {
  if (const char* dir = std::getenv("RTSIM_OUT_DIR"); dir != nullptr && *dir != '\0') {
    config.set("run.out_dir", dir);
  }
  if (const char* w = std::getenv("RTSIM_WORKERS"); w != nullptr && *w != '\0') {
    config.set("run.workers", w);
  }
}

std::string emit_ini(const Config& config) {
  std::ostringstream out;
  std::string section;
  for (const KeySpec& k : schema()) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << "[" << k.section << "]\n";
      section = k.section;
    }
    out << k.key << " = " << config.raw(k.full_name()) << "\n";
  }
  return out.str();
}

Config parse_ini(const std::string& text) {
  Config config;
  apply_ini_text(config, text);
  return config;
}

Config resolve_config(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& flags,
                      bool use_env) {
  std::vector<std::pair<std::string, std::string>> file_values;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      throw ConfigError("", "cannot read config file '" + config_path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    file_values = read_ini_pairs(text.str());
  }
  std::string preset;
  for (const auto& [k, v] : file_values) {
    if (k == "run.preset") preset = trim(v);
  }
  for (const auto& [k, v] : flags) {
    if (k == "run.preset") preset = trim(v);
  }
  Config config;
  if (!preset.empty()) apply_preset(config, preset);
  for (const auto& [k, v] : file_values) config.set(k, v);
  if (use_env) apply_env(config);
  for (const auto& [k, v] : flags) config.set(k, v);
  return config;
}

}  // namespace rtsim::cli

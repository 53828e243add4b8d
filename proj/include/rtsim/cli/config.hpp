#pragma once

// Typed key-value configuration: a fixed schema of "section.key" entries,
// layered as defaults < preset < file < environment < flags.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtsim::cli {

/// Raised for any configuration problem; `key` names the offending entry
/// ("section.key") when there is one. Maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ValueType { Double, Int, UInt, Bool, String, DoubleList, Choice };

struct Range {
  double lo = -1e308;
  double hi = 1e308;
  bool lo_open = false;
  bool hi_open = false;
  bool allow_inf = false;
};

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type = ValueType::String;
  std::string default_value;
  std::string doc;
  std::vector<std::string> choices;  ///< Choice only
  Range range;                       ///< numeric types and list elements

  std::string full_name() const { return section + "." + key; }
};

const std::vector<KeySpec>& schema();
/// Spec for "section.key"; throws ConfigError for unknown keys.
const KeySpec& key_spec(std::string_view full_name);
/// Section used by a subcommand ("simulate-ibm" -> "ibm").
std::string section_for(std::string_view subcommand);
const std::vector<std::string>& subcommands();

struct PresetInfo {
  std::string name;
  std::string doc;
  std::vector<std::pair<std::string, std::string>> values;  ///< full key -> value
};
const std::vector<PresetInfo>& presets();

class Config {
 public:
  /// All schema defaults.
  Config();

  /// Validates `raw` against the schema and stores its canonical form.
  void set(std::string_view full_name, std::string_view raw);
  const std::string& raw(std::string_view full_name) const;
  bool is_default(std::string_view full_name) const;

  double get_double(std::string_view full_name) const;
  long long get_int(std::string_view full_name) const;
  unsigned long long get_uint(std::string_view full_name) const;
  bool get_bool(std::string_view full_name) const;
  std::string get_string(std::string_view full_name) const;
  std::vector<double> get_list(std::string_view full_name) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  bool operator==(const Config& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Canonical text for a value of the given spec; throws ConfigError.
std::string canonicalize(const KeySpec& spec, std::string_view raw);

void apply_preset(Config& config, std::string_view name);
/// Applies INI text ([section] headers, key = value, ';' or '#' comments).
void apply_ini_text(Config& config, const std::string& text);
void apply_ini_file(Config& config, const std::string& path);
/// RTSIM_OUT_DIR and RTSIM_WORKERS.
void apply_env(Config& config);

/// INI text listing every key; parse_ini(emit_ini(c)) == c.
std::string emit_ini(const Config& config);
Config parse_ini(const std::string& text);

/// Resolves the layered configuration. `flags` holds explicit command-line
/// values keyed by full name; a preset named in the file or flags applies
/// below the file.
Config resolve_config(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& flags,
                      bool use_env = true);

}  // namespace rtsim::cli

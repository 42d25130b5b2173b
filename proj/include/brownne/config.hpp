#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace brownne {

enum class ValueType { integer, real, text, int_list, real_list, boolean };

/// One accepted configuration key with its default and numeric range.
/// For list types the range applies to every element.
struct KeySpec {
  std::string name;
  ValueType type = ValueType::text;
  std::string default_value;
  double min = -1e300;
  double max = 1e300;
};

/// Flat key=value configuration. Lines are `key = value`; '#' starts a
/// comment. Validation reports every bad key at once.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  /// Parses text and validates it against `schema`, filling defaults.
  static ExperimentConfig parse(std::string_view text, const std::vector<KeySpec>& schema);
  static ExperimentConfig load(const std::string& path, const std::vector<KeySpec>& schema);

  long long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  const std::string& get_text(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_real_list(const std::string& key) const;

  /// Effective configuration (defaults filled) in canonical key order. Parsing
  /// the result with the same schema yields an identical config.
  std::string serialize() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace brownne

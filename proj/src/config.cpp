#include "brownne/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "brownne/error.hpp"

namespace brownne {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

bool parse_integer(const std::string& s, long long& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size();
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

bool parse_boolean(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

// Empty string when valid, otherwise the reason.
std::string check_value(const KeySpec& spec, const std::string& value) {
  auto in_range = [&](double x) { return x >= spec.min && x <= spec.max; };
  auto range_text = [&] {
    std::ostringstream s;
    s << "outside [" << spec.min << ", " << spec.max << "]";
    return s.str();
  };
  switch (spec.type) {
    case ValueType::integer: {
      long long x;
      if (!parse_integer(value, x)) return "not an integer";
      return in_range(static_cast<double>(x)) ? "" : range_text();
    }
    case ValueType::real: {
      double x;
      if (!parse_real(value, x)) return "not a number";
      return in_range(x) ? "" : range_text();
    }
    case ValueType::boolean: {
      bool b;
      return parse_boolean(value, b) ? "" : "not a boolean";
    }
    case ValueType::int_list:
    case ValueType::real_list: {
      for (const auto& item : split_list(value)) {
        double x;
        long long i;
        const bool ok = spec.type == ValueType::int_list ? (parse_integer(item, i) && (x = static_cast<double>(i), true))
                                                         : parse_real(item, x);
        if (!ok) return "list element '" + item + "' is malformed";
        if (!in_range(x)) return "list element '" + item + "' " + range_text();
      }
      return "";
    }
    case ValueType::text:
      return "";
  }
  return "";
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::vector<KeySpec>& schema) {
  std::map<std::string, const KeySpec*> by_name;
  for (const auto& spec : schema) by_name[spec.name] = &spec;

  ExperimentConfig cfg;
  std::vector<std::string> bad;
  std::vector<std::string> reasons;
  std::set<std::string> seen;
  std::istringstream lines{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      bad.push_back("line " + std::to_string(line_no));
      reasons.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    const auto it = by_name.find(key);
    if (it == by_name.end()) {
      bad.push_back(key);
      reasons.push_back(key + ": unknown key");
      continue;
    }
    if (!seen.insert(key).second) {
      bad.push_back(key);
      reasons.push_back(key + ": given more than once");
      continue;
    }
    if (const auto why = check_value(*it->second, value); !why.empty()) {
      bad.push_back(key);
      reasons.push_back(key + ": " + why);
      continue;
    }
    cfg.values_[key] = value;
  }
  for (const auto& spec : schema) {
    if (cfg.values_.count(spec.name) || seen.count(spec.name)) continue;
    cfg.values_[spec.name] = spec.default_value;
  }
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& r : reasons) msg += "\n  " + r;
    throw ConfigError(msg, bad);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, const std::vector<KeySpec>& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), schema);
}

namespace {

const std::string& lookup(const std::map<std::string, std::string>& values, const std::string& key) {
  const auto it = values.find(key);
  if (it == values.end()) throw ContractError("config key '" + key + "' is not part of the schema");
  return it->second;
}

}  // namespace

long long ExperimentConfig::get_int(const std::string& key) const {
  long long x = 0;
  parse_integer(lookup(values_, key), x);
  return x;
}

double ExperimentConfig::get_real(const std::string& key) const {
  double x = 0.0;
  parse_real(lookup(values_, key), x);
  return x;
}

const std::string& ExperimentConfig::get_text(const std::string& key) const { return lookup(values_, key); }

bool ExperimentConfig::get_bool(const std::string& key) const {
  bool b = false;
  parse_boolean(lookup(values_, key), b);
  return b;
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(lookup(values_, key))) {
    long long x = 0;
    parse_integer(item, x);
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::vector<double> ExperimentConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(lookup(values_, key))) {
    double x = 0.0;
    parse_real(item, x);
    out.push_back(x);
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

}  // namespace brownne

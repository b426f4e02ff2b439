#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace ectx {

// Plain key=value config file. '#' starts a comment; whitespace around keys
// and values is trimmed. Precedence is resolved by the caller: flags override
// environment, environment overrides file.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    KvConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                 ": expected key=value");
      }
      cfg.values_[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }

  std::map<std::string, std::string> values_;
};

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value ? std::string(value) : fallback;
}

// flag > env > file > built-in default
inline std::string resolve_setting(const std::string& flag_value,
                                   const char* env_name, const KvConfig& file,
                                   const std::string& file_key,
                                   const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  const std::string env_value = env_name ? env_or(env_name, "") : "";
  if (!env_value.empty()) return env_value;
  if (file.has(file_key)) return file.get(file_key);
  return fallback;
}

}  // namespace ectx

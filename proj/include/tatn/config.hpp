#ifndef TATN_CONFIG_HPP
#define TATN_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "tatn/common.hpp"

namespace tatn {

// Flat "key = value" configuration with '#' comments. Flags override file
// entries via set(). Unknown keys are rejected by name when a key set is
// given.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace tatn

#endif

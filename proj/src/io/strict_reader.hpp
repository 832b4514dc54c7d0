#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "mtorl/common/errors.hpp"

namespace mtorl::io {

// Pulls typed values out of a JSON object, leaving the target untouched when
// the key is absent. finish() rejects keys that were never consumed.
class StrictReader {
 public:
  StrictReader(const nlohmann::json& j, const std::string& what) : obj_(j), what_(what) {
    if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  }

  void get(const char* key, int& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) throw err(key, "an integer");
    target = v->get<int>();
  }

  void get(const char* key, std::uint64_t& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_number_integer()) throw err(key, "a nonnegative integer");
    if (!v->is_number_unsigned() && v->get<std::int64_t>() < 0) {
      throw err(key, "a nonnegative integer");
    }
    target = v->get<std::uint64_t>();
  }

  void get(const char* key, double& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_number()) throw err(key, "a number");
    target = v->get<double>();
  }

  void get(const char* key, bool& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) throw err(key, "a boolean");
    target = v->get<bool>();
  }

  void get(const char* key, std::string& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw err(key, "a string");
    target = v->get<std::string>();
  }

  void get(const char* key, std::vector<int>& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw err(key, "an array of integers");
    std::vector<int> out;
    for (const auto& e : *v) {
      if (!e.is_number_integer()) throw err(key, "an array of integers");
      out.push_back(e.get<int>());
    }
    target = std::move(out);
  }

  void get(const char* key, std::vector<double>& target) {
    const nlohmann::json* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw err(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw err(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    target = std::move(out);
  }

  const nlohmann::json* find(const char* key) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  // Call after every get(): any key not consumed is a mistake worth
  // rejecting loudly.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      bool known = false;
      for (const auto& s : seen_) {
        if (key == s) {
          known = true;
          break;
        }
      }
      if (!known) throw ConfigError("unknown key '" + key + "' in " + what_);
    }
  }

 private:
  ConfigError err(const char* key, const char* kind) const {
    return ConfigError(std::string("key '") + key + "' in " + what_ + " must be " + kind);
  }

  const nlohmann::json& obj_;
  std::string what_;
  std::vector<std::string> seen_;
};

}  // namespace mtorl::io

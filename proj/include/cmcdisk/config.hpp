#pragma once

#include "cmcdisk/solver.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace cmcdisk {

/// Flat "key = value" configuration with one-level [section] prefixes.
/// Every value consulted through a getter is recorded with its resolved
/// value, so the echoed config is the complete reproducibility record.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  /// All keys consulted so far with their resolved values, sorted.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  /// FNV-1a hash of the resolved key/value list.
  std::string hash() const;

  /// Typed bundles for the pipelines. Keys used: surface, barrier, H0, H,
  /// eps, p, level, boundary_tol and the [solver]/[continue]/[minmax]/
  /// [spectrum]/[check] sections.
  int level() const;
  EnergyParams energy_params() const;
  SolveConfig solve_config() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace cmcdisk

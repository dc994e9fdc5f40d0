#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kslab/fields.hpp"
#include "kslab/model_constants.hpp"
#include "kslab/particle_system.hpp"
#include "kslab/pde_solver.hpp"

namespace kslab {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Dotted key = value text configuration.  '#' starts a comment, repeated keys
// are allowed only for list-valued entries (mixture components).  Keys under
// runtime.* steer execution (workers, output paths) and are excluded from the
// canonical hash so a run's identity depends only on what it computes.
class Config {
 public:
  static Config parse_text(const std::string& text);
  static Config load_file(const std::string& path);

  void set(const std::string& key, const std::string& value);  // replaces
  bool has(const std::string& key) const;
  const std::vector<std::string>& values(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  void validate() const;  // types, token counts, enumerations, weight sums

  GaussianMixture mixture(const std::string& prefix) const;  // "rho0" or "c0"
  ModelParams model_params() const;
  PdeConfig pde_config() const;
  ParticleConfig particle_config() const;
  GridSpec kde_grid() const;

  std::string canonical_text(bool semantic_only) const;
  std::string hash() const;  // FNV-1a 64 over the semantic canonical text, 16 hex digits
  std::string plan() const;  // dry-run summary, no side effects

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

}  // namespace kslab

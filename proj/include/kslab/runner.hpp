#pragma once

#include <string>
#include <vector>

#include "kslab/config.hpp"
#include "kslab/verification.hpp"

namespace kslab {

enum class OutputFormat { kBinary, kCsv, kJson };
OutputFormat parse_format(const std::string& name);

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 hard check failure, 4 blow-up
  std::vector<std::string> files;
  std::vector<VerificationReport> reports;
  std::string summary;
};

// Derived constants under both normalization conventions, as a JSON document.
std::string constants_json_text(const Config& cfg);

RunResult run_constants(const Config& cfg, const std::string& out_dir);
RunResult run_pde(const Config& cfg, const std::string& out_dir, OutputFormat fmt);
RunResult run_particles(const Config& cfg, const std::string& out_dir, OutputFormat fmt);

// Cross-checks two finished run directories (one grid run, one ensemble run)
// against each other; order-insensitive.
RunResult compare_runs(const Config& cfg, const std::string& dir_a, const std::string& dir_b,
                       const std::string& out_dir);

}  // namespace kslab

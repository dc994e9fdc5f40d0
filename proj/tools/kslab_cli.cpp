#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "kslab.h"

namespace {

int status_to_exit(ks_status s) {
  switch (s) {
    case KS_OK: return 0;
    case KS_ERR_CONFIG: return 2;
    case KS_ERR_DOMAIN: return 2;
    case KS_ERR_CHECK_FAILED: return 3;
    case KS_ERR_BLOWUP: return 4;
    default: return 1;
  }
}

struct ConfigGuard {
  ks_config* cfg = nullptr;
  ~ConfigGuard() { ks_config_free(cfg); }
};

struct StringGuard {
  char* s = nullptr;
  ~StringGuard() { ks_string_free(s); }
};

int report_failure(ks_status s) {
  std::fprintf(stderr, "error: %s\n", ks_last_error());
  return status_to_exit(s);
}

std::string config_value(const ks_config* cfg, const char* key) {
  StringGuard g;
  if (ks_config_get(cfg, key, &g.s) != KS_OK || !g.s) return "";
  return g.s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for a parabolic chemotaxis system and its interacting ensemble"};
  app.require_subcommand(1);

  std::string config_path, out_flag, format_flag, run_a, run_b;
  std::uint64_t seed_flag = 0;
  int workers_flag = 0;
  bool dry_run = false;

  CLI::App* constants = app.add_subcommand("constants", "derived constants and condition report");
  CLI::App* solve = app.add_subcommand("solve-pde", "grid run of the coupled system");
  CLI::App* simulate = app.add_subcommand("simulate", "interacting ensemble run");
  CLI::App* compare = app.add_subcommand("compare", "cross-check two finished run directories");
  compare->add_option("run_a", run_a, "first run directory")->required();
  compare->add_option("run_b", run_b, "second run directory")->required();

  for (CLI::App* sub : {constants, solve, simulate, compare}) {
    sub->add_option("--config", config_path, "configuration file (key = value lines)");
    sub->add_option("--out", out_flag, "output directory (overrides runtime.out)");
    sub->add_option("--seed", seed_flag, "overrides run.seed");
    sub->add_option("--workers", workers_flag, "overrides runtime.workers");
    sub->add_option("--format", format_flag, "field export format: csv, json or binary")
        ->check(CLI::IsMember({"csv", "json", "binary"}));
    sub->add_flag("--dry-run", dry_run, "validate and print the plan without running");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();

  ConfigGuard guard;
  ks_status st = config_path.empty() ? ks_config_parse("", &guard.cfg)
                                     : ks_config_load(config_path.c_str(), &guard.cfg);
  if (st != KS_OK) return report_failure(st);

  if (sub->count("--seed") > 0) {
    st = ks_config_set(guard.cfg, "run.seed", std::to_string(seed_flag).c_str());
    if (st != KS_OK) return report_failure(st);
  }
  if (sub->count("--workers") > 0) {
    st = ks_config_set(guard.cfg, "runtime.workers", std::to_string(workers_flag).c_str());
    if (st != KS_OK) return report_failure(st);
  } else if (const char* env = std::getenv("KSLAB_WORKERS"); env && *env) {
    st = ks_config_set(guard.cfg, "runtime.workers", env);
    if (st != KS_OK) return report_failure(st);
  }
  if (!format_flag.empty()) {
    st = ks_config_set(guard.cfg, "runtime.format", format_flag.c_str());
    if (st != KS_OK) return report_failure(st);
  }
  if (!out_flag.empty()) {
    st = ks_config_set(guard.cfg, "runtime.out", out_flag.c_str());
    if (st != KS_OK) return report_failure(st);
  }

  std::string out_dir = config_value(guard.cfg, "runtime.out");
  if (out_dir.empty()) out_dir = "kslab-out";
  const std::string format = config_value(guard.cfg, "runtime.format");

  if (dry_run || config_value(guard.cfg, "runtime.dry_run") == "true") {
    StringGuard plan;
    st = ks_config_plan(guard.cfg, &plan.s);
    if (st != KS_OK) return report_failure(st);
    std::fputs(plan.s, stdout);
    return 0;
  }

  if (sub == constants) {
    StringGuard text;
    st = ks_constants_json(guard.cfg, &text.s);
    if (st != KS_OK) return report_failure(st);
    std::fputs(text.s, stdout);
    StringGuard summary;
    st = ks_run_constants(guard.cfg, out_dir.c_str(), &summary.s);
    if (st != KS_OK && st != KS_ERR_CHECK_FAILED) return report_failure(st);
    std::fprintf(stdout, "%s\n", summary.s ? summary.s : "");
    return status_to_exit(st);
  }

  StringGuard summary;
  if (sub == solve) {
    st = ks_run_pde(guard.cfg, out_dir.c_str(), format.empty() ? nullptr : format.c_str(),
                    &summary.s);
  } else if (sub == simulate) {
    st = ks_run_particles(guard.cfg, out_dir.c_str(), format.empty() ? nullptr : format.c_str(),
                          &summary.s);
  } else {
    st = ks_compare_runs(guard.cfg, run_a.c_str(), run_b.c_str(), out_dir.c_str(), &summary.s);
  }
  if (st != KS_OK && st != KS_ERR_CHECK_FAILED && st != KS_ERR_BLOWUP) return report_failure(st);
  if (summary.s && *summary.s) std::fprintf(stdout, "%s\n", summary.s);
  if (st == KS_ERR_BLOWUP) std::fprintf(stderr, "run ended in blow-up\n");
  if (st == KS_ERR_CHECK_FAILED) std::fprintf(stderr, "one or more hard checks failed\n");
  return status_to_exit(st);
}

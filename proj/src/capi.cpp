#include "kslab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "kslab/config.hpp"
#include "kslab/io.hpp"
#include "kslab/particle_system.hpp"
#include "kslab/pde_solver.hpp"
#include "kslab/runner.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ks_status fail(ks_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

ks_status from_exception() {
  try {
    throw;
  } catch (const kslab::ConfigError& e) {
    return fail(KS_ERR_CONFIG, e.what());
  } catch (const kslab::IoError& e) {
    return fail(KS_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(KS_ERR_DOMAIN, e.what());
  } catch (const std::domain_error& e) {
    return fail(KS_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KS_ERR_INTERNAL, "unknown error");
  }
}

ks_status exit_code_to_status(int code) {
  switch (code) {
    case 0: return KS_OK;
    case 3: return KS_ERR_CHECK_FAILED;
    case 4: return KS_ERR_BLOWUP;
    default: return KS_ERR_INTERNAL;
  }
}

kslab::OutputFormat format_or_default(const char* format, const kslab::Config& cfg) {
  if (format && *format) return kslab::parse_format(format);
  return kslab::parse_format(cfg.get_string("runtime.format", "binary"));
}

}  // namespace

struct ks_config {
  kslab::Config cfg;
};

struct ks_pde {
  kslab::PdeSolver solver;
};

struct ks_particles {
  kslab::ParticleSystem system;
};

extern "C" {

const char* ks_last_error(void) { return g_last_error.c_str(); }

void ks_string_free(char* s) { std::free(s); }

ks_status ks_config_parse(const char* text, ks_config** out) {
  if (!text || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = new ks_config{kslab::Config::parse_text(text)};
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_load(const char* path, ks_config** out) {
  if (!path || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = new ks_config{kslab::Config::load_file(path)};
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_set(ks_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    cfg->cfg.set(key, value);
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_get(const ks_config* cfg, const char* key, char** out) {
  if (!cfg || !key || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = dup_string(cfg->cfg.get_string(key, ""));
    return *out ? KS_OK : fail(KS_ERR_INTERNAL, "out of memory");
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_validate(const ks_config* cfg) {
  if (!cfg) return fail(KS_ERR_INVALID_HANDLE, "null config");
  try {
    cfg->cfg.validate();
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_hash(const ks_config* cfg, char** out) {
  if (!cfg || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = dup_string(cfg->cfg.hash());
    return *out ? KS_OK : fail(KS_ERR_INTERNAL, "out of memory");
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_config_plan(const ks_config* cfg, char** out) {
  if (!cfg || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = dup_string(cfg->cfg.plan());
    return *out ? KS_OK : fail(KS_ERR_INTERNAL, "out of memory");
  } catch (...) {
    return from_exception();
  }
}

void ks_config_free(ks_config* cfg) { delete cfg; }

ks_status ks_constants_json(const ks_config* cfg, char** out) {
  if (!cfg || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = dup_string(kslab::constants_json_text(cfg->cfg));
    return *out ? KS_OK : fail(KS_ERR_INTERNAL, "out of memory");
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_run_constants(const ks_config* cfg, const char* out_dir, char** summary_out) {
  if (!cfg || !out_dir) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    const kslab::RunResult r = kslab::run_constants(cfg->cfg, out_dir);
    if (summary_out) *summary_out = dup_string(r.summary);
    return exit_code_to_status(r.exit_code);
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_run_pde(const ks_config* cfg, const char* out_dir, const char* format,
                     char** summary_out) {
  if (!cfg || !out_dir) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    const kslab::RunResult r =
        kslab::run_pde(cfg->cfg, out_dir, format_or_default(format, cfg->cfg));
    if (summary_out) *summary_out = dup_string(r.summary);
    return exit_code_to_status(r.exit_code);
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_run_particles(const ks_config* cfg, const char* out_dir, const char* format,
                           char** summary_out) {
  if (!cfg || !out_dir) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    const kslab::RunResult r =
        kslab::run_particles(cfg->cfg, out_dir, format_or_default(format, cfg->cfg));
    if (summary_out) *summary_out = dup_string(r.summary);
    return exit_code_to_status(r.exit_code);
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_compare_runs(const ks_config* cfg, const char* dir_a, const char* dir_b,
                          const char* out_dir, char** summary_out) {
  if (!cfg || !dir_a || !dir_b || !out_dir) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    const kslab::RunResult r = kslab::compare_runs(cfg->cfg, dir_a, dir_b, out_dir);
    if (summary_out) *summary_out = dup_string(r.summary);
    return exit_code_to_status(r.exit_code);
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_pde_create(const ks_config* cfg, ks_pde** out) {
  if (!cfg || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    cfg->cfg.validate();
    const kslab::GaussianMixture rho0 = cfg->cfg.mixture("rho0");
    if (rho0.components.empty())
      throw kslab::ConfigError("grid run needs rho0.component entries");
    *out = new ks_pde{kslab::PdeSolver(cfg->cfg.pde_config(), rho0, cfg->cfg.mixture("c0"))};
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_pde_step(ks_pde* p, int* blew_up) {
  if (!p) return fail(KS_ERR_INVALID_HANDLE, "null handle");
  try {
    const kslab::StepStatus s = p->solver.step();
    if (blew_up) *blew_up = s == kslab::StepStatus::kBlowUp ? 1 : 0;
    return s == kslab::StepStatus::kBlowUp ? KS_ERR_BLOWUP : KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_pde_run(ks_pde* p, int* blew_up) {
  if (!p) return fail(KS_ERR_INVALID_HANDLE, "null handle");
  try {
    const kslab::StepStatus s = p->solver.run();
    if (blew_up) *blew_up = s == kslab::StepStatus::kBlowUp ? 1 : 0;
    return s == kslab::StepStatus::kBlowUp ? KS_ERR_BLOWUP : KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_pde_time(const ks_pde* p, double* t) {
  if (!p || !t) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  *t = p->solver.time();
  return KS_OK;
}

ks_status ks_pde_mass(const ks_pde* p, double* mass) {
  if (!p || !mass) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *mass = p->solver.mass();
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_pde_density_norm(const ks_pde* p, double r, double* out) {
  if (!p || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    *out = p->solver.density_norm(r <= 0.0 ? kslab::NormOrder::infinity()
                                           : kslab::NormOrder::finite(r));
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

void ks_pde_free(ks_pde* p) { delete p; }

ks_status ks_particles_create(const ks_config* cfg, ks_particles** out) {
  if (!cfg || !out) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  try {
    cfg->cfg.validate();
    const kslab::GaussianMixture rho0 = cfg->cfg.mixture("rho0");
    if (rho0.components.empty())
      throw kslab::ConfigError("ensemble run needs rho0.component entries");
    *out = new ks_particles{
        kslab::ParticleSystem(cfg->cfg.particle_config(), rho0, cfg->cfg.mixture("c0"))};
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_particles_advance(ks_particles* p) {
  if (!p) return fail(KS_ERR_INVALID_HANDLE, "null handle");
  try {
    p->system.advance();
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_particles_run(ks_particles* p) {
  if (!p) return fail(KS_ERR_INVALID_HANDLE, "null handle");
  try {
    p->system.run();
    return KS_OK;
  } catch (...) {
    return from_exception();
  }
}

ks_status ks_particles_time(const ks_particles* p, double* t) {
  if (!p || !t) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  *t = p->system.time();
  return KS_OK;
}

ks_status ks_particles_count(const ks_particles* p, long long* n) {
  if (!p || !n) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  *n = p->system.config().n_particles;
  return KS_OK;
}

ks_status ks_particles_positions(const ks_particles* p, double* buf, long long cap) {
  if (!p || !buf) return fail(KS_ERR_INVALID_HANDLE, "null argument");
  const std::vector<double>& pos = p->system.positions();
  if (cap < static_cast<long long>(pos.size()))
    return fail(KS_ERR_DOMAIN, "position buffer too small");
  std::memcpy(buf, pos.data(), pos.size() * sizeof(double));
  return KS_OK;
}

void ks_particles_free(ks_particles* p) { delete p; }

}  // extern "C"

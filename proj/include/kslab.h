#ifndef KSLAB_H
#define KSLAB_H

/* C interface to the chemotaxis laboratory core.  All entry points return a
 * ks_status; on any failure ks_last_error() carries a message that stays
 * valid on the calling thread until the next library call.  Strings returned
 * through char** are heap-allocated; release them with ks_string_free. */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  KS_OK = 0,
  KS_ERR_CONFIG = 2,
  KS_ERR_CHECK_FAILED = 3,
  KS_ERR_BLOWUP = 4,
  KS_ERR_DOMAIN = 5,
  KS_ERR_IO = 6,
  KS_ERR_INVALID_HANDLE = 7,
  KS_ERR_INTERNAL = 8
} ks_status;

const char* ks_last_error(void);
void ks_string_free(char* s);

/* ---- configuration ---- */

typedef struct ks_config ks_config;

ks_status ks_config_parse(const char* text, ks_config** out);
ks_status ks_config_load(const char* path, ks_config** out);
ks_status ks_config_set(ks_config* cfg, const char* key, const char* value);
/* First value stored under key, or the empty string when the key is absent. */
ks_status ks_config_get(const ks_config* cfg, const char* key, char** out);
ks_status ks_config_validate(const ks_config* cfg);
ks_status ks_config_hash(const ks_config* cfg, char** out);
ks_status ks_config_plan(const ks_config* cfg, char** out);
void ks_config_free(ks_config* cfg);

/* ---- whole commands (mirror the CLI, return its exit semantics) ---- */

ks_status ks_constants_json(const ks_config* cfg, char** out);
ks_status ks_run_constants(const ks_config* cfg, const char* out_dir, char** summary_out);
ks_status ks_run_pde(const ks_config* cfg, const char* out_dir, const char* format,
                     char** summary_out);
ks_status ks_run_particles(const ks_config* cfg, const char* out_dir, const char* format,
                           char** summary_out);
ks_status ks_compare_runs(const ks_config* cfg, const char* dir_a, const char* dir_b,
                          const char* out_dir, char** summary_out);

/* ---- stepping handles ---- */

typedef struct ks_pde ks_pde;

ks_status ks_pde_create(const ks_config* cfg, ks_pde** out);
ks_status ks_pde_step(ks_pde* p, int* blew_up);
ks_status ks_pde_run(ks_pde* p, int* blew_up);
ks_status ks_pde_time(const ks_pde* p, double* t);
ks_status ks_pde_mass(const ks_pde* p, double* mass);
/* r >= 1 for an L^r norm; r <= 0 requests the sup norm. */
ks_status ks_pde_density_norm(const ks_pde* p, double r, double* out);
void ks_pde_free(ks_pde* p);

typedef struct ks_particles ks_particles;

ks_status ks_particles_create(const ks_config* cfg, ks_particles** out);
ks_status ks_particles_advance(ks_particles* p);
ks_status ks_particles_run(ks_particles* p);
ks_status ks_particles_time(const ks_particles* p, double* t);
ks_status ks_particles_count(const ks_particles* p, long long* n);
/* Copies n*d coordinates (particle-major) into buf; cap is buf's capacity. */
ks_status ks_particles_positions(const ks_particles* p, double* buf, long long cap);
void ks_particles_free(ks_particles* p);

#ifdef __cplusplus
}
#endif

#endif /* KSLAB_H */

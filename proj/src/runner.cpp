#include "kslab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kslab/io.hpp"

namespace kslab {

namespace {

using nlohmann::json;

json constants_to_json(const DerivedConstants& c) {
  json j;
  j["q"] = c.q;
  j["q_prime"] = c.q_prime;
  j["q_tilde1"] = c.q_tilde1;
  j["q_tilde2"] = c.q_tilde2;
  j["c1_qprime"] = c.c1_qprime;
  j["c1_one"] = c.c1_one;
  j["c0_qtilde1"] = c.c0_qtilde1;
  j["c0_qtilde2"] = c.c0_qtilde2;
  j["K1"] = c.K1;
  j["K2"] = c.K2;
  j["A"] = c.A;
  j["B"] = c.B;
  j["condition_lhs"] = c.condition_lhs;
  j["margin"] = c.margin;
  j["condition_satisfied"] = c.condition_satisfied;
  j["cq_exists"] = c.cq_exists;
  j["cq"] = c.cq;
  j["cq_chi0_limit"] = c.cq_chi0_limit;
  j["polynomial_residual"] = c.polynomial_residual;
  j["uniqueness_lhs"] = c.uniqueness_lhs;
  j["uniqueness_satisfied"] = c.uniqueness_satisfied;
  j["informational"] = c.informational;
  return j;
}

std::string field_extension(OutputFormat fmt) {
  switch (fmt) {
    case OutputFormat::kCsv: return ".csv";
    case OutputFormat::kJson: return ".json";
    default: return ".bin";
  }
}

// The manifest always points at the binary container (compare reads it back);
// csv/json formats are written alongside as exports.
std::string write_field(OutputFormat fmt, const std::string& dir, const std::string& stem,
                        const GridField& f, double t, const std::string& hash,
                        std::vector<std::string>& files) {
  const std::string bin_name = stem + "-" + hash + ".bin";
  write_field_binary(dir + "/" + bin_name, f, t, hash);
  files.push_back(bin_name);
  if (fmt != OutputFormat::kBinary) {
    const std::string name = stem + "-" + hash + field_extension(fmt);
    const std::string path = dir + "/" + name;
    if (fmt == OutputFormat::kCsv)
      write_field_csv(path, f, t, hash);
    else
      write_field_json(path, f, t, hash);
    files.push_back(name);
  }
  return bin_name;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

json base_manifest(const std::string& command, const Config& cfg) {
  json m;
  m["format"] = 1;
  m["command"] = command;
  m["config_hash"] = cfg.hash();
  m["config"] = cfg.canonical_text(true);
  return m;
}

std::string manifest_name(const std::string& hash) { return "manifest-" + hash + ".json"; }

json load_manifest(const std::string& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("run directory '" + dir + "' does not exist");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("manifest-", 0) == 0 && name.size() > 14 &&
        name.substr(name.size() - 5) == ".json")
      return json::parse(read_text(entry.path().string()));
  }
  throw ConfigError("no run manifest found in '" + dir + "'");
}

double weighted_exponent(int d, double q) { return 1.0 - d / (2.0 * q); }

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  if (name == "binary") return OutputFormat::kBinary;
  throw ConfigError("unknown output format '" + name + "'");
}

std::string constants_json_text(const Config& cfg) {
  const ModelParams p = cfg.model_params();
  json out;
  out["format"] = 1;
  out["config_hash"] = cfg.hash();
  out["model"] = {{"d", p.d},          {"chi", p.chi},
                  {"lambda", p.lambda}, {"T", p.T},
                  {"q", p.q_or_default()}, {"norm_rho0", p.norm_rho0},
                  {"norm_grad_c0", p.norm_grad_c0}};
  for (NormConvention conv : {NormConvention::kQuadrature, NormConvention::kLegacy}) {
    const DerivedConstants c = derive_constants(p, conv);
    const char* name = conv == NormConvention::kQuadrature ? "quadrature" : "legacy";
    out[name] = constants_to_json(c);
    out[name]["chi_star"] = chi_star(p, conv);
  }
  const DerivedConstants cq = derive_constants(p, NormConvention::kQuadrature);
  if (p.d >= 3 && std::abs(p.q_or_default() - 1.5 * p.d) <= 1e-12 && cq.cq_exists) {
    const BootstrapSequence bs =
        bootstrap_bound_sequence(p, cq.cq, bootstrap_default_A0(p, cq.cq), 64);
    out["bootstrap"] = {{"a0", bs.a0},
                        {"fixed_point", bs.fixed_point},
                        {"bound", bs.bound},
                        {"sup_norm_bound", bs.sup_norm_bound},
                        {"diverged", bs.diverged},
                        {"drift_bound_coeff", drift_bound_coeff(p, cq.cq)}};
  }
  return out.dump(2) + "\n";
}

RunResult run_constants(const Config& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  RunResult res;
  const std::string hash = cfg.hash();

  const std::string constants_name = "constants-" + hash + ".json";
  write_text(out_dir + "/" + constants_name, constants_json_text(cfg));
  res.files.push_back(constants_name);

  const long sweep_points = cfg.get_long("constants.sweep_points", 0);
  if (sweep_points > 1) {
    const ModelParams p = cfg.model_params();
    const double lo = cfg.get_double("constants.sweep_chi_min", 0.0);
    const double hi = cfg.get_double("constants.sweep_chi_max", chi_star(p));
    if (!(hi > lo) || lo < 0.0)
      throw ConfigError("constants sweep needs 0 <= sweep_chi_min < sweep_chi_max");
    std::vector<std::vector<double>> rows;
    for (long i = 0; i < sweep_points; ++i) {
      ModelParams pi = p;
      pi.chi = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(sweep_points - 1);
      const DerivedConstants c = derive_constants(pi);
      rows.push_back({pi.chi, c.condition_lhs, c.margin, c.cq_exists ? 1.0 : 0.0, c.cq});
    }
    const std::string sweep_name = "sweep-" + hash + ".csv";
    write_csv(out_dir + "/" + sweep_name, hash, {"chi", "condition_lhs", "margin", "cq_exists", "cq"},
              rows);
    res.files.push_back(sweep_name);
  }

  json manifest = base_manifest("constants", cfg);
  manifest["files"] = res.files;
  write_text(out_dir + "/" + manifest_name(hash), manifest.dump(2) + "\n");
  res.files.push_back(manifest_name(hash));

  const DerivedConstants c = derive_constants(cfg.model_params());
  std::ostringstream sum;
  sum << "condition_lhs=" << format_double(c.condition_lhs)
      << " satisfied=" << (c.condition_satisfied ? "yes" : "no");
  if (c.cq_exists) sum << " cq=" << format_double(c.cq);
  res.summary = sum.str();
  return res;
}

RunResult run_pde(const Config& cfg, const std::string& out_dir, OutputFormat fmt) {
  cfg.validate();
  ensure_dir(out_dir);
  RunResult res;
  const std::string hash = cfg.hash();

  const GaussianMixture rho0 = cfg.mixture("rho0");
  if (rho0.components.empty()) throw ConfigError("grid run needs rho0.component entries");
  const GaussianMixture c0 = cfg.mixture("c0");

  PdeSolver solver(cfg.pde_config(), rho0, c0);
  const StepStatus status = solver.run();

  const ModelParams p = cfg.model_params();
  const double q = p.q_or_default();
  const NormTrace& tr = solver.trace();

  const std::string rho_name =
      write_field(fmt, out_dir, "rho-final", solver.density(), solver.time(), hash, res.files);
  const std::string c_name =
      write_field(fmt, out_dir, "c-final", solver.chemical(), solver.time(), hash, res.files);

  const NormSeries sq = make_decay_series(tr.times, tr.norm_q, weighted_exponent(p.d, q));
  const std::string norms_q_name = "norms-q-" + hash + ".csv";
  write_norm_series_csv(out_dir + "/" + norms_q_name, sq, hash);
  res.files.push_back(norms_q_name);

  const NormSeries sdh = make_decay_series(tr.times, tr.norm_dhalf, 0.0);
  const std::string norms_dh_name = "norms-dhalf-" + hash + ".csv";
  write_norm_series_csv(out_dir + "/" + norms_dh_name, sdh, hash);
  res.files.push_back(norms_dh_name);

  {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < tr.times.size(); ++i)
      rows.push_back({tr.times[i], tr.mass[i], tr.drift_sup[i], tr.norm_inf[i]});
    const std::string name = "trace-" + hash + ".csv";
    write_csv(out_dir + "/" + name, hash, {"t", "mass", "drift_sup", "norm_inf"}, rows);
    res.files.push_back(name);
  }

  if (p.d >= 2) {
    const double decay_slack = cfg.get_double("check.decay_slack", 0.05);
    const double drift_slack = cfg.get_double("check.drift_slack", 0.2);
    res.reports = run_decay_check(decay_from_trace(tr), p, decay_slack, drift_slack, hash);
  }
  if (!solver.history().empty() && status == StepStatus::kOk) {
    const GridField duh = solver.duhamel_c();
    const double denom =
        std::max(grid_lq_norm(solver.chemical(), NormOrder::infinity()), 1e-300);
    const double rel =
        grid_distance(duh, solver.chemical(), NormOrder::infinity()) / denom;
    res.reports.push_back(bound_report(
        "chemical_two_route",
        "relative sup distance between the stepped chemical field and its integral reconstruction",
        rel, cfg.get_double("check.duhamel_tol", 1e-3), 0.0, hash, true));
  }

  json manifest = base_manifest("solve-pde", cfg);
  manifest["final_time"] = solver.time();
  manifest["steps"] = solver.step_count();
  manifest["mass"] = solver.mass();
  manifest["min_density"] = solver.min_density_seen();
  manifest["files"] = json::object();
  manifest["files"]["density_final"] = rho_name;
  manifest["files"]["chemical_final"] = c_name;
  manifest["files"]["norms_q"] = norms_q_name;
  manifest["files"]["norms_dhalf"] = norms_dh_name;
  if (solver.blowup_info()) {
    manifest["blowup"] = {{"time", solver.blowup_info()->time},
                          {"step", solver.blowup_info()->step},
                          {"sup_norm", solver.blowup_info()->sup_norm}};
  } else {
    manifest["blowup"] = nullptr;
  }
  write_text(out_dir + "/" + manifest_name(hash), manifest.dump(2) + "\n");
  res.files.push_back(manifest_name(hash));

  const std::string reports_name = "reports-" + hash + ".json";
  write_text(out_dir + "/" + reports_name, reports_to_json(res.reports));
  res.files.push_back(reports_name);

  std::ostringstream sum;
  if (status == StepStatus::kBlowUp) {
    sum << "blow-up at t=" << format_double(solver.blowup_info()->time)
        << " (sup=" << format_double(solver.blowup_info()->sup_norm) << ")";
    res.exit_code = 4;
  } else {
    sum << "reached T=" << format_double(solver.time()) << ", mass drift "
        << format_double(std::abs(solver.mass() - 1.0)) << ", weighted q-norm sup "
        << format_double(sq.sup());
    res.exit_code = any_hard_failure(res.reports) ? 3 : 0;
  }
  res.summary = sum.str();
  return res;
}

RunResult run_particles(const Config& cfg, const std::string& out_dir, OutputFormat fmt) {
  cfg.validate();
  ensure_dir(out_dir);
  RunResult res;
  const std::string hash = cfg.hash();

  const GaussianMixture rho0 = cfg.mixture("rho0");
  if (rho0.components.empty()) throw ConfigError("ensemble run needs rho0.component entries");
  const GaussianMixture c0 = cfg.mixture("c0");

  ParticleSystem sys(cfg.particle_config(), rho0, c0);
  const GridSpec kde_grid = cfg.kde_grid();
  const ModelParams p = cfg.model_params();
  const double q = p.q_or_default();
  const long norm_stride = std::max(1L, cfg.get_long("particles.norm_stride", 1));

  const double steps_real = sys.config().T / sys.config().dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real))
    throw ConfigError("model.T must be an integer multiple of particles.dt");

  std::vector<double> times, norm_q, norm_dhalf, drift_times, drift_sup;
  for (long k = 0; k < steps; ++k) {
    sys.advance();
    drift_times.push_back(sys.time() - sys.config().dt);
    drift_sup.push_back(sys.last_drift_sup());
    if (sys.step_count() % norm_stride == 0 || sys.step_count() == steps) {
      const KdeResult kde = sys.empirical_density(kde_grid);
      times.push_back(sys.time());
      norm_q.push_back(grid_lq_norm(kde.field, NormOrder::finite(q)));
      if (p.d >= 2)
        norm_dhalf.push_back(grid_lq_norm(kde.field, NormOrder::finite(0.5 * p.d)));
    }
  }

  const KdeResult kde = sys.empirical_density(kde_grid);
  const std::string pos_name = "positions-final-" + hash + ".bin";
  write_points_binary(out_dir + "/" + pos_name, sys.positions(), sys.config().n_particles,
                      sys.config().d, sys.time(), hash);
  res.files.push_back(pos_name);
  const std::string kde_name =
      write_field(fmt, out_dir, "kde-final", kde.field, sys.time(), hash, res.files);

  const NormSeries sq = make_decay_series(times, norm_q, weighted_exponent(p.d, q));
  const std::string norms_q_name = "norms-q-" + hash + ".csv";
  write_norm_series_csv(out_dir + "/" + norms_q_name, sq, hash);
  res.files.push_back(norms_q_name);

  std::string norms_dh_name;
  if (p.d >= 2) {
    const NormSeries sdh = make_decay_series(times, norm_dhalf, 0.0);
    norms_dh_name = "norms-dhalf-" + hash + ".csv";
    write_norm_series_csv(out_dir + "/" + norms_dh_name, sdh, hash);
    res.files.push_back(norms_dh_name);
  }

  {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < drift_times.size(); ++i)
      rows.push_back({drift_times[i], drift_sup[i]});
    const std::string name = "drift-" + hash + ".csv";
    write_csv(out_dir + "/" + name, hash, {"t", "drift_sup"}, rows);
    res.files.push_back(name);
  }

  if (p.d >= 2) {
    DecayMeasurements m;
    m.times = times;
    m.norm_q = norm_q;
    m.norm_dhalf = norm_dhalf;
    m.drift_sup.clear();  // ensemble drift is observed at pre-step times; reported separately
    const double decay_slack = cfg.get_double("check.decay_slack", 0.05);
    const double drift_slack = cfg.get_double("check.drift_slack", 0.2);
    res.reports = run_decay_check(m, p, decay_slack, drift_slack, hash);
    const DerivedConstants dc = derive_constants(p);
    if (dc.cq_exists) {
      double sup_weighted = 0.0;
      for (size_t i = 0; i < drift_times.size(); ++i)
        if (drift_times[i] > 0.0)
          sup_weighted = std::max(sup_weighted, std::sqrt(drift_times[i]) * drift_sup[i]);
      res.reports.push_back(bound_report(
          "drift_envelope", "sup over t of sqrt(t) max_i |drift_i| against its coefficient",
          sup_weighted, drift_bound_coeff(p, dc.cq), drift_slack, hash,
          dc.condition_satisfied && !dc.informational));
    }
  }

  json manifest = base_manifest("simulate", cfg);
  manifest["final_time"] = sys.time();
  manifest["steps"] = sys.step_count();
  manifest["retained_slices"] = sys.retained_slices();
  manifest["kde_bandwidth"] = kde.bandwidth;
  manifest["kde_sparse_warning"] = kde.sparse_warning;
  manifest["determinism"] = {
      {"seed", sys.config().seed},
      {"stream", "philox4x64-10, key=(seed,particle), counter=(purpose,step,block,0)"},
      {"backend", sys.config().backend == DriftBackend::kMesh ? "mesh" : "pairwise"},
      {"epsilon", sys.config().epsilon},
      {"delta_cutoff", sys.config().delta_cutoff}};
  manifest["files"] = json::object();
  manifest["files"]["positions_final"] = pos_name;
  manifest["files"]["kde_final"] = kde_name;
  manifest["files"]["norms_q"] = norms_q_name;
  if (!norms_dh_name.empty()) manifest["files"]["norms_dhalf"] = norms_dh_name;
  write_text(out_dir + "/" + manifest_name(hash), manifest.dump(2) + "\n");
  res.files.push_back(manifest_name(hash));

  const std::string reports_name = "reports-" + hash + ".json";
  write_text(out_dir + "/" + reports_name, reports_to_json(res.reports));
  res.files.push_back(reports_name);

  std::ostringstream sum;
  sum << "N=" << sys.config().n_particles << " reached T=" << format_double(sys.time())
      << ", weighted q-norm sup " << format_double(sq.sup());
  if (kde.sparse_warning) sum << " (sparse density estimate)";
  res.exit_code = any_hard_failure(res.reports) ? 3 : 0;
  res.summary = sum.str();
  return res;
}

RunResult compare_runs(const Config& cfg, const std::string& dir_a, const std::string& dir_b,
                       const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  RunResult res;
  const std::string hash = cfg.hash();

  const json man_a = load_manifest(dir_a);
  const json man_b = load_manifest(dir_b);
  const json* grid_man = nullptr;
  const json* ens_man = nullptr;
  std::string grid_dir, ens_dir;
  for (const auto& [man, dir] : {std::pair<const json*, std::string>{&man_a, dir_a},
                                 {&man_b, dir_b}}) {
    const std::string cmd = man->at("command").get<std::string>();
    if (cmd == "solve-pde") {
      grid_man = man;
      grid_dir = dir;
    } else if (cmd == "simulate") {
      ens_man = man;
      ens_dir = dir;
    }
  }
  if (!grid_man || !ens_man)
    throw ConfigError("compare needs one grid-run directory and one ensemble-run directory");

  double t_field = 0.0;
  const GridField rho = read_field_binary(
      grid_dir + "/" + grid_man->at("files").at("density_final").get<std::string>(), &t_field);
  long n = 0;
  int d = 0;
  double t_pts = 0.0;
  const std::vector<double> pos = read_points_binary(
      ens_dir + "/" + ens_man->at("files").at("positions_final").get<std::string>(), &n, &d,
      &t_pts);
  if (d != rho.spec.d) throw ConfigError("compared runs have different dimensions");
  if (std::abs(t_field - t_pts) > 1e-9 * std::max(1.0, t_field))
    throw ConfigError("compared runs end at different times");

  double mean_var = 0.0;
  for (int a = 0; a < d; ++a) {
    double mean = 0.0;
    for (long i = 0; i < n; ++i) mean += pos[i * d + a];
    mean /= n;
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += (pos[i * d + a] - mean) * (pos[i * d + a] - mean);
    mean_var += acc / (n - 1);
  }
  mean_var /= d;
  const double bw = cfg.get_double("particles.kde_bandwidth_factor", 1.06) *
                    std::sqrt(mean_var) * std::pow(static_cast<double>(n), -1.0 / (d + 4.0));

  const GridField kde = kde_field(pos.data(), n, d, rho.spec, bw);
  const double l1 = grid_distance(kde, rho, NormOrder::finite(1.0));
  const double l2 = grid_distance(kde, rho, NormOrder::finite(2.0));
  const double band = bootstrap_l1_band(pos, n, d, rho, bw, cfg.get_u64("run.seed", 1), 32);

  const double budget = cfg.get_double("check.kde_l1_budget", 0.1);
  const bool hard_budget = cfg.get_double("model.chi", 0.0) == 0.0;
  res.reports.push_back(bound_report(
      "cross_kde_l1", "L1 distance between the ensemble density estimate and the grid solution",
      l1, budget, 0.0, hash, hard_budget));
  res.reports.push_back(bound_report(
      "cross_kde_l2", "L2 distance between the ensemble density estimate and the grid solution",
      l2, budget, 0.0, hash, false));
  res.reports.push_back(bound_report("cross_kde_l1_band",
                                     "bootstrap noise band of the L1 statistic", band, budget,
                                     0.0, hash, false));

  const std::string reports_name = "compare-reports-" + hash + ".json";
  write_text(out_dir + "/" + reports_name, reports_to_json(res.reports));
  res.files.push_back(reports_name);

  json manifest = base_manifest("compare", cfg);
  manifest["grid_run"] = grid_man->at("config_hash");
  manifest["ensemble_run"] = ens_man->at("config_hash");
  manifest["l1"] = l1;
  manifest["l2"] = l2;
  manifest["l1_noise_band"] = band;
  manifest["files"] = res.files;
  write_text(out_dir + "/" + manifest_name(hash), manifest.dump(2) + "\n");
  res.files.push_back(manifest_name(hash));

  std::ostringstream sum;
  sum << "L1=" << format_double(l1) << " L2=" << format_double(l2)
      << " band=" << format_double(band);
  res.exit_code = any_hard_failure(res.reports) ? 3 : 0;
  res.summary = sum.str();
  return res;
}

}  // namespace kslab

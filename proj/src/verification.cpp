#include "kslab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kslab/rng.hpp"

namespace kslab {

namespace {

constexpr uint64_t kStreamBootstrap = 2;

VerificationReport make_report(const std::string& check_id, const std::string& statement,
                               double measured, double predicted, double tolerance, bool ok,
                               const std::string& config_hash, bool hard) {
  VerificationReport r;
  r.check_id = check_id;
  r.statement = statement;
  r.predicted = predicted;
  r.measured = measured;
  r.tolerance = tolerance;
  r.verdict = hard ? (ok ? "pass" : "fail") : "informational";
  r.config_hash = config_hash;
  return r;
}

}  // namespace

VerificationReport bound_report(const std::string& check_id, const std::string& statement,
                                double measured, double bound, double slack,
                                const std::string& config_hash, bool hard) {
  const bool ok = std::isfinite(measured) && measured <= bound * (1.0 + slack);
  return make_report(check_id, statement, measured, bound, slack, ok, config_hash, hard);
}

VerificationReport match_report(const std::string& check_id, const std::string& statement,
                                double measured, double target, double rel_tol,
                                const std::string& config_hash, bool hard, double floor) {
  const double scale = std::max(std::abs(target), floor);
  const bool ok = std::isfinite(measured) && std::abs(measured - target) <= rel_tol * scale;
  return make_report(check_id, statement, measured, target, rel_tol, ok, config_hash, hard);
}

bool any_hard_failure(const std::vector<VerificationReport>& reports) {
  for (const VerificationReport& r : reports)
    if (r.verdict == "fail") return true;
  return false;
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const VerificationReport& r : reports) {
    nlohmann::json j;
    j["check_id"] = r.check_id;
    j["statement"] = r.statement;
    j["predicted"] = r.predicted;
    j["measured"] = r.measured;
    j["tolerance"] = r.tolerance;
    j["verdict"] = r.verdict;
    j["config_hash"] = r.config_hash;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<VerificationReport> reports_from_json(const std::string& text) {
  const nlohmann::json arr = nlohmann::json::parse(text);
  std::vector<VerificationReport> out;
  for (const nlohmann::json& j : arr) {
    VerificationReport r;
    r.check_id = j.at("check_id").get<std::string>();
    r.statement = j.at("statement").get<std::string>();
    r.predicted = j.at("predicted").get<double>();
    r.measured = j.at("measured").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.verdict = j.at("verdict").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    out.push_back(r);
  }
  return out;
}

DecayMeasurements decay_from_trace(const NormTrace& trace) {
  DecayMeasurements m;
  m.times = trace.times;
  m.norm_q = trace.norm_q;
  m.norm_dhalf = trace.norm_dhalf;
  m.drift_sup = trace.drift_sup;
  return m;
}

std::vector<VerificationReport> run_decay_check(const DecayMeasurements& m, const ModelParams& p,
                                                double decay_slack, double drift_slack,
                                                const std::string& config_hash) {
  std::vector<VerificationReport> out;
  if (p.d < 2 || m.times.empty()) return out;

  const DerivedConstants dc = derive_constants(p);
  const bool hard = dc.cq_exists && dc.condition_satisfied && !dc.informational;
  const double q = p.q_or_default();

  const double wq = 1.0 - p.d / (2.0 * q);
  const NormSeries nq = make_decay_series(m.times, m.norm_q, wq);
  out.push_back(bound_report(
      "decay_weighted_q_norm",
      "sup over t of t^" + std::to_string(wq) + " ||rho_t||_q against its fixed-point constant",
      nq.sup(), dc.cq, decay_slack, config_hash, hard));

  if (std::abs(q - 1.5 * p.d) <= 1e-12 && p.d >= 3 && dc.cq_exists) {
    const BootstrapSequence bs =
        bootstrap_bound_sequence(p, dc.cq, bootstrap_default_A0(p, dc.cq), 64);
    const double sup_dhalf = *std::max_element(m.norm_dhalf.begin(), m.norm_dhalf.end());
    out.push_back(bound_report(
        "decay_dhalf_norm", "sup over t of ||rho_t||_{d/2} against the iterated recursion bound",
        sup_dhalf, bs.sup_norm_bound, decay_slack, config_hash, hard && !bs.diverged));
  }

  if (!m.drift_sup.empty() && dc.cq_exists) {
    const double coeff = drift_bound_coeff(p, dc.cq);
    double sup_weighted = 0.0;
    for (size_t i = 0; i < m.times.size(); ++i)
      if (m.times[i] > 0.0)
        sup_weighted = std::max(sup_weighted, std::sqrt(m.times[i]) * m.drift_sup[i]);
    out.push_back(bound_report("drift_envelope",
                               "sup over t of sqrt(t) sup_x |b(t,x)| against its coefficient",
                               sup_weighted, coeff, drift_slack, config_hash, hard));
  }
  return out;
}

double bootstrap_l1_band(const std::vector<double>& pos, long n, int d,
                         const GridField& reference, double bandwidth, std::uint64_t seed,
                         int resamples) {
  std::vector<double> dist(resamples, 0.0);
  std::vector<double> sample(static_cast<size_t>(n) * d);
  for (int b = 0; b < resamples; ++b) {
    ParticleStream st(seed, static_cast<uint64_t>(b));
    for (long i = 0; i < n; ++i) {
      const double u = st.uniform(kStreamBootstrap, static_cast<uint64_t>(i), 0);
      long idx = static_cast<long>(u * n);
      if (idx >= n) idx = n - 1;
      for (int a = 0; a < d; ++a) sample[i * d + a] = pos[idx * d + a];
    }
    GridField f = kde_field(sample.data(), n, d, reference.spec, bandwidth);
    dist[b] = grid_distance(f, reference, NormOrder::finite(1.0));
  }
  double mean = 0.0;
  for (double v : dist) mean += v;
  mean /= resamples;
  double var = 0.0;
  for (double v : dist) var += (v - mean) * (v - mean);
  var /= std::max(1, resamples - 1);
  return std::sqrt(var);
}

CrossCheckResult run_cross_check(const ParticleSystem& particles, PdeSolver& pde,
                                 const CrossCheckOptions& opt, const std::string& config_hash) {
  const ParticleConfig& pc = particles.config();
  const PdeConfig& gc = pde.config();
  if (pc.d != gc.grid.d) throw std::invalid_argument("cross-check dimension mismatch");
  if (std::abs(pc.chi - gc.chi) > 1e-12 || std::abs(pc.lambda - gc.lambda) > 1e-12)
    throw std::invalid_argument("cross-check model parameter mismatch");
  if (std::abs(particles.time() - pde.time()) > 1e-9 * std::max(1.0, pde.time()))
    throw std::invalid_argument("cross-check time mismatch");

  CrossCheckResult res;
  const KdeResult kde = particles.empirical_density(gc.grid);
  const GridField& rho = pde.density();
  res.l1_distance = grid_distance(kde.field, rho, NormOrder::finite(1.0));
  res.l2_distance = grid_distance(kde.field, rho, NormOrder::finite(2.0));
  res.l1_noise_band =
      bootstrap_l1_band(particles.positions(), pc.n_particles, pc.d, rho, kde.bandwidth,
                        opt.bootstrap_seed, opt.bootstrap_resamples);

  const bool hard_budget = gc.chi == 0.0;
  res.reports.push_back(bound_report(
      "cross_kde_l1", "L1 distance between the ensemble density estimate and the grid solution",
      res.l1_distance, opt.kde_l1_budget, 0.0, config_hash, hard_budget));
  res.reports.push_back(bound_report(
      "cross_kde_l2", "L2 distance between the ensemble density estimate and the grid solution",
      res.l2_distance, opt.kde_l1_budget, 0.0, config_hash, false));

  const GridField duh = pde.duhamel_c();
  const double denom = grid_lq_norm(pde.chemical(), NormOrder::infinity());
  const double rel =
      grid_distance(duh, pde.chemical(), NormOrder::infinity()) / std::max(denom, 1e-300);
  res.reports.push_back(bound_report(
      "cross_chemical_two_route",
      "relative sup distance between the stepped chemical field and its integral reconstruction",
      rel, opt.duhamel_rel_tol, 0.0, config_hash, true));
  return res;
}

VerificationReport trend_report(const std::vector<double>& sizes,
                                const std::vector<double>& distances,
                                const std::vector<double>& bands,
                                const std::string& config_hash) {
  if (sizes.size() != distances.size() || sizes.size() != bands.size() || sizes.size() < 2)
    throw std::invalid_argument("trend check needs equally sized series of length >= 2");
  double worst = 0.0;
  for (size_t k = 0; k + 1 < sizes.size(); ++k) {
    const double allowance = 2.0 * std::max(bands[k], bands[k + 1]);
    worst = std::max(worst, distances[k + 1] - distances[k] - allowance);
  }
  std::string stmt = "distance non-increasing in ensemble size (within twice the noise band):";
  for (size_t k = 0; k < sizes.size(); ++k)
    stmt += " N=" + std::to_string(static_cast<long>(sizes[k])) + " d=" +
            std::to_string(distances[k]);
  VerificationReport r = make_report("cross_trend_in_n", stmt, worst, 0.0, 0.0, worst <= 0.0,
                                     config_hash, true);
  return r;
}

}  // namespace kslab

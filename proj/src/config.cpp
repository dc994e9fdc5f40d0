#include "kslab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace kslab {

namespace {

enum class KeyType { kInt, kU64, kDouble, kBool, kString, kComponent };

struct KeyInfo {
  const char* key;
  KeyType type;
  bool repeatable;
};

const KeyInfo kKnownKeys[] = {
    {"model.d", KeyType::kInt, false},
    {"model.chi", KeyType::kDouble, false},
    {"model.lambda", KeyType::kDouble, false},
    {"model.T", KeyType::kDouble, false},
    {"model.q", KeyType::kDouble, false},
    {"model.norm_rho0", KeyType::kDouble, false},
    {"model.norm_grad_c0", KeyType::kDouble, false},
    {"rho0.component", KeyType::kComponent, true},
    {"c0.component", KeyType::kComponent, true},
    {"pde.n", KeyType::kInt, false},
    {"pde.L", KeyType::kDouble, false},
    {"pde.dt", KeyType::kDouble, false},
    {"pde.order", KeyType::kInt, false},
    {"pde.snapshot_stride", KeyType::kInt, false},
    {"pde.norm_stride", KeyType::kInt, false},
    {"pde.blowup_sup_cap", KeyType::kDouble, false},
    {"particles.n", KeyType::kInt, false},
    {"particles.dt", KeyType::kDouble, false},
    {"particles.epsilon", KeyType::kDouble, false},
    {"particles.delta_cutoff", KeyType::kDouble, false},
    {"particles.chi_on_linear", KeyType::kBool, false},
    {"particles.backend", KeyType::kString, false},
    {"particles.mesh_n", KeyType::kInt, false},
    {"particles.mesh_L", KeyType::kDouble, false},
    {"particles.dual_history", KeyType::kBool, false},
    {"particles.history_window", KeyType::kDouble, false},
    {"particles.max_slices", KeyType::kInt, false},
    {"particles.kde_bandwidth_factor", KeyType::kDouble, false},
    {"particles.kde_n", KeyType::kInt, false},
    {"particles.kde_L", KeyType::kDouble, false},
    {"particles.norm_stride", KeyType::kInt, false},
    {"constants.sweep_points", KeyType::kInt, false},
    {"constants.sweep_chi_min", KeyType::kDouble, false},
    {"constants.sweep_chi_max", KeyType::kDouble, false},
    {"check.decay_slack", KeyType::kDouble, false},
    {"check.drift_slack", KeyType::kDouble, false},
    {"check.kde_l1_budget", KeyType::kDouble, false},
    {"check.duhamel_tol", KeyType::kDouble, false},
    {"run.seed", KeyType::kU64, false},
    {"runtime.workers", KeyType::kInt, false},
    {"runtime.out", KeyType::kString, false},
    {"runtime.format", KeyType::kString, false},
    {"runtime.dry_run", KeyType::kBool, false},
};

const KeyInfo* find_key(const std::string& key) {
  for (const KeyInfo& k : kKnownKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::string normalize_value(const std::string& raw) {
  std::vector<std::string> toks = tokens_of(raw);
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

double parse_double_or_throw(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': cannot parse '" + tok + "' as a number");
  return v;
}

long parse_long_or_throw(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': cannot parse '" + tok + "' as an integer");
  return v;
}

std::uint64_t parse_u64_or_throw(const std::string& key, const std::string& tok) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || tok.find('-') != std::string::npos)
    throw ConfigError("key '" + key + "': cannot parse '" + tok + "' as an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool_or_throw(const std::string& key, const std::string& tok) {
  if (tok == "true" || tok == "1") return true;
  if (tok == "false" || tok == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + tok + "'");
}

void check_typed_value(const KeyInfo& info, const std::vector<std::string>& toks, int model_d) {
  const std::string key = info.key;
  switch (info.type) {
    case KeyType::kComponent: {
      const size_t expect = static_cast<size_t>(model_d) + 2;
      if (toks.size() != expect)
        throw ConfigError("key '" + key + "': expected weight, " + std::to_string(model_d) +
                          " mean coordinate(s) and a variance (" + std::to_string(expect) +
                          " numbers), got " + std::to_string(toks.size()));
      for (const std::string& t : toks) parse_double_or_throw(key, t);
      const double var = parse_double_or_throw(key, toks.back());
      if (!(var > 0.0)) throw ConfigError("key '" + key + "': variance must be positive");
      break;
    }
    case KeyType::kString:
      if (toks.size() != 1) throw ConfigError("key '" + key + "': expected a single token");
      break;
    default:
      if (toks.size() != 1) throw ConfigError("key '" + key + "': expected a single value");
      if (info.type == KeyType::kInt) parse_long_or_throw(key, toks[0]);
      if (info.type == KeyType::kU64) parse_u64_or_throw(key, toks[0]);
      if (info.type == KeyType::kDouble) parse_double_or_throw(key, toks[0]);
      if (info.type == KeyType::kBool) parse_bool_or_throw(key, toks[0]);
  }
}

}  // namespace

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = normalize_value(line.substr(eq + 1));
    const KeyInfo* info = find_key(key);
    if (!info) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    auto& slot = cfg.entries_[key];
    if (!slot.empty() && !info->repeatable)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    slot.push_back(value);
  }
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError("unknown key '" + key + "'");
  const std::string norm = normalize_value(value);
  if (norm.empty()) throw ConfigError("empty value for '" + key + "'");
  entries_[key] = {norm};
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::vector<std::string>& Config::values(const std::string& key) const {
  static const std::vector<std::string> kEmpty;
  auto it = entries_.find(key);
  return it == entries_.end() ? kEmpty : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double_or_throw(key, it->second.front());
}

long Config::get_long(const std::string& key, long fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_long_or_throw(key, it->second.front());
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_u64_or_throw(key, it->second.front());
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_bool_or_throw(key, it->second.front());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.front();
}

void Config::validate() const {
  const int d = static_cast<int>(get_long("model.d", 2));
  if (d < 1 || d > 3) throw ConfigError("model.d must be 1, 2 or 3");
  for (const auto& [key, vals] : entries_) {
    const KeyInfo* info = find_key(key);
    for (const std::string& v : vals) check_typed_value(*info, tokens_of(v), d);
  }
  if (has("rho0.component")) {
    double total = 0.0;
    for (const std::string& v : values("rho0.component")) {
      const auto toks = tokens_of(v);
      const double w = parse_double_or_throw("rho0.component", toks[0]);
      if (w < 0.0) throw ConfigError("rho0.component weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError("rho0.component weights must sum to 1 (got " + std::to_string(total) + ")");
  }
  const std::string backend = get_string("particles.backend", "pairwise");
  if (backend != "pairwise" && backend != "mesh")
    throw ConfigError("particles.backend must be 'pairwise' or 'mesh'");
  const std::string fmt = get_string("runtime.format", "binary");
  if (fmt != "csv" && fmt != "json" && fmt != "binary")
    throw ConfigError("runtime.format must be csv, json or binary");
  if (get_double("model.chi", 0.0) < 0.0) throw ConfigError("model.chi must be nonnegative");
  if (get_double("model.lambda", 0.0) < 0.0) throw ConfigError("model.lambda must be nonnegative");
  if (!(get_double("model.T", 1.0) > 0.0)) throw ConfigError("model.T must be positive");
  const double q = get_double("model.q", 0.0);
  if (q != 0.0 && !(q > d && q < 2.0 * d))
    throw ConfigError("model.q must lie strictly between d and 2d");
}

GaussianMixture Config::mixture(const std::string& prefix) const {
  GaussianMixture m;
  m.d = static_cast<int>(get_long("model.d", 2));
  for (const std::string& v : values(prefix + ".component")) {
    const auto toks = tokens_of(v);
    if (toks.size() != static_cast<size_t>(m.d) + 2)
      throw ConfigError("key '" + prefix + ".component': wrong token count for d=" +
                        std::to_string(m.d));
    MixtureComponent c;
    c.weight = parse_double_or_throw(prefix, toks[0]);
    for (int a = 0; a < m.d; ++a) c.mean[a] = parse_double_or_throw(prefix, toks[1 + a]);
    c.var = parse_double_or_throw(prefix, toks.back());
    m.components.push_back(c);
  }
  return m;
}

ModelParams Config::model_params() const {
  ModelParams p;
  p.d = static_cast<int>(get_long("model.d", 2));
  p.chi = get_double("model.chi", 0.0);
  p.lambda = get_double("model.lambda", 0.0);
  p.T = get_double("model.T", 1.0);
  p.q = get_double("model.q", 0.0);
  p.norm_rho0 = get_double("model.norm_rho0", 0.0);
  p.norm_grad_c0 = get_double("model.norm_grad_c0", 0.0);
  if (p.norm_rho0 <= 0.0) {
    GaussianMixture rho0 = mixture("rho0");
    if (!rho0.components.empty() && p.d >= 2)
      p.norm_rho0 = mixture_lr_norm(rho0, NormOrder::finite(0.5 * p.d));
    else
      p.norm_rho0 = 1.0;
  }
  if (p.norm_grad_c0 <= 0.0) {
    GaussianMixture c0 = mixture("c0");
    if (!c0.components.empty())
      p.norm_grad_c0 = mixture_grad_lr_norm(c0, NormOrder::finite(p.d));
    else
      p.norm_grad_c0 = 1.0;
  }
  return p;
}

PdeConfig Config::pde_config() const {
  PdeConfig c;
  c.grid.d = static_cast<int>(get_long("model.d", 2));
  c.grid.n = static_cast<int>(get_long("pde.n", 64));
  c.grid.L = get_double("pde.L", 16.0);
  c.dt = get_double("pde.dt", 1e-3);
  c.T = get_double("model.T", 1.0);
  c.chi = get_double("model.chi", 0.0);
  c.lambda = get_double("model.lambda", 0.0);
  c.order = static_cast<int>(get_long("pde.order", 1));
  c.blowup_sup_cap = get_double("pde.blowup_sup_cap", 1e8);
  c.snapshot_stride = static_cast<int>(get_long("pde.snapshot_stride", 1));
  c.norm_stride = static_cast<int>(get_long("pde.norm_stride", 1));
  c.norm_q = get_double("model.q", 0.0);
  return c;
}

ParticleConfig Config::particle_config() const {
  ParticleConfig c;
  c.d = static_cast<int>(get_long("model.d", 2));
  c.n_particles = get_long("particles.n", 1000);
  c.dt = get_double("particles.dt", 1e-2);
  c.T = get_double("model.T", 1.0);
  c.chi = get_double("model.chi", 0.0);
  c.lambda = get_double("model.lambda", 0.0);
  c.epsilon = get_double("particles.epsilon", 0.0);
  c.delta_cutoff = get_double("particles.delta_cutoff", 0.0);
  c.chi_on_linear = get_bool("particles.chi_on_linear", true);
  c.seed = get_u64("run.seed", 1);
  c.workers = static_cast<int>(get_long("runtime.workers", 1));
  c.backend = get_string("particles.backend", "pairwise") == "mesh" ? DriftBackend::kMesh
                                                                    : DriftBackend::kPairwise;
  c.mesh.d = c.d;
  c.mesh.n = static_cast<int>(get_long("particles.mesh_n", 64));
  c.mesh.L = get_double("particles.mesh_L", 16.0);
  c.dual_history = get_bool("particles.dual_history", false);
  c.history_window = get_double("particles.history_window", 0.0);
  c.max_slices = static_cast<int>(get_long("particles.max_slices", 512));
  c.kde_bandwidth_factor = get_double("particles.kde_bandwidth_factor", 1.06);
  return c;
}

GridSpec Config::kde_grid() const {
  GridSpec g;
  g.d = static_cast<int>(get_long("model.d", 2));
  g.n = static_cast<int>(get_long("particles.kde_n", get_long("particles.mesh_n", 64)));
  g.L = get_double("particles.kde_L", get_double("particles.mesh_L", 16.0));
  return g;
}

std::string Config::canonical_text(bool semantic_only) const {
  std::string out;
  for (const auto& [key, vals] : entries_) {  // std::map iterates in key order
    if (semantic_only && key.rfind("runtime.", 0) == 0) continue;
    for (const std::string& v : vals) {
      out += key;
      out += " = ";
      out += v;
      out += '\n';
    }
  }
  return out;
}

std::string Config::hash() const {
  const std::string text = canonical_text(true);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string Config::plan() const {
  validate();
  std::ostringstream out;
  out << "config hash: " << hash() << "\n";
  const int d = static_cast<int>(get_long("model.d", 2));
  out << "model: d=" << d << " chi=" << get_double("model.chi", 0.0)
      << " lambda=" << get_double("model.lambda", 0.0) << " T=" << get_double("model.T", 1.0)
      << " q=" << model_params().q_or_default() << "\n";
  out << "rho0 components: " << values("rho0.component").size()
      << ", c0 components: " << values("c0.component").size() << "\n";
  if (has("pde.n")) {
    const PdeConfig pc = pde_config();
    const long steps = std::lround(pc.T / pc.dt);
    out << "pde: grid " << pc.grid.n << "^" << d << " on [" << -0.5 * pc.grid.L << ","
        << 0.5 * pc.grid.L << ")^" << d << ", dt=" << pc.dt << ", " << steps
        << " steps, order " << pc.order << "\n";
  }
  if (has("particles.n")) {
    const ParticleConfig pc = particle_config();
    const long steps = std::lround(pc.T / pc.dt);
    out << "particles: N=" << pc.n_particles << ", dt=" << pc.dt << ", " << steps << " steps, "
        << (pc.backend == DriftBackend::kMesh ? "mesh" : "pairwise") << " drift, epsilon="
        << pc.epsilon << ", cutoff=" << pc.delta_cutoff << ", max slices " << pc.max_slices
        << "\n";
  }
  if (get_long("constants.sweep_points", 0) > 0) {
    out << "constants sweep: " << get_long("constants.sweep_points", 0) << " points on ["
        << get_double("constants.sweep_chi_min", 0.0) << ","
        << get_double("constants.sweep_chi_max", 0.0) << "]\n";
  }
  out << "run: seed=" << get_u64("run.seed", 1) << ", workers=" << get_long("runtime.workers", 1)
      << ", format=" << get_string("runtime.format", "binary") << ", out="
      << get_string("runtime.out", "kslab-out") << "\n";
  return out.str();
}

}  // namespace kslab

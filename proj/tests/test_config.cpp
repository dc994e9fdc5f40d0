#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "kslab/config.hpp"

using namespace kslab;

namespace {

const char* kSample = R"(# reference setup
model.d = 2
model.chi = 0.05
model.lambda = 1.0
model.T = 0.5
rho0.component = 0.7 1.0 -0.5 0.8
rho0.component = 0.3 -1.2 0.6 1.1
c0.component = 1.0 0.0 0.0 1.0
pde.n = 64
pde.dt = 0.001
particles.n = 1000
particles.epsilon = 0.01
run.seed = 42
runtime.workers = 4
)";

}  // namespace

TEST_CASE("parse, validate, and read back") {
  Config cfg = Config::parse_text(kSample);
  cfg.validate();
  CHECK(cfg.get_long("model.d", 0) == 2);
  CHECK(cfg.get_double("model.chi", 0.0) == doctest::Approx(0.05));
  CHECK(cfg.get_u64("run.seed", 0) == 42);
  CHECK(cfg.get_long("runtime.workers", 1) == 4);
  CHECK(cfg.values("rho0.component").size() == 2);
  CHECK(cfg.get_double("missing.key", -3.5) == -3.5);
  CHECK(!cfg.has("pde.L"));
}

TEST_CASE("hash depends only on semantic keys") {
  Config a = Config::parse_text(kSample);
  Config b = Config::parse_text(kSample);
  b.set("runtime.workers", "16");
  b.set("runtime.out", "/tmp/elsewhere");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  Config c = Config::parse_text(kSample);
  c.set("model.chi", "0.06");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("canonical text round trips") {
  Config a = Config::parse_text(kSample);
  Config b = Config::parse_text(a.canonical_text(false));
  CHECK(a.canonical_text(false) == b.canonical_text(false));
  CHECK(a.hash() == b.hash());
  // semantic form drops runtime keys
  CHECK(a.canonical_text(true).find("runtime.") == std::string::npos);
  CHECK(a.canonical_text(false).find("runtime.workers") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(Config::parse_text("model.d = 2\nbogus line\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_text("no.such.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_text("model.d = 2\nmodel.d = 3\n"), ConfigError);
  try {
    Config::parse_text("model.d = 2\nbogus line\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("validation rejects malformed settings") {
  Config cfg = Config::parse_text(kSample);
  cfg.set("model.d", "5");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("rho0.component", "0.7 1.0 -0.5");  // wrong token count for d = 2
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("rho0.component", "0.7 1.0 -0.5 0.8");  // weights sum to 0.7
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("model.q", "5.0");  // outside (d, 2d) for d = 2
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("model.chi", "not-a-number");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("particles.backend", "quadtree");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = Config::parse_text(kSample);
  cfg.set("runtime.format", "yaml");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("mixture extraction") {
  Config cfg = Config::parse_text(kSample);
  const GaussianMixture rho0 = cfg.mixture("rho0");
  REQUIRE(rho0.components.size() == 2);
  CHECK(rho0.d == 2);
  CHECK(rho0.components[0].weight == doctest::Approx(0.7));
  CHECK(rho0.components[1].mean[0] == doctest::Approx(-1.2));
  CHECK(rho0.components[1].var == doctest::Approx(1.1));
  const GaussianMixture c0 = cfg.mixture("c0");
  REQUIRE(c0.components.size() == 1);
}

TEST_CASE("derived run configurations") {
  Config cfg = Config::parse_text(kSample);
  const ModelParams mp = cfg.model_params();
  CHECK(mp.d == 2);
  CHECK(mp.chi == doctest::Approx(0.05));
  CHECK(mp.T == doctest::Approx(0.5));

  const PdeConfig pc = cfg.pde_config();
  CHECK(pc.grid.n == 64);
  CHECK(pc.grid.d == 2);
  CHECK(pc.dt == doctest::Approx(0.001));
  CHECK(pc.chi == doctest::Approx(0.05));
  CHECK(pc.T == doctest::Approx(0.5));

  const ParticleConfig par = cfg.particle_config();
  CHECK(par.n_particles == 1000);
  CHECK(par.epsilon == doctest::Approx(0.01));
  CHECK(par.seed == 42);
  CHECK(par.workers == 4);
  CHECK(par.chi == doctest::Approx(0.05));

  const GridSpec kg = cfg.kde_grid();
  CHECK(kg.d == 2);
  CHECK(kg.n >= 8);
}

TEST_CASE("plan mentions the identity hash") {
  Config cfg = Config::parse_text(kSample);
  const std::string plan = cfg.plan();
  CHECK(plan.find(cfg.hash()) != std::string::npos);
  CHECK(plan.find("model") != std::string::npos);
}

TEST_CASE("set replaces and empty values are rejected") {
  Config cfg = Config::parse_text(kSample);
  cfg.set("model.chi", "0.2");
  CHECK(cfg.get_double("model.chi", 0.0) == doctest::Approx(0.2));
  CHECK(cfg.values("model.chi").size() == 1);
  CHECK_THROWS_AS(Config::parse_text("model.chi =\n"), ConfigError);
}

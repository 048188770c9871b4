#include <doctest.h>

#include "config.hpp"
#include "experiments.hpp"
#include "toeplitz_wells/error.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::cli;

namespace {

std::string error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("minimal landau-levels config gets defaults") {
  auto cfg = parse_config(json::parse(R"({"experiment": "landau-levels",
                                          "field": {"family": "constant", "m": 1}, "p": [8]})"));
  CHECK(cfg.kind == ExperimentKind::landau_levels);
  CHECK(cfg.p_list == std::vector<int>{8});
  CHECK_FALSE(cfg.grid_override.has_value());
  CHECK(cfg.stencil_order == 8);
  CHECK(cfg.solver.tolerance == doctest::Approx(1e-10));
  const json c = cfg.canonical();
  CHECK(c.contains("solver"));
  CHECK(c.contains("thresholds"));
  // the canonical form is itself a valid config with the same canonical form
  CHECK(parse_config(c).canonical() == c);
}

TEST_CASE("schema violations name the offending key") {
  CHECK(error_path(json::parse(R"({"experiment": "landau-levels",
      "field": {"family": "single_well", "m": 1, "epsilon": -0.1}, "p": [8]})")) == "/field/epsilon");
  CHECK(error_path(json::parse(R"({"experiment": "landau-levels",
      "field": {"family": "constant", "m": 1, "fourier": []}, "p": [8]})")) == "/field/fourier");
  CHECK(error_path(json::parse(R"({"experiment": "landau-levels",
      "field": {"family": "constant", "m": 1.5}, "p": [8]})")) == "/field/m");
  CHECK(error_path(json::parse(R"({"experiment": "landau-levels",
      "field": {"family": "constant", "m": 1}, "p": [8], "colour": 3})")) == "/colour");
  CHECK(error_path(json::parse(R"({"experiment": "landau-levels",
      "field": {"family": "constant", "m": 1}, "p": [8], "thresholds": {"bogus": 1}})")) == "/thresholds/bogus");
  CHECK(error_path(json::parse(R"({"experiment": "nope"})")) == "/experiment");
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("experiment kinds round-trip") {
  for (auto k : all_experiments()) CHECK(experiment_from_string(to_string(k)) == k);
}

TEST_CASE("preset symbols") {
  const TrigPoly q = preset_symbol("quartic");
  CHECK(q(0.0, 0.0) == doctest::Approx(0.0).scale(1));
  CHECK(q(0.5, 0.5) == doctest::Approx(16.0));
  CHECK_THROWS_AS(preset_symbol("triangle"), ConfigError);
}

TEST_CASE("model-spectrum experiment is deterministic") {
  const json doc = json::parse(R"({"experiment": "model-spectrum",
      "wells": [{"a": [1.0], "q": [[1, 0], [0, 1]]}], "levels": 4})");
  auto cfg = parse_config(doc);
  auto r1 = run_experiment(cfg), r2 = run_experiment(cfg);
  CHECK(r1.passed());
  CHECK(build_report(cfg, r1).dump(2) == build_report(cfg, r2).dump(2));
  const auto mu = r1.results.at("exact").at("values").get<std::vector<double>>();
  REQUIRE(mu.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(mu[j] == doctest::Approx(2.0 * j + 2));
}

#include <cmath>
#include <random>

#include <doctest.h>

#include "toeplitz_wells/asymptotics.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::asymptotics;

TEST_CASE("power-law fits") {
  std::vector<std::pair<double, double>> exact;
  for (double p : {8, 16, 32, 64}) exact.push_back({p, 5.0 / p});
  auto f = fit_power_law(exact);
  REQUIRE(f.ok);
  CHECK(f.amplitude == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(f.exponent == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::pair<double, double>> noisy;
  for (double p = 4; p <= 1024; p *= 2) noisy.push_back({p, 2.0 / std::sqrt(p) * (1.0 + noise(rng))});
  auto n = fit_power_law(noisy);
  CHECK(std::abs(n.exponent + 0.5) < 0.05);

  auto c = fit_power_law({{1, 3.0}, {2, 3.0}, {5, 3.0}});
  CHECK(std::abs(c.exponent) < 1e-12);

  auto r = fit_power_law({{1, 1.0}, {2, -1.0}, {3, 0.0}, {4, 0.25}});
  CHECK(r.rejected == 2);
  CHECK_FALSE(r.ok);
}

TEST_CASE("linear fits") {
  auto f = fit_linear({{0.0, 1.0}, {1.0, 3.0}, {2.0, 5.0}});
  CHECK(f.ok);
  CHECK(f.offset == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(2.0));
}

TEST_CASE("Richardson estimates") {
  CHECK(richardson_gap(1.5, 1.5) == 0.0);
  CHECK(richardson_gap(1.04, 1.01) == doctest::Approx(0.01));
}

TEST_CASE("Richardson estimate tracks the true grid error") {
  auto field = torus::build_field({torus::FieldFamily::constant, 1, 0.0, {}});
  std::vector<double> lam;
  for (int n : {32, 64, 128}) lam.push_back(torus::bochner_low_eigs(torus::LandauProblem(field, 8, n, 2, false), 1)[0]);
  const double estimate = richardson_gap(lam[0], lam[1]);
  const double truth = std::abs(lam[1] - lam[2]) * 4.0 / 3.0;  // error of the grid-64 value
  CHECK(estimate / truth > 1.0 / 3);
  CHECK(estimate / truth < 3.0);
}

TEST_CASE("empty sweeps") {
  auto field = torus::build_field({torus::FieldFamily::single_well, 1, 0.1, {}});
  CHECK(run_bochner_sweep(field, {}, 2).empty());
  const TrigPoly h = TrigPoly::constant(2.0) - TrigPoly::cosine(1, 0) - TrigPoly::cosine(0, 1);
  CHECK(run_toeplitz_sweep(field, h, {}, 2).empty());
}

TEST_CASE("symbol wells") {
  auto field = torus::build_field({torus::FieldFamily::constant, 1, 0.0, {}});
  const TrigPoly h = TrigPoly::constant(2.0) - TrigPoly::cosine(1, 0) - TrigPoly::cosine(0, 1);
  auto wells = symbol_wells(h, field);
  REQUIRE(wells.size() == 1);
  auto s = model::well_spectrum_exact(wells[0], 3);
  const double pi = std::acos(-1.0);
  for (int j = 0; j < 3; ++j) CHECK(s.values[j] == doctest::Approx(2 * pi * (j + 1)));
  const TrigPoly two = TrigPoly::constant(2.0) - TrigPoly::cosine(1, 1) - TrigPoly::cosine(1, -1);
  CHECK(symbol_wells(two, field).size() == 2);
}

TEST_CASE("Landau identity sweep on the constant field") {
  auto field = torus::build_field({torus::FieldFamily::constant, 1, 0.0, {}});
  SweepOptions opts;
  opts.stencil_order = 4;
  auto r = run_bochner_sweep(field, {4, 2, 4}, 1, opts);
  CHECK(r.landau_identity);
  REQUIRE(r.bochner.size() == 4);  // (p, j) for p in {2, 4}, j in {0, 1}
  CHECK(r.bochner[0].p == 2);
  CHECK(r.passed());
}

TEST_CASE("parallel_for") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

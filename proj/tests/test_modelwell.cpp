#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/modelwell.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::model;

namespace {

const double pi = std::acos(-1.0);

QuadraticWell make_well(double a, Eigen::Matrix2d q, double shift = 0.0, std::string label = "w") {
  QuadraticWell w;
  w.a = {a};
  w.q = q;
  w.shift = shift;
  w.label = std::move(label);
  return w;
}

Eigen::Matrix2d diag(double x, double y) { return Eigen::Vector2d(x, y).asDiagonal(); }

/// Independent oracle: 2D harmonic-oscillator formula from det and trace of Q^{1/2}.
std::vector<double> oracle(double a, const Eigen::Matrix2d& q, double shift, int levels) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
  const double d = q.determinant();
  const double tr = std::sqrt(es.eigenvalues()(0)) + std::sqrt(es.eigenvalues()(1));
  std::vector<double> out;
  for (int j = 0; j < levels; ++j) out.push_back(2 * std::sqrt(d) / a * j + tr * tr / (2 * a) + shift);
  return out;
}

}  // namespace

TEST_CASE("exact spectrum of a quadratic well") {
  auto s = well_spectrum_exact(make_well(1.0, diag(1, 1)), 5);
  for (int j = 0; j < 5; ++j) CHECK(s.values[j] == doctest::Approx(2.0 * j + 2));
  s = well_spectrum_exact(make_well(2.0, diag(1, 4)), 5);
  for (int j = 0; j < 5; ++j) CHECK(s.values[j] == doctest::Approx(2.0 * j + 2.25));
  s = well_spectrum_exact(make_well(1.0, diag(1, 1), 5.0), 5);
  for (int j = 0; j < 5; ++j) CHECK(s.values[j] == doctest::Approx(2.0 * j + 7));
  CHECK(s.exact.at(0));
}

TEST_CASE("truncated spectrum matches the closed form") {
  auto t = well_spectrum_truncated(make_well(1.0, diag(1, 1)), 6);
  REQUIRE(t.converged);
  for (int j = 0; j < 6; ++j) CHECK(std::abs(t.values[j] - (2.0 * j + 2)) < 1e-8);
  t = well_spectrum_truncated(make_well(2.0, diag(1, 4)), 8);
  REQUIRE(t.converged);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(t.values[j] - (2.0 * j + 2.25)) < 1e-8);
  CHECK_FALSE(t.exact.at(0));
}

TEST_CASE("rotation invariance") {
  const double th = pi / 6;
  Eigen::Matrix2d r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Eigen::Matrix2d q = r * diag(1, 4) * r.transpose();
  auto e = well_spectrum_exact(make_well(2.0, q), 6);
  auto t = well_spectrum_truncated(make_well(2.0, q), 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(e.values[j] - (2.0 * j + 2.25)) < 1e-8);
    CHECK(std::abs(t.values[j] - (2.0 * j + 2.25)) < 1e-8);
  }
}

TEST_CASE("random wells: exact, truncated and oracle agree") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ua(0.5, 3.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::Matrix2d m;
    m << u(rng), u(rng), u(rng), u(rng);
    const Eigen::Matrix2d q = m * m.transpose() + 0.2 * Eigen::Matrix2d::Identity();
    const double a = ua(rng), shift = u(rng);
    auto w = make_well(a, q, shift);
    auto e = well_spectrum_exact(w, 4);
    auto t = well_spectrum_truncated(w, 4);
    auto o = oracle(a, q, shift, 4);
    REQUIRE(t.converged);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(e.values[j] - o[j]) < 1e-10 * std::max(1.0, std::abs(o[j])));
      CHECK(std::abs(t.values[j] - o[j]) < 1e-8 * std::max(1.0, std::abs(o[j])));
    }
  }
}

TEST_CASE("scaling Q scales the spectrum") {
  auto base = well_spectrum_exact(make_well(1.5, diag(0.7, 2.0)), 4);
  auto scaled = well_spectrum_exact(make_well(1.5, 3.0 * diag(0.7, 2.0)), 4);
  for (int j = 0; j < 4; ++j) CHECK(scaled.values[j] == doctest::Approx(3.0 * base.values[j]));
}

TEST_CASE("invalid wells are rejected") {
  CHECK_THROWS_AS(well_spectrum_exact(make_well(1.0, diag(1, 0)), 3), DegeneracyError);
  CHECK_THROWS_AS(well_spectrum_exact(make_well(1.0, diag(1, -1)), 3), DegeneracyError);
  CHECK_THROWS_AS(well_spectrum_exact(make_well(-1.0, diag(1, 1)), 3), Error);
}

TEST_CASE("multiwell merge") {
  auto one = make_well(1.0, diag(1, 1), 0.0, "A");
  auto other = make_well(2.0, diag(1, 4), 0.0, "B");
  SUBCASE("one well") {
    auto m = multiwell_spectrum({one}, 5);
    auto e = well_spectrum_exact(one, 5);
    for (int j = 0; j < 5; ++j) CHECK(m.values[j] == doctest::Approx(e.values[j]));
  }
  SUBCASE("identical wells double the multiplicities") {
    auto m = multiwell_spectrum({one, one}, 6);
    const std::vector<double> want{2, 2, 4, 4, 6, 6};
    for (int j = 0; j < 6; ++j) CHECK(m.values[j] == doctest::Approx(want[j]));
    CHECK(m.well_index[0] == 0);
    CHECK(m.well_index[1] == 1);
  }
  SUBCASE("different wells interleave") {
    auto m = multiwell_spectrum({one, other}, 4);
    const std::vector<double> want{2, 2.25, 4, 4.25};
    for (int j = 0; j < 4; ++j) CHECK(m.values[j] == doctest::Approx(want[j]));
    CHECK(m.well_label[1] == "B");
  }
}

TEST_CASE("magnetic wells from fields") {
  const double eps = 0.1;
  auto field = torus::build_field({torus::FieldFamily::single_well, 1, eps, {}});
  REQUIRE(field.minima().size() == 1);
  auto w = magnetic_well_from_field(field, field.minima()[0].x);
  CHECK(w.a[0] == doctest::Approx(2 * pi / 1.2));
  auto s = well_spectrum_exact(w, 3);
  for (int j = 0; j < 3; ++j) CHECK(s.values[j] == doctest::Approx(4 * pi * pi * eps * (j + 1)).epsilon(1e-9));

  auto flat = torus::build_field({torus::FieldFamily::constant, 1, 0.0, {}});
  CHECK_THROWS_AS(magnetic_well_from_field(flat, {0.0, 0.0}), DegeneracyError);

  auto dbl = torus::build_field({torus::FieldFamily::double_well, 1, eps, {}});
  REQUIRE(dbl.minima().size() == 2);
  auto w0 = magnetic_well_from_field(dbl, dbl.minima()[0].x);
  auto w1 = magnetic_well_from_field(dbl, dbl.minima()[1].x);
  CHECK((w0.q - w1.q).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(w0.a[0] == doctest::Approx(w1.a[0]));
}

TEST_CASE("Toeplitz predictions") {
  ModelSpectrum s;
  s.values = {2, 4};
  auto p = predict_toeplitz_eigs(s, 100);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.02));
  CHECK(p[1] == doctest::Approx(0.04));
  CHECK(predict_toeplitz_eigs(ModelSpectrum{}, 10).empty());
  s.values = {2};
  CHECK(predict_toeplitz_eigs(s, 10)[0] == doctest::Approx(0.2));
  CHECK(predict_toeplitz_eigs(s, 1000)[0] == doctest::Approx(0.002));
}

TEST_CASE("model spectrum CSV") {
  std::ostringstream out;
  write_model_spectrum_csv(out, multiwell_spectrum({make_well(1.0, diag(1, 1), 0.0, "A,B")}, 2));
  const std::string text = out.str();
  CHECK(text.find("index,value,well_label,exactness") == 0);
  CHECK(text.find("\"A,B\"") != std::string::npos);
}

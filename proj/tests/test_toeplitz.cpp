#include <cmath>
#include <memory>
#include <random>

#include <doctest.h>

#include "toeplitz_wells/asymptotics.hpp"
#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/toeplitz.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::toeplitz;

namespace {

const double pi = std::acos(-1.0);

const torus::TorusField& constant_field() {
  static const torus::TorusField f = torus::build_field({torus::FieldFamily::constant, 1, 0.0, {}});
  return f;
}

/// Shared H_p bases of the constant field, computed once per p.
const BergmanBasis& basis(int p) {
  static std::map<int, std::shared_ptr<const BergmanBasis>> cache;
  auto& slot = cache[p];
  if (!slot) slot = asymptotics::compute_basis(constant_field(), p, torus::rule_grid_n(constant_field(), p));
  return *slot;
}

TrigPoly single_well_symbol() { return TrigPoly::constant(2.0) - TrigPoly::cosine(1, 0) - TrigPoly::cosine(0, 1); }

Eigen::MatrixXcd eye(int d) { return Eigen::MatrixXcd::Identity(d, d); }

}  // namespace

TEST_CASE("Toeplitz matrices of constants") {
  const auto& b = basis(8);
  REQUIRE(b.dimension() == 8);
  auto t1 = toeplitz_matrix(TrigPoly::constant(1.0), b);
  CHECK((t1.entries - eye(8)).cwiseAbs().maxCoeff() < 1e-10);
  auto t7 = toeplitz_matrix(TrigPoly::constant(7.0), b);
  CHECK((t7.entries - 7.0 * eye(8)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Toeplitz quantization is linear, Hermitian and positive") {
  const auto& b = basis(8);
  const TrigPoly f = TrigPoly::cosine(1, 0), g = TrigPoly::sine(1, 1) + 0.5 * TrigPoly::cosine(0, 2);
  auto tf = toeplitz_matrix(f, b), tg = toeplitz_matrix(g, b), tfg = toeplitz_matrix(2.0 * f + 3.0 * g, b);
  CHECK((tfg.entries - 2.0 * tf.entries - 3.0 * tg.entries).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(tf.hermiticity_defect() < 1e-13);
  CHECK(tg.hermiticity_defect() < 1e-13);
  auto th = toeplitz_matrix(single_well_symbol(), b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(th.entries);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(es.eigenvalues().maxCoeff() < 4.0);
  // spectrum of T_f stays inside the range of f
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ef(tf.entries);
  CHECK(ef.eigenvalues().minCoeff() >= -1.0);
  CHECK(ef.eigenvalues().maxCoeff() <= 1.0);
}

TEST_CASE("mismatched samples are rejected") {
  CHECK_THROWS_AS(toeplitz_matrix(Eigen::VectorXd::Ones(10), basis(8)), ShapeError);
}

TEST_CASE("Berezin trace of cos 2pi x1 vanishes") {
  auto t = toeplitz_matrix(TrigPoly::cosine(1, 0), basis(32));
  CHECK(std::abs(t.entries.trace().real() / basis(32).dimension()) < 0.05);
}

TEST_CASE("Poisson bracket") {
  const auto& b = basis(8);
  const TrigPoly f = TrigPoly::cosine(1, 0), g = TrigPoly::cosine(0, 1);
  auto fg = poisson_bracket_samples(f, g, b), gf = poisson_bracket_samples(g, f, b);
  CHECK((fg + gf).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(poisson_bracket_samples(f, f, b).cwiseAbs().maxCoeff() == 0.0);
  // d1 cos(2pi x1) d2 cos(2pi x2) / b = 4 pi^2 sin sin / (2 pi)
  const std::size_t i = b.grid_n / 8 + b.grid_n * (b.grid_n / 4);
  const TorusPoint x = b.point(i);
  CHECK(fg(i) == doctest::Approx(2 * pi * std::sin(2 * pi * x.x1) * std::sin(2 * pi * x.x2)));
}

TEST_CASE("product defects") {
  const auto& b = basis(8);
  const TrigPoly f = TrigPoly::cosine(1, 0), g = TrigPoly::cosine(0, 1);
  auto same = product_defect(f, f, b);
  CHECK(same.norm_comm == 0.0);
  auto c1 = product_defect(TrigPoly::constant(3.0), g, b);
  CHECK(c1.norm_fg < 1e-10);
  CHECK(c1.norm_comm < 1e-10);
  auto c2 = product_defect(f, TrigPoly::constant(-2.0), b);
  CHECK(c2.norm_fg < 1e-10);
  CHECK(c2.norm_comm < 1e-10);
  auto d = product_defect(f, g, b);
  CHECK(d.norm_fg > 0.0);
  CHECK(d.norm_comm <= d.norm_comm_other);
  CHECK(operator_norm(2.0 * eye(3)) == doctest::Approx(2.0));
}

TEST_CASE("Toeplitz low spectrum") {
  const auto& b = basis(8);
  auto zero = toeplitz_low_spectrum(TrigPoly(), b, 4);
  for (double v : zero.values) CHECK(std::abs(v) < 1e-14);
  auto well = toeplitz_low_spectrum(single_well_symbol(), b, 3);
  CHECK(well.values[0] <= well.values[1]);
  CHECK(well.values[0] > 0.0);
  // eigensections are normalized under grid quadrature
  CHECK(well.sections.col(0).squaredNorm() * b.cell_area == doctest::Approx(1.0));
}

TEST_CASE("localization of constant and well symbols") {
  const auto& b = basis(8);
  auto one = toeplitz_low_spectrum(TrigPoly::constant(1.0), b, 1);
  auto r = localization_report(one.sections.col(0), TrigPoly::constant(1.0), b, 0);
  CHECK(r.norm == doctest::Approx(1.0));
  for (const auto& [k, m] : r.moments) CHECK(m == doctest::Approx(1.0).epsilon(1e-10));

  const TrigPoly h = single_well_symbol();
  auto w = toeplitz_low_spectrum(h, b, 1);
  auto lr = localization_report(w.sections.col(0), h, b, 0);
  CHECK(lr.moments.at(1) == doctest::Approx(w.values[0]).epsilon(1e-10));
  double prev = 2.0;
  for (const auto& [delta, mass] : lr.mass_outside) {
    CHECK(mass <= prev);
    prev = mass;
  }
  for (const auto& [alpha, v] : lr.exp_weight) CHECK(v >= 1.0 - 1e-12);

  auto dg = degenerate_well_report(w.sections.col(0), w.values[0], h * h, 2, {0.0, 0.25}, b, 10.0);
  CHECK(std::abs(dg.weighted.at(0.0) - 1.0) < 1e-12);
  CHECK(dg.weighted.at(0.25) > 1.0);
}

TEST_CASE("distance fields") {
  auto d = DistanceField::to_points({{0.0, 0.0}}, 16);
  CHECK(d.values()(0) == 0.0);
  CHECK(d.values()(8 + 16 * 8) == doctest::Approx(std::sqrt(0.5)));
  CHECK(d.values()(15) == doctest::Approx(1.0 / 16));  // wraps around

  // brute-force oracle for the periodic EDT
  const int n = 24;
  std::mt19937_64 rng(1);
  std::vector<bool> mask(n * n);
  for (int i = 0; i < n * n; ++i) mask[i] = (rng() % 37) == 0;
  auto edt = periodic_squared_edt(mask, n);
  for (int i = 0; i < n * n; ++i) {
    double best = 1e300;
    for (int j = 0; j < n * n; ++j) {
      if (!mask[j]) continue;
      int dx = std::abs(i % n - j % n), dy = std::abs(i / n - j / n);
      dx = std::min(dx, n - dx);
      dy = std::min(dy, n - dy);
      best = std::min(best, double(dx * dx + dy * dy));
    }
    CHECK(edt(i) == best);
  }
  CHECK(std::isinf(periodic_squared_edt(std::vector<bool>(16, false), 4)(0)));

  // sublevel set of the well symbol near its zero: a small disc around 0
  auto s = DistanceField::to_sublevel_set(single_well_symbol(), 1e-12, 32);
  CHECK(s.values()(0) < 1.0 / 512 + 1e-12);
  CHECK(s.values()(16 + 32 * 16) == doctest::Approx(std::sqrt(0.5)).epsilon(0.01));
}

TEST_CASE("off-diagonal decay of the projector kernel") {
  auto fit = offdiag_decay(basis(32));
  CHECK(fit.rate > 0.0);
  CHECK(std::abs(fit.trace - 32.0) < 1e-3 * 32);
  auto t = toeplitz_matrix(TrigPoly::constant(1.0), basis(8));
  auto ft = offdiag_decay(t, basis(8));
  CHECK(std::abs(ft.trace - 8.0) < 1e-3 * 8);
}

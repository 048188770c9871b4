#include <cmath>
#include <random>

#include <doctest.h>

#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/torus.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::torus;

namespace {

const double pi = std::acos(-1.0);

TorusField constant_field(int m = 1) { return build_field({FieldFamily::constant, m, 0.0, {}}); }
TorusField single_well(double eps) { return build_field({FieldFamily::single_well, 1, eps, {}}); }

TorusSolveOptions dense() {
  TorusSolveOptions o;
  o.mode = SolverMode::dense;
  return o;
}

}  // namespace

TEST_CASE("closed-form fields") {
  auto c = constant_field();
  CHECK(c(0.3, 0.7) == doctest::Approx(2 * pi));
  CHECK(c.mu0() == doctest::Approx(2 * pi));
  CHECK(c.mean() == doctest::Approx(2 * pi));
  CHECK(constant_field(3).mean() == doctest::Approx(6 * pi));

  auto s = single_well(0.1);
  CHECK(s.mu0() == doctest::Approx(2 * pi / 1.2).epsilon(1e-12));
  REQUIRE(s.minima().size() == 1);
  CHECK(torus_distance(s.minima()[0].x, {0, 0}) < 1e-9);
  // dense scan oracle for the minimum
  double lo = 1e300;
  for (int i = 0; i < 400; ++i)
    for (int j = 0; j < 400; ++j) lo = std::min(lo, s(i / 400.0, j / 400.0));
  CHECK(lo == doctest::Approx(s.mu0()).epsilon(1e-12));
  CHECK(s.b().coeff(0, 0).real() == doctest::Approx(2 * pi));

  auto d = build_field({FieldFamily::double_well, 1, 0.1, {}});
  REQUIRE(d.minima().size() == 2);
  CHECK((d.minima()[0].hessian - d.minima()[1].hessian).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(torus_distance(d.minima()[1].x, {0.5, 0.5}) < 1e-9);
}

TEST_CASE("custom fields are rescaled and must be positive") {
  FieldSpec spec{FieldFamily::custom, 2, 0.0, TrigPoly::constant(1.0) + 0.3 * TrigPoly::cosine(1, 2)};
  auto f = build_field(spec);
  CHECK(f.mean() == doctest::Approx(4 * pi));
  CHECK(f.b().coeff(0, 0).real() == doctest::Approx(4 * pi));
  FieldSpec bad{FieldFamily::custom, 1, 0.0, TrigPoly::constant(1.0) + 2.0 * TrigPoly::cosine(1, 0)};
  CHECK_THROWS_AS(build_field(bad), FieldError);
}

TEST_CASE("gauge corrector") {
  CHECK(solve_gauge(constant_field()).phi.pruned(1e-15).empty());

  auto s = single_well(0.1);
  const double c = 2 * pi / 1.2, eps = 0.1;
  auto phi = solve_gauge(s).phi;
  for (double x : {0.0, 0.13, 0.5})
    for (double y : {0.0, 0.71})
      CHECK(phi(x, y) == doctest::Approx(c * eps / (4 * pi * pi) * (std::cos(2 * pi * x) + std::cos(2 * pi * y))));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  TrigPoly b = TrigPoly::constant(1.0);
  for (int i = 0; i < 5; ++i) {
    const int k1 = int(rng() % 4), k2 = int(rng() % 4) - 1;
    b = b + u(rng) * TrigPoly::cosine(k1 == 0 && k2 == 0 ? 1 : k1, k2) + u(rng) * TrigPoly::sine(k2 + 2, k1);
  }
  auto f = build_field({FieldFamily::custom, 1, 0.0, b});
  auto g = solve_gauge(f).phi;
  const TrigPoly residual = g.derivative(2, 0) + g.derivative(0, 2) - (f.b() - TrigPoly::constant(f.mean()));
  const Eigen::VectorXd r = residual.sample(128);
  CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resolution rule") {
  auto c = constant_field();
  const int need = required_grid_n(c, 8);
  CHECK(need == int(std::ceil(8 * std::sqrt(8 * 2 * pi))));
  CHECK(rule_grid_n(c, 8) == 64);
  try {
    LandauProblem prob(c, 8, 32);
    FAIL("coarse grid accepted");
  } catch (const ResolutionError& e) {
    CHECK(e.required_grid_n() == need);
  }
  CHECK_NOTHROW(LandauProblem(c, 8, 32, 2, false));
}

TEST_CASE("stencil weights") {
  auto w2 = second_derivative_weights(2);
  REQUIRE(w2.size() == 3);
  CHECK(w2[0] == doctest::Approx(1.0));
  CHECK(w2[1] == doctest::Approx(-2.0));
  auto w4 = second_derivative_weights(4);
  CHECK(w4[0] == doctest::Approx(-1.0 / 12));
  CHECK(w4[2] == doctest::Approx(-5.0 / 2));
  for (int order : {2, 4, 8}) {
    auto w = second_derivative_weights(order);
    const int r = order / 2;
    double s0 = 0, s2 = 0;
    for (int k = -r; k <= r; ++k) {
      s0 += w[k + r];
      s2 += w[k + r] * k * k;
    }
    CHECK(std::abs(s0) < 1e-12);
    CHECK(s2 == doctest::Approx(2.0));
  }
}

TEST_CASE("plaquette flux and Hermiticity") {
  LandauProblem prob(constant_field(), 8, 64);
  auto flux = plaquette_flux(prob);
  const double each = 2 * pi * 8 / (64.0 * 64.0);
  CHECK((flux.flux.array() - each).abs().maxCoeff() < 1e-12);
  CHECK(flux.total == doctest::Approx(2 * pi * 8).epsilon(1e-13));
  CHECK(flux.holonomy_mismatch < 1e-12);

  LandauProblem well(single_well(0.2), 4, 48);
  auto wf = plaquette_flux(well);
  CHECK(wf.total == doctest::Approx(2 * pi * 4).epsilon(1e-12));
  // per-plaquette flux equals p times the exact field integral over the cell
  const double h = 1.0 / 48;
  CHECK(wf.flux(well.index(5, 7)) == doctest::Approx(4 * well.field.b().integrate_box(5 * h, h, 7 * h, h)));

  for (auto kind : {LaplacianKind::bochner, LaplacianKind::renormalized}) {
    Eigen::SparseMatrix<cplx> a = assemble_laplacian(well, kind);
    Eigen::SparseMatrix<cplx> adj = a.adjoint();
    CHECK(Eigen::MatrixXcd(a - adj).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("low spectrum solver") {
  Eigen::SparseMatrix<cplx> m(2, 2);
  m.insert(0, 0) = 1.0;
  m.insert(1, 1) = 3.0;
  LowSpectrumOptions o;
  o.mode = SolverMode::dense;
  auto s = low_spectrum(m, 2, o);
  CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(3.0));

  // 1D Dirichlet Laplacian: eigenvalues 2 - 2 cos(k pi / (n + 1))
  const int n = 400;
  Eigen::SparseMatrix<cplx> lap(n, n);
  for (int i = 0; i < n; ++i) {
    lap.insert(i, i) = 2.0;
    if (i + 1 < n) {
      lap.insert(i, i + 1) = -1.0;
      lap.insert(i + 1, i) = -1.0;
    }
  }
  auto l = low_spectrum(lap, 5);
  CHECK(l.converged);
  for (int k = 1; k <= 5; ++k)
    CHECK(std::abs(l.eigenvalues[k - 1] - (2 - 2 * std::cos(k * pi / (n + 1)))) < 1e-10);
  CHECK(l.orthonormality_defect() < 1e-10);
}

TEST_CASE("Landau levels for the constant field") {
  LandauProblem prob(constant_field(), 8, 64);
  auto b = torus_low_spectrum(prob, LaplacianKind::bochner, 20);
  REQUIRE(b.converged);
  for (int j = 0; j < 8; ++j) CHECK(std::abs(b.eigenvalues[j] - 16 * pi) < 0.01 * 16 * pi);
  for (int j = 8; j < 16; ++j) CHECK(std::abs(b.eigenvalues[j] - 48 * pi) < 0.05 * 48 * pi);
  for (double r : b.residuals) CHECK(r <= 1e-8 * b.matrix_norm);

  auto c = cluster_spectrum(prob);
  CHECK(c.cluster.dimension == 8);
  CHECK(c.cluster.dimension_law);
  CHECK(c.cluster.gap_edge == doctest::Approx(2 * 16 * pi).epsilon(0.05));
  for (int j = 0; j < 8; ++j) CHECK(std::abs(c.spectrum.eigenvalues[j]) < 0.01 * 16 * pi);

  CHECK(bochner_low_eigs(prob, 0).empty());
  auto first = bochner_low_eigs(prob, 1);
  REQUIRE(first.size() == 1);
  CHECK(first[0] == doctest::Approx(b.eigenvalues[0]).epsilon(1e-9));
}

TEST_CASE("cluster of a single-well field") {
  auto field = single_well(0.1);
  LandauProblem prob(field, 16, rule_grid_n(field, 16));
  auto c = cluster_spectrum(prob);
  CHECK(c.cluster.dimension == 16);
  const double ratio = c.cluster.gap_edge / (16 * field.mu0());
  CHECK(ratio >= 1.0);
  CHECK(ratio <= 3.0);
}

TEST_CASE("cluster detection failures") {
  auto field = constant_field();
  LowSpectrum s;
  s.eigenvalues = {0.1, 0.2, 0.3};  // nothing beyond the threshold
  CHECK_THROWS_AS(detect_cluster(s, 2, field), NoGapError);
  s.eigenvalues = {1.0, 2.0, 30.0};  // the "cluster" is as wide as the gap
  CHECK_THROWS_AS(detect_cluster(s, 1, field), NoGapError);
  s.eigenvalues = {20.0, 30.0};  // empty cluster
  CHECK_THROWS_AS(detect_cluster(s, 1, field), NoGapError);
  s.eigenvalues = {0.01, 12.5};
  auto ok = detect_cluster(s, 1, field);
  CHECK(ok.dimension == 1);
  CHECK(ok.dimension_law);

  // p = 1 on a coarse grid: the cluster level is far from zero and no gap is seen
  LandauProblem coarse(single_well(2.0), 1, 3, 2, false);
  auto spec = torus_low_spectrum(coarse, LaplacianKind::renormalized, 6, dense());
  CHECK_THROWS_AS(detect_cluster(spec, 1, coarse.field), NoGapError);
}

TEST_CASE("constant shift of the gauge corrector leaves the spectrum unchanged") {
  LandauProblem prob(single_well(0.2), 2, 24, 2, false);
  auto a = torus_low_spectrum(prob, LaplacianKind::bochner, 6, dense());
  prob.gauge.phi = prob.gauge.phi + TrigPoly::constant(0.731);
  auto b = torus_low_spectrum(prob, LaplacianKind::bochner, 6, dense());
  for (int j = 0; j < 6; ++j) CHECK(std::abs(a.eigenvalues[j] - b.eigenvalues[j]) < 1e-12);
}

TEST_CASE("translating the field leaves eigenvalues invariant") {
  auto field = single_well(0.1);
  LandauProblem a(field, 4, 48);
  LandauProblem b(field.translated({0.25, 0.5}), 4, 48);
  auto sa = torus_low_spectrum(a, LaplacianKind::bochner, 4);
  auto sb = torus_low_spectrum(b, LaplacianKind::bochner, 4);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(sa.eigenvalues[j] - sb.eigenvalues[j]) < 1e-6);
  // the ground density moves with the field
  auto argmax = [](const LowSpectrum& s) {
    Eigen::Index i;
    s.eigenvectors.col(0).cwiseAbs().maxCoeff(&i);
    return i;
  };
  const Eigen::Index ia = argmax(sa), ib = argmax(sb);
  const int n = 48;
  const int dx = int((ib % n) - (ia % n) + n) % n, dy = int((ib / n) - (ia / n) + n) % n;
  CHECK(dx == 12);
  CHECK(dy == 24);
}

TEST_CASE("second-order stencil converges at order two") {
  const int p = 8;
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    LandauProblem prob(constant_field(), p, n, 2, false);
    err.push_back(std::abs(bochner_low_eigs(prob, 1)[0] - 2 * pi * p));
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.9);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

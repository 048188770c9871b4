#include <cmath>
#include <random>

#include <doctest.h>

#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/fockspace.hpp"

using namespace toeplitz_wells;
using namespace toeplitz_wells::fock;

namespace {

const double pi = std::acos(-1.0);

/// Independent oracle: integral of |z|^(2k) exp(-|z|^2) over C by composite
/// Simpson in polar coordinates.
double radial_moment(int k) {
  const int n = 20000;
  const double r_max = 12.0, h = r_max / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::pow(r, 2 * k + 1) * std::exp(-r * r);
  }
  return 2.0 * pi * s * h / 3.0;
}

GaussianPolynomial random_poly(std::mt19937_64& rng, double a) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GaussianPolynomial f({a});
  for (int k = 0; k <= 3; ++k)
    for (int l = 0; l <= 3; ++l) f.add({k}, {l}, cplx(u(rng), u(rng)));
  return f;
}

double max_diff(const GaussianPolynomial& f, const GaussianPolynomial& g) { return (f - g).max_abs(); }

}  // namespace

TEST_CASE("monomial norms") {
  FockTruncation trunc(6);
  CHECK(monomial_norm({0}, trunc) == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
  CHECK(monomial_norm({1}, trunc) == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
  CHECK(monomial_norm({3}, trunc) == doctest::Approx(std::sqrt(radial_moment(3))).epsilon(1e-10));
  CHECK(monomial_norm({3}, trunc) == doctest::Approx(std::sqrt(6 * pi)).epsilon(1e-14));
  FockTruncation two(2, 4, {1.0, 1.0});
  CHECK(monomial_norm({2, 1}, two) == doctest::Approx(std::sqrt(pi * pi * 2)).epsilon(1e-14));
  CHECK_THROWS_AS(monomial_norm({7}, trunc), TruncationError);
}

TEST_CASE("normalized monomials are orthonormal under quadrature") {
  const Eigen::MatrixXd g = monomial_gram_matrix(FockTruncation(8));
  CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("model Bergman kernel values and symmetry") {
  FockTruncation trunc(4);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(std::abs(model_bergman_kernel(zero, zero, trunc) - 1.0 / (2 * pi)) < 1e-15);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.5);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd z(2), zp(2);
    z << n(rng), n(rng);
    zp << n(rng), n(rng);
    CHECK(std::abs(model_bergman_kernel(z, z, trunc) - 1.0 / (2 * pi)) < 1e-14);
    const cplx k1 = model_bergman_kernel(z, zp, trunc), k2 = model_bergman_kernel(zp, z, trunc);
    CHECK(std::abs(k1 - std::conj(k2)) < 1e-15);
  }
}

TEST_CASE("reproducing property of the model kernel") {
  FockTruncation trunc(4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd z(2), zp(2);
    z << u(rng), u(rng);
    zp << u(rng), u(rng);
    CHECK(std::abs(bergman_composition(z, zp, trunc) - model_bergman_kernel(z, zp, trunc)) < 1e-6);
  }
}

TEST_CASE("ladder operators") {
  SUBCASE("b applied to the constant 1 with a = 2 gives conj z") {
    auto one = GaussianPolynomial::monomial({2.0}, {0}, {0}, 1.0, 0.0);
    auto r = ladder_apply(Ladder::b, 0, one);
    CHECK(max_diff(r, GaussianPolynomial::monomial({2.0}, {0}, {1}, 1.0, 0.0)) < 1e-15);
  }
  SUBCASE("commutator [b, b+] = -2 for a = 1") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5; ++i) {
      auto f = random_poly(rng, 1.0);
      auto c = ladder_apply(Ladder::b, 0, ladder_apply(Ladder::b_plus, 0, f)) -
               ladder_apply(Ladder::b_plus, 0, ladder_apply(Ladder::b, 0, f));
      CHECK(max_diff(c, f * -2.0) < 1e-12);
    }
  }
  SUBCASE("kernel columns are annihilated by b+ and by L") {
    FockTruncation trunc(12, 1.7);
    Eigen::VectorXd zp(2);
    zp << 0.3, -0.4;
    for (const auto& col : {bergman_column(Eigen::VectorXd::Zero(2), trunc, 10), bergman_column(zp, trunc, 10)}) {
      CHECK(ladder_apply(Ladder::b_plus, 0, col).max_abs() < 1e-13);
      CHECK(model_laplacian_apply(col).max_abs() < 1e-13);
    }
  }
  SUBCASE("kernel column agrees with the closed form near the source") {
    FockTruncation trunc(40);
    Eigen::VectorXd zp(2);
    zp << 0.2, 0.1;
    auto col = bergman_column(zp, trunc, 30);
    Eigen::VectorXd z(2);
    z << -0.3, 0.25;
    CHECK(std::abs(col({cplx(z(0), z(1))}) - model_bergman_kernel(z, zp, trunc)) < 1e-12);
  }
}

TEST_CASE("model Laplacian spectrum") {
  auto check = [](const std::vector<double>& got, const std::vector<double>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  };
  check(model_laplacian_spectrum(FockTruncation(10, 1.0), 4), {0, 2, 4, 6});
  check(model_laplacian_spectrum(FockTruncation(10, 3.0), 3), {0, 6, 12});
  check(model_laplacian_spectrum(FockTruncation(2, 8, {1.0, 2.0}), 5), {0, 2, 4, 4, 6});
}

TEST_CASE("anti-Wick matrices") {
  const int n_max = 12;
  FockTruncation trunc(n_max);
  SUBCASE("P = 1") {
    auto m = antiwick_matrix(AntiWickPolynomial::term(0, 0), trunc);
    CHECK((m.matrix - Eigen::MatrixXcd::Identity(n_max + 1, n_max + 1)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("P = conj(z) z is exactly diag(1..N+1)") {
    auto m = antiwick_matrix(AntiWickPolynomial::term(1, 1), trunc);
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int j = 0; j <= n_max; ++j) want(j, j) = double(j + 1);
    CHECK((m.matrix - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(m.truncation_warning);
  }
  SUBCASE("P = conj(z)^2 z^2") {
    // d^2 (z^2 z^j) = (j + 2)(j + 1) z^j
    auto m = antiwick_matrix(AntiWickPolynomial::term(2, 2), trunc);
    for (int j = 0; j <= n_max; ++j) CHECK(m.matrix(j, j).real() == doctest::Approx((j + 2.0) * (j + 1.0)));
    CHECK((m.matrix - Eigen::MatrixXcd(m.matrix.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("P = conj(z) + z is Hermitian with the ladder entries") {
    auto m = antiwick_matrix(AntiWickPolynomial::term(1, 0) + AntiWickPolynomial::term(0, 1), trunc);
    CHECK((m.matrix - m.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(m.matrix(2, 3) - std::sqrt(3.0)) < 1e-13);
  }
  SUBCASE("truncation below the degree is flagged") {
    auto m = antiwick_matrix(AntiWickPolynomial::term(3, 3), FockTruncation(2));
    CHECK(m.truncation_warning);
    CHECK(m.status != "ok");
  }
}

TEST_CASE("anti-Wick to Weyl bridge") {
  SUBCASE("conj(z) z") {
    auto w = antiwick_to_weyl_quadratic(AntiWickPolynomial::term(1, 1));
    CHECK((w.m - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(w.trace_correction == doctest::Approx(0.5));
    auto s = weyl_quadratic_spectrum(w, 6);
    auto t = antiwick_low_spectrum(AntiWickPolynomial::term(1, 1), 6);
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(s[j] - (j + 1.0)) < 1e-12);
      CHECK(std::abs(t.values[j] - (j + 1.0)) < 1e-12);
    }
  }
  SUBCASE("alpha Z1^2 + beta Z2^2") {
    const double alpha = 1.3, beta = 0.4;
    Eigen::Matrix2d q = Eigen::Vector2d(alpha, beta).asDiagonal();
    auto w = antiwick_to_weyl_quadratic(antiwick_from_real_quadratic(q));
    Eigen::Matrix2d want = 0.5 * Eigen::Vector2d(alpha, beta).asDiagonal().toDenseMatrix();
    CHECK((w.m - want).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("cross term Z1 Z2") {
    Eigen::Matrix2d q;
    q << 0, 0.5, 0.5, 0;
    auto w = antiwick_to_weyl_quadratic(antiwick_from_real_quadratic(q));
    CHECK(std::abs(w.m(0, 1) - w.m(1, 0)) < 1e-15);
    CHECK(std::abs(w.m(0, 1)) > 0.1);
    CHECK(std::abs(w.m.trace()) < 1e-15);
    CHECK(std::abs(w.trace_correction) < 1e-15);
  }
  SUBCASE("round trip") {
    Eigen::Matrix2d q;
    q << 2.0, 0.3, 0.3, 0.7;
    auto p = antiwick_from_real_quadratic(q);
    auto back = weyl_to_antiwick(antiwick_to_weyl_quadratic(p));
    for (const auto& [term, c] : p.coeffs()) CHECK(std::abs(back.coeff(term.first, term.second) - c) < 1e-14);
  }
  SUBCASE("unsupported degree") {
    CHECK_THROWS_AS(antiwick_to_weyl_quadratic(AntiWickPolynomial::term(2, 1)), UnsupportedDegreeError);
  }
}

TEST_CASE("Weyl quadratic spectrum") {
  WeylQuadratic w;
  w.m = 0.5 * Eigen::Matrix2d::Identity();
  w.trace_correction = w.m.trace() / 2;
  auto s = weyl_quadratic_spectrum(w, 5);
  for (int j = 0; j < 5; ++j) CHECK(std::abs(s[j] - (j + 1.0)) < 1e-12);

  w.m = 0.5 * Eigen::Vector2d(1.0, 4.0).asDiagonal().toDenseMatrix();
  w.trace_correction = w.m.trace() / 2;
  s = weyl_quadratic_spectrum(w, 5);
  for (int j = 0; j < 5; ++j) CHECK(std::abs(s[j] - (2.0 * j + 2.25)) < 1e-12);

  w.m = Eigen::Matrix2d::Zero();
  w.trace_correction = 0.0;
  CHECK_THROWS_AS(weyl_quadratic_spectrum(w, 3), DegeneracyError);
}

TEST_CASE("two routes agree on random quadratic wells") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    Eigen::Matrix2d r;
    r << u(rng), u(rng), u(rng), u(rng);
    Eigen::Matrix2d q = r * r.transpose() + 0.3 * Eigen::Matrix2d::Identity();
    auto p = antiwick_from_real_quadratic(q);
    auto exact = weyl_quadratic_spectrum(antiwick_to_weyl_quadratic(p), 4);
    auto trunc = antiwick_low_spectrum(p, 4);
    REQUIRE(trunc.converged);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(exact[j] - trunc.values[j]) < 1e-8 * std::max(1.0, exact[j]));
  }
}

TEST_CASE("truncated lowest eigenvalue does not increase with N") {
  Eigen::Matrix2d q;
  q << 1.0, 0.6, 0.6, 0.5;
  auto p = antiwick_from_real_quadratic(q);
  double prev = 1e300;
  for (int n = 4; n <= 40; n += 4) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(antiwick_matrix(p, FockTruncation(n)).matrix);
    CHECK(es.eigenvalues()(0) <= prev + 1e-12);
    prev = es.eigenvalues()(0);
  }
}

TEST_CASE("Bargmann transform on Hermite functions") {
  auto c0 = bargmann_hermite_check(0);
  CHECK(c0.ground_residual < 1e-8);
  CHECK(c0.ladder_residual < 1e-8);
  CHECK(c0.converged);
  auto c3 = bargmann_hermite_check(3);
  CHECK(c3.monomial_residual < 1e-6);
  CHECK(c3.ladder_residual < 1e-8);
  // Independent normalization oracle for h_0.
  double s = 0.0;
  for (int i = -4000; i <= 4000; ++i) s += std::pow(hermite_function(0, i * 0.003), 2) * 0.003;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("scaling isometry constant") {
  for (double a : {1.0, 2.0, 3.0}) {
    CHECK(scaling_isometry_constant(FockTruncation(4, a), 0) == doctest::Approx(std::sqrt(a / 2)).epsilon(1e-8));
    CHECK(scaling_isometry_constant(FockTruncation(4, a), 3) == doctest::Approx(std::sqrt(a / 2)).epsilon(1e-8));
  }
}

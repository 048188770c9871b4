#include <cmath>
#include <sstream>

#include <doctest.h>

#include "toeplitz_wells/csv.hpp"
#include "toeplitz_wells/trig_poly.hpp"

using namespace toeplitz_wells;

TEST_CASE("CSV numbers and quoting") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23}) CHECK(std::stod(csv_number(v)) == v);
  CHECK(csv_number(std::nan("")) == "nan");
  CHECK(csv_number(-INFINITY) == "-inf");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  CsvWriter w(out, {"a", "b"});
  w.field(1).field("x\ny");
  w.end_row();
  CHECK(out.str() == "a,b\r\n1,\"x\ny\"\r\n");
  CHECK_THROWS(w.field(1).field(2).field(3));
}

TEST_CASE("trigonometric polynomials") {
  const double pi = std::acos(-1.0);
  const TrigPoly f = TrigPoly::cosine(1, 2) + 0.5 * TrigPoly::sine(0, 1);
  CHECK(f.is_real());
  CHECK(f(0.1, 0.2) == doctest::Approx(std::cos(2 * pi * 0.5) + 0.5 * std::sin(2 * pi * 0.2)));
  const Eigen::Vector2d g = f.gradient({0.1, 0.2});
  CHECK(g(0) == doctest::Approx(-2 * pi * std::sin(2 * pi * 0.5)));
  CHECK(f.integrate_box(0, 1, 0, 1) == doctest::Approx(0.0).scale(1));
  CHECK(TrigPoly::cosine(1, 0).integrate_x1(0, 0.25, 0.3) == doctest::Approx(1 / (2 * pi)));
  CHECK(TrigPoly::cosine(0, 1).integrate_x2(0.7, 0, 0.5) == doctest::Approx(0.0).scale(1));
  const TrigPoly sq = TrigPoly::cosine(1, 0) * TrigPoly::cosine(1, 0);
  CHECK(sq.coeff(0, 0).real() == doctest::Approx(0.5));
  CHECK(torus_distance({0.95, 0.0}, {0.05, 0.0}) == doctest::Approx(0.1));

  auto minima = find_local_minima(TrigPoly::constant(2.0) - TrigPoly::cosine(1, 1) - TrigPoly::cosine(1, -1));
  REQUIRE(minima.size() == 2);
  CHECK(minima[0].nondegenerate);
  CHECK(std::abs(minima[0].value) < 1e-14);
}

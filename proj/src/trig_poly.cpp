#include "toeplitz_wells/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace toeplitz_wells {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

double periodic_delta(double a, double b) {
  double d = std::abs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

// integral of exp(2 pi i k t) over [a, a + length]
cplx mode_integral(int k, double a, double length) {
  if (k == 0) return cplx(length, 0.0);
  const double w = two_pi * k;
  return (std::polar(1.0, w * (a + length)) - std::polar(1.0, w * a)) / cplx(0.0, w);
}

}  // namespace

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return std::hypot(periodic_delta(a.x1, b.x1), periodic_delta(a.x2, b.x2));
}

TrigPoly::TrigPoly(Coeffs coeffs) : coeffs_(std::move(coeffs)) {}

TrigPoly TrigPoly::constant(double value) {
  return TrigPoly(Coeffs{{{0, 0}, cplx(value, 0.0)}});
}

TrigPoly TrigPoly::cosine(int k1, int k2) {
  if (k1 == 0 && k2 == 0) return constant(1.0);
  return TrigPoly(Coeffs{{{k1, k2}, 0.5}, {{-k1, -k2}, 0.5}});
}

TrigPoly TrigPoly::sine(int k1, int k2) {
  if (k1 == 0 && k2 == 0) return TrigPoly();
  return TrigPoly(Coeffs{{{k1, k2}, cplx(0.0, -0.5)}, {{-k1, -k2}, cplx(0.0, 0.5)}});
}

cplx TrigPoly::coeff(int k1, int k2) const {
  auto it = coeffs_.find({k1, k2});
  return it == coeffs_.end() ? cplx(0.0, 0.0) : it->second;
}

int TrigPoly::max_frequency() const {
  int m = 0;
  for (const auto& [k, c] : coeffs_) m = std::max({m, std::abs(k.first), std::abs(k.second)});
  return m;
}

bool TrigPoly::is_real(double tol) const {
  for (const auto& [k, c] : coeffs_) {
    if (std::abs(c - std::conj(coeff(-k.first, -k.second))) > tol * std::max(1.0, std::abs(c)))
      return false;
  }
  return true;
}

cplx TrigPoly::evaluate_complex(double x1, double x2) const {
  cplx sum(0.0, 0.0);
  for (const auto& [k, c] : coeffs_) sum += c * std::polar(1.0, two_pi * (k.first * x1 + k.second * x2));
  return sum;
}

double TrigPoly::operator()(double x1, double x2) const { return evaluate_complex(x1, x2).real(); }

Eigen::Vector2d TrigPoly::gradient(const TorusPoint& x) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& [k, c] : coeffs_) {
    const cplx e = c * std::polar(1.0, two_pi * (k.first * x.x1 + k.second * x.x2)) * cplx(0.0, two_pi);
    g(0) += (e * double(k.first)).real();
    g(1) += (e * double(k.second)).real();
  }
  return g;
}

Eigen::Matrix2d TrigPoly::hessian(const TorusPoint& x) const {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& [k, c] : coeffs_) {
    const double e = (c * std::polar(1.0, two_pi * (k.first * x.x1 + k.second * x.x2))).real() * (-two_pi * two_pi);
    h(0, 0) += e * k.first * k.first;
    h(0, 1) += e * k.first * k.second;
    h(1, 1) += e * k.second * k.second;
  }
  h(1, 0) = h(0, 1);
  return h;
}

TrigPoly TrigPoly::derivative(int d1, int d2) const {
  Coeffs out;
  for (const auto& [k, c] : coeffs_) {
    cplx f = std::pow(cplx(0.0, two_pi * k.first), d1) * std::pow(cplx(0.0, two_pi * k.second), d2);
    if (d1 > 0 && k.first == 0) continue;
    if (d2 > 0 && k.second == 0) continue;
    out[k] = c * f;
  }
  return TrigPoly(std::move(out));
}

double TrigPoly::integrate_x1(double a, double length, double x2) const {
  cplx sum(0.0, 0.0);
  for (const auto& [k, c] : coeffs_)
    sum += c * std::polar(1.0, two_pi * k.second * x2) * mode_integral(k.first, a, length);
  return sum.real();
}

double TrigPoly::integrate_x2(double x1, double a, double length) const {
  cplx sum(0.0, 0.0);
  for (const auto& [k, c] : coeffs_)
    sum += c * std::polar(1.0, two_pi * k.first * x1) * mode_integral(k.second, a, length);
  return sum.real();
}

double TrigPoly::integrate_box(double a1, double l1, double a2, double l2) const {
  cplx sum(0.0, 0.0);
  for (const auto& [k, c] : coeffs_) sum += c * mode_integral(k.first, a1, l1) * mode_integral(k.second, a2, l2);
  return sum.real();
}

Eigen::VectorXd TrigPoly::sample(int n) const {
  const int kmax = max_frequency();
  // Per-axis phase tables: table[k + kmax][i] = exp(2 pi i k i / n).
  std::vector<std::vector<cplx>> table(2 * kmax + 1, std::vector<cplx>(n));
  for (int k = -kmax; k <= kmax; ++k)
    for (int i = 0; i < n; ++i) table[k + kmax][i] = std::polar(1.0, two_pi * double(k) * i / n);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(std::size_t(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cplx s(0.0, 0.0);
      for (const auto& [k, c] : coeffs_) s += c * table[k.first + kmax][i] * table[k.second + kmax][j];
      out(i + std::size_t(n) * j) = s.real();
    }
  }
  return out;
}

TrigPoly TrigPoly::operator+(const TrigPoly& other) const {
  Coeffs out = coeffs_;
  for (const auto& [k, c] : other.coeffs_) out[k] += c;
  return TrigPoly(std::move(out));
}

TrigPoly TrigPoly::operator-(const TrigPoly& other) const { return *this + other * -1.0; }

TrigPoly TrigPoly::operator*(const TrigPoly& other) const {
  Coeffs out;
  for (const auto& [k, c] : coeffs_)
    for (const auto& [l, d] : other.coeffs_) out[{k.first + l.first, k.second + l.second}] += c * d;
  return TrigPoly(std::move(out)).pruned(0.0);
}

TrigPoly TrigPoly::operator*(double s) const {
  Coeffs out;
  for (const auto& [k, c] : coeffs_) out[k] = c * s;
  return TrigPoly(std::move(out));
}

TrigPoly TrigPoly::pruned(double tol) const {
  Coeffs out;
  for (const auto& [k, c] : coeffs_)
    if (std::abs(c) > tol) out[k] = c;
  return TrigPoly(std::move(out));
}

std::vector<CriticalPoint> find_local_minima(const TrigPoly& f, int scan_n, double merge_distance) {
  const Eigen::VectorXd v = f.sample(scan_n);
  auto at = [&](int i, int j) {
    i = (i % scan_n + scan_n) % scan_n;
    j = (j % scan_n + scan_n) % scan_n;
    return v(i + std::size_t(scan_n) * j);
  };
  std::vector<CriticalPoint> found;
  for (int j = 0; j < scan_n; ++j) {
    for (int i = 0; i < scan_n; ++i) {
      const double c = at(i, j);
      bool strict = true;
      for (int dj = -1; dj <= 1 && strict; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          // ties broken towards the lexicographically smallest grid point
          const double o = at(i + di, j + dj);
          if (o < c || (o == c && (dj < 0 || (dj == 0 && di < 0)))) {
            strict = false;
            break;
          }
        }
      if (!strict) continue;

      TorusPoint x{double(i) / scan_n, double(j) / scan_n};
      for (int it = 0; it < 50; ++it) {
        const Eigen::Vector2d g = f.gradient(x);
        const Eigen::Matrix2d h = f.hessian(x);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
        if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, h.norm())) break;
        const Eigen::Vector2d step = h.ldlt().solve(g);
        if (step.norm() > 1.0 / scan_n) break;
        x.x1 -= step(0);
        x.x2 -= step(1);
        if (step.norm() < 1e-15) break;
      }
      x.x1 = x.x1 - std::floor(x.x1);
      x.x2 = x.x2 - std::floor(x.x2);
      if (x.x1 >= 1.0) x.x1 = 0.0;
      if (x.x2 >= 1.0) x.x2 = 0.0;
      CriticalPoint cp;
      cp.x = x;
      cp.value = f(x);
      cp.gradient = f.gradient(x);
      cp.hessian = f.hessian(x);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cp.hessian);
      cp.nondegenerate = es.eigenvalues().minCoeff() > 0.0;
      bool dup = false;
      for (const auto& other : found)
        if (torus_distance(other.x, cp.x) < merge_distance) dup = true;
      if (!dup) found.push_back(cp);
    }
  }
  std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.x.x1 != b.x.x1) return a.x.x1 < b.x.x1;
    return a.x.x2 < b.x.x2;
  });
  return found;
}

}  // namespace toeplitz_wells

#pragma once

#include <array>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace toeplitz_wells {

using cplx = std::complex<double>;

/// Point on the unit torus, coordinates taken modulo 1.
struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Periodic Euclidean distance on the unit torus.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

/// Trigonometric polynomial f(x) = sum_k c_k exp(2 pi i (k1 x1 + k2 x2)) on
/// the unit torus. Used both for magnetic fields and for Toeplitz symbols;
/// all derivatives, products and segment integrals are exact.
class TrigPoly {
 public:
  using Frequency = std::pair<int, int>;
  using Coeffs = std::map<Frequency, cplx>;

  TrigPoly() = default;
  explicit TrigPoly(Coeffs coeffs);

  static TrigPoly constant(double value);
  /// cos(2 pi (k1 x1 + k2 x2))
  static TrigPoly cosine(int k1, int k2);
  /// sin(2 pi (k1 x1 + k2 x2))
  static TrigPoly sine(int k1, int k2);

  const Coeffs& coeffs() const { return coeffs_; }
  cplx coeff(int k1, int k2) const;
  bool empty() const { return coeffs_.empty(); }

  /// Largest |k1| or |k2| among stored modes.
  int max_frequency() const;

  /// True when c_{-k} = conj(c_k) for every mode, i.e. the function is real.
  bool is_real(double tol = 1e-14) const;

  cplx evaluate_complex(double x1, double x2) const;
  /// Real part of the value; meaningful for real polynomials.
  double operator()(double x1, double x2) const;
  double operator()(const TorusPoint& x) const { return (*this)(x.x1, x.x2); }

  Eigen::Vector2d gradient(const TorusPoint& x) const;
  Eigen::Matrix2d hessian(const TorusPoint& x) const;

  /// Partial derivative d^{d1}/dx1^{d1} d^{d2}/dx2^{d2}.
  TrigPoly derivative(int d1, int d2) const;

  /// Exact integral of the real part over the segment from (a, x2) to
  /// (a + length, x2) along the x1 direction.
  double integrate_x1(double a, double length, double x2) const;
  /// Exact integral of the real part along x2 from (x1, a) to (x1, a + length).
  double integrate_x2(double x1, double a, double length) const;

  /// Exact integral of the real part over [a1, a1 + l1] x [a2, a2 + l2].
  double integrate_box(double a1, double l1, double a2, double l2) const;

  /// Real samples on the n x n grid x = (i/n, j/n), flattened as i + n*j.
  Eigen::VectorXd sample(int n) const;

  TrigPoly operator+(const TrigPoly& other) const;
  TrigPoly operator-(const TrigPoly& other) const;
  TrigPoly operator*(const TrigPoly& other) const;
  TrigPoly operator*(double s) const;
  friend TrigPoly operator*(double s, const TrigPoly& f) { return f * s; }

  /// Drops modes with |c_k| <= tol.
  TrigPoly pruned(double tol = 0.0) const;

 private:
  Coeffs coeffs_;
};

/// Critical point of a trigonometric polynomial found by grid scan plus
/// Newton refinement.
struct CriticalPoint {
  TorusPoint x;
  double value = 0.0;
  Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
  /// Hessian positive definite (strict, non-degenerate minimum).
  bool nondegenerate = false;
};

/// Local minima of a real trigonometric polynomial. The polynomial is sampled
/// on a scan_n x scan_n grid; strict discrete local minima are refined by
/// Newton's method when the Hessian is invertible. Points closer than
/// merge_distance are merged. Sorted by (value, x1, x2).
std::vector<CriticalPoint> find_local_minima(const TrigPoly& f, int scan_n = 128,
                                             double merge_distance = 1e-6);

}  // namespace toeplitz_wells

#pragma once

#include <complex>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace toeplitz_wells::fock {

using cplx = std::complex<double>;
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& k);

/// Finite piece of the Bargmann-Fock space F_n: holomorphic monomials z^k with
/// |k| <= N, together with the weights a_j of the model operator.
///
/// Inner product: <F, G> = integral of F conj(G) exp(-|z|^2) over C^n, so
/// ||z^k||^2 = pi^n k!.
class FockTruncation {
 public:
  FockTruncation(int n, int max_degree, std::vector<double> weights);
  /// n = 1 with weight a.
  FockTruncation(int max_degree, double a = 1.0) : FockTruncation(1, max_degree, {a}) {}

  int n() const { return n_; }
  int max_degree() const { return max_degree_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Monomial exponents of total degree <= N, ordered by degree and then
  /// lexicographically (decreasing in the first variable).
  const std::vector<MultiIndex>& monomials() const { return monomials_; }
  std::size_t size() const { return monomials_.size(); }
  /// Position of k in monomials(), or -1 when |k| > N.
  long index_of(const MultiIndex& k) const;

 private:
  int n_;
  int max_degree_;
  std::vector<double> weights_;
  std::vector<MultiIndex> monomials_;
  std::map<MultiIndex, long> lookup_;
};

/// ||z^k|| = sqrt(pi^n prod k_j!). Throws TruncationError when |k| > N.
double monomial_norm(const MultiIndex& k, const FockTruncation& trunc);

/// Gram matrix of the normalized basis z^k / ||z^k|| computed by polar
/// quadrature (n = 1 only). Should be the identity.
Eigen::MatrixXd monomial_gram_matrix(const FockTruncation& trunc, int radial_panels = 24);

/// Model Bergman kernel
///   P(Z, Z') = (2 pi)^{-n} prod a_j exp(-1/4 sum a_k (|z_k|^2 + |z'_k|^2 - 2 z_k conj(z'_k)))
/// for real coordinates Z in R^{2n} with z_j = Z_{2j-1} + i Z_{2j}.
cplx model_bergman_kernel(const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const FockTruncation& trunc);

/// Numerical value of the integral of P(Z, Z'') P(Z'', Z') over the disc
/// |Z''| <= radius (n = 1 only).
cplx bergman_composition(const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const FockTruncation& trunc,
                         double radius = 8.0);

/// Function P(z, conj z) * exp(-gamma/4 * sum a_j |z_j|^2), P a polynomial.
/// gamma = 1 is the model Bergman space weight. Closed under the ladder
/// operators, which makes commutator and kernel identities exact.
class GaussianPolynomial {
 public:
  /// (powers of z, powers of conj z)
  using Term = std::pair<MultiIndex, MultiIndex>;
  using Coeffs = std::map<Term, cplx>;

  GaussianPolynomial(std::vector<double> weights, double gamma = 1.0);
  /// c * z^k conj(z)^l * Gaussian
  static GaussianPolynomial monomial(std::vector<double> weights, const MultiIndex& k, const MultiIndex& l,
                                     cplx c = 1.0, double gamma = 1.0);

  int n() const { return int(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  double gamma() const { return gamma_; }
  const Coeffs& coeffs() const { return coeffs_; }
  cplx coeff(const MultiIndex& k, const MultiIndex& l) const;

  void add(const MultiIndex& k, const MultiIndex& l, cplx c);
  GaussianPolynomial operator+(const GaussianPolynomial& o) const;
  GaussianPolynomial operator-(const GaussianPolynomial& o) const;
  GaussianPolynomial operator*(cplx s) const;

  /// d/dz_j and d/d(conj z_j) of the polynomial part only.
  GaussianPolynomial d_z(int j) const;
  GaussianPolynomial d_zbar(int j) const;
  /// multiplication of the polynomial part by z_j or conj z_j
  GaussianPolynomial times_z(int j) const;
  GaussianPolynomial times_zbar(int j) const;

  /// Value at z in C^n.
  cplx operator()(const std::vector<cplx>& z) const;

  /// Largest |coefficient| (0 for the zero function).
  double max_abs() const;
  GaussianPolynomial pruned(double tol) const;

 private:
  std::vector<double> weights_;
  double gamma_;
  Coeffs coeffs_;
};

enum class Ladder { b, b_plus };

/// b_j = -2 d/dz_j + (1/2) a_j conj z_j  and  b_j^+ = 2 d/d(conj z_j) + (1/2) a_j z_j
/// acting on the full function (polynomial times Gaussian). j is 0-based.
GaussianPolynomial ladder_apply(Ladder which, int j, const GaussianPolynomial& f);

/// L = sum_j b_j b_j^+.
GaussianPolynomial model_laplacian_apply(const GaussianPolynomial& f);

/// The column Z -> P(Z, Z') as a polynomial-times-Gaussian, with the entire
/// factor exp(1/2 sum a_k z_k conj z'_k) Taylor-expanded to total degree
/// `degree`. Every truncation is holomorphic, so the kernel identity
/// L P(., Z') = 0 holds term by term.
GaussianPolynomial bergman_column(const Eigen::VectorXd& zp, const FockTruncation& trunc, int degree);

/// Lowest `levels` eigenvalues (with multiplicity) of L = sum b_j b_j^+,
/// computed from its matrix on span{conj(z)^beta * Gaussian}.
std::vector<double> model_laplacian_spectrum(const FockTruncation& trunc, int levels);

/// Anti-Wick polynomial P(conj z, z) = sum A_{k;l} conj(z)^k z^l.
class AntiWickPolynomial {
 public:
  using Term = std::pair<MultiIndex, MultiIndex>;  ///< (k, l)
  using Coeffs = std::map<Term, cplx>;

  explicit AntiWickPolynomial(int n = 1) : n_(n) {}
  AntiWickPolynomial(int n, Coeffs coeffs);

  /// conj(z)^k z^l for n = 1.
  static AntiWickPolynomial term(int k, int l, cplx c = 1.0);

  int n() const { return n_; }
  const Coeffs& coeffs() const { return coeffs_; }
  cplx coeff(const MultiIndex& k, const MultiIndex& l) const;
  void add(const MultiIndex& k, const MultiIndex& l, cplx c);

  /// A_{l;k} = conj(A_{k;l}) for all stored terms.
  bool is_self_adjoint(double tol = 1e-12) const;
  int degree() const;
  /// Every term has |k| + |l| == 2.
  bool is_homogeneous_quadratic() const;

  cplx operator()(const std::vector<cplx>& z) const;

  AntiWickPolynomial operator+(const AntiWickPolynomial& o) const;
  AntiWickPolynomial operator*(cplx s) const;

 private:
  int n_;
  Coeffs coeffs_;
};

/// Anti-Wick polynomial of the real quadratic form Z^T Q Z on R^{2n} with
/// z_j = Z_{2j-1} + i Z_{2j}.
AntiWickPolynomial antiwick_from_real_quadratic(const Eigen::MatrixXd& q);

struct AntiWickMatrix {
  Eigen::MatrixXcd matrix;
  /// Set when N < deg(P): high monomials then see a visibly clipped operator.
  bool truncation_warning = false;
  std::string status = "ok";
};

/// Matrix of sum A_{k;l} d^k o z^l on the normalized monomials of degree <= N.
/// Entries are A (j+l)! / sqrt(m! j!) with m = j + l - k (multi-index
/// factorials), evaluated through log-gamma.
AntiWickMatrix antiwick_matrix(const AntiWickPolynomial& p, const FockTruncation& trunc);

/// Lowest eigenvalues of the anti-Wick operator, with N chosen by the rule:
/// grow N in steps of 4 until the lowest `levels` eigenvalues move by less
/// than `tol` between N and N + 4; N is capped at `max_degree`.
struct TruncatedSpectrum {
  std::vector<double> values;
  int degree = 0;  ///< N used
  bool converged = false;
  double last_change = 0.0;
  std::string status = "ok";
};

TruncatedSpectrum antiwick_low_spectrum(const AntiWickPolynomial& p, int levels, double tol = 1e-10,
                                        int max_degree = 200);

/// Weyl symbol of a quadratic anti-Wick polynomial under
/// z_k = (x_k - i xi_k) / sqrt(2):  P~(v) = v^T M v, v = (x_1..x_n, xi_1..xi_n).
struct WeylQuadratic {
  Eigen::MatrixXd m;
  double trace_correction = 0.0;  ///< tr(M) / 2

  int n() const { return int(m.rows() / 2); }
};

/// Throws UnsupportedDegreeError unless P is a homogeneous quadratic, and
/// Error when P is not self-adjoint.
WeylQuadratic antiwick_to_weyl_quadratic(const AntiWickPolynomial& p);

/// Inverse of the substitution: the anti-Wick polynomial whose Weyl symbol
/// is v^T M v.
AntiWickPolynomial weyl_to_antiwick(const WeylQuadratic& w);

/// Spectrum of Op_w(P~) + tr(M)/2. For n = 1 the exact values
/// 2 sqrt(det M) (j + 1/2) + tr(M)/2; for n > 1 the truncated anti-Wick
/// diagonalization. Throws DegeneracyError when M is not positive definite.
std::vector<double> weyl_quadratic_spectrum(const WeylQuadratic& w, int levels);

/// Numerical checks of the Bargmann transform (n = 1)
///   Bf(z) = pi^{-1/4} integral exp(-(z^2/2 + x^2/2 - sqrt(2) z x)) f(x) dx
/// on Hermite functions.
struct QuadratureSpec {
  double half_width = 12.0;  ///< integrate over [-L, L]
  int points = 801;          ///< trapezoidal nodes
  double tolerance = 1e-10;  ///< allowed change when the node count doubles
};

struct BargmannCheck {
  /// max |B h_0(z) - c| relative to |c| over the sample points (c fitted)
  double ground_residual = 0.0;
  /// max |B h_j(z) - c z^j / sqrt(j!)| relative, c from the ground state
  double monomial_residual = 0.0;
  /// max |B(a* h_j)(z) - z B h_j(z)| relative
  double ladder_residual = 0.0;
  /// max of the three
  double residual = 0.0;
  /// fitted constant c = B h_0
  cplx ground_constant = 0.0;
  bool converged = true;
  std::string status = "ok";
};

BargmannCheck bargmann_hermite_check(int j, const QuadratureSpec& grid = {});

/// Normalized Hermite function h_j(x) = (2^j j! sqrt(pi))^{-1/2} H_j(x) e^{-x^2/2}.
double hermite_function(int j, double x);

/// Constant c such that F -> c F(phi(z)) exp(-sum a_j |z_j|^2 / 4) is an
/// isometry from F_n into L^2(R^{2n}) (phi(z) = (sqrt(a_j/2) z_j)), computed by
/// quadrature on the monomial z^k (n = 1).
double scaling_isometry_constant(const FockTruncation& trunc, int k = 0);

/// Writes the nonzero entries as CSV rows (row, col, re, im) with a header.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXcd& m, double drop_below = 0.0);

}  // namespace toeplitz_wells::fock

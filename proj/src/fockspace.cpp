#include "toeplitz_wells/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "toeplitz_wells/csv.hpp"
#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::fock {

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
auto composite_gauss(F f, double a, double b, int panels) {
  using K = decltype(f(a));
  K sum{};
  const double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i)
    sum += boost::math::quadrature::gauss<double, 30>::integrate(f, a + i * h, a + (i + 1) * h);
  return sum;
}

// Integral over the disc |w| <= radius of g(w), w complex: polar coordinates,
// Gauss-Legendre in r and the trapezoidal rule (spectral) in the angle.
template <class G>
cplx disc_integral(G g, double radius, int radial_panels, int angular_points) {
  auto ring = [&](double r) {
    cplx s = 0.0;
    for (int t = 0; t < angular_points; ++t) {
      const double theta = 2.0 * pi * t / angular_points;
      s += g(std::polar(r, theta));
    }
    return s * (2.0 * pi / angular_points) * r;
  };
  return composite_gauss(ring, 0.0, radius, radial_panels);
}

void enumerate(int n, int degree, int var, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (var == n - 1) {
    cur[var] = degree;
    out.push_back(cur);
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[var] = k;
    enumerate(n, degree - k, var + 1, cur, out);
  }
}

MultiIndex unit(int n, int j) {
  MultiIndex e(n, 0);
  e[j] = 1;
  return e;
}

MultiIndex zeros(int n) { return MultiIndex(n, 0); }

MultiIndex plus(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

cplx power(cplx z, int k) {
  cplx r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

// Linear form c_z * z_var + c_zbar * conj(z_var).
struct LinearForm {
  int var;
  cplx c_z;
  cplx c_zbar;
};

// Anti-Wick polynomial of v^T Q v where the coordinates v_a are the given
// linear forms in (z, conj z).
AntiWickPolynomial quadratic_from_forms(int n, const std::vector<LinearForm>& forms, const Eigen::MatrixXd& q) {
  AntiWickPolynomial out(n);
  for (int a = 0; a < q.rows(); ++a) {
    for (int b = 0; b < q.cols(); ++b) {
      const double w = q(a, b);
      if (w == 0.0) continue;
      const LinearForm& fa = forms[a];
      const LinearForm& fb = forms[b];
      const MultiIndex ea = unit(n, fa.var), eb = unit(n, fb.var), zero = zeros(n);
      out.add(zero, plus(ea, eb), w * fa.c_z * fb.c_z);
      out.add(ea, eb, w * fa.c_zbar * fb.c_z);
      out.add(eb, ea, w * fa.c_z * fb.c_zbar);
      out.add(plus(ea, eb), zero, w * fa.c_zbar * fb.c_zbar);
    }
  }
  return out;
}

double log_factorial(int k) { return std::lgamma(double(k) + 1.0); }

/// (j+l)! / sqrt(m! j!) for one variable. Small cases use exact integer
/// products (so e.g. the number operator comes out exactly); large ones
/// fall back to log-gamma.
double factorial_ratio_entry(int j, int l, int m) {
  constexpr double exact_limit = 9007199254740992.0;  // 2^53
  const int top = j + l;
  double p1 = 1.0, p2 = 1.0;  // top!/m! and top!/j!
  for (int i = m + 1; i <= top && p1 < exact_limit; ++i) p1 *= i;
  for (int i = j + 1; i <= top && p2 < exact_limit; ++i) p2 *= i;
  if (p1 == p2 && p1 < exact_limit) return p1;
  if (p1 < exact_limit && p2 < exact_limit && p1 * p2 < exact_limit) return std::sqrt(p1 * p2);
  return std::exp(log_factorial(top) - 0.5 * (log_factorial(m) + log_factorial(j)));
}

}  // namespace

int total_degree(const MultiIndex& k) {
  int s = 0;
  for (int v : k) s += v;
  return s;
}

// ---------------------------------------------------------------------------
// FockTruncation

FockTruncation::FockTruncation(int n, int max_degree, std::vector<double> weights)
    : n_(n), max_degree_(max_degree), weights_(std::move(weights)) {
  if (n_ < 1) throw ShapeError("Fock dimension n must be at least 1");
  if (max_degree_ < 0) throw ShapeError("maximum degree N must be nonnegative");
  if (int(weights_.size()) != n_) throw ShapeError("need exactly n weights a_j");
  for (double a : weights_)
    if (!(a > 0.0)) throw DegeneracyError("weights a_j must be positive");
  MultiIndex cur(n_, 0);
  for (int d = 0; d <= max_degree_; ++d) enumerate(n_, d, 0, cur, monomials_);
  for (std::size_t i = 0; i < monomials_.size(); ++i) lookup_[monomials_[i]] = long(i);
}

long FockTruncation::index_of(const MultiIndex& k) const {
  auto it = lookup_.find(k);
  return it == lookup_.end() ? -1 : it->second;
}

double monomial_norm(const MultiIndex& k, const FockTruncation& trunc) {
  if (int(k.size()) != trunc.n()) throw ShapeError("multi-index has the wrong length");
  if (total_degree(k) > trunc.max_degree()) throw TruncationError("monomial degree exceeds the truncation N");
  double log_norm2 = trunc.n() * std::log(pi);
  for (int kj : k) {
    if (kj < 0) throw ShapeError("negative exponent in multi-index");
    log_norm2 += log_factorial(kj);
  }
  return std::exp(0.5 * log_norm2);
}

Eigen::MatrixXd monomial_gram_matrix(const FockTruncation& trunc, int radial_panels) {
  if (trunc.n() != 1) throw ShapeError("monomial_gram_matrix supports n = 1 only");
  const int size = int(trunc.size());
  const int big_n = trunc.max_degree();
  const double radius = 10.0 + 2.0 * std::sqrt(double(big_n));
  Eigen::MatrixXd gram(size, size);
  for (int j = 0; j < size; ++j) {
    for (int k = 0; k < size; ++k) {
      const double nj = monomial_norm({j}, trunc), nk = monomial_norm({k}, trunc);
      auto g = [&](cplx z) { return power(z, j) * std::conj(power(z, k)) * std::exp(-std::norm(z)); };
      gram(j, k) = disc_integral(g, radius, radial_panels, 2 * big_n + 8).real() / (nj * nk);
    }
  }
  return gram;
}

cplx model_bergman_kernel(const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const FockTruncation& trunc) {
  const int n = trunc.n();
  if (z.size() != 2 * n || zp.size() != 2 * n) throw ShapeError("kernel points must have 2n real coordinates");
  double prefactor = std::pow(2.0 * pi, -n);
  cplx exponent = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a = trunc.weights()[k];
    prefactor *= a;
    const cplx zk(z(2 * k), z(2 * k + 1));
    const cplx wk(zp(2 * k), zp(2 * k + 1));
    exponent += a * (std::norm(zk) + std::norm(wk) - 2.0 * zk * std::conj(wk));
  }
  return prefactor * std::exp(-0.25 * exponent);
}

cplx bergman_composition(const Eigen::VectorXd& z, const Eigen::VectorXd& zp, const FockTruncation& trunc,
                         double radius) {
  if (trunc.n() != 1) throw ShapeError("bergman_composition supports n = 1 only");
  auto g = [&](cplx w) {
    Eigen::VectorXd mid(2);
    mid << w.real(), w.imag();
    return model_bergman_kernel(z, mid, trunc) * model_bergman_kernel(mid, zp, trunc);
  };
  return disc_integral(g, radius, 16, 128);
}

// ---------------------------------------------------------------------------
// GaussianPolynomial and ladder operators

GaussianPolynomial::GaussianPolynomial(std::vector<double> weights, double gamma)
    : weights_(std::move(weights)), gamma_(gamma) {}

GaussianPolynomial GaussianPolynomial::monomial(std::vector<double> weights, const MultiIndex& k,
                                                const MultiIndex& l, cplx c, double gamma) {
  GaussianPolynomial f(std::move(weights), gamma);
  f.add(k, l, c);
  return f;
}

cplx GaussianPolynomial::coeff(const MultiIndex& k, const MultiIndex& l) const {
  auto it = coeffs_.find({k, l});
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

void GaussianPolynomial::add(const MultiIndex& k, const MultiIndex& l, cplx c) {
  if (int(k.size()) != n() || int(l.size()) != n()) throw ShapeError("multi-index has the wrong length");
  if (c == cplx(0.0)) return;
  coeffs_[{k, l}] += c;
}

GaussianPolynomial GaussianPolynomial::operator+(const GaussianPolynomial& o) const {
  GaussianPolynomial r = *this;
  for (const auto& [t, c] : o.coeffs_) r.coeffs_[t] += c;
  return r;
}

GaussianPolynomial GaussianPolynomial::operator-(const GaussianPolynomial& o) const { return *this + o * -1.0; }

GaussianPolynomial GaussianPolynomial::operator*(cplx s) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_) r.coeffs_[t] = c * s;
  return r;
}

GaussianPolynomial GaussianPolynomial::d_z(int j) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_) {
    if (t.first[j] == 0) continue;
    MultiIndex k = t.first;
    const double f = k[j]--;
    r.coeffs_[{k, t.second}] += c * f;
  }
  return r;
}

GaussianPolynomial GaussianPolynomial::d_zbar(int j) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_) {
    if (t.second[j] == 0) continue;
    MultiIndex l = t.second;
    const double f = l[j]--;
    r.coeffs_[{t.first, l}] += c * f;
  }
  return r;
}

GaussianPolynomial GaussianPolynomial::times_z(int j) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_) {
    MultiIndex k = t.first;
    ++k[j];
    r.coeffs_[{k, t.second}] += c;
  }
  return r;
}

GaussianPolynomial GaussianPolynomial::times_zbar(int j) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_) {
    MultiIndex l = t.second;
    ++l[j];
    r.coeffs_[{t.first, l}] += c;
  }
  return r;
}

cplx GaussianPolynomial::operator()(const std::vector<cplx>& z) const {
  if (int(z.size()) != n()) throw ShapeError("evaluation point has the wrong dimension");
  cplx s = 0.0;
  for (const auto& [t, c] : coeffs_) {
    cplx term = c;
    for (int j = 0; j < n(); ++j) term *= power(z[j], t.first[j]) * power(std::conj(z[j]), t.second[j]);
    s += term;
  }
  double g = 0.0;
  for (int j = 0; j < n(); ++j) g += weights_[j] * std::norm(z[j]);
  return s * std::exp(-0.25 * gamma_ * g);
}

double GaussianPolynomial::max_abs() const {
  double m = 0.0;
  for (const auto& [t, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

GaussianPolynomial GaussianPolynomial::pruned(double tol) const {
  GaussianPolynomial r(weights_, gamma_);
  for (const auto& [t, c] : coeffs_)
    if (std::abs(c) > tol) r.coeffs_[t] = c;
  return r;
}

GaussianPolynomial ladder_apply(Ladder which, int j, const GaussianPolynomial& f) {
  if (j < 0 || j >= f.n()) throw ShapeError("ladder index out of range");
  const double a = f.weights()[j];
  const double g = f.gamma();
  // The Gaussian exp(-g/4 sum a|z|^2) contributes -g/4 a conj(z_j) under
  // d/dz_j and -g/4 a z_j under d/d(conj z_j).
  if (which == Ladder::b) return (f.d_z(j) * -2.0 + f.times_zbar(j) * (0.5 * (1.0 + g) * a)).pruned(0.0);
  return (f.d_zbar(j) * 2.0 + f.times_z(j) * (0.5 * (1.0 - g) * a)).pruned(0.0);
}

GaussianPolynomial model_laplacian_apply(const GaussianPolynomial& f) {
  GaussianPolynomial out(f.weights(), f.gamma());
  for (int j = 0; j < f.n(); ++j) out = out + ladder_apply(Ladder::b, j, ladder_apply(Ladder::b_plus, j, f));
  return out.pruned(0.0);
}

GaussianPolynomial bergman_column(const Eigen::VectorXd& zp, const FockTruncation& trunc, int degree) {
  const int n = trunc.n();
  if (zp.size() != 2 * n) throw ShapeError("kernel point must have 2n real coordinates");
  double prefactor = std::pow(2.0 * pi, -n);
  double gauss = 0.0;
  std::vector<cplx> c(n);
  for (int k = 0; k < n; ++k) {
    const double a = trunc.weights()[k];
    const cplx w(zp(2 * k), zp(2 * k + 1));
    prefactor *= a;
    gauss += a * std::norm(w);
    c[k] = 0.5 * a * std::conj(w);
  }
  prefactor *= std::exp(-0.25 * gauss);
  GaussianPolynomial out(trunc.weights(), 1.0);
  std::vector<MultiIndex> exps;
  MultiIndex cur(n, 0);
  for (int d = 0; d <= degree; ++d) enumerate(n, d, 0, cur, exps);
  for (const auto& k : exps) {
    cplx term = prefactor;
    for (int j = 0; j < n; ++j) term *= power(c[j], k[j]) / std::exp(log_factorial(k[j]));
    out.add(k, zeros(n), term);
  }
  return out;
}

std::vector<double> model_laplacian_spectrum(const FockTruncation& trunc, int levels) {
  if (levels < 1) throw ShapeError("levels must be at least 1");
  const int n = trunc.n();
  const double a_min = *std::min_element(trunc.weights().begin(), trunc.weights().end());
  for (int degree = std::max(trunc.max_degree(), 1);; degree += 4) {
    FockTruncation basis(n, degree, trunc.weights());
    const int size = int(basis.size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(size, size);
    for (int col = 0; col < size; ++col) {
      const auto f = GaussianPolynomial::monomial(trunc.weights(), zeros(n), basis.monomials()[col]);
      const GaussianPolynomial lf = model_laplacian_apply(f);
      for (const auto& [t, c] : lf.coeffs()) {
        const long row = total_degree(t.first) == 0 ? basis.index_of(t.second) : -1;
        if (row < 0) throw Error("model Laplacian left the antiholomorphic subspace");
        l(row, col) += c.real();
      }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(l, false);
    std::vector<double> values;
    for (int i = 0; i < size; ++i) values.push_back(es.eigenvalues()(i).real());
    std::sort(values.begin(), values.end());
    // Values below 2 (degree + 1) min a cannot be preceded by missing ones.
    const double complete_below = 2.0 * (degree + 1) * a_min;
    int complete = 0;
    while (complete < size && values[complete] < complete_below - 1e-12 * complete_below) ++complete;
    if (complete >= levels) {
      values.resize(levels);
      return values;
    }
  }
}

// ---------------------------------------------------------------------------
// Anti-Wick operators

AntiWickPolynomial::AntiWickPolynomial(int n, Coeffs coeffs) : n_(n) {
  for (const auto& [t, c] : coeffs) add(t.first, t.second, c);
}

AntiWickPolynomial AntiWickPolynomial::term(int k, int l, cplx c) {
  AntiWickPolynomial p(1);
  p.add({k}, {l}, c);
  return p;
}

cplx AntiWickPolynomial::coeff(const MultiIndex& k, const MultiIndex& l) const {
  auto it = coeffs_.find({k, l});
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

void AntiWickPolynomial::add(const MultiIndex& k, const MultiIndex& l, cplx c) {
  if (int(k.size()) != n_ || int(l.size()) != n_) throw ShapeError("multi-index has the wrong length");
  for (int i = 0; i < n_; ++i)
    if (k[i] < 0 || l[i] < 0) throw ShapeError("negative exponent in multi-index");
  auto& slot = coeffs_[{k, l}];
  slot += c;
  if (slot == cplx(0.0)) coeffs_.erase({k, l});
}

bool AntiWickPolynomial::is_self_adjoint(double tol) const {
  for (const auto& [t, c] : coeffs_) {
    const cplx mirror = coeff(t.second, t.first);
    if (std::abs(mirror - std::conj(c)) > tol * std::max(1.0, std::abs(c))) return false;
  }
  return true;
}

int AntiWickPolynomial::degree() const {
  int d = 0;
  for (const auto& [t, c] : coeffs_) d = std::max(d, total_degree(t.first) + total_degree(t.second));
  return d;
}

bool AntiWickPolynomial::is_homogeneous_quadratic() const {
  if (coeffs_.empty()) return false;
  for (const auto& [t, c] : coeffs_)
    if (total_degree(t.first) + total_degree(t.second) != 2) return false;
  return true;
}

cplx AntiWickPolynomial::operator()(const std::vector<cplx>& z) const {
  if (int(z.size()) != n_) throw ShapeError("evaluation point has the wrong dimension");
  cplx s = 0.0;
  for (const auto& [t, c] : coeffs_) {
    cplx term = c;
    for (int j = 0; j < n_; ++j) term *= power(std::conj(z[j]), t.first[j]) * power(z[j], t.second[j]);
    s += term;
  }
  return s;
}

AntiWickPolynomial AntiWickPolynomial::operator+(const AntiWickPolynomial& o) const {
  if (o.n_ != n_) throw ShapeError("dimension mismatch");
  AntiWickPolynomial r = *this;
  for (const auto& [t, c] : o.coeffs_) r.add(t.first, t.second, c);
  return r;
}

AntiWickPolynomial AntiWickPolynomial::operator*(cplx s) const {
  AntiWickPolynomial r(n_);
  for (const auto& [t, c] : coeffs_) r.add(t.first, t.second, c * s);
  return r;
}

AntiWickPolynomial antiwick_from_real_quadratic(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols() || q.rows() % 2 != 0 || q.rows() == 0)
    throw ShapeError("real quadratic form must be 2n x 2n");
  const int n = int(q.rows() / 2);
  std::vector<LinearForm> forms;
  for (int j = 0; j < n; ++j) {
    forms.push_back({j, 0.5, 0.5});                            // Re z_j
    forms.push_back({j, cplx(0.0, -0.5), cplx(0.0, 0.5)});     // Im z_j
  }
  return quadratic_from_forms(n, forms, q);
}

AntiWickMatrix antiwick_matrix(const AntiWickPolynomial& p, const FockTruncation& trunc) {
  if (p.n() != trunc.n()) throw ShapeError("polynomial and truncation dimensions differ");
  const int n = trunc.n();
  const long size = long(trunc.size());
  AntiWickMatrix out;
  out.matrix = Eigen::MatrixXcd::Zero(size, size);
  for (long col = 0; col < size; ++col) {
    const MultiIndex& j = trunc.monomials()[col];
    for (const auto& [t, a] : p.coeffs()) {
      const MultiIndex& k = t.first;
      const MultiIndex& l = t.second;
      MultiIndex m(n);
      bool vanishes = false;
      double entry = 1.0;
      for (int i = 0; i < n; ++i) {
        m[i] = j[i] + l[i] - k[i];
        if (m[i] < 0) {
          vanishes = true;
          break;
        }
        entry *= factorial_ratio_entry(j[i], l[i], m[i]);
      }
      if (vanishes) continue;
      const long row = trunc.index_of(m);
      if (row < 0) continue;  // beyond the truncation: compressed away
      out.matrix(row, col) += a * entry;
    }
  }
  if (trunc.max_degree() < p.degree()) {
    out.truncation_warning = true;
    out.status = "truncation N = " + std::to_string(trunc.max_degree()) + " is below deg(P) = " +
                 std::to_string(p.degree());
  }
  return out;
}

TruncatedSpectrum antiwick_low_spectrum(const AntiWickPolynomial& p, int levels, double tol, int max_degree) {
  if (levels < 1) throw ShapeError("levels must be at least 1");
  if (!p.is_self_adjoint()) throw Error("antiwick_low_spectrum needs a self-adjoint symbol");
  auto lowest = [&](int degree) {
    const FockTruncation trunc(p.n(), degree, std::vector<double>(p.n(), 1.0));
    const auto mat = antiwick_matrix(p, trunc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat.matrix, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return v;
  };
  int degree = std::max(p.degree(), 2);
  while (long(FockTruncation(p.n(), degree, std::vector<double>(p.n(), 1.0)).size()) < levels + 1) ++degree;
  TruncatedSpectrum out;
  std::vector<double> prev = lowest(degree);
  for (;;) {
    const int next = degree + 4;
    if (next > max_degree) {
      out.values.assign(prev.begin(), prev.begin() + levels);
      out.degree = degree;
      out.converged = false;
      out.status = "truncation cap N = " + std::to_string(max_degree) + " reached without convergence";
      return out;
    }
    std::vector<double> cur = lowest(next);
    double change = 0.0;
    for (int i = 0; i < levels; ++i) change = std::max(change, std::abs(cur[i] - prev[i]));
    out.last_change = change;
    if (change < tol) {
      out.values.assign(cur.begin(), cur.begin() + levels);
      out.degree = next;
      out.converged = true;
      return out;
    }
    prev = std::move(cur);
    degree = next;
  }
}

WeylQuadratic antiwick_to_weyl_quadratic(const AntiWickPolynomial& p) {
  if (!p.is_homogeneous_quadratic())
    throw UnsupportedDegreeError("anti-Wick to Weyl conversion needs a homogeneous quadratic");
  if (!p.is_self_adjoint()) throw Error("anti-Wick to Weyl conversion needs a self-adjoint symbol");
  const int n = p.n();
  const double s = 1.0 / std::sqrt(2.0);
  // value of P at v = (x, xi) under z_k = (x_k - i xi_k) / sqrt(2)
  auto value = [&](const Eigen::VectorXd& v) {
    std::vector<cplx> z(n);
    for (int k = 0; k < n; ++k) z[k] = cplx(v(k), -v(n + k)) * s;
    return p(z).real();
  };
  WeylQuadratic w;
  w.m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    Eigen::VectorXd ea = Eigen::VectorXd::Unit(2 * n, a);
    w.m(a, a) = value(ea);
  }
  for (int a = 0; a < 2 * n; ++a)
    for (int b = a + 1; b < 2 * n; ++b) {
      const Eigen::VectorXd eab = Eigen::VectorXd::Unit(2 * n, a) + Eigen::VectorXd::Unit(2 * n, b);
      w.m(a, b) = w.m(b, a) = 0.5 * (value(eab) - w.m(a, a) - w.m(b, b));
    }
  w.trace_correction = 0.5 * w.m.trace();
  return w;
}

AntiWickPolynomial weyl_to_antiwick(const WeylQuadratic& w) {
  const int n = w.n();
  if (w.m.rows() != 2 * n || w.m.cols() != 2 * n || n == 0) throw ShapeError("Weyl matrix must be 2n x 2n");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<LinearForm> forms(2 * n);
  for (int k = 0; k < n; ++k) {
    forms[k] = {k, s, s};                                   // x_k = (z + conj z)/sqrt 2
    forms[n + k] = {k, cplx(0.0, s), cplx(0.0, -s)};        // xi_k = i (z - conj z)/sqrt 2
  }
  return quadratic_from_forms(n, forms, w.m);
}

std::vector<double> weyl_quadratic_spectrum(const WeylQuadratic& w, int levels) {
  if (levels < 0) throw ShapeError("levels must be nonnegative");
  if ((w.m - w.m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, w.m.cwiseAbs().maxCoeff()))
    throw ShapeError("Weyl matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.m);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (!(es.eigenvalues().minCoeff() > 1e-14 * scale))
    throw DegeneracyError("Weyl quadratic form is not positive definite");
  if (w.n() == 1) {
    const double d = std::sqrt(w.m.determinant());
    std::vector<double> out(levels);
    for (int j = 0; j < levels; ++j) out[j] = 2.0 * d * (j + 0.5) + 0.5 * w.m.trace();
    return out;
  }
  const auto t = antiwick_low_spectrum(weyl_to_antiwick(w), levels);
  if (!t.converged) throw ConvergenceError("weyl_quadratic_spectrum: " + t.status);
  return t.values;
}

// ---------------------------------------------------------------------------
// Bargmann transform checks

double hermite_function(int j, double x) {
  if (j < 0) return 0.0;
  double h_prev = 0.0;
  double h = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
  for (int k = 0; k < j; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * h - std::sqrt(double(k) / (k + 1)) * h_prev;
    h_prev = h;
    h = next;
  }
  return h;
}

namespace {

template <class F>
cplx bargmann_transform(F f, cplx z, double half_width, int points) {
  const double dx = 2.0 * half_width / (points - 1);
  cplx s = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -half_width + i * dx;
    const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    s += w * std::exp(-(0.5 * z * z + 0.5 * x * x - std::sqrt(2.0) * z * x)) * f(x);
  }
  return std::pow(pi, -0.25) * dx * s;
}

}  // namespace

BargmannCheck bargmann_hermite_check(int j, const QuadratureSpec& grid) {
  if (j < 0) throw ShapeError("Hermite index must be nonnegative");
  if (grid.points < 3 || !(grid.half_width > 0.0)) throw ShapeError("invalid quadrature specification");
  std::vector<cplx> samples;
  for (int s = 0; s < 10; ++s) samples.push_back(std::polar(0.25 + 0.125 * s, 0.3 + 0.7 * s));

  auto h_j = [j](double x) { return hermite_function(j, x); };
  auto h_0 = [](double x) { return hermite_function(0, x); };
  // (a* f)(x) = (x f - f') / sqrt 2 with the exact derivative of h_j
  auto raised = [j](double x) {
    const double dh = std::sqrt(j / 2.0) * hermite_function(j - 1, x) - std::sqrt((j + 1) / 2.0) * hermite_function(j + 1, x);
    return (x * hermite_function(j, x) - dh) / std::sqrt(2.0);
  };

  BargmannCheck out;
  const int fine = 2 * grid.points - 1;
  double quad_change = 0.0;
  std::vector<cplx> g0, gj, gr;
  for (cplx z : samples) {
    g0.push_back(bargmann_transform(h_0, z, grid.half_width, grid.points));
    gj.push_back(bargmann_transform(h_j, z, grid.half_width, grid.points));
    gr.push_back(bargmann_transform(raised, z, grid.half_width, grid.points));
    const cplx gj_fine = bargmann_transform(h_j, z, grid.half_width, fine);
    quad_change = std::max(quad_change, std::abs(gj_fine - gj.back()) / std::max(1e-300, std::abs(gj_fine)));
  }
  cplx c = 0.0;
  for (cplx v : g0) c += v;
  c /= double(g0.size());
  out.ground_constant = c;
  const double inv_sqrt_fact = std::exp(-0.5 * log_factorial(j));
  double scale_j = 0.0, scale_r = 0.0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    scale_j = std::max(scale_j, std::abs(c * power(samples[s], j)) * inv_sqrt_fact);
    scale_r = std::max(scale_r, std::abs(samples[s] * gj[s]));
  }
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const cplx z = samples[s];
    out.ground_residual = std::max(out.ground_residual, std::abs(g0[s] - c) / std::abs(c));
    out.monomial_residual = std::max(out.monomial_residual, std::abs(gj[s] - c * power(z, j) * inv_sqrt_fact) / scale_j);
    out.ladder_residual = std::max(out.ladder_residual, std::abs(gr[s] - z * gj[s]) / scale_r);
  }
  out.residual = std::max({out.ground_residual, out.monomial_residual, out.ladder_residual});
  if (quad_change > grid.tolerance) {
    out.converged = false;
    out.status = "quadrature not converged: relative change " + std::to_string(quad_change) +
                 " when refining the node count";
  }
  return out;
}

double scaling_isometry_constant(const FockTruncation& trunc, int k) {
  if (trunc.n() != 1) throw ShapeError("scaling_isometry_constant supports n = 1 only");
  if (k < 0 || k > trunc.max_degree()) throw TruncationError("monomial degree exceeds the truncation N");
  const double a = trunc.weights()[0];
  const double scale = std::sqrt(a / 2.0);
  // ||z^k||^2 in F_1 and ||z^k o phi * exp(-a|z|^2/4)||^2 in L^2(R^2); both radial.
  auto fock = [k](double r) { return 2.0 * pi * r * std::pow(r, 2 * k) * std::exp(-r * r); };
  auto image = [k, a, scale](double r) {
    return 2.0 * pi * r * std::pow(scale * r, 2 * k) * std::exp(-0.5 * a * r * r);
  };
  const double r_fock = 10.0 + 2.0 * std::sqrt(double(k));
  const double r_image = r_fock / scale;
  const double i_fock = composite_gauss(fock, 0.0, r_fock, 24);
  const double i_image = composite_gauss(image, 0.0, r_image, 24);
  return std::sqrt(i_fock / i_image);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXcd& m, double drop_below) {
  out << "row,col,re,im\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (std::abs(m(r, c)) > drop_below)
        out << r << ',' << c << ',' << csv_number(m(r, c).real()) << ',' << csv_number(m(r, c).imag()) << '\n';
}

}  // namespace toeplitz_wells::fock

#include "toeplitz_wells/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/CholmodSupport>

#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells {

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;
using Factor = Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower>;

Eigen::MatrixXcd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = cplx(dist(gen), dist(gen));
  return m;
}

// Column-by-column Gram-Schmidt (two passes); collapsing columns are dropped.
Eigen::MatrixXcd gram_schmidt_against(const Eigen::MatrixXcd& basis, const Eigen::MatrixXcd& w) {
  Eigen::MatrixXcd out(w.rows(), w.cols());
  Eigen::Index filled = 0;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    Eigen::VectorXcd v = w.col(c);
    const double before = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) v.noalias() -= basis * (basis.adjoint() * v);
      if (filled > 0) v.noalias() -= out.leftCols(filled) * (out.leftCols(filled).adjoint() * v);
    }
    const double after = v.norm();
    if (before == 0.0 || after < 1e-10 * before) continue;
    out.col(filled++) = v / after;
  }
  return out.leftCols(filled);
}

// Orthonormalizes `w` against the columns of `basis` and internally. Block
// projections plus Cholesky QR, applied twice; falls back to Gram-Schmidt
// (which drops dependent columns) when the block is numerically rank deficient.
Eigen::MatrixXcd orthonormalize_against(const Eigen::MatrixXcd& basis, Eigen::MatrixXcd w) {
  const Eigen::MatrixXcd original = w;
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) w.noalias() -= basis * (basis.adjoint() * w);
    const Eigen::MatrixXcd gram = w.adjoint() * w;
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) return gram_schmidt_against(basis, original);
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs();
    if (d.minCoeff() < 1e-6 * d.maxCoeff()) return gram_schmidt_against(basis, original);
    llt.matrixU().solveInPlace<Eigen::OnTheRight>(w);
  }
  return w;
}

struct ShiftedFactor {
  std::unique_ptr<Factor> factor;
  double shift = 0.0;
};

// Lowers the shift until H - shift is positive definite.
ShiftedFactor factor_below_spectrum(const SpMat& h, double shift, double step) {
  SpMat id(h.rows(), h.cols());
  id.setIdentity();
  for (int attempt = 0; attempt < 80; ++attempt) {
    auto f = std::make_unique<Factor>();
    const SpMat shifted = h - cplx(shift, 0.0) * id;
    f->compute(shifted);
    if (f->info() == Eigen::Success) return {std::move(f), shift};
    shift -= step;
    step *= 2.0;
  }
  throw ConvergenceError("low_spectrum: could not find a shift below the spectrum");
}

// A few Lanczos steps from a random vector: returns the lowest Ritz value and
// its residual norm.
std::pair<double, double> lanczos_lowest_estimate(const SpMat& h, int steps, std::uint64_t seed) {
  const Eigen::Index n = h.rows();
  steps = int(std::min<Eigen::Index>(steps, n));
  Eigen::MatrixXcd v(n, steps);
  Eigen::VectorXcd q = random_block(n, 1, seed).col(0);
  q.normalize();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
  Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(n);
  double beta = 0.0;
  int m = 0;
  for (; m < steps; ++m) {
    v.col(m) = q;
    Eigen::VectorXcd w = h * q;
    const double alpha = q.dot(w).real();
    w -= alpha * q + beta * prev;
    w -= v.leftCols(m + 1) * (v.leftCols(m + 1).adjoint() * w);
    t(m, m) = alpha;
    beta = w.norm();
    if (m + 1 < steps) {
      t(m, m + 1) = t(m + 1, m) = beta;
    }
    if (beta < 1e-14) {
      ++m;
      break;
    }
    prev = q;
    q = w / beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(m, m));
  const double theta = es.eigenvalues()(0);
  const double resid = std::abs(beta * es.eigenvectors()(m - 1, 0));
  return {theta, resid};
}

LowSpectrum dense_low_spectrum(const SpMat& h, int count) {
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success) throw ConvergenceError("low_spectrum: dense eigensolver failed");
  LowSpectrum out;
  out.matrix_norm = infinity_norm(h);
  out.eigenvectors = es.eigenvectors().leftCols(count);
  out.eigenvalues.resize(count);
  out.residuals.resize(count);
  for (int i = 0; i < count; ++i) {
    out.eigenvalues[i] = es.eigenvalues()(i);
    out.residuals[i] = (h * out.eigenvectors.col(i) - out.eigenvalues[i] * out.eigenvectors.col(i)).norm();
  }
  out.converged = true;
  return out;
}

}  // namespace

std::string to_string(SolverMode mode) { return mode == SolverMode::dense ? "dense" : "lanczos"; }

double LowSpectrum::orthonormality_defect() const {
  if (eigenvectors.cols() == 0) return 0.0;
  Eigen::MatrixXcd g = eigenvectors.adjoint() * eigenvectors * cell_area;
  g -= Eigen::MatrixXcd::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

double infinity_norm(const Eigen::SparseMatrix<cplx>& h) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (SpMat::InnerIterator it(h, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

LowSpectrum low_spectrum(const Eigen::SparseMatrix<cplx>& h, int count, const LowSpectrumOptions& options) {
  if (h.rows() != h.cols()) throw ShapeError("low_spectrum: matrix is not square");
  const Eigen::Index n = h.rows();
  if (count < 0 || count > n) throw ShapeError("low_spectrum: count exceeds the dimension");
  if (count == 0) {
    LowSpectrum empty;
    empty.matrix_norm = infinity_norm(h);
    empty.converged = true;
    empty.eigenvectors.resize(n, 0);
    return empty;
  }

  const int block = int(std::min<Eigen::Index>(count + std::max(options.extra, 1), n - 1));
  const int depth = std::max(options.krylov_depth, 2);
  if (options.mode == SolverMode::dense || count == n || n <= std::max<Eigen::Index>(300, 2 * Eigen::Index(block) * depth)) {
    return dense_low_spectrum(h, count);
  }

  const double norm = infinity_norm(h);
  double shift = 0.0;
  double step = 0.0;
  if (options.shift) {
    shift = *options.shift;
    step = std::max(1.0, std::abs(shift)) * 1e-2;
  } else {
    auto [theta, resid] = lanczos_lowest_estimate(h, 40, options.seed ^ 0x9e3779b97f4a7c15ULL);
    step = std::max({resid, 1e-8 * norm, 1e-3 * std::abs(theta)});
    shift = theta - step;
  }
  ShiftedFactor op = factor_below_spectrum(h, shift, step);

  LowSpectrum out;
  out.matrix_norm = norm;
  out.shift = op.shift;

  const int must_converge = std::clamp(options.converge_count.value_or(count), 0, count);
  Eigen::MatrixXcd v = orthonormalize_against(Eigen::MatrixXcd(n, 0), random_block(n, block, options.seed));
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    // Block Krylov basis [V, K V, K^2 V, ...] with K = (H - shift)^{-1}.
    Eigen::MatrixXcd basis = v;
    Eigen::MatrixXcd last = v;
    for (int d = 1; d < depth; ++d) {
      Eigen::MatrixXcd w = op.factor->solve(last);
      Eigen::MatrixXcd fresh = orthonormalize_against(basis, std::move(w));
      if (fresh.cols() == 0) break;
      Eigen::MatrixXcd grown(n, basis.cols() + fresh.cols());
      grown << basis, fresh;
      basis = std::move(grown);
      last = std::move(fresh);
    }

    Eigen::MatrixXcd hb = h * basis;
    Eigen::MatrixXcd g = basis.adjoint() * hb;
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    const int keep = int(std::min<Eigen::Index>(block, basis.cols()));
    const Eigen::MatrixXcd y = es.eigenvectors().leftCols(keep);
    Eigen::MatrixXcd ritz = basis * y;
    Eigen::MatrixXcd hr = hb * y;
    hb.resize(0, 0);

    bool done = true;
    std::vector<double> res(keep);
    for (int i = 0; i < keep; ++i) {
      res[i] = (hr.col(i) - es.eigenvalues()(i) * ritz.col(i)).norm();
      if (i < must_converge && res[i] > options.tolerance * norm) done = false;
    }
    out.restarts = restart;
    if (done || restart == options.max_restarts) {
      out.converged = done;
      out.eigenvalues.resize(count);
      out.residuals.resize(count);
      for (int i = 0; i < count; ++i) {
        out.eigenvalues[i] = es.eigenvalues()(i);
        out.residuals[i] = res[i];
      }
      out.eigenvectors = ritz.leftCols(count);
      return out;
    }
    v = orthonormalize_against(Eigen::MatrixXcd(n, 0), ritz);
  }
  return out;
}

}  // namespace toeplitz_wells

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "toeplitz_wells/trig_poly.hpp"

namespace toeplitz_wells {

enum class SolverMode { lanczos, dense };

std::string to_string(SolverMode mode);

struct LowSpectrumOptions {
  SolverMode mode = SolverMode::lanczos;
  /// Shift strictly below the lowest eigenvalue. When unset (or when the
  /// guess turns out to lie inside the spectrum) it is found by lowering a
  /// trial value until H - shift admits a Cholesky factorization.
  std::optional<double> shift;
  /// Block size beyond the requested count.
  int extra = 8;
  /// Number of blocks in each Krylov basis before restarting.
  int krylov_depth = 3;
  int max_restarts = 60;
  /// Converged when ||H v - lambda v|| <= tolerance * ||H||.
  double tolerance = 1e-10;
  /// Only the lowest `converge_count` pairs must meet the tolerance (all of
  /// them when unset); the rest are returned as they stand.
  std::optional<int> converge_count;
  std::uint64_t seed = 20190917;
  /// Worker threads for the block solves.
  int jobs = 1;
};

/// Lowest part of the spectrum of a Hermitian matrix.
struct LowSpectrum {
  std::vector<double> eigenvalues;
  /// Columns are eigenvectors scaled so that sum |v|^2 * cell_area = 1.
  Eigen::MatrixXcd eigenvectors;
  /// ||H v - lambda v|| for unit Euclidean v.
  std::vector<double> residuals;
  double cell_area = 1.0;
  /// Upper bound on ||H|| (max absolute row sum).
  double matrix_norm = 0.0;
  bool converged = false;
  int restarts = 0;
  double shift = 0.0;

  int size() const { return int(eigenvalues.size()); }
  /// max |<u_i, u_j> - delta_ij| under grid quadrature.
  double orthonormality_defect() const;
};

/// The `count` smallest eigenpairs of the Hermitian matrix `h`.
///
/// lanczos mode: restarted block Lanczos on (H - shift)^{-1} with full
/// reorthogonalization and Rayleigh-Ritz in H. The shift-inverted operator
/// is applied through a sparse Cholesky factorization. Non-convergence after
/// max_restarts is reported through `converged == false` together with the
/// best residuals; it never throws for that reason.
///
/// dense mode: full Hermitian eigendecomposition.
LowSpectrum low_spectrum(const Eigen::SparseMatrix<cplx>& h, int count,
                         const LowSpectrumOptions& options = {});

/// max absolute row sum.
double infinity_norm(const Eigen::SparseMatrix<cplx>& h);

}  // namespace toeplitz_wells

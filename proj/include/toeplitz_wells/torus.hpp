#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "toeplitz_wells/eigensolver.hpp"
#include "toeplitz_wells/trig_poly.hpp"

namespace toeplitz_wells::torus {

enum class FieldFamily { constant, single_well, double_well, custom };

std::string to_string(FieldFamily family);
FieldFamily field_family_from_string(const std::string& name);

/// Closed-form description of a field, the input of build_field.
struct FieldSpec {
  FieldFamily family = FieldFamily::constant;
  int flux = 1;              ///< m, the integer flux
  double epsilon = 0.0;      ///< well depth parameter for the well families
  TrigPoly custom;           ///< Fourier data for FieldFamily::custom
};

/// Magnetic field b(x) dx1^dx2 on the flat unit torus with integer flux
/// m = (1/2pi) * integral of b. The mean is therefore 2 pi m.
class TorusField {
 public:
  TorusField(TrigPoly b, int flux, FieldSpec spec);

  const TrigPoly& b() const { return b_; }
  int flux() const { return flux_; }
  const FieldSpec& spec() const { return spec_; }

  double operator()(double x1, double x2) const { return b_(x1, x2); }
  double operator()(const TorusPoint& x) const { return b_(x); }

  /// 2 pi m.
  double mean() const;
  /// min over the torus of b, refined from the minima list (or the dense
  /// verification grid when b has no strict minima).
  double minimum() const { return minimum_; }
  double maximum() const { return maximum_; }
  /// mu_0 = b_0 on the torus (tau = b).
  double mu0() const { return minimum_; }
  /// Strict local minima at the global minimum value, with Hessians.
  const std::vector<CriticalPoint>& minima() const { return minima_; }
  /// All strict local minima, any value.
  const std::vector<CriticalPoint>& local_minima() const { return local_minima_; }

  /// Field shifted in space: b'(x) = b(x - shift).
  TorusField translated(const TorusPoint& shift) const;

 private:
  TrigPoly b_;
  int flux_;
  FieldSpec spec_;
  double minimum_ = 0.0;
  double maximum_ = 0.0;
  std::vector<CriticalPoint> minima_;
  std::vector<CriticalPoint> local_minima_;
};

/// Builds and validates a field. Well families use
/// b = c (1 + eps * g(x)) with c = 2 pi m / (1 + 2 eps):
///   single_well: g = 2 - cos 2pi x1 - cos 2pi x2       (minimum at 0)
///   double_well: g = 2 - cos 2pi(x1+x2) - cos 2pi(x1-x2) (minima at 0, (1/2,1/2))
/// Custom fields are rescaled so that the mean equals 2 pi m.
/// Throws FieldError when b is not positive on the verification grid.
TorusField build_field(const FieldSpec& spec, int verification_grid = 256);

/// Periodic part of the gauge potential: phi with Laplacian(phi) = b - mean(b),
/// zero mean. The corrector one-form is (-d2 phi) dx1 + (d1 phi) dx2.
struct GaugeCorrector {
  TrigPoly phi;
  /// Constant added to phi; leaves every gauge invariant quantity unchanged.
  double offset = 0.0;
};

GaugeCorrector solve_gauge(const TorusField& field);

/// Discretized magnetic problem for L^p on the torus.
///
/// Gauge: A = (-mean(b) x2 - d2 phi) dx1 + (d1 phi) dx2 with the connection
/// d - i p A. Sections obey psi(x1, x2 + 1) = exp(-2 pi i p m x1) psi(x1, x2)
/// and are periodic in x1. The covariant Laplacian is discretized along grid
/// lines: each directional second derivative is a central difference of the
/// parallel-transported section, with transports given by exact line
/// integrals of A. This keeps discrete gauge covariance exact for any order.
struct LandauProblem {
  LandauProblem(TorusField field, int p, int grid_n, int stencil_order = 8,
                bool enforce_resolution = true);

  TorusField field;
  int p;
  int grid_n;
  /// Even accuracy order of the line stencil (2, 4, ..., 16).
  int stencil_order;
  GaugeCorrector gauge;

  double spacing() const { return 1.0 / grid_n; }
  double cell_area() const { return spacing() * spacing(); }
  /// l = (p * mean(b))^{-1/2}
  double magnetic_length() const;
  std::size_t dimension() const { return std::size_t(grid_n) * grid_n; }
  std::size_t index(int i, int j) const { return std::size_t(i) + std::size_t(grid_n) * j; }
};

/// Smallest grid_n with spacing <= l/8.
int required_grid_n(const TorusField& field, int p);

/// Smallest power of two >= 8 sqrt(p * mean(b)).
int rule_grid_n(const TorusField& field, int p);

enum class LaplacianKind { bochner, renormalized };

/// Central-difference weights w_{-r..r} for the second derivative with
/// accuracy order 2r (unit spacing).
std::vector<double> second_derivative_weights(int order);

/// Sparse Hermitian matrix of the Bochner Laplacian (or of Delta_p =
/// Delta^{L^p} - p b) on the grid. Exactly Hermitian by construction.
Eigen::SparseMatrix<cplx> assemble_laplacian(const LandauProblem& prob, LaplacianKind kind);

/// Per-plaquette magnetic flux read off from the link phases, in radians, and
/// its total. The holonomy around plaquette (i, j) is exp(-i flux(i, j)).
struct PlaquetteFlux {
  Eigen::VectorXd flux;  ///< flattened i + n*j
  double total = 0.0;    ///< equals 2 pi p m
  /// max |exp(-i flux) - (product of link phases)| over all plaquettes
  double holonomy_mismatch = 0.0;
};

PlaquetteFlux plaquette_flux(const LandauProblem& prob);

/// Solver options used by the torus-level spectral routines.
struct TorusSolveOptions {
  SolverMode mode = SolverMode::lanczos;
  int extra = 12;  ///< eigenpairs computed beyond the requested count
  double tolerance = 1e-10;
  /// see LowSpectrumOptions::converge_count
  std::optional<int> converge_count;
  std::uint64_t seed = 20190917;
  int jobs = 1;
};

/// Lowest eigenpairs of Delta^{L^p} or Delta_p, eigenvectors normalized under
/// grid quadrature (sum |u|^2 h^2 = 1).
LowSpectrum torus_low_spectrum(const LandauProblem& prob, LaplacianKind kind, int count,
                               const TorusSolveOptions& options = {});

/// Low cluster (the space H_p) of Delta_p.
struct ClusterInfo {
  int dimension = 0;          ///< d_p
  double half_width = 0.0;    ///< observed C_L = max |lambda| over the cluster
  double cluster_max = 0.0;
  double gap_edge = 0.0;      ///< first eigenvalue above the cluster
  bool dimension_law = false; ///< d_p == p * m
};

/// Locates the low cluster of a renormalized spectrum. The cluster is the
/// set of eigenvalues below p * mu_0; the first eigenvalue above must exceed
/// p * mu_0 and the gap must be wider than the cluster. Throws NoGapError
/// otherwise (grid too coarse, p too small, or too few eigenvalues computed).
ClusterInfo detect_cluster(const LowSpectrum& spectrum, int p, const TorusField& field);

/// Low spectrum of Delta_p together with its detected cluster.
struct ClusterSpectrum {
  LowSpectrum spectrum;
  ClusterInfo cluster;
  /// The d_p cluster sections (columns), normalized under grid quadrature.
  Eigen::MatrixXcd basis() const { return spectrum.eigenvectors.leftCols(cluster.dimension); }
};

/// Computes Delta_p's low spectrum with enough eigenpairs to see past the gap
/// (p * m + extra) and detects the cluster.
ClusterSpectrum cluster_spectrum(const LandauProblem& prob, const TorusSolveOptions& options = {});

/// Lowest j_max eigenvalues of the Bochner Laplacian.
std::vector<double> bochner_low_eigs(const LandauProblem& prob, int j_max,
                                     const TorusSolveOptions& options = {});

}  // namespace toeplitz_wells::torus

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toeplitz_wells/modelwell.hpp"
#include "toeplitz_wells/toeplitz.hpp"
#include "toeplitz_wells/torus.hpp"

namespace toeplitz_wells::asymptotics {

/// value ~ amplitude * p^exponent by least squares on (log p, log value).
struct PowerLawFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double r2 = 0.0;
  int used = 0;
  int rejected = 0;  ///< points with nonpositive value
  bool ok = false;
  std::string status = "ok";
};

/// Nonpositive values are rejected; fewer than 3 survivors gives ok = false.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

/// Error estimate |v1 - v2| / (2^order - 1) for the finer of two resolutions
/// that differ by a factor of two.
double richardson_gap(double coarse, double fine, int order = 2);

/// value ~ offset + slope * x by least squares (used for p^{-1/2} remainders).
struct LinearFit {
  double offset = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  bool ok = false;
};
LinearFit fit_linear(const std::vector<std::pair<double, double>>& points);

struct Verdict {
  std::string name;
  bool passed = false;
  /// the measured quantity and the threshold it was compared against
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Pass thresholds. Defaults follow the documented acceptance windows.
struct Thresholds {
  /// residual fits only use p >= min_fit_p
  int min_fit_p = 16;
  /// a residual is used only when its discretization estimate is below this
  /// fraction of the residual
  double discretization_fraction = 0.10;
  /// window for the decay exponent of the Bochner residual (as a positive rate)
  double decay_exponent_low = 0.3;
  double decay_exponent_high = 0.7;
  /// Landau identity for constant fields: |lambda_0 - p bbar| / (p bbar)
  double landau_relative = 0.01;
  /// Toeplitz sweep: limit of p lambda_p^0 vs mu_0, relative
  double limit_relative = 0.10;
  /// Toeplitz sweep: level spacing vs the model slope, relative
  double spacing_relative = 0.10;
  /// Toeplitz sweep: fitted drift exponent of |p lambda - mu| must be <= this
  double drift_exponent_max = -0.3;
};

/// Provides the Bergman basis for (p, grid_n); lets callers share clusters
/// between sweeps. The default computes it from scratch.
using BasisProvider =
    std::function<std::shared_ptr<const toeplitz::BergmanBasis>(const torus::TorusField&, int p, int grid_n)>;

std::shared_ptr<const toeplitz::BergmanBasis> compute_basis(const torus::TorusField& field, int p, int grid_n,
                                                            const torus::TorusSolveOptions& options = {});

struct SweepOptions {
  Thresholds thresholds;
  torus::TorusSolveOptions solver;
  /// fixed grid for every p instead of the resolution rule
  std::optional<int> grid_override;
  int stencil_order = 8;
  /// run the renormalized cluster detection for each p of a Bochner sweep
  bool detect_clusters = true;
  /// worker threads over independent p values
  int jobs = 1;
  BasisProvider basis_provider;
};

struct BochnerRecord {
  int p = 0;
  int grid_n = 0;       ///< coarse grid; the reported value uses 2 * grid_n
  int j = 0;
  double lambda = 0.0;  ///< lambda_j(Delta^{L^p}) on the fine grid
  double lambda_coarse = 0.0;
  double reference = 0.0;  ///< p b_0 + mu_j
  double mu = 0.0;
  double residual = 0.0;  ///< lambda - reference (signed)
  double discretization = 0.0;
  bool used_in_fit = false;
};

struct ClusterRecord {
  int p = 0;
  int grid_n = 0;
  bool found = false;
  int dimension = 0;
  int expected = 0;
  double half_width = 0.0;
  double gap_edge = 0.0;
  std::string status = "ok";
};

struct ToeplitzRecord {
  int p = 0;
  int grid_n = 0;
  int m = 0;
  double lambda = 0.0;
  double p_lambda = 0.0;
  double mu = 0.0;
  double gap_to_model = 0.0;  ///< p lambda - mu
};

struct SweepReport {
  std::string experiment;
  /// true when the field has no wells and the comparison is the Landau
  /// identity lambda_j = p bbar instead of a fit
  bool landau_identity = false;
  model::ModelSpectrum model;
  std::vector<BochnerRecord> bochner;
  std::vector<ToeplitzRecord> toeplitz;
  std::vector<ClusterRecord> clusters;
  /// (label, fit), e.g. ("j=0", ...)
  std::vector<std::pair<std::string, PowerLawFit>> fits;
  /// one-sided constant C of lambda_j <= p b_0 + mu_j + C p^{-1/2}
  std::optional<double> upper_bound_constant;
  /// p lambda_p^0 ~ mu_0 + offset + phi p^{-1/2}
  std::optional<LinearFit> remainder_fit;
  std::vector<Verdict> verdicts;

  bool passed() const;
  bool empty() const { return bochner.empty() && toeplitz.empty() && clusters.empty(); }
};

/// Bochner sweep: for each p, the lowest j_max + 1 eigenvalues of
/// Delta^{L^p} at grid_n and 2 grid_n, compared with p b_0 + mu_j where
/// mu_j comes from the magnetic wells of the field.
SweepReport run_bochner_sweep(const torus::TorusField& field, const std::vector<int>& p_list, int j_max,
                              const SweepOptions& options = {});

/// Toeplitz sweep: the lowest m_max + 1 eigenvalues of T_{h,p} compared with
/// mu_m / p from the wells of h (zeros with positive definite Hessian).
SweepReport run_toeplitz_sweep(const torus::TorusField& field, const TrigPoly& h, const std::vector<int>& p_list,
                               int m_max, const SweepOptions& options = {});

/// Wells of a nonnegative symbol: its zeros (global minima at value 0).
std::vector<model::QuadraticWell> symbol_wells(const TrigPoly& h, const torus::TorusField& field);

/// Runs task(i) for i in [0, count) on `jobs` threads; the first exception
/// is rethrown after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

}  // namespace toeplitz_wells::asymptotics

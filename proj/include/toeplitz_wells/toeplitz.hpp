#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "toeplitz_wells/torus.hpp"
#include "toeplitz_wells/trig_poly.hpp"

namespace toeplitz_wells::toeplitz {

/// Orthonormal basis of H_p sampled on the problem grid.
struct BergmanBasis {
  int p = 0;
  int grid_n = 0;
  double cell_area = 0.0;
  /// Columns u_i with sum |u_i|^2 * cell_area = 1.
  Eigen::MatrixXcd sections;
  /// Field samples on the grid (needed by the Poisson bracket).
  Eigen::VectorXd field_samples;

  static BergmanBasis from_cluster(const torus::LandauProblem& prob, const torus::ClusterSpectrum& cluster);

  int dimension() const { return int(sections.cols()); }
  TorusPoint point(std::size_t index) const {
    return {double(index % grid_n) / grid_n, double(index / grid_n) / grid_n};
  }
};

/// T_{f,p} = P f P in the basis of H_p.
struct ToeplitzMatrix {
  int p = 0;
  Eigen::VectorXd symbol_samples;
  Eigen::MatrixXcd entries;

  /// max |T - T^*|
  double hermiticity_defect() const;
};

/// M_ij = <u_i, f u_j> by grid quadrature. Throws ShapeError when the samples
/// do not live on the basis grid.
ToeplitzMatrix toeplitz_matrix(const Eigen::VectorXd& samples, const BergmanBasis& basis);
ToeplitzMatrix toeplitz_matrix(const TrigPoly& f, const BergmanBasis& basis);

/// {f, g} = (d1 f d2 g - d2 f d1 g) / b sampled on the basis grid.
Eigen::VectorXd poisson_bracket_samples(const TrigPoly& f, const TrigPoly& g, const BergmanBasis& basis);

struct ProductDefect {
  double norm_fg = 0.0;    ///< ||T_f T_g - T_{fg}||
  double norm_comm = 0.0;  ///< min over s of ||p [T_f, T_g] - s i T_{f,g}||
  int chosen_sign = 1;     ///< the minimizing s
  double norm_comm_other = 0.0;  ///< value for the other sign
};

/// Operator norms are largest singular values of the dense d_p x d_p matrices.
ProductDefect product_defect(const TrigPoly& f, const TrigPoly& g, const BergmanBasis& basis);

double operator_norm(const Eigen::MatrixXcd& m);

struct ToeplitzEigen {
  std::vector<double> values;
  /// coefficients in the H_p basis (columns)
  Eigen::MatrixXcd coefficients;
  /// eigensections on the grid, normalized under grid quadrature
  Eigen::MatrixXcd sections;
};

/// Lowest `count` eigenpairs of T_{h,p}.
ToeplitzEigen toeplitz_low_spectrum(const TrigPoly& h, const BergmanBasis& basis, int count);

/// Periodic distance field on an n x n grid (values at (i/n, j/n), flattened
/// i + n*j) to a set on the torus.
class DistanceField {
 public:
  /// Exact distance to a finite set of points.
  static DistanceField to_points(const std::vector<TorusPoint>& points, int grid_n);
  /// Distance to the sublevel set {f <= level}, discretized on a
  /// reference grid (exact Euclidean distance transform, periodic), then
  /// read at the nearest reference node of each target node.
  static DistanceField to_sublevel_set(const TrigPoly& f, double level, int grid_n, int reference_n = 512);

  const Eigen::VectorXd& values() const { return values_; }
  int grid_n() const { return grid_n_; }

 private:
  Eigen::VectorXd values_;
  int grid_n_ = 0;
};

/// Squared periodic Euclidean distance transform of a boolean mask on an
/// n x n grid with unit spacing (infinity when the mask is empty).
Eigen::VectorXd periodic_squared_edt(const std::vector<bool>& mask, int n);

struct LocalizationParams {
  std::vector<double> deltas{0.1, 0.2, 0.3};
  std::vector<double> alphas{0.25, 0.5, 1.0};
  /// level of the sublevel set U_{h0} for the exponential weights
  double h0 = 0.5;
  std::vector<int> moment_orders{1, 2, 3};
};

struct LocalizationReport {
  int p = 0;
  int eigen_index = 0;
  double norm = 0.0;  ///< integral of |u|^2 (should be 1)
  std::map<double, double> mass_outside;  ///< delta -> mass where d(x, U_0) >= delta
  std::map<int, double> moments;          ///< k -> (u, h^k u)
  std::map<double, double> exp_weight;    ///< alpha -> integral e^{2 alpha sqrt(p) d(x, U_{h0})} |u|^2
};

/// U_0 is the zero set of h (its isolated zeros when h has strict minima at
/// value 0, otherwise the sublevel set {h <= 1e-12 max h}).
LocalizationReport localization_report(const Eigen::VectorXcd& section, const TrigPoly& h, const BergmanBasis& basis,
                                       int eigen_index, const LocalizationParams& params = {});

/// Distance field to the zero set U_0 of a nonnegative symbol on the given grid.
DistanceField zero_set_distance(const TrigPoly& h, int grid_n);

struct DecayProbe {
  std::vector<TorusPoint> sources{{0.0, 0.0}, {0.5, 0.5}, {0.25, 0.75}};
  double d_min = 0.1;
  double d_max = 0.5;
  /// samples with |K| below floor * max_x K(x, x) are dropped
  double floor = 1e-11;
};

struct DecayFit {
  double amplitude = 0.0;  ///< c in |K| ~ c exp(-rate sqrt(p) d)
  double rate = 0.0;
  double r2 = 0.0;
  int used = 0;
  int dropped = 0;
  /// integral of K(x, x) dv (equals d_p for a projector)
  double trace = 0.0;
};

/// Kernel of the projector onto H_p, K(x, x') = sum u_i(x) conj(u_i(x')),
/// sampled at pairs with d(x, x') in [d_min, d_max]; log |K| is fitted
/// against sqrt(p) d.
DecayFit offdiag_decay(const BergmanBasis& basis, const DecayProbe& probe = {});

/// Same for the kernel of T_{f,p}: sum_ij u_i(x) T_ij conj(u_j(x')).
DecayFit offdiag_decay(const ToeplitzMatrix& t, const BergmanBasis& basis, const DecayProbe& probe = {});

struct DegenerateWellReport {
  int p = 0;
  int k = 1;
  double eigenvalue = 0.0;
  /// lambda < c0 * p^{-2k/(2k+1)}
  bool applicable = false;
  double bound = 0.0;
  std::map<double, double> weighted;  ///< c -> integral e^{2 c p^{1/(2k+1)} d(x, U_0)} |u|^2
};

DegenerateWellReport degenerate_well_report(const Eigen::VectorXcd& section, double eigenvalue, const TrigPoly& h,
                                            int k, const std::vector<double>& cs, const BergmanBasis& basis,
                                            double c0);

}  // namespace toeplitz_wells::toeplitz

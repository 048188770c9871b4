#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toeplitz_wells/fockspace.hpp"
#include "toeplitz_wells/torus.hpp"

namespace toeplitz_wells::model {

/// Local model of one well: weights a_j, the quadratic form
/// q(Z) = <Q Z, Z> (Q = half the Hessian of the symbol) on R^{2n}, and a
/// scalar shift added to the model operator.
struct QuadraticWell {
  int n = 1;
  std::vector<double> a{1.0};
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  double shift = 0.0;
  std::string label = "well";
  TorusPoint position{};

  /// Throws DegeneracyError / ShapeError when the invariants fail.
  void validate() const;
  /// D = det Q
  double det() const;
  /// A = tr Q^{1/2}
  double trace_sqrt() const;
};

/// Ascending model eigenvalues mu_m with the well each one came from.
struct ModelSpectrum {
  std::vector<double> values;
  std::vector<int> well_index;
  std::vector<std::string> well_label;
  /// true for closed-form values, false for truncated diagonalization
  std::vector<bool> exact;
  bool converged = true;
  std::string status = "ok";

  int size() const { return int(values.size()); }
};

/// mu_j = (2 sqrt(D) / a_1) j + A^2 / (2 a_1) + shift for n = 1; other n are
/// served by well_spectrum_truncated.
ModelSpectrum well_spectrum_exact(const QuadraticWell& well, int levels);

/// Eigenvalues of the anti-Wick operator of the rescaled symbol
/// (Q o phi^{-1})(z), phi(z) = (sqrt(a_j/2) z_j), plus the shift. The
/// truncation degree grows until convergence, capped at trunc.max_degree();
/// reaching the cap gives converged = false with an explanatory status.
ModelSpectrum well_spectrum_truncated(const QuadraticWell& well, const fock::FockTruncation& trunc, int levels);
ModelSpectrum well_spectrum_truncated(const QuadraticWell& well, int levels);

/// Direct sum over wells: merged ascending union with multiplicity, ties
/// broken by well index, truncated to `levels`.
ModelSpectrum multiwell_spectrum(const std::vector<QuadraticWell>& wells, int levels);

/// The merge step of multiwell_spectrum for spectra computed elsewhere; the
/// position in `spectra` is the well index.
ModelSpectrum merge_well_spectra(const std::vector<ModelSpectrum>& spectra, int levels);

/// Magnetic well at a minimum of b: a_1 = b(x0), Q = Hess b(x0) / 2,
/// shift 0. The point is Newton-refined first. Throws DegeneracyError when
/// |grad b| > 1e-10 max|b| or the smallest Hessian eigenvalue is below 1e-8.
QuadraticWell magnetic_well_from_field(const torus::TorusField& field, const TorusPoint& minimum);

/// Toeplitz well of a symbol h >= 0 at a zero x0: a_1 = b(x0), Q = Hess h(x0) / 2,
/// shift 0. Same tolerances as magnetic_well_from_field (relative to max|h|).
QuadraticWell toeplitz_well_from_symbol(const TrigPoly& h, const torus::TorusField& field, const TorusPoint& zero);

/// Leading-order predictions mu_m / p.
std::vector<double> predict_toeplitz_eigs(const ModelSpectrum& spec, int p);

/// CSV with columns index, value, well_label, exactness.
void write_model_spectrum_csv(std::ostream& out, const ModelSpectrum& spec);

}  // namespace toeplitz_wells::model

#include "toeplitz_wells/modelwell.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toeplitz_wells/csv.hpp"
#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::model {

namespace {

struct RefinedPoint {
  TorusPoint x;
  Eigen::Vector2d gradient;
  Eigen::Matrix2d hessian;
};

// Newton iteration on grad f = 0 starting from x.
RefinedPoint newton_refine(const TrigPoly& f, TorusPoint x) {
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector2d g = f.gradient(x);
    const Eigen::Matrix2d h = f.hessian(x);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    if (es.eigenvalues().minCoeff() <= 0.0) break;
    const Eigen::Vector2d step = h.ldlt().solve(g);
    x.x1 -= step(0);
    x.x2 -= step(1);
    if (step.norm() < 1e-16) break;
  }
  x.x1 -= std::floor(x.x1);
  x.x2 -= std::floor(x.x2);
  return {x, f.gradient(x), f.hessian(x)};
}

double max_abs_on_grid(const TrigPoly& f) { return f.sample(128).cwiseAbs().maxCoeff(); }

void check_minimum(const RefinedPoint& r, double scale, const char* what) {
  if (r.gradient.norm() > 1e-10 * scale)
    throw DegeneracyError(std::string(what) + ": gradient does not vanish at the claimed minimum");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(r.hessian);
  if (es.eigenvalues().minCoeff() < 1e-8)
    throw DegeneracyError(std::string(what) +
                          ": Hessian is not positive definite (degenerate well; see the degenerate-well report)");
}

std::string point_label(const TorusPoint& x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.6f,%.6f)", x.x1, x.x2);
  return buf;
}

}  // namespace

void QuadraticWell::validate() const {
  if (n < 1) throw ShapeError("well dimension must be positive");
  if (int(a.size()) != n) throw ShapeError("need exactly n weights a_j");
  for (double aj : a)
    if (!(aj > 0.0)) throw DegeneracyError("weights a_j must be positive");
  if (q.rows() != 2 * n || q.cols() != 2 * n) throw ShapeError("Q must be 2n x 2n");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw ShapeError("Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw DegeneracyError("Q must be positive definite");
}

double QuadraticWell::det() const { return q.determinant(); }

double QuadraticWell::trace_sqrt() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

ModelSpectrum well_spectrum_exact(const QuadraticWell& well, int levels) {
  well.validate();
  if (well.n != 1) return well_spectrum_truncated(well, levels);
  const double a1 = well.a[0];
  const double slope = 2.0 * std::sqrt(well.det()) / a1;
  const double big_a = well.trace_sqrt();
  const double offset = big_a * big_a / (2.0 * a1) + well.shift;
  ModelSpectrum out;
  for (int j = 0; j < levels; ++j) {
    out.values.push_back(slope * j + offset);
    out.well_index.push_back(0);
    out.well_label.push_back(well.label);
    out.exact.push_back(true);
  }
  return out;
}

ModelSpectrum well_spectrum_truncated(const QuadraticWell& well, const fock::FockTruncation& trunc, int levels) {
  well.validate();
  ModelSpectrum out;
  if (levels <= 0) return out;
  // Q o phi^{-1} has matrix D Q D with D = diag(sqrt(2 / a_j)) on each (Re, Im) pair.
  Eigen::VectorXd d(2 * well.n);
  for (int j = 0; j < well.n; ++j) d(2 * j) = d(2 * j + 1) = std::sqrt(2.0 / well.a[j]);
  const Eigen::MatrixXd rescaled = d.asDiagonal() * well.q * d.asDiagonal();
  const auto symbol = fock::antiwick_from_real_quadratic(rescaled);
  const auto t = fock::antiwick_low_spectrum(symbol, levels, 1e-10, trunc.max_degree());
  out.converged = t.converged;
  out.status = t.converged ? "ok" : t.status;
  for (int j = 0; j < levels; ++j) {
    out.values.push_back(t.values[j] + well.shift);
    out.well_index.push_back(0);
    out.well_label.push_back(well.label);
    out.exact.push_back(false);
  }
  return out;
}

ModelSpectrum well_spectrum_truncated(const QuadraticWell& well, int levels) {
  return well_spectrum_truncated(well, fock::FockTruncation(well.n, 200, well.a), levels);
}

ModelSpectrum merge_well_spectra(const std::vector<ModelSpectrum>& spectra, int levels) {
  struct Entry {
    double value;
    int well;
    std::string label;
    bool exact;
  };
  std::vector<Entry> all;
  ModelSpectrum out;
  for (std::size_t w = 0; w < spectra.size(); ++w) {
    const ModelSpectrum& s = spectra[w];
    if (!s.converged) {
      out.converged = false;
      out.status = s.status;
    }
    for (int j = 0; j < s.size(); ++j) all.push_back({s.values[j], int(w), s.well_label[j], s.exact[j]});
  }
  std::stable_sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    if (x.value != y.value) return x.value < y.value;
    return x.well < y.well;
  });
  for (int i = 0; i < std::min<int>(levels, int(all.size())); ++i) {
    out.values.push_back(all[i].value);
    out.well_index.push_back(all[i].well);
    out.well_label.push_back(all[i].label);
    out.exact.push_back(all[i].exact);
  }
  return out;
}

ModelSpectrum multiwell_spectrum(const std::vector<QuadraticWell>& wells, int levels) {
  if (wells.empty()) throw ShapeError("multiwell_spectrum needs at least one well");
  std::vector<ModelSpectrum> spectra;
  for (const auto& w : wells) spectra.push_back(well_spectrum_exact(w, levels));
  return merge_well_spectra(spectra, levels);
}

QuadraticWell magnetic_well_from_field(const torus::TorusField& field, const TorusPoint& minimum) {
  const RefinedPoint r = newton_refine(field.b(), minimum);
  check_minimum(r, max_abs_on_grid(field.b()), "magnetic_well_from_field");
  QuadraticWell w;
  w.n = 1;
  w.a = {field(r.x)};
  w.q = 0.5 * r.hessian;
  w.shift = 0.0;
  w.position = r.x;
  w.label = point_label(r.x);
  return w;
}

QuadraticWell toeplitz_well_from_symbol(const TrigPoly& h, const torus::TorusField& field, const TorusPoint& zero) {
  const RefinedPoint r = newton_refine(h, zero);
  check_minimum(r, max_abs_on_grid(h), "toeplitz_well_from_symbol");
  QuadraticWell w;
  w.n = 1;
  w.a = {field(r.x)};
  w.q = 0.5 * r.hessian;
  w.shift = 0.0;
  w.position = r.x;
  w.label = point_label(r.x);
  return w;
}

std::vector<double> predict_toeplitz_eigs(const ModelSpectrum& spec, int p) {
  if (p < 1) throw ShapeError("p must be positive");
  std::vector<double> out;
  for (double mu : spec.values) out.push_back(mu / p);
  return out;
}

void write_model_spectrum_csv(std::ostream& out, const ModelSpectrum& spec) {
  CsvWriter csv(out, {"index", "value", "well_label", "exactness"});
  for (int i = 0; i < spec.size(); ++i) {
    csv.field(i).field(spec.values[i]).field(spec.well_label[i]).field(spec.exact[i] ? "exact" : "truncated");
    csv.end_row();
  }
}

}  // namespace toeplitz_wells::model

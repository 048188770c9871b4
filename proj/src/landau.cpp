#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/torus.hpp"

namespace toeplitz_wells::torus {

namespace {

constexpr double pi = std::numbers::pi;

double factorial(int k) { return std::tgamma(double(k) + 1.0); }

/// Transport factors between stored grid values. The factor multiplies the
/// stored value at `col` when it appears in the row of (i, j).
class LinkTable {
 public:
  explicit LinkTable(const LandauProblem& prob)
      : prob_(prob),
        dphi1_(prob.gauge.phi.derivative(1, 0)),
        dphi2_(prob.gauge.phi.derivative(0, 1)),
        h_(prob.spacing()) {}

  struct Hop {
    std::size_t col;
    cplx factor;
  };

  /// Hop by k > 0 grid steps in direction 1 (x1) or 2 (x2) from node (i, j).
  Hop hop(int i, int j, int direction, int k) const {
    const int n = prob_.grid_n;
    const double x1 = double(i) / n;
    const double x2 = double(j) / n;
    const double len = k * h_;
    const double p = prob_.p;
    if (direction == 1) {
      // integral of A1 = -mean(b) x2 - d2 phi along the x1 segment
      const double theta = -prob_.field.mean() * x2 * len - dphi2_.integrate_x1(x1, len, x2);
      return {prob_.index((i + k) % n, j), std::polar(1.0, -p * theta)};
    }
    const double theta = dphi1_.integrate_x2(x1, x2, len);
    cplx factor = std::polar(1.0, -p * theta);
    int jj = j + k;
    if (jj >= n) {
      // psi(x1, x2 + 1) = exp(-2 pi i p m x1) psi(x1, x2)
      jj -= n;
      factor *= std::polar(1.0, -2.0 * pi * p * prob_.field.flux() * x1);
    }
    return {prob_.index(i, jj), factor};
  }

 private:
  const LandauProblem& prob_;
  TrigPoly dphi1_;
  TrigPoly dphi2_;
  double h_;
};

}  // namespace

LandauProblem::LandauProblem(TorusField field_, int p_, int grid_n_, int stencil_order_, bool enforce_resolution)
    : field(std::move(field_)), p(p_), grid_n(grid_n_), stencil_order(stencil_order_), gauge(solve_gauge(field)) {
  if (p < 1) throw ShapeError("tensor power p must be positive");
  if (stencil_order < 2 || stencil_order > 16 || stencil_order % 2 != 0)
    throw ShapeError("stencil order must be even and between 2 and 16");
  if (grid_n < stencil_order + 1)
    throw ShapeError("grid_n must exceed the stencil order");
  const int need = required_grid_n(field, p);
  if (enforce_resolution && grid_n < need) {
    std::ostringstream msg;
    msg << "grid_n = " << grid_n << " violates the resolution rule for p = " << p << "; need grid_n >= " << need;
    throw ResolutionError(msg.str(), need);
  }
}

double LandauProblem::magnetic_length() const { return 1.0 / std::sqrt(p * field.mean()); }

int required_grid_n(const TorusField& field, int p) {
  return int(std::ceil(8.0 * std::sqrt(p * field.mean()) - 1e-9));
}

int rule_grid_n(const TorusField& field, int p) {
  const int need = required_grid_n(field, p);
  int n = 8;
  while (n < need) n *= 2;
  return n;
}

std::vector<double> second_derivative_weights(int order) {
  if (order < 2 || order % 2 != 0 || order > 16) throw ShapeError("stencil order must be even, 2..16");
  const int r = order / 2;
  std::vector<double> w(2 * r + 1, 0.0);
  double centre = 0.0;
  for (int k = 1; k <= r; ++k) {
    const double wk = 2.0 * ((k % 2) ? 1.0 : -1.0) * factorial(r) * factorial(r) /
                      (double(k) * k * factorial(r - k) * factorial(r + k));
    w[r + k] = w[r - k] = wk;
    centre -= 2.0 * wk;
  }
  w[r] = centre;
  return w;
}

Eigen::SparseMatrix<cplx> assemble_laplacian(const LandauProblem& prob, LaplacianKind kind) {
  const int n = prob.grid_n;
  const int r = prob.stencil_order / 2;
  const std::vector<double> w = second_derivative_weights(prob.stencil_order);
  const double inv_h2 = double(n) * n;
  const LinkTable links(prob);

  Eigen::VectorXd b_samples;
  if (kind == LaplacianKind::renormalized) b_samples = prob.field.b().sample(n);

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(prob.dimension() * (4 * r + 1));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t row = prob.index(i, j);
      double diag = -2.0 * w[r] * inv_h2;  // both directions
      if (kind == LaplacianKind::renormalized) diag -= prob.p * b_samples(row);
      triplets.emplace_back(row, row, cplx(diag, 0.0));
      for (int direction = 1; direction <= 2; ++direction) {
        for (int k = 1; k <= r; ++k) {
          const auto hop = links.hop(i, j, direction, k);
          const cplx value = -w[r + k] * inv_h2 * hop.factor;
          triplets.emplace_back(row, hop.col, value);
          triplets.emplace_back(hop.col, row, std::conj(value));
        }
      }
    }
  }
  Eigen::SparseMatrix<cplx> h(prob.dimension(), prob.dimension());
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return h;
}

PlaquetteFlux plaquette_flux(const LandauProblem& prob) {
  const int n = prob.grid_n;
  const double h = prob.spacing();
  const LinkTable links(prob);
  PlaquetteFlux out;
  out.flux.resize(prob.dimension());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double flux = prob.p * prob.field.b().integrate_box(double(i) / n, h, double(j) / n, h);
      out.flux(prob.index(i, j)) = flux;
      out.total += flux;
      const cplx loop = links.hop(i, j, 1, 1).factor * links.hop((i + 1) % n, j, 2, 1).factor *
                        std::conj(links.hop(i, (j + 1) % n, 1, 1).factor) *
                        std::conj(links.hop(i, j, 2, 1).factor);
      out.holonomy_mismatch = std::max(out.holonomy_mismatch, std::abs(loop - std::polar(1.0, -flux)));
    }
  }
  return out;
}

LowSpectrum torus_low_spectrum(const LandauProblem& prob, LaplacianKind kind, int count,
                               const TorusSolveOptions& options) {
  const Eigen::SparseMatrix<cplx> h = assemble_laplacian(prob, kind);
  LowSpectrumOptions lo;
  lo.mode = options.mode;
  lo.extra = options.extra;
  lo.tolerance = options.tolerance;
  lo.converge_count = options.converge_count;
  lo.seed = options.seed;
  lo.jobs = options.jobs;
  // The continuum operators satisfy Delta_p >= 0 and Delta^{L^p} >= p b_0;
  // start just below those bounds (the solver lowers the shift if needed).
  const double pb0 = prob.p * prob.field.minimum();
  if (kind == LaplacianKind::bochner)
    lo.shift = pb0 - std::max(1.0, 1e-3 * pb0);
  else
    lo.shift = -std::max(1.0, 0.05 * pb0);
  LowSpectrum spec = low_spectrum(h, count, lo);
  const double hsp = prob.spacing();
  spec.eigenvectors /= hsp;
  spec.cell_area = hsp * hsp;
  return spec;
}

ClusterInfo detect_cluster(const LowSpectrum& spectrum, int p, const TorusField& field) {
  const double threshold = p * field.mu0();
  const int total = spectrum.size();
  int d = 0;
  while (d < total && spectrum.eigenvalues[d] < threshold) ++d;
  if (d == 0) throw NoGapError("no eigenvalue of Delta_p below p * mu_0");
  if (d == total) {
    std::ostringstream msg;
    msg << "all " << total << " computed eigenvalues lie below p * mu_0 = " << threshold
        << "; no gap visible (too few eigenvalues, grid too coarse, or p too small)";
    throw NoGapError(msg.str());
  }
  ClusterInfo info;
  info.dimension = d;
  for (int i = 0; i < d; ++i) info.half_width = std::max(info.half_width, std::abs(spectrum.eigenvalues[i]));
  info.cluster_max = spectrum.eigenvalues[d - 1];
  info.gap_edge = spectrum.eigenvalues[d];
  // The cluster must sit in a window that is small compared to the gap.
  if (info.half_width >= 0.25 * threshold || info.gap_edge - info.cluster_max <= 2.0 * info.half_width) {
    std::ostringstream msg;
    msg << "no clean spectral gap: cluster half-width " << info.half_width << " against p * mu_0 = " << threshold
        << " (grid too coarse or p too small)";
    throw NoGapError(msg.str());
  }
  info.dimension_law = (d == p * field.flux());
  return info;
}

ClusterSpectrum cluster_spectrum(const LandauProblem& prob, const TorusSolveOptions& options) {
  // A few eigenvalues past the expected cluster make the gap visible; only
  // the cluster itself needs to be resolved to full accuracy.
  const int expected = prob.p * prob.field.flux();
  TorusSolveOptions opts = options;
  if (!opts.converge_count) opts.converge_count = expected;
  ClusterSpectrum out;
  out.spectrum = torus_low_spectrum(prob, LaplacianKind::renormalized, expected + 4, opts);
  out.cluster = detect_cluster(out.spectrum, prob.p, prob.field);
  return out;
}

std::vector<double> bochner_low_eigs(const LandauProblem& prob, int j_max, const TorusSolveOptions& options) {
  if (j_max <= 0) return {};
  const LowSpectrum spec = torus_low_spectrum(prob, LaplacianKind::bochner, j_max, options);
  return spec.eigenvalues;
}

}  // namespace toeplitz_wells::torus

#include "toeplitz_wells/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::toeplitz {

namespace {

// Felzenszwalb-Huttenlocher lower envelope of parabolas: d[q] = min_r (q - r)^2 + f[r].
std::vector<double> edt_1d(const std::vector<double>& f) {
  const int n = int(f.size());
  std::vector<double> d(n);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int r) {
    return ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * q - 2.0 * r);
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) s = intersect(q, v[--k]);  // z[0] = -inf stops the loop
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = double(q - v[k]) * (q - v[k]) + f[v[k]];
  }
  return d;
}

// 1-D transform of a periodic line of length n (the line is tripled so every
// node sees its nearest periodic images).
std::vector<double> edt_periodic(const std::vector<double>& f) {
  const int n = int(f.size());
  std::vector<double> tiled(3 * n);
  for (int r = 0; r < 3; ++r) std::copy(f.begin(), f.end(), tiled.begin() + r * n);
  const std::vector<double> d = edt_1d(tiled);
  return std::vector<double>(d.begin() + n, d.begin() + 2 * n);
}

constexpr double far_away = 1e20;

std::size_t nearest_index(const TorusPoint& x, int n) {
  auto wrap = [n](double t) {
    long i = std::lround((t - std::floor(t)) * n);
    return std::size_t(((i % n) + n) % n);
  };
  return wrap(x.x1) + std::size_t(n) * wrap(x.x2);
}

DecayFit fit_decay(const BergmanBasis& basis, const DecayProbe& probe,
                   const std::function<Eigen::VectorXcd(std::size_t)>& column, double diag_max, double trace) {
  DecayFit fit;
  fit.trace = trace;
  std::vector<double> xs, ys;
  const double sqrt_p = std::sqrt(double(basis.p));
  for (const auto& src : probe.sources) {
    const std::size_t s = nearest_index(src, basis.grid_n);
    const TorusPoint xs0 = basis.point(s);
    const Eigen::VectorXcd k = column(s);
    for (Eigen::Index x = 0; x < k.size(); ++x) {
      const double d = torus_distance(basis.point(std::size_t(x)), xs0);
      if (d < probe.d_min || d > probe.d_max) continue;
      const double mag = std::abs(k(x));
      if (!(mag > probe.floor * diag_max)) {
        ++fit.dropped;
        continue;
      }
      xs.push_back(sqrt_p * d);
      ys.push_back(std::log(mag));
    }
  }
  fit.used = int(xs.size());
  if (fit.used < 2) return fit;
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.rate = -slope;
  fit.amplitude = std::exp(my - slope * mx);
  fit.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

BergmanBasis BergmanBasis::from_cluster(const torus::LandauProblem& prob, const torus::ClusterSpectrum& cluster) {
  BergmanBasis b;
  b.p = prob.p;
  b.grid_n = prob.grid_n;
  b.cell_area = prob.cell_area();
  b.sections = cluster.basis();
  b.field_samples = prob.field.b().sample(prob.grid_n);
  return b;
}

double ToeplitzMatrix::hermiticity_defect() const {
  if (entries.size() == 0) return 0.0;
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

ToeplitzMatrix toeplitz_matrix(const Eigen::VectorXd& samples, const BergmanBasis& basis) {
  if (samples.size() != basis.sections.rows())
    throw ShapeError("symbol samples do not match the basis grid");
  ToeplitzMatrix t;
  t.p = basis.p;
  t.symbol_samples = samples;
  const Eigen::VectorXd w = samples * basis.cell_area;
  t.entries = basis.sections.adjoint() * (w.asDiagonal() * basis.sections);
  return t;
}

ToeplitzMatrix toeplitz_matrix(const TrigPoly& f, const BergmanBasis& basis) {
  return toeplitz_matrix(f.sample(basis.grid_n), basis);
}

Eigen::VectorXd poisson_bracket_samples(const TrigPoly& f, const TrigPoly& g, const BergmanBasis& basis) {
  const int n = basis.grid_n;
  const Eigen::VectorXd f1 = f.derivative(1, 0).sample(n), f2 = f.derivative(0, 1).sample(n);
  const Eigen::VectorXd g1 = g.derivative(1, 0).sample(n), g2 = g.derivative(0, 1).sample(n);
  return (f1.cwiseProduct(g2) - f2.cwiseProduct(g1)).cwiseQuotient(basis.field_samples);
}

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

ProductDefect product_defect(const TrigPoly& f, const TrigPoly& g, const BergmanBasis& basis) {
  const auto tf = toeplitz_matrix(f, basis).entries;
  const auto tg = toeplitz_matrix(g, basis).entries;
  const auto tfg = toeplitz_matrix(f * g, basis).entries;
  const auto tpb = toeplitz_matrix(poisson_bracket_samples(f, g, basis), basis).entries;
  ProductDefect out;
  out.norm_fg = operator_norm(tf * tg - tfg);
  const Eigen::MatrixXcd comm = double(basis.p) * (tf * tg - tg * tf);
  const cplx i(0.0, 1.0);
  const double plus = operator_norm(comm - i * tpb);
  const double minus = operator_norm(comm + i * tpb);
  out.chosen_sign = minus < plus ? -1 : 1;
  out.norm_comm = std::min(plus, minus);
  out.norm_comm_other = std::max(plus, minus);
  return out;
}

ToeplitzEigen toeplitz_low_spectrum(const TrigPoly& h, const BergmanBasis& basis, int count) {
  const auto t = toeplitz_matrix(h, basis);
  if (count < 0 || count > basis.dimension()) throw ShapeError("count exceeds dim H_p");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (t.entries + t.entries.adjoint()));
  if (es.info() != Eigen::Success) throw ConvergenceError("dense Toeplitz eigensolver failed");
  ToeplitzEigen out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
  out.coefficients = es.eigenvectors().leftCols(count);
  out.sections = basis.sections * out.coefficients;
  return out;
}

Eigen::VectorXd periodic_squared_edt(const std::vector<bool>& mask, int n) {
  if (int(mask.size()) != n * n) throw ShapeError("mask size does not match the grid");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    return Eigen::VectorXd::Constant(n * n, std::numeric_limits<double>::infinity());
  std::vector<double> g(std::size_t(n) * n);
  std::vector<double> line(n);
  // columns (x2 direction) first
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) line[j] = mask[i + std::size_t(n) * j] ? 0.0 : far_away;
    const auto d = edt_periodic(line);
    for (int j = 0; j < n; ++j) g[i + std::size_t(n) * j] = d[j];
  }
  Eigen::VectorXd out(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) line[i] = g[i + std::size_t(n) * j];
    const auto d = edt_periodic(line);
    for (int i = 0; i < n; ++i) out(i + std::size_t(n) * j) = d[i];
  }
  return out;
}

DistanceField DistanceField::to_points(const std::vector<TorusPoint>& points, int grid_n) {
  DistanceField df;
  df.grid_n_ = grid_n;
  df.values_.resize(std::size_t(grid_n) * grid_n);
  for (int j = 0; j < grid_n; ++j)
    for (int i = 0; i < grid_n; ++i) {
      const TorusPoint x{double(i) / grid_n, double(j) / grid_n};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : points) best = std::min(best, torus_distance(x, y));
      df.values_(i + std::size_t(grid_n) * j) = best;
    }
  return df;
}

DistanceField DistanceField::to_sublevel_set(const TrigPoly& f, double level, int grid_n, int reference_n) {
  const Eigen::VectorXd samples = f.sample(reference_n);
  std::vector<bool> mask(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) mask[i] = samples(i) <= level;
  const Eigen::VectorXd d2 = periodic_squared_edt(mask, reference_n);
  DistanceField df;
  df.grid_n_ = grid_n;
  df.values_.resize(std::size_t(grid_n) * grid_n);
  for (int j = 0; j < grid_n; ++j)
    for (int i = 0; i < grid_n; ++i) {
      const std::size_t r = nearest_index({double(i) / grid_n, double(j) / grid_n}, reference_n);
      df.values_(i + std::size_t(grid_n) * j) = std::sqrt(d2(r)) / reference_n;
    }
  return df;
}

DistanceField zero_set_distance(const TrigPoly& h, int grid_n) {
  const double scale = std::max(1.0, h.sample(128).cwiseAbs().maxCoeff());
  std::vector<TorusPoint> zeros;
  for (const auto& c : find_local_minima(h))
    if (std::abs(c.value) <= 1e-12 * scale) zeros.push_back(c.x);
  if (!zeros.empty()) return DistanceField::to_points(zeros, grid_n);
  return DistanceField::to_sublevel_set(h, 1e-12 * scale, grid_n);
}

LocalizationReport localization_report(const Eigen::VectorXcd& section, const TrigPoly& h, const BergmanBasis& basis,
                                       int eigen_index, const LocalizationParams& params) {
  if (section.size() != basis.sections.rows()) throw ShapeError("section does not live on the basis grid");
  LocalizationReport rep;
  rep.p = basis.p;
  rep.eigen_index = eigen_index;
  const Eigen::VectorXd rho = section.cwiseAbs2() * basis.cell_area;
  rep.norm = rho.sum();
  const Eigen::VectorXd hs = h.sample(basis.grid_n);
  const Eigen::VectorXd d0 = zero_set_distance(h, basis.grid_n).values();
  for (double delta : params.deltas) {
    double m = 0.0;
    for (Eigen::Index x = 0; x < rho.size(); ++x)
      if (d0(x) >= delta) m += rho(x);
    rep.mass_outside[delta] = m;
  }
  for (int k : params.moment_orders) rep.moments[k] = (hs.array().pow(k) * rho.array()).sum();
  const Eigen::VectorXd dh = DistanceField::to_sublevel_set(h, params.h0, basis.grid_n).values();
  const double sqrt_p = std::sqrt(double(basis.p));
  for (double alpha : params.alphas)
    rep.exp_weight[alpha] = ((2.0 * alpha * sqrt_p * dh.array()).exp() * rho.array()).sum();
  return rep;
}

DecayFit offdiag_decay(const BergmanBasis& basis, const DecayProbe& probe) {
  const Eigen::VectorXd diag = basis.sections.rowwise().squaredNorm();
  auto column = [&](std::size_t s) -> Eigen::VectorXcd {
    return basis.sections * basis.sections.row(Eigen::Index(s)).adjoint();
  };
  return fit_decay(basis, probe, column, diag.maxCoeff(), diag.sum() * basis.cell_area);
}

DecayFit offdiag_decay(const ToeplitzMatrix& t, const BergmanBasis& basis, const DecayProbe& probe) {
  if (t.entries.rows() != basis.dimension()) throw ShapeError("Toeplitz matrix does not match the basis");
  const Eigen::MatrixXcd ut = basis.sections * t.entries;
  const Eigen::VectorXd diag = (ut.array() * basis.sections.conjugate().array()).rowwise().sum().abs();
  auto column = [&](std::size_t s) -> Eigen::VectorXcd {
    return ut * basis.sections.row(Eigen::Index(s)).adjoint();
  };
  const double trace = (ut.array() * basis.sections.conjugate().array()).sum().real() * basis.cell_area;
  return fit_decay(basis, probe, column, diag.maxCoeff(), trace);
}

DegenerateWellReport degenerate_well_report(const Eigen::VectorXcd& section, double eigenvalue, const TrigPoly& h,
                                            int k, const std::vector<double>& cs, const BergmanBasis& basis,
                                            double c0) {
  if (k < 1) throw ShapeError("degeneracy order k must be at least 1");
  if (section.size() != basis.sections.rows()) throw ShapeError("section does not live on the basis grid");
  DegenerateWellReport rep;
  rep.p = basis.p;
  rep.k = k;
  rep.eigenvalue = eigenvalue;
  rep.bound = c0 * std::pow(double(basis.p), -2.0 * k / (2.0 * k + 1.0));
  rep.applicable = eigenvalue < rep.bound;
  const Eigen::VectorXd rho = section.cwiseAbs2() * basis.cell_area;
  const Eigen::VectorXd d0 = zero_set_distance(h, basis.grid_n).values();
  const double scale = std::pow(double(basis.p), 1.0 / (2.0 * k + 1.0));
  for (double c : cs) rep.weighted[c] = ((2.0 * c * scale * d0.array()).exp() * rho.array()).sum();
  return rep;
}

}  // namespace toeplitz_wells::toeplitz

#include "toeplitz_wells/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::asymptotics {

namespace {

std::string format_number(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::vector<int> sorted_unique(std::vector<int> p_list) {
  std::sort(p_list.begin(), p_list.end());
  p_list.erase(std::unique(p_list.begin(), p_list.end()), p_list.end());
  for (int p : p_list)
    if (p < 1) throw ConfigError("p_list", "tensor powers must be positive");
  return p_list;
}

int grid_for(const torus::TorusField& field, int p, const SweepOptions& options) {
  return options.grid_override ? *options.grid_override : torus::rule_grid_n(field, p);
}

bool field_is_constant(const torus::TorusField& field) {
  return field.maximum() - field.minimum() <= 1e-12 * field.mean();
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  PowerLawFit fit;
  std::vector<double> xs, ys;
  for (const auto& [p, v] : points) {
    if (!(v > 0.0) || !(p > 0.0) || !std::isfinite(v)) {
      ++fit.rejected;
      continue;
    }
    xs.push_back(std::log(p));
    ys.push_back(std::log(v));
  }
  fit.used = int(xs.size());
  if (fit.used < 3) {
    fit.status = "fewer than 3 positive points (" + std::to_string(fit.used) + " usable)";
    return fit;
  }
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    fit.status = "all points share the same p";
    return fit;
  }
  fit.exponent = sxy / sxx;
  fit.amplitude = std::exp(my - fit.exponent * mx);
  // Constant data fit exactly with slope 0; report r^2 = 1 then.
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (my + fit.exponent * (xs[i] - mx));
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.ok = true;
  return fit;
}

double richardson_gap(double coarse, double fine, int order) {
  return std::abs(coarse - fine) / (std::pow(2.0, order) - 1.0);
}

LinearFit fit_linear(const std::vector<std::pair<double, double>>& points) {
  LinearFit fit;
  if (points.size() < 2) return fit;
  const double n = double(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.offset = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - fit.offset - fit.slope * x;
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.ok = true;
  return fit;
}

bool SweepReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::shared_ptr<const toeplitz::BergmanBasis> compute_basis(const torus::TorusField& field, int p, int grid_n,
                                                            const torus::TorusSolveOptions& options) {
  const torus::LandauProblem prob(field, p, grid_n);
  const torus::ClusterSpectrum cluster = torus::cluster_spectrum(prob, options);
  return std::make_shared<const toeplitz::BergmanBasis>(toeplitz::BergmanBasis::from_cluster(prob, cluster));
}

std::vector<model::QuadraticWell> symbol_wells(const TrigPoly& h, const torus::TorusField& field) {
  const auto minima = find_local_minima(h, 128);
  double scale = 0.0;
  for (const auto& [k, c] : h.coeffs()) scale += std::abs(c);
  std::vector<model::QuadraticWell> wells;
  for (const auto& c : minima)
    if (std::abs(c.value) <= 1e-9 * std::max(scale, 1.0)) wells.push_back(model::toeplitz_well_from_symbol(h, field, c.x));
  return wells;
}

// ---------------------------------------------------------------------------
// Bochner sweep

namespace {

struct BochnerTask {
  int p = 0;
  int grid_n = 0;
  std::vector<double> coarse;
  std::vector<double> fine;
  ClusterRecord cluster;
};

void bochner_verdicts_wells(SweepReport& report, int j_max, const Thresholds& th) {
  // per-j fits of |residual| against p
  bool all_decreasing = true;
  std::string decreasing_detail;
  bool all_in_window = true;
  double worst_rate_distance = 0.0;
  std::ostringstream rates;
  for (int j = 0; j <= j_max; ++j) {
    std::vector<std::pair<double, double>> pts;
    double previous = HUGE_VAL;
    for (const auto& r : report.bochner) {
      if (r.j != j || !r.used_in_fit) continue;
      pts.emplace_back(r.p, std::abs(r.residual));
      if (!(std::abs(r.residual) < previous)) {
        all_decreasing = false;
        decreasing_detail += " j=" + std::to_string(j) + " at p=" + std::to_string(r.p);
      }
      previous = std::abs(r.residual);
    }
    const PowerLawFit fit = fit_power_law(pts);
    report.fits.emplace_back("j=" + std::to_string(j), fit);
    const double rate = -fit.exponent;
    rates << (j ? ", " : "") << "j=" << j << ": " << format_number(rate) << " (r2 " << format_number(fit.r2) << ")";
    if (!fit.ok || rate < th.decay_exponent_low || rate > th.decay_exponent_high) all_in_window = false;
    if (fit.ok) {
      const double dist = std::max({0.0, th.decay_exponent_low - rate, rate - th.decay_exponent_high});
      worst_rate_distance = std::max(worst_rate_distance, dist);
    } else {
      worst_rate_distance = HUGE_VAL;
    }
  }
  report.verdicts.push_back({"residual_decreasing", all_decreasing, all_decreasing ? 0.0 : 1.0, 0.0,
                             all_decreasing ? "|lambda_j - p b0 - mu_j| decreases in p for every j"
                                            : "increase at" + decreasing_detail});
  report.verdicts.push_back({"decay_exponent", all_in_window, worst_rate_distance, th.decay_exponent_low,
                             "decay rates " + rates.str() + "; window [" + format_number(th.decay_exponent_low) +
                                 ", " + format_number(th.decay_exponent_high) + "]"});

  // One-sided bound: C fitted on the smaller half of the p values, then
  // checked on every record with p >= min_fit_p.
  std::vector<int> ps;
  for (const auto& r : report.bochner)
    if (r.p >= th.min_fit_p) ps.push_back(r.p);
  ps = sorted_unique(ps);
  if (!ps.empty()) {
    const int fit_until = ps[(ps.size() - 1) / 2];
    double c = 1e-9;
    for (const auto& r : report.bochner)
      if (r.p >= th.min_fit_p && r.p <= fit_until) c = std::max(c, r.residual * std::sqrt(double(r.p)));
    report.upper_bound_constant = c;
    double worst = -HUGE_VAL;
    for (const auto& r : report.bochner)
      if (r.p >= th.min_fit_p) worst = std::max(worst, r.residual * std::sqrt(double(r.p)) - c);
    const bool ok = worst <= 1e-12 * c + 1e-12;
    report.verdicts.push_back({"upper_bound", ok, worst, 0.0,
                               "C = " + format_number(c) + " fitted on p <= " + std::to_string(fit_until) +
                                   "; max(residual sqrt(p)) - C = " + format_number(worst)});
  } else {
    report.verdicts.push_back({"upper_bound", false, 0.0, 0.0, "no records with p >= min_fit_p"});
  }

  // Discretization error must be small against every residual in the fit range.
  double worst_ratio = 0.0;
  int considered = 0;
  for (const auto& r : report.bochner) {
    if (r.p < th.min_fit_p) continue;
    ++considered;
    worst_ratio = std::max(worst_ratio, r.discretization / std::max(std::abs(r.residual), 1e-300));
  }
  report.verdicts.push_back({"discretization", considered > 0 && worst_ratio < th.discretization_fraction,
                             worst_ratio, th.discretization_fraction,
                             "max Richardson estimate / |residual| = " + format_number(worst_ratio)});
}

void bochner_verdicts_landau(SweepReport& report, const Thresholds& th) {
  double worst = 0.0;
  for (const auto& r : report.bochner) worst = std::max(worst, std::abs(r.residual) / r.reference);
  report.verdicts.push_back({"landau_identity", !report.bochner.empty() && worst <= th.landau_relative, worst,
                             th.landau_relative,
                             "constant field: max |lambda_j - (2k+1) p bbar| / ((2k+1) p bbar) = " +
                                 format_number(worst)});
}

void cluster_verdict(SweepReport& report) {
  if (report.clusters.empty()) return;
  int mismatches = 0;
  std::string detail;
  for (const auto& c : report.clusters) {
    if (!c.found || c.dimension != c.expected) {
      ++mismatches;
      detail += " p=" + std::to_string(c.p) + ": " + (c.found ? "d_p = " + std::to_string(c.dimension) : c.status);
    }
  }
  report.verdicts.push_back({"dimension_law", mismatches == 0, double(mismatches), 0.0,
                             mismatches == 0 ? "d_p = p m for every p" : "violations:" + detail});
}

}  // namespace

SweepReport run_bochner_sweep(const torus::TorusField& field, const std::vector<int>& p_list_in, int j_max,
                              const SweepOptions& options) {
  SweepReport report;
  report.experiment = "bochner-sweep";
  const std::vector<int> p_list = sorted_unique(p_list_in);
  if (p_list.empty() || j_max < 0) return report;

  const int levels = j_max + 1;
  report.landau_identity = field_is_constant(field);
  if (!report.landau_identity) {
    std::vector<model::QuadraticWell> wells;
    for (const auto& c : field.minima()) wells.push_back(model::magnetic_well_from_field(field, c.x));
    if (wells.empty()) throw DegeneracyError("field has no non-degenerate minimum");
    report.model = model::multiwell_spectrum(wells, levels);
  }

  std::vector<BochnerTask> tasks(p_list.size());
  parallel_for(int(p_list.size()), options.jobs, [&](int i) {
    BochnerTask& t = tasks[i];
    t.p = p_list[i];
    t.grid_n = grid_for(field, t.p, options);
    const torus::LandauProblem coarse(field, t.p, t.grid_n, options.stencil_order);
    const torus::LandauProblem fine(field, t.p, 2 * t.grid_n, options.stencil_order);
    t.coarse = torus::bochner_low_eigs(coarse, levels, options.solver);
    t.fine = torus::bochner_low_eigs(fine, levels, options.solver);
    if (options.detect_clusters) {
      t.cluster.p = t.p;
      t.cluster.grid_n = t.grid_n;
      t.cluster.expected = t.p * field.flux();
      try {
        const auto cs = torus::cluster_spectrum(coarse, options.solver);
        t.cluster.found = true;
        t.cluster.dimension = cs.cluster.dimension;
        t.cluster.half_width = cs.cluster.half_width;
        t.cluster.gap_edge = cs.cluster.gap_edge;
      } catch (const NoGapError& e) {
        t.cluster.status = e.what();
      }
    }
  });

  const Thresholds& th = options.thresholds;
  for (const auto& t : tasks) {
    if (options.detect_clusters) report.clusters.push_back(t.cluster);
    const double pb0 = t.p * field.minimum();
    for (int j = 0; j < levels; ++j) {
      BochnerRecord r;
      r.p = t.p;
      r.grid_n = t.grid_n;
      r.j = j;
      r.lambda = t.fine[j];
      r.lambda_coarse = t.coarse[j];
      if (report.landau_identity) {
        const int level = j / (t.p * field.flux());
        r.mu = 2.0 * level * t.p * field.mean();
        r.reference = pb0 + r.mu;
      } else {
        r.mu = report.model.values[j];
        r.reference = pb0 + r.mu;
      }
      r.residual = r.lambda - r.reference;
      r.discretization = richardson_gap(r.lambda_coarse, r.lambda);
      r.used_in_fit = !report.landau_identity && r.p >= th.min_fit_p &&
                      r.discretization < th.discretization_fraction * std::abs(r.residual);
      report.bochner.push_back(r);
    }
  }

  if (report.landau_identity)
    bochner_verdicts_landau(report, th);
  else
    bochner_verdicts_wells(report, j_max, th);
  cluster_verdict(report);
  return report;
}

// ---------------------------------------------------------------------------
// Toeplitz sweep

SweepReport run_toeplitz_sweep(const torus::TorusField& field, const TrigPoly& h, const std::vector<int>& p_list_in,
                               int m_max, const SweepOptions& options) {
  SweepReport report;
  report.experiment = "toeplitz-sweep";
  const std::vector<int> p_list = sorted_unique(p_list_in);
  if (p_list.empty() || m_max < 0) return report;
  const int levels = m_max + 1;
  const Thresholds& th = options.thresholds;

  std::vector<model::QuadraticWell> wells = symbol_wells(h, field);
  if (!wells.empty()) report.model = model::multiwell_spectrum(wells, levels);

  struct Task {
    ClusterRecord cluster;
    std::vector<double> values;
  };
  std::vector<Task> tasks(p_list.size());
  parallel_for(int(p_list.size()), options.jobs, [&](int i) {
    Task& t = tasks[i];
    const int p = p_list[i];
    const int grid_n = grid_for(field, p, options);
    t.cluster.p = p;
    t.cluster.grid_n = grid_n;
    t.cluster.expected = p * field.flux();
    std::shared_ptr<const toeplitz::BergmanBasis> basis;
    try {
      basis = options.basis_provider ? options.basis_provider(field, p, grid_n)
                                     : compute_basis(field, p, grid_n, options.solver);
    } catch (const NoGapError& e) {
      t.cluster.status = e.what();
      return;
    }
    t.cluster.found = true;
    t.cluster.dimension = basis->dimension();
    const int count = std::min(levels, basis->dimension());
    t.values = toeplitz::toeplitz_low_spectrum(h, *basis, count).values;
  });

  for (const auto& t : tasks) {
    report.clusters.push_back(t.cluster);
    for (int m = 0; m < int(t.values.size()); ++m) {
      ToeplitzRecord r;
      r.p = t.cluster.p;
      r.grid_n = t.cluster.grid_n;
      r.m = m;
      r.lambda = t.values[m];
      r.p_lambda = r.p * r.lambda;
      r.mu = m < report.model.size() ? report.model.values[m] : std::nan("");
      r.gap_to_model = r.p_lambda - r.mu;
      report.toeplitz.push_back(r);
    }
  }
  cluster_verdict(report);

  if (report.model.size() == 0) {
    report.verdicts.push_back({"model", false, 0.0, 0.0, "symbol has no non-degenerate zero; nothing to compare"});
    return report;
  }

  // records of level m with p >= min_fit_p, ordered by p
  auto level = [&](int m) {
    std::vector<ToeplitzRecord> out;
    for (const auto& r : report.toeplitz)
      if (r.m == m && r.p >= th.min_fit_p) out.push_back(r);
    return out;
  };
  const auto ground = level(0);
  const double mu0 = report.model.values[0];

  // convergence of p lambda_p^0: successive changes shrink
  {
    bool ok = ground.size() >= 3;
    double last_change = HUGE_VAL;
    double ratio = 0.0;
    for (std::size_t i = 1; i < ground.size(); ++i) {
      const double change = std::abs(ground[i].p_lambda - ground[i - 1].p_lambda);
      if (!(change < last_change)) ok = false;
      if (i > 1) ratio = std::max(ratio, change / last_change);
      last_change = change;
    }
    report.verdicts.push_back({"converges", ok, ratio, 1.0,
                               ground.size() < 3 ? "need at least 3 values of p >= min_fit_p"
                                                 : "max ratio of successive changes of p lambda_p^0 = " +
                                                       format_number(ratio)});
  }

  // limit: p lambda_p^0 - mu_0 = offset + phi p^{-1/2}
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : ground) pts.emplace_back(1.0 / std::sqrt(double(r.p)), r.gap_to_model);
    const LinearFit fit = fit_linear(pts);
    report.remainder_fit = fit;
    const double rel = std::abs(fit.offset) / std::abs(mu0);
    report.verdicts.push_back({"limit", fit.ok && rel <= th.limit_relative, rel, th.limit_relative,
                               "fitted limit " + format_number(mu0 + fit.offset) + " vs mu_0 = " +
                                   format_number(mu0) + " (constant offset " + format_number(fit.offset) +
                                   ", p^{-1/2} coefficient " + format_number(fit.slope) + ")"});
  }

  // drift exponent of |p lambda_p^0 - mu_0|
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : ground) pts.emplace_back(r.p, std::abs(r.gap_to_model));
    const PowerLawFit fit = fit_power_law(pts);
    report.fits.emplace_back("m=0 drift", fit);
    report.verdicts.push_back({"drift_exponent", fit.ok && fit.exponent <= th.drift_exponent_max, fit.exponent,
                               th.drift_exponent_max,
                               fit.ok ? "|p lambda_p^0 - mu_0| ~ p^" + format_number(fit.exponent) : fit.status});
  }

  // level spacing at the largest p against the model spacing
  {
    const int p_max = p_list.back();
    std::map<int, double> at_pmax;
    for (const auto& r : report.toeplitz)
      if (r.p == p_max) at_pmax[r.m] = r.p_lambda;
    double worst = 0.0;
    int compared = 0;
    std::ostringstream detail;
    for (int m = 1; m < levels && m < report.model.size(); ++m) {
      const double model_gap = report.model.values[m] - mu0;
      if (!at_pmax.count(m) || !at_pmax.count(0) || model_gap <= 1e-9 * std::abs(mu0)) continue;
      const double ratio = (at_pmax[m] - at_pmax[0]) / model_gap;
      worst = std::max(worst, std::abs(ratio - 1.0));
      detail << (compared ? ", " : "") << "m=" << m << ": " << format_number((at_pmax[m] - at_pmax[0]) / m);
      ++compared;
    }
    if (compared > 0)
      report.verdicts.push_back({"spacing", worst <= th.spacing_relative, worst, th.spacing_relative,
                                 "mean spacing at p=" + std::to_string(p_max) + " " + detail.str()});
  }

  // multiplicity pattern: model-degenerate pairs must be split by less than
  // p^{-2}, model-separated pairs by more
  {
    int mismatches = 0;
    std::string detail;
    for (int p : p_list) {
      std::map<int, double> vals;
      for (const auto& r : report.toeplitz)
        if (r.p == p) vals[r.m] = r.lambda;
      for (int m = 0; m + 1 < int(vals.size()) && m + 1 < report.model.size(); ++m) {
        const bool model_degenerate =
            std::abs(report.model.values[m + 1] - report.model.values[m]) <= 1e-9 * std::abs(mu0);
        const bool measured_degenerate = std::abs(vals[m + 1] - vals[m]) < 1.0 / (double(p) * p);
        if (model_degenerate != measured_degenerate) {
          ++mismatches;
          detail += " p=" + std::to_string(p) + " m=" + std::to_string(m);
        }
      }
    }
    report.verdicts.push_back({"multiplicity", mismatches == 0, double(mismatches), 0.0,
                               mismatches == 0 ? "degeneracy pattern matches the direct-sum model"
                                               : "mismatch at" + detail});
  }
  return report;
}

}  // namespace toeplitz_wells::asymptotics

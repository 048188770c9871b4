#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <map>
#include <memory>
#include <sstream>

#include "toeplitz_wells/csv.hpp"
#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::cli {

namespace {

using asymptotics::Verdict;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(8);
  s << v;
  return s.str();
}

int grid_for(const ExperimentConfig& cfg, const torus::TorusField& field, int p) {
  return cfg.grid_override ? *cfg.grid_override : torus::rule_grid_n(field, p);
}

torus::LandauProblem make_problem(const ExperimentConfig& cfg, const torus::TorusField& field, int p) {
  return torus::LandauProblem(field, p, grid_for(cfg, field, p), cfg.stencil_order);
}

struct BasisBundle {
  int p = 0;
  int grid_n = 0;
  torus::ClusterInfo cluster;
  std::shared_ptr<const toeplitz::BergmanBasis> basis;
};

/// Bergman bases for every p (in parallel over p).
std::vector<BasisBundle> compute_bases(const ExperimentConfig& cfg, const torus::TorusField& field, int jobs) {
  std::vector<BasisBundle> out(cfg.p_list.size());
  asymptotics::parallel_for(int(cfg.p_list.size()), jobs, [&](int i) {
    const auto prob = make_problem(cfg, field, cfg.p_list[i]);
    const auto cs = torus::cluster_spectrum(prob, cfg.solver);
    out[i].p = prob.p;
    out[i].grid_n = prob.grid_n;
    out[i].cluster = cs.cluster;
    out[i].basis = std::make_shared<const toeplitz::BergmanBasis>(toeplitz::BergmanBasis::from_cluster(prob, cs));
  });
  return out;
}

json cluster_json(const BasisBundle& b, int flux) {
  return {{"p", b.p},
          {"grid_n", b.grid_n},
          {"dimension", b.cluster.dimension},
          {"expected_dimension", b.p * flux},
          {"half_width", b.cluster.half_width},
          {"gap_edge", b.cluster.gap_edge}};
}

Verdict dimension_verdict(const std::vector<std::pair<int, int>>& p_and_d, int flux) {
  int bad = 0;
  std::string detail;
  for (const auto& [p, d] : p_and_d) {
    if (d != p * flux) {
      ++bad;
      detail += " p=" + std::to_string(p) + " d_p=" + std::to_string(d);
    }
  }
  return {"dimension_law", bad == 0, double(bad), 0.0, bad == 0 ? "d_p = p m for every p" : "violations:" + detail};
}

std::string write_table(const std::vector<std::string>& header,
                        const std::function<void(CsvWriter&)>& rows) {
  std::ostringstream s;
  CsvWriter w(s, header);
  rows(w);
  return s.str();
}

std::string model_csv(const model::ModelSpectrum& spec) {
  std::ostringstream s;
  model::write_model_spectrum_csv(s, spec);
  return s.str();
}

json model_json(const model::ModelSpectrum& spec) {
  return {{"values", spec.values},
          {"well_label", spec.well_label},
          {"exact", spec.exact},
          {"converged", spec.converged},
          {"status", spec.status}};
}

json fit_json(const asymptotics::PowerLawFit& f) {
  return {{"amplitude", f.amplitude}, {"exponent", f.exponent}, {"r2", f.r2},
          {"used", f.used},           {"rejected", f.rejected}, {"ok", f.ok}, {"status", f.status}};
}

std::string fits_csv(const std::vector<std::pair<std::string, asymptotics::PowerLawFit>>& fits) {
  return write_table({"label", "amplitude", "exponent", "r2", "used", "status"}, [&](CsvWriter& w) {
    for (const auto& [label, f] : fits) {
      w.field(label).field(f.amplitude).field(f.exponent).field(f.r2).field(f.used).field(f.status);
      w.end_row();
    }
  });
}

std::string clusters_csv(const std::vector<asymptotics::ClusterRecord>& clusters) {
  return write_table({"p", "grid_n", "found", "dimension", "expected", "half_width", "gap_edge", "status"},
                     [&](CsvWriter& w) {
                       for (const auto& c : clusters) {
                         w.field(c.p).field(c.grid_n).field(c.found).field(c.dimension).field(c.expected);
                         w.field(c.half_width).field(c.gap_edge).field(c.status);
                         w.end_row();
                       }
                     });
}

json sweep_json(const asymptotics::SweepReport& r) {
  json out;
  out["landau_identity"] = r.landau_identity;
  if (r.model.size() > 0) out["model"] = model_json(r.model);
  json fits = json::object();
  for (const auto& [label, f] : r.fits) fits[label] = fit_json(f);
  out["fits"] = fits;
  if (r.upper_bound_constant) out["upper_bound_constant"] = *r.upper_bound_constant;
  if (r.remainder_fit)
    out["remainder_fit"] = {{"offset", r.remainder_fit->offset},
                            {"p_minus_half_coefficient", r.remainder_fit->slope},
                            {"r2", r.remainder_fit->r2}};
  json clusters = json::array();
  for (const auto& c : r.clusters)
    clusters.push_back({{"p", c.p},
                        {"grid_n", c.grid_n},
                        {"found", c.found},
                        {"dimension", c.dimension},
                        {"expected", c.expected},
                        {"half_width", c.half_width},
                        {"gap_edge", c.gap_edge},
                        {"status", c.status}});
  out["clusters"] = clusters;
  return out;
}

std::string toeplitz_records_csv(const std::vector<asymptotics::ToeplitzRecord>& records) {
  return write_table({"p", "m", "lambda", "p_times_lambda", "model_mu", "gap_to_model"}, [&](CsvWriter& w) {
    for (const auto& r : records) {
      w.field(r.p).field(r.m).field(r.lambda).field(r.p_lambda).field(r.mu).field(r.gap_to_model);
      w.end_row();
    }
  });
}

// ---------------------------------------------------------------------------

RunResult run_model_spectrum(const ExperimentConfig& cfg) {
  RunResult out;
  const bool want_exact = cfg.route != "truncated";
  const bool want_truncated = cfg.route != "exact";
  std::optional<model::ModelSpectrum> exact, truncated;
  if (want_exact) {
    exact = model::multiwell_spectrum(cfg.wells, cfg.levels);
    out.results["exact"] = model_json(*exact);
    out.tables.push_back({"model_spectrum.csv", "modelwell", "multiwell_spectrum", model_csv(*exact)});
  }
  if (want_truncated) {
    std::vector<model::ModelSpectrum> per_well;
    for (const auto& w : cfg.wells)
      per_well.push_back(model::well_spectrum_truncated(w, fock::FockTruncation(w.n, cfg.max_degree, w.a), cfg.levels));
    truncated = model::merge_well_spectra(per_well, cfg.levels);
    out.results["truncated"] = model_json(*truncated);
    out.tables.push_back({want_exact ? "model_spectrum_truncated.csv" : "model_spectrum.csv", "modelwell",
                          "well_spectrum_truncated", model_csv(*truncated)});
    out.verdicts.push_back({"truncation_converged", truncated->converged, truncated->converged ? 0.0 : 1.0, 0.0,
                            truncated->status});
  }
  if (exact && truncated) {
    double worst = 0.0;
    for (int i = 0; i < std::min(exact->size(), truncated->size()); ++i)
      worst = std::max(worst, std::abs(exact->values[i] - truncated->values[i]));
    out.verdicts.push_back({"exact_vs_truncated", worst <= cfg.extra.model_agreement, worst, cfg.extra.model_agreement,
                            "max |exact - truncated| = " + fmt(worst)});
  }
  const model::ModelSpectrum& shown = exact ? *exact : *truncated;
  std::ostringstream line;
  line << "mu:";
  for (double v : shown.values) line << ' ' << fmt(v);
  out.summary.push_back(line.str());
  return out;
}

RunResult run_landau_levels(const ExperimentConfig& cfg, const torus::TorusField& field, const RunOptions& opt) {
  RunResult out;
  const int m = field.flux();
  const bool constant = field.maximum() - field.minimum() <= 1e-12 * field.mean();

  struct PerP {
    int p = 0, grid_n = 0;
    LowSpectrum bochner;
    torus::ClusterSpectrum cluster;
    torus::PlaquetteFlux flux;
  };
  std::vector<PerP> runs(cfg.p_list.size());
  asymptotics::parallel_for(int(cfg.p_list.size()), opt.jobs, [&](int i) {
    const auto prob = make_problem(cfg, field, cfg.p_list[i]);
    PerP& r = runs[i];
    r.p = prob.p;
    r.grid_n = prob.grid_n;
    r.bochner = torus::torus_low_spectrum(prob, torus::LaplacianKind::bochner, cfg.levels * prob.p * m, cfg.solver);
    r.cluster = torus::cluster_spectrum(prob, cfg.solver);
    r.flux = torus::plaquette_flux(prob);
  });

  json per_p = json::array();
  std::vector<std::pair<int, int>> dims;
  double worst_landau = 0.0, worst_excited = 0.0, worst_flux = 0.0;
  bool have_excited = false;
  std::ostringstream eig_csv;
  CsvWriter eig(eig_csv, {"p", "grid_n", "j", "lambda_bochner", "lambda_renormalized", "residual"});
  for (const auto& r : runs) {
    dims.emplace_back(r.p, r.cluster.cluster.dimension);
    const double pb = r.p * field.mean();
    const int d = r.p * m;
    const int rows = std::max(r.bochner.size(), r.cluster.spectrum.size());
    for (int j = 0; j < rows; ++j) {
      eig.field(r.p).field(r.grid_n).field(j);
      if (j < r.bochner.size())
        eig.field(r.bochner.eigenvalues[j]);
      else
        eig.field(std::string());
      if (j < r.cluster.spectrum.size())
        eig.field(r.cluster.spectrum.eigenvalues[j]);
      else
        eig.field(std::string());
      if (j < r.bochner.size())
        eig.field(r.bochner.residuals[j]);
      else
        eig.field(r.cluster.spectrum.residuals[j]);
      eig.end_row();
    }
    if (constant) {
      for (int j = 0; j < std::min(d, r.bochner.size()); ++j)
        worst_landau = std::max(worst_landau, std::abs(r.bochner.eigenvalues[j] - pb) / pb);
      for (int j = d; j < std::min(2 * d, r.bochner.size()); ++j) {
        have_excited = true;
        worst_excited = std::max(worst_excited, std::abs(r.bochner.eigenvalues[j] - 3.0 * pb) / (3.0 * pb));
      }
    }
    worst_flux = std::max(worst_flux, std::abs(r.flux.total - 2.0 * std::numbers::pi * r.p * m));
    per_p.push_back({{"p", r.p},
                     {"grid_n", r.grid_n},
                     {"lambda_bochner", r.bochner.eigenvalues},
                     {"bochner_converged", r.bochner.converged},
                     {"lambda_renormalized", r.cluster.spectrum.eigenvalues},
                     {"cluster_dimension", r.cluster.cluster.dimension},
                     {"expected_dimension", d},
                     {"cluster_half_width", r.cluster.cluster.half_width},
                     {"gap_edge", r.cluster.cluster.gap_edge},
                     {"gap_ratio", r.cluster.cluster.gap_edge / (r.p * field.mu0())},
                     {"orthonormality_defect", r.bochner.orthonormality_defect()},
                     {"flux_total", r.flux.total},
                     {"holonomy_mismatch", r.flux.holonomy_mismatch}});
    out.summary.push_back("p=" + std::to_string(r.p) + " grid=" + std::to_string(r.grid_n) +
                          " lambda_0=" + fmt(r.bochner.eigenvalues.front()) +
                          " d_p=" + std::to_string(r.cluster.cluster.dimension) +
                          " gap_edge=" + fmt(r.cluster.cluster.gap_edge));
    for (int mode : cfg.dump_eigenvectors) {
      if (mode >= r.bochner.size()) continue;
      std::ostringstream s;
      CsvWriter w(s, {"ix", "iy", "re", "im"});
      for (int iy = 0; iy < r.grid_n; ++iy)
        for (int ix = 0; ix < r.grid_n; ++ix) {
          const cplx v = r.bochner.eigenvectors(ix + r.grid_n * iy, mode);
          w.field(ix).field(iy).field(v.real()).field(v.imag());
          w.end_row();
        }
      out.tables.push_back({"eigenvector_p" + std::to_string(r.p) + "_j" + std::to_string(mode) + ".csv",
                            "magnetic-torus", "low_spectrum", s.str()});
    }
  }
  out.results["runs"] = per_p;
  out.results["field"] = {{"mean", field.mean()}, {"minimum", field.minimum()}, {"constant", constant}};
  out.tables.insert(out.tables.begin(), {"eigenvalues.csv", "magnetic-torus", "low_spectrum", eig_csv.str()});
  out.verdicts.push_back(dimension_verdict(dims, m));
  out.verdicts.push_back({"flux_quantization", worst_flux <= 1e-8, worst_flux, 1e-8,
                          "max |sum of plaquette fluxes - 2 pi p m| = " + fmt(worst_flux)});
  if (constant) {
    out.verdicts.push_back({"landau_oracle", worst_landau <= cfg.thresholds.landau_relative, worst_landau,
                            cfg.thresholds.landau_relative, "lowest p m eigenvalues vs 2 pi m p, max relative error"});
    if (have_excited)
      out.verdicts.push_back({"first_excited_level", worst_excited <= cfg.extra.excited_relative, worst_excited,
                              cfg.extra.excited_relative, "next p m eigenvalues vs 3 * 2 pi m p"});
  }
  return out;
}

RunResult run_sweep(const ExperimentConfig& cfg, const torus::TorusField& field, const RunOptions& opt) {
  RunResult out;
  asymptotics::SweepOptions so;
  so.thresholds = cfg.thresholds;
  so.solver = cfg.solver;
  so.grid_override = cfg.grid_override;
  so.stencil_order = cfg.stencil_order;
  so.jobs = opt.jobs;
  asymptotics::SweepReport rep;
  if (cfg.kind == ExperimentKind::bochner_sweep) {
    rep = asymptotics::run_bochner_sweep(field, cfg.p_list, cfg.levels - 1, so);
    out.tables.push_back(
        {"bochner_sweep.csv", "asymptotics", "run_bochner_sweep",
         write_table({"p", "grid_n", "j", "lambda", "lambda_coarse", "reference", "mu", "residual", "discretization",
                      "used_in_fit"},
                     [&](CsvWriter& w) {
                       for (const auto& r : rep.bochner) {
                         w.field(r.p).field(r.grid_n).field(r.j).field(r.lambda).field(r.lambda_coarse);
                         w.field(r.reference).field(r.mu).field(r.residual).field(r.discretization);
                         w.field(r.used_in_fit);
                         w.end_row();
                       }
                     })});
    for (const auto& r : rep.bochner)
      out.summary.push_back("p=" + std::to_string(r.p) + " j=" + std::to_string(r.j) + " lambda-pb0=" +
                            fmt(r.lambda - r.p * field.minimum()) + " mu=" + fmt(r.mu) +
                            " residual=" + fmt(r.residual));
  } else {
    rep = asymptotics::run_toeplitz_sweep(field, cfg.h.poly, cfg.p_list, cfg.levels - 1, so);
    out.tables.push_back(
        {"toeplitz_spectrum.csv", "asymptotics", "run_toeplitz_sweep", toeplitz_records_csv(rep.toeplitz)});
    for (const auto& r : rep.toeplitz)
      out.summary.push_back("p=" + std::to_string(r.p) + " m=" + std::to_string(r.m) + " p*lambda=" +
                            fmt(r.p_lambda) + " mu=" + fmt(r.mu));
  }
  out.tables.push_back({"fits.csv", "asymptotics", "fit_power_law", fits_csv(rep.fits)});
  out.tables.push_back({"clusters.csv", "magnetic-torus", "detect_cluster", clusters_csv(rep.clusters)});
  out.results = sweep_json(rep);
  out.verdicts = rep.verdicts;
  return out;
}

RunResult run_toeplitz_spectrum(const ExperimentConfig& cfg, const torus::TorusField& field, const RunOptions& opt) {
  RunResult out;
  const TrigPoly& h = cfg.h.poly;
  std::optional<model::ModelSpectrum> model_spec;
  try {
    const auto wells = asymptotics::symbol_wells(h, field);
    if (!wells.empty()) model_spec = model::multiwell_spectrum(wells, cfg.levels);
  } catch (const DegeneracyError& e) {
    out.results["model_status"] = e.what();
  }
  const auto bases = compute_bases(cfg, field, opt.jobs);
  const Eigen::VectorXd fine = h.sample(256);
  const double hmin = fine.minCoeff(), hmax = fine.maxCoeff();

  std::vector<asymptotics::ToeplitzRecord> records;
  std::vector<std::pair<int, int>> dims;
  double worst_herm = 0.0, worst_range = 0.0;
  json clusters = json::array();
  for (const auto& b : bases) {
    dims.emplace_back(b.p, b.cluster.dimension);
    clusters.push_back(cluster_json(b, field.flux()));
    const auto t = toeplitz::toeplitz_matrix(h, *b.basis);
    worst_herm = std::max(worst_herm, t.hermiticity_defect());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (t.entries + t.entries.adjoint()),
                                                             Eigen::EigenvaluesOnly);
    worst_range = std::max({worst_range, hmin - es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff() - hmax});
    const int count = std::min(cfg.levels, b.basis->dimension());
    for (int mm = 0; mm < count; ++mm) {
      asymptotics::ToeplitzRecord r;
      r.p = b.p;
      r.grid_n = b.grid_n;
      r.m = mm;
      r.lambda = es.eigenvalues()(mm);
      r.p_lambda = r.p * r.lambda;
      r.mu = model_spec && mm < model_spec->size() ? model_spec->values[mm] : std::nan("");
      r.gap_to_model = r.p_lambda - r.mu;
      records.push_back(r);
      out.summary.push_back("p=" + std::to_string(r.p) + " m=" + std::to_string(mm) + " lambda=" + fmt(r.lambda) +
                            " p*lambda=" + fmt(r.p_lambda));
    }
  }
  out.tables.push_back({"toeplitz_spectrum.csv", "toeplitz", "toeplitz_low_spectrum", toeplitz_records_csv(records)});
  out.results["clusters"] = clusters;
  if (model_spec) out.results["model"] = model_json(*model_spec);
  out.results["hermiticity_defect"] = worst_herm;
  out.verdicts.push_back(dimension_verdict(dims, field.flux()));
  out.verdicts.push_back({"hermitian", worst_herm <= 1e-10, worst_herm, 1e-10, "max |T - T^*|"});
  out.verdicts.push_back({"spectrum_in_symbol_range", worst_range <= 0.1, std::max(worst_range, 0.0), 0.1,
                          "spectrum within [min h - 0.1, max h + 0.1]"});
  return out;
}

RunResult run_localization(const ExperimentConfig& cfg, const torus::TorusField& field, const RunOptions& opt) {
  RunResult out;
  const TrigPoly& h = cfg.h.poly;
  toeplitz::LocalizationParams params = cfg.localization;
  if (std::find(params.deltas.begin(), params.deltas.end(), cfg.extra.mass_delta) == params.deltas.end())
    params.deltas.push_back(cfg.extra.mass_delta);
  if (std::find(params.moment_orders.begin(), params.moment_orders.end(), 1) == params.moment_orders.end())
    params.moment_orders.push_back(1);

  const auto bases = compute_bases(cfg, field, opt.jobs);
  std::vector<std::pair<int, int>> dims;
  std::vector<toeplitz::LocalizationReport> reports(bases.size());
  std::vector<toeplitz::DegenerateWellReport> degenerate(bases.size());
  asymptotics::parallel_for(int(bases.size()), opt.jobs, [&](int i) {
    const auto& b = *bases[i].basis;
    if (cfg.eigen_index >= b.dimension()) throw ShapeError("eigen_index exceeds the dimension of H_p");
    const auto eig = toeplitz::toeplitz_low_spectrum(h, b, cfg.eigen_index + 1);
    const Eigen::VectorXcd u = eig.sections.col(cfg.eigen_index);
    reports[i] = toeplitz::localization_report(u, h, b, cfg.eigen_index, params);
    if (cfg.degenerate.enabled)
      degenerate[i] = toeplitz::degenerate_well_report(u, eig.values[cfg.eigen_index], h, cfg.degenerate.k,
                                                       cfg.degenerate.cs, b, cfg.degenerate.c0);
  });

  std::ostringstream loc_csv;
  CsvWriter w(loc_csv, {"p", "delta", "mass_outside", "k", "moment", "alpha", "exp_integral"});
  json per_p = json::array();
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto& r = reports[i];
    dims.emplace_back(bases[i].p, bases[i].cluster.dimension);
    const std::string blank;
    for (const auto& [delta, mass] : r.mass_outside) {
      w.field(r.p).field(delta).field(mass).field(blank).field(blank).field(blank).field(blank);
      w.end_row();
    }
    for (const auto& [k, moment] : r.moments) {
      w.field(r.p).field(blank).field(blank).field(k).field(moment).field(blank).field(blank);
      w.end_row();
    }
    for (const auto& [alpha, integral] : r.exp_weight) {
      w.field(r.p).field(blank).field(blank).field(blank).field(blank).field(alpha).field(integral);
      w.end_row();
    }
    json mass = json::array(), moments = json::array(), weights = json::array();
    for (const auto& [delta, v] : r.mass_outside) mass.push_back({{"delta", delta}, {"mass_outside", v}});
    for (const auto& [k, v] : r.moments) moments.push_back({{"k", k}, {"moment", v}});
    for (const auto& [a, v] : r.exp_weight) weights.push_back({{"alpha", a}, {"integral", v}});
    json entry = {{"p", r.p},        {"grid_n", bases[i].grid_n}, {"norm", r.norm},
                  {"mass_outside", mass}, {"moments", moments}, {"exp_weight", weights}};
    if (cfg.degenerate.enabled) {
      const auto& d = degenerate[i];
      json weighted = json::array();
      for (const auto& [c, v] : d.weighted) weighted.push_back({{"c", c}, {"integral", v}});
      entry["degenerate"] = {{"k", d.k}, {"eigenvalue", d.eigenvalue}, {"bound", d.bound},
                             {"applicable", d.applicable}, {"weighted", weighted}};
    }
    per_p.push_back(entry);
    out.summary.push_back("p=" + std::to_string(r.p) + " mass_outside(" + fmt(cfg.extra.mass_delta) +
                          ")=" + fmt(r.mass_outside.at(cfg.extra.mass_delta)) + " (u,hu)=" + fmt(r.moments.at(1)));
  }
  out.results["runs"] = per_p;
  out.tables.push_back({"localization.csv", "toeplitz", "localization_report", loc_csv.str()});
  out.verdicts.push_back(dimension_verdict(dims, field.flux()));

  if (!reports.empty()) {
    const auto& last = reports.back();
    const double bound = std::pow(double(last.p), -cfg.extra.mass_power);
    const double mass = last.mass_outside.at(cfg.extra.mass_delta);
    out.verdicts.push_back({"mass_outside", mass <= bound, mass, bound,
                            "mass outside V_" + fmt(cfg.extra.mass_delta) + " at p=" + std::to_string(last.p)});
  }
  if (reports.size() >= 3) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : reports) pts.emplace_back(r.p, r.moments.at(1));
    const auto fit = asymptotics::fit_power_law(pts);
    out.results["moment_fit"] = fit_json(fit);
    const bool ok = fit.ok && std::abs(fit.exponent - cfg.extra.moment_slope) <= cfg.extra.moment_slope_tolerance;
    out.verdicts.push_back({"moment_slope", ok, fit.exponent, cfg.extra.moment_slope,
                            "slope of (u, h u) vs p, window +-" + fmt(cfg.extra.moment_slope_tolerance)});
  }
  if (cfg.degenerate.enabled) {
    std::ostringstream s;
    CsvWriter dw(s, {"p", "k", "eigenvalue", "bound", "applicable", "c", "weighted"});
    bool applicable = true;
    double worst_ratio = 1.0;
    std::map<double, std::pair<double, double>> range;  // c -> (min, max)
    for (const auto& d : degenerate) {
      applicable = applicable && d.applicable;
      for (const auto& [c, v] : d.weighted) {
        dw.field(d.p).field(d.k).field(d.eigenvalue).field(d.bound).field(d.applicable).field(c).field(v);
        dw.end_row();
        auto it = range.find(c);
        if (it == range.end())
          range[c] = {v, v};
        else
          it->second = {std::min(it->second.first, v), std::max(it->second.second, v)};
      }
    }
    for (const auto& [c, mm] : range) worst_ratio = std::max(worst_ratio, mm.second / mm.first);
    out.tables.push_back({"degenerate.csv", "toeplitz", "degenerate_well_report", s.str()});
    out.verdicts.push_back({"degenerate_precondition", applicable, applicable ? 0.0 : 1.0, 0.0,
                            "lambda_p < c0 p^{-2k/(2k+1)} at every p"});
    if (degenerate.size() >= 2)
      out.verdicts.push_back({"degenerate_bounded", worst_ratio <= cfg.extra.degenerate_ratio_max, worst_ratio,
                              cfg.extra.degenerate_ratio_max, "max over c of (max/min over p) of the weighted mass"});
  }
  return out;
}

RunResult run_algebra_defects(const ExperimentConfig& cfg, const torus::TorusField& field, const RunOptions& opt) {
  RunResult out;
  const auto bases = compute_bases(cfg, field, opt.jobs);
  std::vector<toeplitz::ProductDefect> defects(bases.size());
  asymptotics::parallel_for(int(bases.size()), opt.jobs, [&](int i) {
    defects[i] = toeplitz::product_defect(cfg.f.poly, cfg.g.poly, *bases[i].basis);
  });
  std::vector<std::pair<int, int>> dims;
  std::vector<std::pair<double, double>> fg_pts, comm_pts;
  json per_p = json::array();
  const std::string table = write_table({"p", "norm_fg", "norm_comm", "chosen_sign"}, [&](CsvWriter& w) {
    for (std::size_t i = 0; i < bases.size(); ++i) {
      const auto& d = defects[i];
      w.field(bases[i].p).field(d.norm_fg).field(d.norm_comm).field(d.chosen_sign);
      w.end_row();
    }
  });
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto& d = defects[i];
    dims.emplace_back(bases[i].p, bases[i].cluster.dimension);
    fg_pts.emplace_back(bases[i].p, d.norm_fg);
    comm_pts.emplace_back(bases[i].p, d.norm_comm);
    per_p.push_back({{"p", bases[i].p},
                     {"grid_n", bases[i].grid_n},
                     {"norm_fg", d.norm_fg},
                     {"norm_comm", d.norm_comm},
                     {"chosen_sign", d.chosen_sign},
                     {"norm_comm_other_sign", d.norm_comm_other}});
    out.summary.push_back("p=" + std::to_string(bases[i].p) + " norm_fg=" + fmt(d.norm_fg) +
                          " norm_comm=" + fmt(d.norm_comm) + " sign=" + std::to_string(d.chosen_sign));
  }
  out.results["runs"] = per_p;
  out.tables.push_back({"defects.csv", "toeplitz", "product_defect", table});
  out.verdicts.push_back(dimension_verdict(dims, field.flux()));
  if (bases.size() >= 3) {
    const auto fg = asymptotics::fit_power_law(fg_pts);
    const auto comm = asymptotics::fit_power_law(comm_pts);
    out.results["fit_fg"] = fit_json(fg);
    out.results["fit_comm"] = fit_json(comm);
    out.verdicts.push_back({"product_slope",
                            fg.ok && std::abs(fg.exponent - cfg.extra.fg_slope) <= cfg.extra.fg_slope_tolerance,
                            fg.exponent, cfg.extra.fg_slope,
                            "log-log slope of ||T_f T_g - T_fg||, window +-" + fmt(cfg.extra.fg_slope_tolerance)});
    out.verdicts.push_back({"commutator_slope",
                            comm.ok && comm.exponent <= cfg.extra.comm_slope_max && comm.r2 >= cfg.extra.comm_r2_min,
                            comm.exponent, cfg.extra.comm_slope_max,
                            "slope of min_s ||p[T_f,T_g] - s i T_{f,g}||, r2 = " + fmt(comm.r2)});
  }
  return out;
}

}  // namespace

bool RunResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

json verdicts_to_json(const std::vector<Verdict>& verdicts) {
  json out = json::array();
  for (const auto& v : verdicts)
    out.push_back({{"name", v.name},
                   {"passed", v.passed},
                   {"measured", v.measured},
                   {"threshold", v.threshold},
                   {"detail", v.detail}});
  return out;
}

json build_report(const ExperimentConfig& config, const RunResult& result) {
  json tables = json::array();
  for (const auto& t : result.tables)
    tables.push_back({{"file", t.name}, {"module", t.module}, {"operation", t.operation}});
  return {{"experiment", to_string(config.kind)},
          {"status", "ok"},
          {"config", config.canonical()},
          {"results", result.results},
          {"verdicts", verdicts_to_json(result.verdicts)},
          {"passed", result.passed()},
          {"tables", tables}};
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  if (cfg.kind == ExperimentKind::model_spectrum) return run_model_spectrum(cfg);
  const bool sweep = cfg.kind == ExperimentKind::bochner_sweep || cfg.kind == ExperimentKind::toeplitz_sweep;
  if (cfg.p_list.empty() && !sweep) throw ConfigError("/p", "needs at least one tensor power");
  const torus::TorusField field = torus::build_field(cfg.field);
  switch (cfg.kind) {
    case ExperimentKind::landau_levels: return run_landau_levels(cfg, field, options);
    case ExperimentKind::bochner_sweep:
    case ExperimentKind::toeplitz_sweep: return run_sweep(cfg, field, options);
    case ExperimentKind::toeplitz_spectrum: return run_toeplitz_spectrum(cfg, field, options);
    case ExperimentKind::localization: return run_localization(cfg, field, options);
    case ExperimentKind::algebra_defects: return run_algebra_defects(cfg, field, options);
    default: break;
  }
  throw ConfigError("/experiment", "unsupported experiment");
}

}  // namespace toeplitz_wells::cli

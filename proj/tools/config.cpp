#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "toeplitz_wells/error.hpp"

namespace toeplitz_wells::cli {

namespace {

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

/// A JSON value together with its JSON pointer, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  void require_object() const {
    if (!value_.is_object()) fail("expected an object");
  }
  /// Rejects keys outside `allowed`.
  void allow(const std::set<std::string>& allowed) const {
    require_object();
    for (const auto& item : value_.items())
      if (!allowed.count(item.key())) throw ConfigError(child_path(item.key()), "unknown key");
  }
  bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }
  Node at(const std::string& key) const {
    if (!has(key)) throw ConfigError(child_path(key), "missing required key");
    return Node(value_.at(key), child_path(key));
  }
  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "/" + std::to_string(i)); }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    const auto v = value_.get<long long>();
    if (v < -2147483647LL || v > 2147483647LL) fail("integer out of range");
    return int(v);
  }
  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<long long>() >= 0))
      fail("expected a nonnegative integer");
    return value_.get<std::uint64_t>();
  }
  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }
  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }
  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < array_size(); ++i) out.push_back(at(i).number());
    return out;
  }
  std::vector<int> integers() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < array_size(); ++i) out.push_back(at(i).integer());
    return out;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_.empty() ? "/" : path_, message); }

 private:
  std::string child_path(const std::string& key) const { return path_ + "/" + escape_pointer(key); }

  const json& value_;
  std::string path_;
};

void positive(const Node& n, double v) {
  if (!(v > 0.0)) n.fail("must be positive");
}

TrigPoly parse_fourier(const Node& node) {
  TrigPoly::Coeffs coeffs;
  const std::size_t count = node.array_size();
  if (count == 0) node.fail("needs at least one coefficient");
  for (std::size_t i = 0; i < count; ++i) {
    const Node term = node.at(i);
    term.allow({"k", "re", "im"});
    const Node k = term.at("k");
    if (k.array_size() != 2) k.fail("expected [k1, k2]");
    const int k1 = k.at(std::size_t{0}).integer();
    const int k2 = k.at(std::size_t{1}).integer();
    const double re = term.has("re") ? term.at("re").number() : 0.0;
    const double im = term.has("im") ? term.at("im").number() : 0.0;
    if (coeffs.count({k1, k2})) k.fail("duplicate frequency");
    coeffs[{k1, k2}] = cplx(re, im);
  }
  return TrigPoly(std::move(coeffs));
}

json fourier_to_json(const TrigPoly& poly) {
  json out = json::array();
  for (const auto& [k, c] : poly.coeffs()) out.push_back({{"k", {k.first, k.second}}, {"re", c.real()}, {"im", c.imag()}});
  return out;
}

SymbolSpec parse_symbol(const Node& node) {
  node.allow({"preset", "fourier", "scale"});
  SymbolSpec spec;
  if (node.has("preset") && node.has("fourier"))
    throw ConfigError(node.path() + "/fourier", "conflicts with \"preset\"; give exactly one of them");
  if (node.has("scale")) spec.scale = node.at("scale").number();
  if (node.has("preset")) {
    spec.preset = node.at("preset").string();
    spec.poly = preset_symbol(spec.preset, node.path() + "/preset");
  } else if (node.has("fourier")) {
    spec.poly = parse_fourier(node.at("fourier"));
  } else {
    node.fail("needs \"preset\" or \"fourier\"");
  }
  if (!spec.poly.is_real(1e-12)) node.fail("symbol is not real (coefficients must be conjugate symmetric)");
  spec.poly = spec.poly * spec.scale;
  return spec;
}

json symbol_to_json(const SymbolSpec& s) {
  json out;
  if (!s.preset.empty())
    out["preset"] = s.preset;
  else
    out["fourier"] = fourier_to_json(s.poly * (s.scale != 0.0 ? 1.0 / s.scale : 1.0));
  out["scale"] = s.scale;
  return out;
}

torus::FieldSpec parse_field(const Node& node) {
  node.allow({"family", "m", "epsilon", "fourier"});
  torus::FieldSpec spec;
  if (node.has("family") && node.has("fourier"))
    throw ConfigError(node.path() + "/fourier", "conflicts with \"family\"; give a closed-form family or Fourier data");
  if (node.has("m")) {
    const Node m = node.at("m");
    if (!m.raw().is_number_integer()) m.fail("flux m must be an integer");
    spec.flux = m.integer();
    if (spec.flux < 1) m.fail("flux m must be positive");
  }
  if (node.has("fourier")) {
    spec.family = torus::FieldFamily::custom;
    spec.custom = parse_fourier(node.at("fourier"));
  } else if (node.has("family")) {
    const Node fam = node.at("family");
    const std::string name = fam.string();
    if (name == "custom") fam.fail("custom fields are given through \"fourier\"");
    try {
      spec.family = torus::field_family_from_string(name);
    } catch (const FieldError&) {
      fam.fail("unknown family '" + name + "' (constant, single_well, double_well)");
    }
  } else {
    node.fail("needs \"family\" or \"fourier\"");
  }
  if (node.has("epsilon")) {
    const Node eps = node.at("epsilon");
    spec.epsilon = eps.number();
    if (spec.epsilon < 0.0) eps.fail("epsilon must be nonnegative");
    if (spec.family == torus::FieldFamily::constant || spec.family == torus::FieldFamily::custom)
      eps.fail("epsilon only applies to the single_well and double_well families");
  } else if (spec.family == torus::FieldFamily::single_well || spec.family == torus::FieldFamily::double_well) {
    spec.epsilon = 0.1;
  }
  return spec;
}

json field_to_json(const torus::FieldSpec& spec) {
  json out;
  if (spec.family == torus::FieldFamily::custom) {
    out["fourier"] = fourier_to_json(spec.custom);
  } else {
    out["family"] = torus::to_string(spec.family);
    if (spec.family != torus::FieldFamily::constant) out["epsilon"] = spec.epsilon;
  }
  out["m"] = spec.flux;
  return out;
}

model::QuadraticWell parse_well(const Node& node, int index) {
  node.allow({"n", "a", "q", "shift", "label"});
  model::QuadraticWell w;
  w.n = node.has("n") ? node.at("n").integer() : 1;
  if (w.n < 1) node.at("n").fail("must be at least 1");
  w.a = node.has("a") ? node.at("a").numbers() : std::vector<double>(w.n, 1.0);
  if (int(w.a.size()) != w.n) node.at("a").fail("needs n entries");
  for (std::size_t i = 0; i < w.a.size(); ++i) positive(node.at("a").at(i), w.a[i]);
  const int dim = 2 * w.n;
  w.q = Eigen::MatrixXd::Identity(dim, dim);
  if (node.has("q")) {
    const Node q = node.at("q");
    if (int(q.array_size()) != dim) q.fail("expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
    for (int r = 0; r < dim; ++r) {
      const std::vector<double> row = q.at(std::size_t(r)).numbers();
      if (int(row.size()) != dim) q.at(std::size_t(r)).fail("row has the wrong length");
      for (int c = 0; c < dim; ++c) w.q(r, c) = row[c];
    }
    if ((w.q - w.q.transpose()).cwiseAbs().maxCoeff() > 1e-12) q.fail("matrix is not symmetric");
  }
  w.shift = node.has("shift") ? node.at("shift").number() : 0.0;
  w.label = node.has("label") ? node.at("label").string() : "well" + std::to_string(index);
  try {
    w.validate();
  } catch (const Error& e) {
    node.fail(e.what());
  }
  return w;
}

json well_to_json(const model::QuadraticWell& w) {
  json q = json::array();
  for (int r = 0; r < w.q.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < w.q.cols(); ++c) row.push_back(w.q(r, c));
    q.push_back(row);
  }
  return {{"n", w.n}, {"a", w.a}, {"q", q}, {"shift", w.shift}, {"label", w.label}};
}

void parse_thresholds(const Node& node, asymptotics::Thresholds& t, ExtraThresholds& e) {
  node.allow({"min_fit_p", "discretization_fraction", "decay_exponent_low", "decay_exponent_high",
              "landau_relative", "limit_relative", "spacing_relative", "drift_exponent_max", "fg_slope",
              "fg_slope_tolerance", "comm_slope_max", "comm_r2_min", "moment_slope", "moment_slope_tolerance",
              "mass_delta", "mass_power", "decay_stability", "trace_relative", "degenerate_ratio_max",
              "excited_relative", "model_agreement"});
  auto num = [&](const char* key, double& target) {
    if (node.has(key)) target = node.at(key).number();
  };
  if (node.has("min_fit_p")) t.min_fit_p = node.at("min_fit_p").integer();
  num("discretization_fraction", t.discretization_fraction);
  num("decay_exponent_low", t.decay_exponent_low);
  num("decay_exponent_high", t.decay_exponent_high);
  num("landau_relative", t.landau_relative);
  num("limit_relative", t.limit_relative);
  num("spacing_relative", t.spacing_relative);
  num("drift_exponent_max", t.drift_exponent_max);
  num("fg_slope", e.fg_slope);
  num("fg_slope_tolerance", e.fg_slope_tolerance);
  num("comm_slope_max", e.comm_slope_max);
  num("comm_r2_min", e.comm_r2_min);
  num("moment_slope", e.moment_slope);
  num("moment_slope_tolerance", e.moment_slope_tolerance);
  num("mass_delta", e.mass_delta);
  num("mass_power", e.mass_power);
  num("decay_stability", e.decay_stability);
  num("trace_relative", e.trace_relative);
  num("degenerate_ratio_max", e.degenerate_ratio_max);
  num("excited_relative", e.excited_relative);
  num("model_agreement", e.model_agreement);
}

json thresholds_to_json(const asymptotics::Thresholds& t, const ExtraThresholds& e) {
  return {{"min_fit_p", t.min_fit_p},
          {"discretization_fraction", t.discretization_fraction},
          {"decay_exponent_low", t.decay_exponent_low},
          {"decay_exponent_high", t.decay_exponent_high},
          {"landau_relative", t.landau_relative},
          {"limit_relative", t.limit_relative},
          {"spacing_relative", t.spacing_relative},
          {"drift_exponent_max", t.drift_exponent_max},
          {"fg_slope", e.fg_slope},
          {"fg_slope_tolerance", e.fg_slope_tolerance},
          {"comm_slope_max", e.comm_slope_max},
          {"comm_r2_min", e.comm_r2_min},
          {"moment_slope", e.moment_slope},
          {"moment_slope_tolerance", e.moment_slope_tolerance},
          {"mass_delta", e.mass_delta},
          {"mass_power", e.mass_power},
          {"decay_stability", e.decay_stability},
          {"trace_relative", e.trace_relative},
          {"degenerate_ratio_max", e.degenerate_ratio_max},
          {"excited_relative", e.excited_relative},
          {"model_agreement", e.model_agreement}};
}

std::set<std::string> allowed_keys(ExperimentKind kind) {
  std::set<std::string> keys{"experiment", "thresholds", "seed", "output"};
  const std::set<std::string> torus_keys{"field", "p", "grid", "solver"};
  switch (kind) {
    case ExperimentKind::model_spectrum:
      keys.insert({"wells", "levels", "route", "max_degree"});
      return keys;
    case ExperimentKind::landau_levels:
    case ExperimentKind::bochner_sweep:
      keys.insert("levels");
      break;
    case ExperimentKind::toeplitz_spectrum:
    case ExperimentKind::toeplitz_sweep:
      keys.insert({"symbol", "levels"});
      break;
    case ExperimentKind::localization:
      keys.insert({"symbol", "localization", "degenerate"});
      break;
    case ExperimentKind::algebra_defects:
      keys.insert("symbols");
      break;
  }
  keys.insert(torus_keys.begin(), torus_keys.end());
  return keys;
}

int default_levels(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::model_spectrum: return 6;
    case ExperimentKind::landau_levels: return 2;
    case ExperimentKind::toeplitz_spectrum: return 4;
    case ExperimentKind::bochner_sweep: return 3;
    case ExperimentKind::toeplitz_sweep: return 4;
    default: return 1;
  }
}

}  // namespace

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> kinds{
      ExperimentKind::model_spectrum, ExperimentKind::landau_levels,  ExperimentKind::toeplitz_spectrum,
      ExperimentKind::bochner_sweep,  ExperimentKind::toeplitz_sweep, ExperimentKind::localization,
      ExperimentKind::algebra_defects};
  return kinds;
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::model_spectrum: return "model-spectrum";
    case ExperimentKind::landau_levels: return "landau-levels";
    case ExperimentKind::toeplitz_spectrum: return "toeplitz-spectrum";
    case ExperimentKind::bochner_sweep: return "bochner-sweep";
    case ExperimentKind::toeplitz_sweep: return "toeplitz-sweep";
    case ExperimentKind::localization: return "localization";
    case ExperimentKind::algebra_defects: return "algebra-defects";
  }
  return "";
}

ExperimentKind experiment_from_string(const std::string& name, const std::string& path) {
  for (auto kind : all_experiments())
    if (to_string(kind) == name) return kind;
  throw ConfigError(path, "unknown experiment '" + name + "'");
}

TrigPoly preset_symbol(const std::string& name, const std::string& path) {
  const TrigPoly single = TrigPoly::constant(2.0) - TrigPoly::cosine(1, 0) - TrigPoly::cosine(0, 1);
  if (name == "single_well") return single;
  if (name == "double_well") return TrigPoly::constant(2.0) - TrigPoly::cosine(1, 1) - TrigPoly::cosine(1, -1);
  if (name == "quartic") return (single * single).pruned(1e-15);
  if (name == "cos_x1") return TrigPoly::cosine(1, 0);
  if (name == "cos_x2") return TrigPoly::cosine(0, 1);
  if (name == "one") return TrigPoly::constant(1.0);
  throw ConfigError(path, "unknown preset '" + name + "' (single_well, double_well, quartic, cos_x1, cos_x2, one)");
}

ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> kind) {
  const Node root(doc, "");
  root.require_object();
  ExperimentConfig cfg;
  if (root.has("experiment")) {
    const Node e = root.at("experiment");
    const ExperimentKind named = experiment_from_string(e.string(), e.path());
    if (kind && *kind != named)
      e.fail("config is for '" + to_string(named) + "' but the command is '" + to_string(*kind) + "'");
    cfg.kind = named;
  } else if (kind) {
    cfg.kind = *kind;
  } else {
    root.fail("missing \"experiment\" (or give the experiment as subcommand)");
  }
  root.allow(allowed_keys(cfg.kind));

  cfg.levels = default_levels(cfg.kind);
  if (root.has("levels")) {
    cfg.levels = root.at("levels").integer();
    if (cfg.levels < 1) root.at("levels").fail("must be at least 1");
  }
  if (root.has("seed")) cfg.solver.seed = root.at("seed").unsigned_integer();
  if (root.has("thresholds")) parse_thresholds(root.at("thresholds"), cfg.thresholds, cfg.extra);
  if (root.has("output")) {
    const Node out = root.at("output");
    out.allow({"directory", "dump_eigenvectors"});
    if (out.has("directory")) cfg.output_dir = out.at("directory").string();
    if (out.has("dump_eigenvectors")) {
      cfg.dump_eigenvectors = out.at("dump_eigenvectors").integers();
      for (std::size_t i = 0; i < cfg.dump_eigenvectors.size(); ++i)
        if (cfg.dump_eigenvectors[i] < 0) out.at("dump_eigenvectors").at(i).fail("mode index must be nonnegative");
    }
  }

  if (cfg.kind == ExperimentKind::model_spectrum) {
    const Node wells = root.at("wells");
    if (wells.array_size() == 0) wells.fail("needs at least one well");
    for (std::size_t i = 0; i < wells.array_size(); ++i) cfg.wells.push_back(parse_well(wells.at(i), int(i)));
    if (root.has("route")) {
      cfg.route = root.at("route").string();
      if (cfg.route != "exact" && cfg.route != "truncated" && cfg.route != "both")
        root.at("route").fail("expected exact, truncated or both");
    }
    if (root.has("max_degree")) {
      cfg.max_degree = root.at("max_degree").integer();
      if (cfg.max_degree < 4) root.at("max_degree").fail("must be at least 4");
    }
    return cfg;
  }

  cfg.field = parse_field(root.at("field"));
  {
    const Node p = root.at("p");
    cfg.p_list = p.integers();
    for (std::size_t i = 0; i < cfg.p_list.size(); ++i)
      if (cfg.p_list[i] < 1) p.at(i).fail("tensor power must be a positive integer");
  }
  if (root.has("grid")) {
    const Node grid = root.at("grid");
    grid.allow({"override", "stencil_order"});
    if (grid.has("override") && !grid.at("override").raw().is_null()) {
      cfg.grid_override = grid.at("override").integer();
      if (*cfg.grid_override < 8) grid.at("override").fail("grid must have at least 8 points per side");
    }
    if (grid.has("stencil_order")) {
      cfg.stencil_order = grid.at("stencil_order").integer();
      if (cfg.stencil_order < 2 || cfg.stencil_order > 16 || cfg.stencil_order % 2)
        grid.at("stencil_order").fail("must be even, between 2 and 16");
    }
  }
  if (root.has("solver")) {
    const Node s = root.at("solver");
    s.allow({"mode", "tolerance", "extra"});
    if (s.has("mode")) {
      const std::string mode = s.at("mode").string();
      if (mode == "dense")
        cfg.solver.mode = SolverMode::dense;
      else if (mode == "lanczos")
        cfg.solver.mode = SolverMode::lanczos;
      else
        s.at("mode").fail("expected lanczos or dense");
    }
    if (s.has("tolerance")) {
      cfg.solver.tolerance = s.at("tolerance").number();
      positive(s.at("tolerance"), cfg.solver.tolerance);
    }
    if (s.has("extra")) {
      cfg.solver.extra = s.at("extra").integer();
      if (cfg.solver.extra < 1) s.at("extra").fail("must be at least 1");
    }
  }

  switch (cfg.kind) {
    case ExperimentKind::toeplitz_spectrum:
    case ExperimentKind::toeplitz_sweep:
      cfg.h = parse_symbol(root.at("symbol"));
      break;
    case ExperimentKind::localization: {
      cfg.h = parse_symbol(root.at("symbol"));
      if (root.has("localization")) {
        const Node l = root.at("localization");
        l.allow({"deltas", "alphas", "h0", "moment_orders", "eigen_index"});
        if (l.has("deltas")) cfg.localization.deltas = l.at("deltas").numbers();
        if (l.has("alphas")) cfg.localization.alphas = l.at("alphas").numbers();
        if (l.has("h0")) cfg.localization.h0 = l.at("h0").number();
        if (l.has("moment_orders")) cfg.localization.moment_orders = l.at("moment_orders").integers();
        if (l.has("eigen_index")) {
          cfg.eigen_index = l.at("eigen_index").integer();
          if (cfg.eigen_index < 0) l.at("eigen_index").fail("must be nonnegative");
        }
        for (std::size_t i = 0; i < cfg.localization.deltas.size(); ++i)
          if (cfg.localization.deltas[i] < 0.0) l.at("deltas").at(i).fail("must be nonnegative");
        for (std::size_t i = 0; i < cfg.localization.moment_orders.size(); ++i)
          if (cfg.localization.moment_orders[i] < 0) l.at("moment_orders").at(i).fail("must be nonnegative");
      }
      if (root.has("degenerate")) {
        const Node d = root.at("degenerate");
        d.allow({"k", "cs", "c0"});
        cfg.degenerate.enabled = true;
        if (d.has("k")) cfg.degenerate.k = d.at("k").integer();
        if (cfg.degenerate.k < 1) d.at("k").fail("must be at least 1");
        if (d.has("cs")) cfg.degenerate.cs = d.at("cs").numbers();
        if (d.has("c0")) {
          cfg.degenerate.c0 = d.at("c0").number();
          positive(d.at("c0"), cfg.degenerate.c0);
        }
      }
      break;
    }
    case ExperimentKind::algebra_defects: {
      const Node s = root.at("symbols");
      s.allow({"f", "g"});
      cfg.f = parse_symbol(s.at("f"));
      cfg.g = parse_symbol(s.at("g"));
      break;
    }
    default:
      break;
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path, std::optional<ExperimentKind> kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, kind);
}

json ExperimentConfig::canonical() const {
  json out;
  out["experiment"] = to_string(kind);
  out["seed"] = solver.seed;
  out["thresholds"] = thresholds_to_json(thresholds, extra);
  out["output"] = {{"dump_eigenvectors", dump_eigenvectors}};
  if (!output_dir.empty()) out["output"]["directory"] = output_dir;
  if (kind == ExperimentKind::model_spectrum) {
    json wells_json = json::array();
    for (const auto& w : wells) wells_json.push_back(well_to_json(w));
    out["wells"] = wells_json;
    out["levels"] = levels;
    out["route"] = route;
    out["max_degree"] = max_degree;
    return out;
  }
  out["field"] = field_to_json(field);
  out["p"] = p_list;
  out["grid"] = {{"override", grid_override ? json(*grid_override) : json(nullptr)},
                 {"stencil_order", stencil_order}};
  out["solver"] = {{"mode", to_string(solver.mode)}, {"tolerance", solver.tolerance}, {"extra", solver.extra}};
  switch (kind) {
    case ExperimentKind::landau_levels:
    case ExperimentKind::bochner_sweep:
      out["levels"] = levels;
      break;
    case ExperimentKind::toeplitz_spectrum:
    case ExperimentKind::toeplitz_sweep:
      out["levels"] = levels;
      out["symbol"] = symbol_to_json(h);
      break;
    case ExperimentKind::localization:
      out["symbol"] = symbol_to_json(h);
      out["localization"] = {{"deltas", localization.deltas},
                             {"alphas", localization.alphas},
                             {"h0", localization.h0},
                             {"moment_orders", localization.moment_orders},
                             {"eigen_index", eigen_index}};
      if (degenerate.enabled) out["degenerate"] = {{"k", degenerate.k}, {"cs", degenerate.cs}, {"c0", degenerate.c0}};
      break;
    case ExperimentKind::algebra_defects:
      out["symbols"] = {{"f", symbol_to_json(f)}, {"g", symbol_to_json(g)}};
      break;
    default:
      break;
  }
  return out;
}

}  // namespace toeplitz_wells::cli

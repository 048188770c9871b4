#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toeplitz_wells/asymptotics.hpp"
#include "toeplitz_wells/modelwell.hpp"
#include "toeplitz_wells/toeplitz.hpp"
#include "toeplitz_wells/torus.hpp"

namespace toeplitz_wells::cli {

using json = nlohmann::json;

enum class ExperimentKind {
  model_spectrum,
  landau_levels,
  toeplitz_spectrum,
  bochner_sweep,
  toeplitz_sweep,
  localization,
  algebra_defects
};

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_from_string(const std::string& name, const std::string& path = "/experiment");
const std::vector<ExperimentKind>& all_experiments();

/// A symbol given either by a preset name or by Fourier coefficients.
struct SymbolSpec {
  std::string preset;  ///< empty for raw Fourier data
  double scale = 1.0;
  TrigPoly poly;
};

/// Windows used by the algebra and localization verdicts.
struct ExtraThresholds {
  double fg_slope = -1.0;
  double fg_slope_tolerance = 0.2;
  double comm_slope_max = -0.8;
  double comm_r2_min = 0.9;
  double moment_slope = -1.0;
  double moment_slope_tolerance = 0.2;
  double mass_delta = 0.2;
  double mass_power = 3.0;  ///< mass outside V_delta <= p^{-mass_power}
  double decay_stability = 0.30;
  double trace_relative = 1e-3;
  double degenerate_ratio_max = 10.0;
  double excited_relative = 0.05;
  double model_agreement = 1e-8;
};

struct DegenerateSpec {
  bool enabled = false;
  int k = 2;
  std::vector<double> cs{0.0, 0.25, 0.5};
  double c0 = 10.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::landau_levels;
  torus::FieldSpec field;
  std::vector<int> p_list;
  std::optional<int> grid_override;
  int stencil_order = 8;
  /// eigenvalues per p (j_max + 1, m_max + 1, or model levels)
  int levels = 3;

  // model-spectrum
  std::vector<model::QuadraticWell> wells;
  std::string route = "both";  ///< exact | truncated | both
  int max_degree = 200;

  // symbols
  SymbolSpec h;  ///< toeplitz-spectrum, toeplitz-sweep, localization
  SymbolSpec f;  ///< algebra-defects
  SymbolSpec g;

  // localization
  toeplitz::LocalizationParams localization;
  int eigen_index = 0;
  DegenerateSpec degenerate;

  asymptotics::Thresholds thresholds;
  ExtraThresholds extra;
  torus::TorusSolveOptions solver;

  std::string output_dir;  ///< empty: decided by the command line / environment
  std::vector<int> dump_eigenvectors;

  /// The validated configuration with every default filled in.
  json canonical() const;
};

/// Validates `doc` and fills defaults. When `kind` is given it must agree
/// with a present "experiment" key. Errors name the JSON pointer of the
/// offending key.
ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> kind = std::nullopt);
/// Reads and parses a file; missing files and syntax errors are ConfigErrors.
ExperimentConfig parse_config_file(const std::string& path, std::optional<ExperimentKind> kind = std::nullopt);

/// Preset symbols: single_well = 2 - cos 2pi x1 - cos 2pi x2,
/// double_well = 2 - cos 2pi(x1 + x2) - cos 2pi(x1 - x2), quartic = single_well^2,
/// cos_x1, cos_x2, one.
TrigPoly preset_symbol(const std::string& name, const std::string& path = "/symbol/preset");

}  // namespace toeplitz_wells::cli

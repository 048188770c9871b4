#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "toeplitz_wells/error.hpp"
#include "toeplitz_wells/torus.hpp"

namespace toeplitz_wells::torus {

namespace {

constexpr double pi = std::numbers::pi;

// g for the well families, as a trigonometric polynomial with g(0) = 0.
TrigPoly well_profile(FieldFamily family) {
  if (family == FieldFamily::single_well)
    return TrigPoly::constant(2.0) - TrigPoly::cosine(1, 0) - TrigPoly::cosine(0, 1);
  // double_well: minima where x1 + x2 and x1 - x2 are both integers,
  // i.e. at (0, 0) and (1/2, 1/2).
  return TrigPoly::constant(2.0) - TrigPoly::cosine(1, 1) - TrigPoly::cosine(1, -1);
}

}  // namespace

std::string to_string(FieldFamily family) {
  switch (family) {
    case FieldFamily::constant: return "constant";
    case FieldFamily::single_well: return "single_well";
    case FieldFamily::double_well: return "double_well";
    case FieldFamily::custom: return "custom";
  }
  return "custom";
}

FieldFamily field_family_from_string(const std::string& name) {
  if (name == "constant") return FieldFamily::constant;
  if (name == "single_well") return FieldFamily::single_well;
  if (name == "double_well") return FieldFamily::double_well;
  if (name == "custom") return FieldFamily::custom;
  throw FieldError("unknown field family '" + name + "'");
}

TorusField::TorusField(TrigPoly b, int flux, FieldSpec spec)
    : b_(std::move(b)), flux_(flux), spec_(std::move(spec)) {
  local_minima_ = find_local_minima(b_, 128);
  const Eigen::VectorXd samples = b_.sample(256);
  minimum_ = samples.minCoeff();
  maximum_ = samples.maxCoeff();
  for (const auto& c : local_minima_) minimum_ = std::min(minimum_, c.value);
  const double tol = 1e-9 * std::max(1.0, std::abs(maximum_));
  for (const auto& c : local_minima_)
    if (c.value <= minimum_ + tol) minima_.push_back(c);
}

double TorusField::mean() const { return 2.0 * pi * flux_; }

TorusField TorusField::translated(const TorusPoint& shift) const {
  TrigPoly::Coeffs moved;
  for (const auto& [k, c] : b_.coeffs())
    moved[k] = c * std::polar(1.0, -2.0 * pi * (k.first * shift.x1 + k.second * shift.x2));
  FieldSpec spec = spec_;
  spec.family = FieldFamily::custom;
  spec.custom = TrigPoly(moved);
  return TorusField(TrigPoly(std::move(moved)), flux_, std::move(spec));
}

TorusField build_field(const FieldSpec& spec, int verification_grid) {
  if (spec.flux < 1) throw FieldError("flux m must be a positive integer");
  if (!(spec.epsilon >= 0.0)) throw FieldError("epsilon must be nonnegative");
  const double mean = 2.0 * pi * spec.flux;

  TrigPoly b;
  switch (spec.family) {
    case FieldFamily::constant:
      b = TrigPoly::constant(mean);
      break;
    case FieldFamily::single_well:
    case FieldFamily::double_well: {
      const double c = mean / (1.0 + 2.0 * spec.epsilon);
      b = (TrigPoly::constant(1.0) + spec.epsilon * well_profile(spec.family)) * c;
      break;
    }
    case FieldFamily::custom: {
      if (spec.custom.empty()) throw FieldError("custom field has no Fourier coefficients");
      if (!spec.custom.is_real(1e-12)) throw FieldError("custom field coefficients are not conjugate symmetric");
      const cplx c00 = spec.custom.coeff(0, 0);
      if (!(c00.real() > 0.0)) throw FieldError("custom field must have a positive mean coefficient");
      b = spec.custom * (mean / c00.real());
      break;
    }
  }
  b = b.pruned(0.0);
  // pin the mean exactly (rescaling can leave a rounding error)
  TrigPoly::Coeffs coeffs = b.coeffs();
  coeffs[{0, 0}] = cplx(mean, 0.0);
  b = TrigPoly(std::move(coeffs));

  const Eigen::VectorXd samples = b.sample(verification_grid);
  Eigen::Index worst = 0;
  const double lowest = samples.minCoeff(&worst);
  if (!(lowest > 0.0)) {
    std::ostringstream msg;
    msg << "field is not positive: b = " << lowest << " at grid point (" << worst % verification_grid << ", "
        << worst / verification_grid << ") of a " << verification_grid << "^2 grid";
    throw FieldError(msg.str());
  }
  return TorusField(std::move(b), spec.flux, spec);
}

GaugeCorrector solve_gauge(const TorusField& field) {
  TrigPoly::Coeffs phi;
  for (const auto& [k, c] : field.b().coeffs()) {
    if (k.first == 0 && k.second == 0) continue;
    const double k2 = double(k.first) * k.first + double(k.second) * k.second;
    phi[k] = -c / (4.0 * pi * pi * k2);
  }
  return {TrigPoly(std::move(phi)), 0.0};
}

}  // namespace toeplitz_wells::torus

#include "saapde/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "saapde/errors.hpp"

namespace saapde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double shape_value(FieldMode::Shape shape, double arg) {
  switch (shape) {
    case FieldMode::Shape::constant:
      return 1.0;
    case FieldMode::Shape::sine:
      return std::sin(arg);
    case FieldMode::Shape::cosine:
      return std::cos(arg);
  }
  return 0.0;
}

double scalar_coordinate(const Eigen::Vector2d& x, int dim) {
  return dim == 1 ? x[0] : 0.5 * (x[0] + x[1]);
}

// Field value split into the deterministic part and per-parameter
// coefficients: value = base + sum_j xi[j] * coeff[j].
template <class Modes>
double affine_parts(double base0, const Modes& modes, const Eigen::Vector2d& x,
                    int dim, Eigen::VectorXd* coeffs) {
  double base = base0;
  for (const auto& mode : modes) {
    const double v = mode.spatial(x, dim);
    if (mode.parameter < 0) {
      base += v;
    } else if (coeffs != nullptr) {
      if (mode.parameter >= coeffs->size()) {
        throw ConfigError("field mode parameter index exceeds dimension");
      }
      (*coeffs)[mode.parameter] += v;
    }
  }
  return base;
}

}  // namespace

double FieldMode::spatial(const Eigen::Vector2d& x, int dim) const {
  return amplitude * shape_value(shape, kTwoPi * frequency * scalar_coordinate(x, dim));
}

FieldMode::Shape parse_shape(const std::string& name) {
  if (name == "const" || name == "constant") return FieldMode::Shape::constant;
  if (name == "sin" || name == "sine") return FieldMode::Shape::sine;
  if (name == "cos" || name == "cosine") return FieldMode::Shape::cosine;
  throw ConfigError("unknown mode shape '" + name + "' (expected const|sin|cos)");
}

std::string shape_name(FieldMode::Shape shape) {
  switch (shape) {
    case FieldMode::Shape::constant:
      return "const";
    case FieldMode::Shape::sine:
      return "sin";
    case FieldMode::Shape::cosine:
      return "cos";
  }
  return "const";
}

double CoefficientModel::value(const Eigen::Vector2d& x,
                               const ParameterPoint& xi, int dim) const {
  double v = b0;
  for (const auto& mode : modes) {
    const double s = mode.spatial(x, dim);
    v += mode.parameter < 0 ? s : xi[mode.parameter] * s;
  }
  return v;
}

bool CoefficientModel::depends_on_xi() const {
  for (const auto& mode : modes) {
    if (mode.parameter >= 0 && mode.amplitude != 0.0) return true;
  }
  return false;
}

double SourceModel::value(const Eigen::Vector2d& x, const ParameterPoint& xi,
                          int dim) const {
  double v = g0;
  for (const auto& mode : modes) {
    const double s = mode.spatial(x, dim);
    v += mode.parameter < 0 ? s : xi[mode.parameter] * s;
  }
  return v;
}

bool SourceModel::depends_on_xi() const {
  for (const auto& mode : modes) {
    if (mode.parameter >= 0 && mode.amplitude != 0.0) return true;
  }
  return false;
}

EllipticityReport validate_ellipticity(const CoefficientModel& model,
                                       const Box& box, int spatial_dim,
                                       int grid_resolution) {
  if (grid_resolution < 2) throw ConfigError("ellipticity grid needs >= 2 cells");
  if (!(model.gamma > 0.0) || model.L < model.gamma) {
    throw ConfigError("coefficient model needs 0 < gamma <= L");
  }

  const int d = box.dim();
  EllipticityReport report;
  report.gamma_observed = std::numeric_limits<double>::infinity();
  report.L_observed = -std::numeric_limits<double>::infinity();

  Eigen::VectorXd coeffs(d);
  const int nx = grid_resolution + 1;
  const int ny = spatial_dim == 2 ? grid_resolution + 1 : 1;
  for (int jy = 0; jy < ny; ++jy) {
    for (int jx = 0; jx < nx; ++jx) {
      Eigen::Vector2d x(static_cast<double>(jx) / grid_resolution,
                        static_cast<double>(jy) / grid_resolution);
      coeffs.setZero();
      const double base =
          affine_parts(model.b0, model.modes, x, spatial_dim, &coeffs);
      // Extremes over the box, coordinate by coordinate.
      double lo = base, hi = base;
      ParameterPoint xi_lo = box.midpoint(), xi_hi = box.midpoint();
      for (int j = 0; j < d; ++j) {
        const double a = coeffs[j] * box.lower[j];
        const double b = coeffs[j] * box.upper[j];
        lo += std::min(a, b);
        hi += std::max(a, b);
        xi_lo[j] = a <= b ? box.lower[j] : box.upper[j];
        xi_hi[j] = a <= b ? box.upper[j] : box.lower[j];
      }
      ++report.grid_points;
      if (lo < report.gamma_observed) report.gamma_observed = lo;
      if (hi > report.L_observed) report.L_observed = hi;
      if (lo <= 0.0) {
        throw EllipticityViolation(
            "coefficient loses ellipticity: b = " + std::to_string(lo) +
                " at x = " + std::to_string(x[0]),
            x, xi_lo, lo);
      }
      if (lo < model.gamma - 1e-12 || hi > model.L + 1e-12) {
        throw EllipticityViolation(
            "coefficient leaves declared [gamma, L] band: observed [" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]",
            x, lo < model.gamma - 1e-12 ? xi_lo : xi_hi,
            lo < model.gamma - 1e-12 ? lo : hi);
      }
    }
  }
  return report;
}

CoefficientModel kl_coefficient_model(const KlSpec& spec, int truncation) {
  if (truncation < 0) throw ConfigError("KL truncation must be >= 0");
  if (!(spec.gamma > 0.0) || spec.L < spec.gamma) {
    throw ConfigError("KL spec needs 0 < gamma <= L");
  }
  CoefficientModel model;
  model.b0 = spec.b0;
  model.gamma = spec.gamma;
  model.L = spec.L;
  if (truncation == 0) {
    if (spec.b0 < spec.gamma || spec.b0 > spec.L) {
      throw EllipticityViolation("KL base field outside declared band",
                                 Eigen::Vector2d::Zero(), Eigen::VectorXd(),
                                 spec.b0);
    }
    return model;
  }

  const int base_frequency =
      std::max(1, static_cast<int>(std::lround(0.5 / spec.correlation_length)));
  double amplitude_sum = 0.0;
  for (int j = 1; j <= truncation; ++j) {
    FieldMode mode;
    mode.shape = j % 2 == 1 ? FieldMode::Shape::sine : FieldMode::Shape::cosine;
    mode.frequency = base_frequency * ((j + 1) / 2);
    mode.amplitude = spec.variance / (static_cast<double>(j) * j);
    mode.parameter = j - 1;
    amplitude_sum += mode.amplitude;
    model.modes.push_back(mode);
  }
  // For |xi_j| <= 1 the total deviation is bounded by the amplitude sum;
  // shrink so the declared band holds with a little slack.
  const double headroom = std::min(spec.b0 - spec.gamma, spec.L - spec.b0);
  if (headroom <= 0.0) {
    throw EllipticityViolation("KL base field leaves no ellipticity headroom",
                               Eigen::Vector2d::Zero(), Eigen::VectorXd(),
                               spec.b0);
  }
  if (amplitude_sum > headroom) {
    const double scale = 0.999 * headroom / amplitude_sum;
    for (auto& mode : model.modes) mode.amplitude *= scale;
  }
  return model;
}

}  // namespace saapde

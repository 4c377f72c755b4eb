#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "saapde/measure.hpp"

namespace saapde {

/// One separable term of an affine-in-xi field:
///   amplitude * shape(2*pi*frequency*s) * xi[parameter]   (parameter >= 0)
///   amplitude * shape(2*pi*frequency*s)                   (parameter == -1)
/// where s is the spatial coordinate in 1D and the coordinate mean in 2D.
struct FieldMode {
  enum class Shape { constant, sine, cosine };

  Shape shape = Shape::constant;
  int frequency = 0;
  double amplitude = 0.0;
  int parameter = -1;  // 0-based xi index, -1 for deterministic terms

  double spatial(const Eigen::Vector2d& x, int dim) const;
};

FieldMode::Shape parse_shape(const std::string& name);
std::string shape_name(FieldMode::Shape shape);

/// Isotropic scalar diffusion coefficient b(x, xi) = b0 + sum of modes,
/// with a declared uniform ellipticity band [gamma, L].
struct CoefficientModel {
  double b0 = 1.0;
  std::vector<FieldMode> modes;
  double gamma = 0.0;
  double L = 0.0;

  double value(const Eigen::Vector2d& x, const ParameterPoint& xi,
               int dim) const;
  bool depends_on_xi() const;
};

/// Source term g(x, xi) = g0 + sum of modes, affine in xi.
struct SourceModel {
  double g0 = 0.0;
  std::vector<FieldMode> modes;

  double value(const Eigen::Vector2d& x, const ParameterPoint& xi,
               int dim) const;
  bool depends_on_xi() const;
};

struct EllipticityReport {
  double gamma_observed = 0.0;
  double L_observed = 0.0;
  int grid_points = 0;
};

/// Evaluates the field extremes over a spatial grid times the box extremes
/// (exact per grid point: the field is affine in xi, so each coordinate's
/// contribution is extremized at an endpoint independently).
/// Throws EllipticityViolation if the minimum is <= 0 or the declared
/// [gamma, L] band is violated.
EllipticityReport validate_ellipticity(const CoefficientModel& model,
                                       const Box& box, int spatial_dim,
                                       int grid_resolution);

/// Truncated Karhunen-Loeve style coefficient surrogate on D = (0,1):
/// an alternating sine/cosine mode family with amplitudes proportional to
/// j^-2, rescaled so the declared [gamma, L] band provably holds.
struct KlSpec {
  double b0 = 2.0;
  double variance = 0.5;            // leading-mode amplitude before rescaling
  double correlation_length = 0.2;  // sets the base spatial frequency
  double gamma = 0.5;
  double L = 4.0;
};

CoefficientModel kl_coefficient_model(const KlSpec& spec, int truncation);

}  // namespace saapde

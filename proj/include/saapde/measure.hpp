#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "saapde/rng.hpp"

namespace saapde {

using ParameterPoint = Eigen::VectorXd;

/// Compact box of admissible parameters, one interval per coordinate.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const ParameterPoint& xi, double tol = 1e-12) const;
  ParameterPoint midpoint() const { return 0.5 * (lower + upper); }

  static Box uniform(int dim, double lo, double hi);
};

/// Finitely supported probability measure on the parameter box: either an
/// empirical measure (equal weights) or a quadrature stand-in for P.
struct DiscreteMeasure {
  enum class Kind { empirical, quadrature };

  Kind kind = Kind::empirical;
  std::vector<ParameterPoint> atoms;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(atoms.size()); }

  /// Checks positivity, normalization to 1 within 1e-12, and equal weights
  /// for the empirical kind. Throws ConfigError.
  void validate() const;

  static DiscreteMeasure point_mass(ParameterPoint xi);
};

/// n iid draws from the uniform product distribution on the box, equal
/// weights. Pure function of (box, n, stream).
DiscreteMeasure sample_uniform(const Box& box, int n, RngStream stream);

/// Convenience overload seeding the canonical sampling stream (seed, n).
DiscreteMeasure sample_uniform(const Box& box, int n, std::uint64_t seed);

/// Gauss-Legendre rule with q nodes on [-1, 1]; weights sum to 2.
void gauss_legendre_rule(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Tensor Gauss-Legendre quadrature mapped to the box, probability-normalized
/// weights. Requires q >= 2, dim <= 3, and at most 1e5 nodes.
DiscreteMeasure quadrature_measure(const Box& box, int nodes_per_dim);

/// Restriction of an empirical measure to the given atom indices with equal
/// weights 1/|indices|.
DiscreteMeasure submeasure(const DiscreteMeasure& parent,
                           const std::vector<int>& indices);

}  // namespace saapde

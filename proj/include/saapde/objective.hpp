#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <vector>

#include "saapde/problem.hpp"

namespace saapde {

/// Interior nodal values of the state u(xi) for control z:
/// A(xi) u = (M (z + g(xi)))|interior, i.e. the load pairs the P1
/// interpolant of z + g(., xi) with the test functions.
Eigen::VectorXd state_solve(const ProblemInstance& prob, const ControlVector& z,
                            const ParameterPoint& xi);

/// f(z, xi) = 1/2 |u(xi) - target|_M^2 + alpha/2 |z|_M^2.
double integrand_value(const ProblemInstance& prob, const ControlVector& z,
                       const ParameterPoint& xi);

/// Riesz representative of the control derivative in the mass inner product:
/// grad = p + alpha z with A(xi)^T p = (M (u - target))|interior, p extended
/// by zero to the boundary.
ControlVector integrand_gradient(const ProblemInstance& prob,
                                 const ControlVector& z,
                                 const ParameterPoint& xi);

/// Per-atom PDE systems for a fixed atom set, with cached factorizations.
/// Weights are supplied per call so subsample solves can share atoms.
/// All reductions run over a fixed block-pairwise tree: results do not
/// depend on the thread count.
class MeasureEvaluator {
 public:
  MeasureEvaluator(const ProblemInstance& prob,
                   std::vector<ParameterPoint> atoms, int threads = 1);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const ProblemInstance& problem() const { return *prob_; }
  const std::vector<ParameterPoint>& atoms() const { return atom_points_; }

  double atom_value(int i, const ControlVector& z) const;
  ControlVector atom_gradient(int i, const ControlVector& z) const;

  /// Weighted sums over atoms; zero-weight atoms are skipped.
  double value(const Eigen::VectorXd& weights, const ControlVector& z,
               int threads = 1) const;
  ControlVector gradient(const Eigen::VectorXd& weights,
                         const ControlVector& z, int threads = 1) const;

  /// Dense quadratic normal form of F_w on the control space:
  ///   F_w(z) = value0 + <grad0, z>_M + 1/2 <H z, z>_M,
  ///   grad F_w(z) = H z + grad0.
  /// Exact for this problem class since every integrand is quadratic in z.
  struct Quadratic {
    Eigen::MatrixXd hessian;  // includes the alpha identity term
    Eigen::VectorXd grad0;
    double value0 = 0.0;
    const ProblemInstance* prob = nullptr;

    double value(const ControlVector& z) const;
    ControlVector gradient(const ControlVector& z) const;
  };

  /// Compiles the normal form by streaming atom contributions. Intended for
  /// modest control dimensions (cost: 2 * control_dim solves per atom).
  Quadratic compile(const Eigen::VectorXd& weights, int threads = 1) const;

  /// Caches per-atom quadratic pieces so repeated compile() calls with
  /// different weights (subsampling) reuse them.
  void precompute_atom_quadratics(int threads = 1);

 private:
  struct Atom {
    FactorizedOperator op;
    Eigen::VectorXd g_nodal;
    double value0 = 0.0;            // f(0, xi)
    Eigen::VectorXd grad0;          // gradient of f(., xi) at z = 0
    std::optional<Eigen::MatrixXd> hessian_tracking;  // T_i S_i, cached
  };

  // Tracking Hessian block T S and affine pieces for one atom.
  void atom_quadratic(const Atom& atom, Eigen::MatrixXd& ts) const;

  const ProblemInstance* prob_;
  std::vector<ParameterPoint> atom_points_;
  std::vector<Atom> atoms_;
  Eigen::MatrixXd mass_interior_cols_;   // (M e_j)|interior for all j, dense
  Eigen::MatrixXd mass_interior_block_;  // interior-interior mass block
};

/// F_Q(z) = sum_i w_i f(z, xi_i), fixed atom order.
double objective_value(const ProblemInstance& prob, const DiscreteMeasure& Q,
                       const ControlVector& z, int threads = 1);

/// Riesz representative of F_Q'(z), fixed atom order.
ControlVector objective_gradient(const ProblemInstance& prob,
                                 const DiscreteMeasure& Q,
                                 const ControlVector& z, int threads = 1);

}  // namespace saapde

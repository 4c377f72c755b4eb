#pragma once

#include <Eigen/Core>

#include "saapde/fem.hpp"
#include "saapde/mesh.hpp"
#include "saapde/models.hpp"

namespace saapde {

/// Controls live in the P1 nodal space over all mesh vertices; the L2(D)
/// geometry is the mass-matrix inner product.
using ControlVector = Eigen::VectorXd;

/// A full tracking-type instance: random diffusion coefficient, random
/// source, target profile, Tikhonov weight, and box control bounds.
struct ProblemInstance {
  Mesh mesh;
  CoefficientModel coefficient;
  SourceModel source;
  Eigen::VectorXd target;  // nodal values over all vertices
  double alpha = 0.1;
  Eigen::VectorXd lower;   // nodal control bounds
  Eigen::VectorXd upper;
  Box xi_box;
  SparseMatrix mass;       // consistent P1 mass over all vertices

  int control_dim() const { return mesh.vertex_count(); }

  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return a.dot(mass * b);
  }
  double norm(const Eigen::VectorXd& a) const;

  /// Nodal values of the source g(., xi).
  Eigen::VectorXd source_nodal(const ParameterPoint& xi) const;

  bool deterministic() const {
    return !coefficient.depends_on_xi() && !source.depends_on_xi();
  }
};

/// Assembles the mass matrix and checks alpha > 0, bound ordering, and
/// finite target values. Throws ConfigError on violations.
ProblemInstance make_problem(Mesh mesh, CoefficientModel coefficient,
                             SourceModel source, Eigen::VectorXd target,
                             double alpha, Eigen::VectorXd lower,
                             Eigen::VectorXd upper, Box xi_box);

}  // namespace saapde

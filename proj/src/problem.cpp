#include "saapde/problem.hpp"

#include <cmath>

#include "saapde/errors.hpp"

namespace saapde {

double ProblemInstance::norm(const Eigen::VectorXd& a) const {
  return std::sqrt(std::max(0.0, inner(a, a)));
}

Eigen::VectorXd ProblemInstance::source_nodal(const ParameterPoint& xi) const {
  Eigen::VectorXd g(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    g[v] = source.value(mesh.vertices.row(v).transpose(), xi, mesh.dim);
  }
  return g;
}

ProblemInstance make_problem(Mesh mesh, CoefficientModel coefficient,
                             SourceModel source, Eigen::VectorXd target,
                             double alpha, Eigen::VectorXd lower,
                             Eigen::VectorXd upper, Box xi_box) {
  const int n = mesh.vertex_count();
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (target.size() != n) throw ConfigError("target size must match vertex count");
  if (!target.allFinite()) throw ConfigError("target must be finite");
  if (lower.size() != n || upper.size() != n) {
    throw ConfigError("control bounds must match vertex count");
  }
  if ((lower.array() > upper.array()).any()) {
    throw ConfigError("control bounds need lower <= upper nodewise");
  }
  ProblemInstance prob;
  prob.mass = assemble_mass(mesh);
  prob.mesh = std::move(mesh);
  prob.coefficient = std::move(coefficient);
  prob.source = std::move(source);
  prob.target = std::move(target);
  prob.alpha = alpha;
  prob.lower = std::move(lower);
  prob.upper = std::move(upper);
  prob.xi_box = std::move(xi_box);
  return prob;
}

}  // namespace saapde

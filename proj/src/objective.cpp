#include "saapde/objective.hpp"

#include <utility>

#include "saapde/errors.hpp"
#include "saapde/parallel.hpp"

namespace saapde {

namespace {

Eigen::VectorXd interior_load(const ProblemInstance& prob,
                              const Eigen::VectorXd& density_nodal) {
  return restrict_interior(prob.mesh, prob.mass * density_nodal);
}

}  // namespace

Eigen::VectorXd state_solve(const ProblemInstance& prob, const ControlVector& z,
                            const ParameterPoint& xi) {
  FactorizedOperator op(assemble_stiffness(prob.mesh, prob.coefficient, xi));
  return op.solve(interior_load(prob, z + prob.source_nodal(xi)));
}

double integrand_value(const ProblemInstance& prob, const ControlVector& z,
                       const ParameterPoint& xi) {
  const Eigen::VectorXd u = extend_interior(prob.mesh, state_solve(prob, z, xi));
  const Eigen::VectorXd residual = u - prob.target;
  return 0.5 * prob.inner(residual, residual) + 0.5 * prob.alpha * prob.inner(z, z);
}

ControlVector integrand_gradient(const ProblemInstance& prob,
                                 const ControlVector& z,
                                 const ParameterPoint& xi) {
  FactorizedOperator op(assemble_stiffness(prob.mesh, prob.coefficient, xi));
  const Eigen::VectorXd u = extend_interior(
      prob.mesh, op.solve(interior_load(prob, z + prob.source_nodal(xi))));
  const Eigen::VectorXd adjoint =
      op.solve_transpose(interior_load(prob, u - prob.target));
  return extend_interior(prob.mesh, adjoint) + prob.alpha * z;
}

MeasureEvaluator::MeasureEvaluator(const ProblemInstance& prob,
                                   std::vector<ParameterPoint> atoms,
                                   int threads)
    : prob_(&prob), atom_points_(std::move(atoms)) {
  const int n = static_cast<int>(atom_points_.size());
  if (n == 0) throw ConfigError("measure evaluator needs at least one atom");

  const int nv = prob.mesh.vertex_count();
  const int ni = prob.mesh.interior_count();
  mass_interior_cols_.resize(ni, nv);
  for (int j = 0; j < nv; ++j) {
    mass_interior_cols_.col(j) =
        restrict_interior(prob.mesh, prob.mass * Eigen::VectorXd::Unit(nv, j));
  }
  // Interior-interior mass block: (M z_ext)|interior = M_II z for interior z.
  mass_interior_block_.resize(ni, ni);
  for (int i = 0; i < ni; ++i) {
    mass_interior_block_.col(i) = mass_interior_cols_.col(prob.mesh.interior[i]);
  }

  std::vector<std::optional<Atom>> built(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const ParameterPoint& xi = atom_points_[i];
    FactorizedOperator op(assemble_stiffness(prob.mesh, prob.coefficient, xi));
    Eigen::VectorXd g = prob.source_nodal(xi);
    const Eigen::VectorXd u0 =
        extend_interior(prob.mesh, op.solve(Eigen::VectorXd(mass_interior_cols_ * g)));
    const Eigen::VectorXd residual0 = u0 - prob.target;
    Atom atom{std::move(op), std::move(g)};
    atom.value0 = 0.5 * prob.inner(residual0, residual0);
    atom.grad0 = extend_interior(
        prob.mesh,
        atom.op.solve_transpose(Eigen::VectorXd(mass_interior_cols_ * residual0)));
    built[i].emplace(std::move(atom));
  });
  atoms_.reserve(n);
  for (auto& b : built) atoms_.push_back(std::move(*b));
}

double MeasureEvaluator::atom_value(int i, const ControlVector& z) const {
  const Atom& atom = atoms_[i];
  const Eigen::VectorXd u = extend_interior(
      prob_->mesh,
      atom.op.solve(Eigen::VectorXd(mass_interior_cols_ * (z + atom.g_nodal))));
  const Eigen::VectorXd residual = u - prob_->target;
  return 0.5 * prob_->inner(residual, residual) +
         0.5 * prob_->alpha * prob_->inner(z, z);
}

ControlVector MeasureEvaluator::atom_gradient(int i, const ControlVector& z) const {
  const Atom& atom = atoms_[i];
  const Eigen::VectorXd u = extend_interior(
      prob_->mesh,
      atom.op.solve(Eigen::VectorXd(mass_interior_cols_ * (z + atom.g_nodal))));
  const Eigen::VectorXd adjoint = atom.op.solve_transpose(
      Eigen::VectorXd(mass_interior_cols_ * (u - prob_->target)));
  return extend_interior(prob_->mesh, adjoint) + prob_->alpha * z;
}

double MeasureEvaluator::value(const Eigen::VectorXd& weights,
                               const ControlVector& z, int threads) const {
  if (weights.size() != atom_count()) {
    throw ConfigError("weight vector size must match atom count");
  }
  return blockwise_sum<double>(
      atom_count(), 0.0,
      [&](std::size_t i, double& acc) {
        if (weights[i] != 0.0) acc += weights[i] * atom_value(static_cast<int>(i), z);
      },
      threads);
}

ControlVector MeasureEvaluator::gradient(const Eigen::VectorXd& weights,
                                         const ControlVector& z,
                                         int threads) const {
  if (weights.size() != atom_count()) {
    throw ConfigError("weight vector size must match atom count");
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(prob_->control_dim());
  return blockwise_sum<Eigen::VectorXd>(
      atom_count(), zero,
      [&](std::size_t i, Eigen::VectorXd& acc) {
        if (weights[i] != 0.0) acc += weights[i] * atom_gradient(static_cast<int>(i), z);
      },
      threads);
}

void MeasureEvaluator::atom_quadratic(const Atom& atom, Eigen::MatrixXd& ts) const {
  // Tracking Hessian T S with S = E A^-1 R M and T = E A^-T R M: one state
  // and one adjoint matrix solve against all control basis vectors.
  const Mesh& mesh = prob_->mesh;
  const Eigen::MatrixXd states = atom.op.solve(mass_interior_cols_);
  const Eigen::MatrixXd adjoints =
      atom.op.solve_transpose(Eigen::MatrixXd(mass_interior_block_ * states));
  ts.setZero(mesh.vertex_count(), mesh.vertex_count());
  for (int j = 0; j < mesh.vertex_count(); ++j) {
    for (int i = 0; i < mesh.interior_count(); ++i) {
      ts(mesh.interior[i], j) = adjoints(i, j);
    }
  }
}

void MeasureEvaluator::precompute_atom_quadratics(int threads) {
  parallel_for(atoms_.size(), threads, [&](std::size_t i) {
    if (!atoms_[i].hessian_tracking) {
      Eigen::MatrixXd ts;
      atom_quadratic(atoms_[i], ts);
      atoms_[i].hessian_tracking = std::move(ts);
    }
  });
}

MeasureEvaluator::Quadratic MeasureEvaluator::compile(
    const Eigen::VectorXd& weights, int threads) const {
  if (weights.size() != atom_count()) {
    throw ConfigError("weight vector size must match atom count");
  }
  const int nv = prob_->control_dim();
  // Pack [tracking hessian | grad0 | value0] into one accumulator so a single
  // deterministic reduction covers all three pieces.
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(nv, nv + 2);
  Eigen::MatrixXd packed = blockwise_sum<Eigen::MatrixXd>(
      atom_count(), zero,
      [&](std::size_t i, Eigen::MatrixXd& acc) {
        const double w = weights[i];
        if (w == 0.0) return;
        const Atom& atom = atoms_[i];
        if (atom.hessian_tracking) {
          acc.leftCols(nv) += w * *atom.hessian_tracking;
        } else {
          thread_local Eigen::MatrixXd ts;
          atom_quadratic(atom, ts);
          acc.leftCols(nv) += w * ts;
        }
        acc.col(nv) += w * atom.grad0;
        acc(0, nv + 1) += w * atom.value0;
      },
      threads);

  Quadratic q;
  q.hessian = packed.leftCols(nv);
  q.hessian.diagonal().array() += prob_->alpha * weights.sum();
  q.grad0 = packed.col(nv);
  q.value0 = packed(0, nv + 1);
  q.prob = prob_;
  return q;
}

double MeasureEvaluator::Quadratic::value(const ControlVector& z) const {
  const Eigen::VectorXd mz = prob->mass * z;
  return value0 + grad0.dot(mz) + 0.5 * mz.dot(hessian * z);
}

ControlVector MeasureEvaluator::Quadratic::gradient(const ControlVector& z) const {
  return hessian * z + grad0;
}

double objective_value(const ProblemInstance& prob, const DiscreteMeasure& Q,
                       const ControlVector& z, int threads) {
  Q.validate();
  MeasureEvaluator eval(prob, Q.atoms, threads);
  return eval.value(Q.weights, z, threads);
}

ControlVector objective_gradient(const ProblemInstance& prob,
                                 const DiscreteMeasure& Q,
                                 const ControlVector& z, int threads) {
  Q.validate();
  MeasureEvaluator eval(prob, Q.atoms, threads);
  return eval.gradient(Q.weights, z, threads);
}

}  // namespace saapde

#include "saapde/fem.hpp"

#include <Eigen/SparseLU>
#include <string>
#include <vector>

#include "saapde/errors.hpp"

namespace saapde {

namespace {

using Triplet = Eigen::Triplet<double>;

void element_gradients(const Mesh& mesh, int e, Eigen::Matrix<double, 3, 2>& grads) {
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) {
    const double h = mesh.vertices(el[1], 0) - mesh.vertices(el[0], 0);
    grads.setZero();
    grads(0, 0) = -1.0 / h;
    grads(1, 0) = 1.0 / h;
    return;
  }
  const Eigen::Vector2d p0 = mesh.vertices.row(el[0]);
  const Eigen::Vector2d p1 = mesh.vertices.row(el[1]);
  const Eigen::Vector2d p2 = mesh.vertices.row(el[2]);
  Eigen::Matrix2d jac;
  jac.col(0) = p1 - p0;
  jac.col(1) = p2 - p0;
  Eigen::Matrix<double, 3, 2> ref;
  ref << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  grads = ref * jac.inverse();
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientModel& coeff,
                                const ParameterPoint& xi) {
  const int n = mesh.interior_count();
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.element_count() * 9);
  Eigen::Matrix<double, 3, 2> grads;
  const int nodes = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double b = coeff.value(mesh.barycenter(e), xi, mesh.dim);
    element_gradients(mesh, e, grads);
    const double vol = mesh.element_volume[e];
    const auto& el = mesh.elements[e];
    for (int a = 0; a < nodes; ++a) {
      const int ia = mesh.interior_index[el[a]];
      if (ia < 0) continue;
      for (int c = 0; c < nodes; ++c) {
        const int ic = mesh.interior_index[el[c]];
        if (ic < 0) continue;
        const double k = b * vol * grads.row(a).dot(grads.row(c));
        triplets.emplace_back(ia, ic, k);
      }
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.element_count() * 9);
  const int nodes = mesh.nodes_per_element();
  // Consistent P1 mass: vol/6 * [2 1; 1 2] in 1D, vol/12 * (ones + I) in 2D.
  const double off = mesh.dim == 1 ? 1.0 / 6.0 : 1.0 / 12.0;
  const double diag = 2.0 * off;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double vol = mesh.element_volume[e];
    const auto& el = mesh.elements[e];
    for (int a = 0; a < nodes; ++a) {
      for (int c = 0; c < nodes; ++c) {
        triplets.emplace_back(el[a], el[c], vol * (a == c ? diag : off));
      }
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(triplets.begin(), triplets.end());
  M.makeCompressed();
  return M;
}

Eigen::VectorXd assemble_load(
    const Mesh& mesh, const std::function<double(const Eigen::Vector2d&)>& density) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.interior_count());
  const int nodes = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double contribution =
        density(mesh.barycenter(e)) * mesh.element_volume[e] / nodes;
    for (int a = 0; a < nodes; ++a) {
      const int ia = mesh.interior_index[mesh.elements[e][a]];
      if (ia >= 0) load[ia] += contribution;
    }
  }
  return load;
}

FactorizedOperator::FactorizedOperator(SparseMatrix matrix)
    : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.nonZeros() == 0) {
    throw NumericError("cannot factorize an empty operator");
  }
  const double scale = matrix_.coeffs().abs().maxCoeff();
  SparseMatrix diff = SparseMatrix(matrix_.transpose()) - matrix_;
  symmetric_ =
      diff.nonZeros() == 0 || diff.coeffs().abs().maxCoeff() <= 1e-12 * scale;
  if (symmetric_) {
    cholesky_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(matrix_);
    if (cholesky_->info() != Eigen::Success) {
      throw NumericError("sparse Cholesky factorization failed (matrix not SPD?)");
    }
  } else {
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->compute(matrix_);
    if (lu_->info() != Eigen::Success) {
      throw NumericError("sparse LU factorization failed (singular matrix?)");
    }
  }
}

void FactorizedOperator::check_residual(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& rhs,
                                        bool transposed) const {
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return;
  const Eigen::VectorXd residual =
      transposed ? Eigen::VectorXd(matrix_.transpose() * x - rhs)
                 : Eigen::VectorXd(matrix_ * x - rhs);
  if (!(residual.norm() <= 1e-10 * rhs_norm)) {
    throw NumericError("linear solve residual " +
                       std::to_string(residual.norm() / rhs_norm) +
                       " exceeds 1e-10");
  }
}

Eigen::VectorXd FactorizedOperator::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = symmetric_ ? cholesky_->solve(rhs).eval() : lu_->solve(rhs).eval();
  check_residual(x, rhs, false);
  return x;
}

Eigen::MatrixXd FactorizedOperator::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x = symmetric_ ? cholesky_->solve(rhs).eval() : lu_->solve(rhs).eval();
  for (int c = 0; c < rhs.cols(); ++c) check_residual(x.col(c), rhs.col(c), false);
  return x;
}

Eigen::VectorXd FactorizedOperator::solve_transpose(const Eigen::VectorXd& rhs) const {
  if (symmetric_) return solve(rhs);
  if (!lu_transpose_) {
    lu_transpose_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_transpose_->compute(SparseMatrix(matrix_.transpose()));
    if (lu_transpose_->info() != Eigen::Success) {
      throw NumericError("sparse LU factorization of transpose failed");
    }
  }
  Eigen::VectorXd x = lu_transpose_->solve(rhs);
  check_residual(x, rhs, true);
  return x;
}

Eigen::MatrixXd FactorizedOperator::solve_transpose(const Eigen::MatrixXd& rhs) const {
  if (symmetric_) return solve(rhs);
  Eigen::MatrixXd x(rhs.rows(), rhs.cols());
  for (int c = 0; c < rhs.cols(); ++c) x.col(c) = solve_transpose(rhs.col(c));
  return x;
}

Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs) {
  return FactorizedOperator(matrix).solve(rhs);
}

Eigen::VectorXd extend_interior(const Mesh& mesh, const Eigen::VectorXd& interior) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int i = 0; i < mesh.interior_count(); ++i) full[mesh.interior[i]] = interior[i];
  return full;
}

Eigen::VectorXd restrict_interior(const Mesh& mesh, const Eigen::VectorXd& full) {
  Eigen::VectorXd interior(mesh.interior_count());
  for (int i = 0; i < mesh.interior_count(); ++i) interior[i] = full[mesh.interior[i]];
  return interior;
}

}  // namespace saapde

#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>

#include "saapde/measure.hpp"
#include "saapde/mesh.hpp"
#include "saapde/models.hpp"

namespace saapde {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Stiffness matrix A(xi) over interior P1 basis functions (homogeneous
/// Dirichlet), coefficient evaluated at element barycenters.
SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientModel& coeff,
                                const ParameterPoint& xi);

/// Consistent P1 mass matrix over all vertices.
SparseMatrix assemble_mass(const Mesh& mesh);

/// Load vector over interior vertices, barycentric midpoint quadrature.
Eigen::VectorXd assemble_load(
    const Mesh& mesh, const std::function<double(const Eigen::Vector2d&)>& density);

/// Cached direct factorization of a sparse operator. Symmetric matrices use
/// sparse Cholesky (LDLT); others fall back to sparse LU. Solves verify a
/// 1e-10 relative residual and throw NumericError past it.
class FactorizedOperator {
 public:
  explicit FactorizedOperator(SparseMatrix matrix);
  FactorizedOperator(FactorizedOperator&&) noexcept = default;
  FactorizedOperator& operator=(FactorizedOperator&&) noexcept = default;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_transpose(const Eigen::MatrixXd& rhs) const;

  const SparseMatrix& matrix() const { return matrix_; }
  bool symmetric() const { return symmetric_; }

 private:
  void check_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
                      bool transposed) const;

  SparseMatrix matrix_;
  bool symmetric_ = true;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> cholesky_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  mutable std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_transpose_;
};

/// One-shot residual-checked solve of A x = rhs.
Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs);

/// Zero-extends an interior-vertex vector to all vertices.
Eigen::VectorXd extend_interior(const Mesh& mesh, const Eigen::VectorXd& interior);

/// Restricts an all-vertex vector to interior vertices.
Eigen::VectorXd restrict_interior(const Mesh& mesh, const Eigen::VectorXd& full);

}  // namespace saapde

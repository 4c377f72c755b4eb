#include "saapde/measure.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "saapde/errors.hpp"

namespace saapde {

bool Box::contains(const ParameterPoint& xi, double tol) const {
  if (xi.size() != lower.size()) return false;
  for (int j = 0; j < xi.size(); ++j) {
    if (xi[j] < lower[j] - tol || xi[j] > upper[j] + tol) return false;
  }
  return true;
}

Box Box::uniform(int dim, double lo, double hi) {
  if (dim < 1) throw ConfigError("parameter box needs dimension >= 1");
  if (!(lo < hi)) throw ConfigError("parameter box needs lower < upper");
  Box box;
  box.lower = Eigen::VectorXd::Constant(dim, lo);
  box.upper = Eigen::VectorXd::Constant(dim, hi);
  return box;
}

void DiscreteMeasure::validate() const {
  if (atoms.empty() || weights.size() != static_cast<int>(atoms.size())) {
    throw ConfigError("discrete measure: atom/weight size mismatch");
  }
  if ((weights.array() <= 0.0).any()) {
    throw ConfigError("discrete measure: weights must be positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw ConfigError("discrete measure: weights must sum to 1, got " +
                      std::to_string(weights.sum()));
  }
  if (kind == Kind::empirical) {
    const double w = 1.0 / size();
    if ((weights.array() - w).abs().maxCoeff() > 1e-15) {
      throw ConfigError("empirical measure: weights must all equal 1/n");
    }
  }
}

DiscreteMeasure DiscreteMeasure::point_mass(ParameterPoint xi) {
  DiscreteMeasure q;
  q.kind = Kind::quadrature;
  q.atoms.push_back(std::move(xi));
  q.weights = Eigen::VectorXd::Ones(1);
  return q;
}

DiscreteMeasure sample_uniform(const Box& box, int n, RngStream stream) {
  if (n < 1) throw ConfigError("sample size must be >= 1, got " +
                               std::to_string(n));
  DiscreteMeasure out;
  out.kind = DiscreteMeasure::Kind::empirical;
  out.atoms.reserve(n);
  const int d = box.dim();
  for (int i = 0; i < n; ++i) {
    ParameterPoint xi(d);
    for (int j = 0; j < d; ++j) xi[j] = stream.uniform(box.lower[j], box.upper[j]);
    out.atoms.push_back(std::move(xi));
  }
  out.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return out;
}

DiscreteMeasure sample_uniform(const Box& box, int n, std::uint64_t seed) {
  return sample_uniform(
      box, n, RngStream(seed, RngStream::stream_id("sample", static_cast<std::uint64_t>(n))));
}

void gauss_legendre_rule(int q, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (q < 1) throw ConfigError("Gauss-Legendre rule needs q >= 1");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) {
    throw NumericError("Gauss-Legendre eigensolve failed");
  }
  nodes = eig.eigenvalues();
  weights.resize(q);
  for (int k = 0; k < q; ++k) {
    const double first = eig.eigenvectors()(0, k);
    weights[k] = 2.0 * first * first;
  }
}

DiscreteMeasure quadrature_measure(const Box& box, int nodes_per_dim) {
  const int d = box.dim();
  if (nodes_per_dim < 2) throw ConfigError("quadrature needs q >= 2");
  if (d > 3) throw ConfigError("tensor quadrature supports dimension <= 3");
  double total = std::pow(static_cast<double>(nodes_per_dim), d);
  if (total > 1e5) {
    throw ConfigError("tensor quadrature node cap of 1e5 exceeded");
  }

  Eigen::VectorXd nodes, weights;
  gauss_legendre_rule(nodes_per_dim, nodes, weights);

  DiscreteMeasure out;
  out.kind = DiscreteMeasure::Kind::quadrature;
  const int count = static_cast<int>(std::lround(total));
  out.atoms.reserve(count);
  out.weights.resize(count);
  std::vector<int> idx(d, 0);
  for (int a = 0; a < count; ++a) {
    ParameterPoint xi(d);
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      const double t = nodes[idx[j]];
      xi[j] = box.lower[j] + 0.5 * (t + 1.0) * (box.upper[j] - box.lower[j]);
      w *= 0.5 * weights[idx[j]];  // probability normalization per dimension
    }
    out.atoms.push_back(std::move(xi));
    out.weights[a] = w;
    for (int j = 0; j < d; ++j) {
      if (++idx[j] < nodes_per_dim) break;
      idx[j] = 0;
    }
  }
  return out;
}

DiscreteMeasure submeasure(const DiscreteMeasure& parent,
                           const std::vector<int>& indices) {
  if (indices.empty()) throw ConfigError("submeasure: empty index set");
  DiscreteMeasure out;
  out.kind = DiscreteMeasure::Kind::empirical;
  out.atoms.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || i >= parent.size()) {
      throw ConfigError("submeasure: index out of range");
    }
    out.atoms.push_back(parent.atoms[i]);
  }
  out.weights =
      Eigen::VectorXd::Constant(indices.size(), 1.0 / indices.size());
  return out;
}

}  // namespace saapde

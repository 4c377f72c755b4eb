#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace saapde {

enum class Domain { interval, square };

/// Conforming P1 mesh of (0,1) or (0,1)^2 with homogeneous-Dirichlet
/// bookkeeping. Elements are segments (1D) or right triangles (2D, two per
/// grid cell); vertex 2 of a segment element is unused.
struct Mesh {
  int dim = 1;
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;  // column 1 unused in 1D
  std::vector<std::array<int, 3>> elements;
  std::vector<bool> boundary;      // true for vertices on the domain boundary
  Eigen::VectorXd element_volume;  // length or area, positive
  std::vector<int> interior;       // interior vertex ids, ascending
  std::vector<int> interior_index; // vertex id -> interior position or -1
  double spacing = 0.0;            // uniform grid spacing h

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  int interior_count() const { return static_cast<int>(interior.size()); }
  int nodes_per_element() const { return dim + 1; }

  Eigen::Vector2d barycenter(int element) const;
};

/// Uniform mesh with spacing h = 1/resolution. Throws ConfigError for
/// resolution < 2.
Mesh build_mesh(Domain domain, int resolution);

Domain parse_domain(const std::string& name);
std::string domain_name(Domain domain);

}  // namespace saapde

#include "saapde/mesh.hpp"

#include <string>

#include "saapde/errors.hpp"

namespace saapde {

Eigen::Vector2d Mesh::barycenter(int element) const {
  const auto& e = elements[element];
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  const int nodes = nodes_per_element();
  for (int k = 0; k < nodes; ++k) c += vertices.row(e[k]).transpose();
  return c / nodes;
}

namespace {

Mesh build_interval(int r) {
  Mesh mesh;
  mesh.dim = 1;
  mesh.spacing = 1.0 / r;
  mesh.vertices.resize(r + 1, 2);
  mesh.boundary.assign(r + 1, false);
  for (int i = 0; i <= r; ++i) {
    mesh.vertices(i, 0) = static_cast<double>(i) / r;
    mesh.vertices(i, 1) = 0.0;
  }
  mesh.boundary[0] = mesh.boundary[r] = true;
  mesh.elements.reserve(r);
  mesh.element_volume.resize(r);
  for (int e = 0; e < r; ++e) {
    mesh.elements.push_back({e, e + 1, -1});
    mesh.element_volume[e] = mesh.spacing;
  }
  return mesh;
}

Mesh build_square(int r) {
  Mesh mesh;
  mesh.dim = 2;
  mesh.spacing = 1.0 / r;
  const int nv = (r + 1) * (r + 1);
  mesh.vertices.resize(nv, 2);
  mesh.boundary.assign(nv, false);
  auto vid = [r](int i, int j) { return j * (r + 1) + i; };
  for (int j = 0; j <= r; ++j) {
    for (int i = 0; i <= r; ++i) {
      const int v = vid(i, j);
      mesh.vertices(v, 0) = static_cast<double>(i) / r;
      mesh.vertices(v, 1) = static_cast<double>(j) / r;
      if (i == 0 || i == r || j == 0 || j == r) mesh.boundary[v] = true;
    }
  }
  // Each grid cell is split along its lower-left/upper-right diagonal.
  mesh.elements.reserve(2 * r * r);
  mesh.element_volume.resize(2 * r * r);
  const double area = 0.5 * mesh.spacing * mesh.spacing;
  int e = 0;
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) {
      mesh.elements.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.element_volume[e++] = area;
      mesh.elements.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      mesh.element_volume[e++] = area;
    }
  }
  return mesh;
}

}  // namespace

Mesh build_mesh(Domain domain, int resolution) {
  if (resolution < 2) {
    throw ConfigError("build_mesh: resolution must be at least 2, got " +
                      std::to_string(resolution));
  }
  Mesh mesh = domain == Domain::interval ? build_interval(resolution)
                                         : build_square(resolution);
  mesh.interior_index.assign(mesh.vertex_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.boundary[v]) {
      mesh.interior_index[v] = static_cast<int>(mesh.interior.size());
      mesh.interior.push_back(v);
    }
  }
  return mesh;
}

Domain parse_domain(const std::string& name) {
  if (name == "interval") return Domain::interval;
  if (name == "square") return Domain::square;
  throw ConfigError("unknown domain '" + name + "' (expected interval|square)");
}

std::string domain_name(Domain domain) {
  return domain == Domain::interval ? "interval" : "square";
}

}  // namespace saapde

#include "clonar/generation/mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "clonar/error.hpp"

namespace clonar {

void Mesh::checkStructure() const {
  const std::size_t n = vertices.size();
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
      fail(ErrorCode::InvalidMesh, "non-finite vertex coordinate");
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& t = faces[f];
    if (t[0] >= n || t[1] >= n || t[2] >= n) {
      fail(ErrorCode::InvalidMesh, "face " + std::to_string(f) + " index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      fail(ErrorCode::InvalidMesh, "face " + std::to_string(f) + " repeats a vertex");
    }
  }
  if (normals && normals->size() != n) {
    fail(ErrorCode::InvalidMesh, "normal count differs from vertex count");
  }
}

double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double signedVolume(const Mesh& m) {
  double six = 0.0;
  for (const auto& f : m.faces) {
    const Vec3& a = m.vertices[f[0]];
    const Vec3& b = m.vertices[f[1]];
    const Vec3& c = m.vertices[f[2]];
    six += a.dot(b.cross(c));
  }
  return six / 6.0;
}

ValidationReport validateMesh(const Mesh& m) {
  m.checkStructure();
  ValidationReport r;

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edgeUse;
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      std::uint32_t a = f[static_cast<std::size_t>(k)];
      std::uint32_t b = f[static_cast<std::size_t>((k + 1) % 3)];
      if (a > b) std::swap(a, b);
      ++edgeUse[{a, b}];
    }
    if (triangleArea(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]) < kDegenerateAreaM2) {
      ++r.degenerateFaces;
    }
  }
  for (const auto& [edge, uses] : edgeUse) {
    if (uses == 1) ++r.boundaryEdges;
    if (uses > 2) ++r.nonManifoldEdges;
  }
  r.isManifoldEdge = r.nonManifoldEdges == 0;

  if (!m.vertices.empty()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    r.boundsMin = {inf, inf, inf};
    r.boundsMax = {-inf, -inf, -inf};
    for (const auto& v : m.vertices) {
      r.boundsMin = {std::min(r.boundsMin.x, v.x), std::min(r.boundsMin.y, v.y),
                     std::min(r.boundsMin.z, v.z)};
      r.boundsMax = {std::max(r.boundsMax.x, v.x), std::max(r.boundsMax.y, v.y),
                     std::max(r.boundsMax.z, v.z)};
    }
  }
  r.volume = signedVolume(m);
  return r;
}

}  // namespace clonar

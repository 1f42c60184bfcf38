#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace clonar {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh, coordinates in metres.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::vector<Vec3>> normals;  // per vertex

  std::size_t vertexCount() const { return vertices.size(); }
  std::size_t faceCount() const { return faces.size(); }

  /// Throws InvalidMesh on out-of-range or repeated indices, non-finite
  /// coordinates, or a normals array of the wrong length.
  void checkStructure() const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

struct ValidationReport {
  bool isManifoldEdge = true;  // every edge shared by at most two faces
  std::size_t boundaryEdges = 0;
  std::size_t nonManifoldEdges = 0;
  std::size_t degenerateFaces = 0;  // area < 1e-12 m^2
  Vec3 boundsMin;
  Vec3 boundsMax;
  double volume = 0.0;  // signed, divergence theorem

  bool isClosed() const { return isManifoldEdge && boundaryEdges == 0; }
};

inline constexpr double kDegenerateAreaM2 = 1e-12;

double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c);
double signedVolume(const Mesh& m);

/// Calls checkStructure() first.
ValidationReport validateMesh(const Mesh& m);

}  // namespace clonar

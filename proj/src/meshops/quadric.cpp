#include "clonar/meshops/quadric.hpp"

#include <cmath>
#include <string>

#include "clonar/error.hpp"

namespace clonar::meshops {

namespace {

constexpr int kIndex[4][4] = {
    {0, 1, 2, 3},
    {1, 4, 5, 6},
    {2, 5, 7, 8},
    {3, 6, 8, 9},
};

}  // namespace

Quadric Quadric::fromPlane(double a, double b, double c, double d) {
  Quadric q;
  q.q_ = {a * a, a * b, a * c, a * d, b * b, b * c, b * d, c * c, c * d, d * d};
  return q;
}

Quadric& Quadric::operator+=(const Quadric& o) {
  for (std::size_t i = 0; i < q_.size(); ++i) q_[i] += o.q_[i];
  return *this;
}

Quadric Quadric::operator*(double s) const {
  Quadric r(*this);
  for (auto& v : r.q_) v *= s;
  return r;
}

double Quadric::at(int row, int col) const { return q_[static_cast<std::size_t>(kIndex[row][col])]; }

double Quadric::evaluate(const Vec3& p) const {
  const auto& q = q_;
  return q[0] * p.x * p.x + 2 * q[1] * p.x * p.y + 2 * q[2] * p.x * p.z + 2 * q[3] * p.x +
         q[4] * p.y * p.y + 2 * q[5] * p.y * p.z + 2 * q[6] * p.y + q[7] * p.z * p.z +
         2 * q[8] * p.z + q[9];
}

double Quadric::det3() const {
  const auto& q = q_;
  return q[0] * (q[4] * q[7] - q[5] * q[5]) - q[1] * (q[1] * q[7] - q[5] * q[2]) +
         q[2] * (q[1] * q[5] - q[4] * q[2]);
}

bool Quadric::optimum(Vec3& out, double detEpsilon) const {
  const double det = det3();
  if (!(std::fabs(det) >= detEpsilon)) return false;
  const auto& q = q_;
  // Solve A x = -b by Cramer's rule; A is the symmetric 3x3 block.
  const double b0 = -q[3], b1 = -q[6], b2 = -q[8];
  const double dx = b0 * (q[4] * q[7] - q[5] * q[5]) - q[1] * (b1 * q[7] - q[5] * b2) +
                    q[2] * (b1 * q[5] - q[4] * b2);
  const double dy = q[0] * (b1 * q[7] - b2 * q[5]) - b0 * (q[1] * q[7] - q[5] * q[2]) +
                    q[2] * (q[1] * b2 - b1 * q[2]);
  const double dz = q[0] * (q[4] * b2 - q[5] * b1) - q[1] * (q[1] * b2 - b1 * q[2]) +
                    b0 * (q[1] * q[5] - q[4] * q[2]);
  out = {dx / det, dy / det, dz / det};
  return std::isfinite(out.x) && std::isfinite(out.y) && std::isfinite(out.z);
}

std::vector<Quadric> computeQuadrics(const Mesh& m, bool skipDegenerate) {
  m.checkStructure();
  std::vector<Quadric> out(m.vertices.size());
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& t = m.faces[f];
    const Vec3& a = m.vertices[t[0]];
    const Vec3& b = m.vertices[t[1]];
    const Vec3& c = m.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (0.5 * len < kDegenerateAreaM2) {
      if (skipDegenerate) continue;
      fail(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has zero area");
    }
    const Vec3 u = n * (1.0 / len);
    const Quadric k = Quadric::fromPlane(u.x, u.y, u.z, -u.dot(a));
    for (const auto v : t) out[v] += k;
  }
  return out;
}

}  // namespace clonar::meshops

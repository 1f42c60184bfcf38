#pragma once

#include <array>
#include <vector>

#include "clonar/generation/mesh.hpp"

namespace clonar::meshops {

/// Symmetric 4x4 error quadric stored as its upper triangle:
/// [a2 ab ac ad b2 bc bd c2 cd d2].
class Quadric {
 public:
  Quadric() { q_.fill(0.0); }

  /// Fundamental quadric of the plane a*x + b*y + c*z + d = 0.
  static Quadric fromPlane(double a, double b, double c, double d);

  Quadric& operator+=(const Quadric& o);
  Quadric operator+(const Quadric& o) const { return Quadric(*this) += o; }
  Quadric operator*(double s) const;

  /// v^T Q v for v = (p, 1).
  double evaluate(const Vec3& p) const;

  /// Entry (row, col) of the full symmetric matrix.
  double at(int row, int col) const;

  /// Determinant of the upper-left 3x3 block.
  double det3() const;

  /// Minimiser of evaluate(); false when |det3| < detEpsilon.
  bool optimum(Vec3& out, double detEpsilon = 1e-12) const;

  const std::array<double, 10>& coefficients() const { return q_; }

 private:
  std::array<double, 10> q_;
};

/// Per-vertex sum of incident face-plane quadrics. Faces below the
/// degenerate-area threshold are skipped, or raise DegenerateFace when
/// skipDegenerate is false.
std::vector<Quadric> computeQuadrics(const Mesh& m, bool skipDegenerate = true);

}  // namespace clonar::meshops

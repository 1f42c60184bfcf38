#include "clonar/meshops/decimate.hpp"

#include <algorithm>
#include <iterator>
#include <queue>
#include <set>

#include "clonar/error.hpp"
#include "clonar/meshops/quadric.hpp"

namespace clonar::meshops {

namespace {

constexpr double kBoundaryWeight = 1e3;
constexpr std::uint32_t kNone = ~std::uint32_t{0};

struct Candidate {
  double cost;
  std::uint32_t u, v;
  std::uint64_t verU, verV;
  Vec3 target;

  // Min-heap on cost, then vertex ids for determinism.
  bool operator<(const Candidate& o) const {
    if (cost != o.cost) return cost > o.cost;
    if (u != o.u) return u > o.u;
    return v > o.v;
  }
};

class Decimator {
 public:
  Decimator(const Mesh& m, const DecimationParams& p) : params_(p) {
    pos_ = m.vertices;
    faces_ = m.faces;
    faceAlive_.assign(faces_.size(), true);
    incident_.resize(pos_.size());
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
      for (const auto v : faces_[f]) incident_[v].push_back(f);
    }
    version_.assign(pos_.size(), 0);
    for (const auto& inc : incident_) {
      if (!inc.empty()) ++alive_;
    }

    quadrics_ = computeQuadrics(m);
    addBoundaryConstraints();
  }

  Mesh run(DecimationStats& stats) {
    while (alive_ > params_.targetVertices) {
      const std::size_t before = stats.collapses;
      rebuildHeap();
      bool stoppedOnError = false;
      while (!heap_.empty() && alive_ > params_.targetVertices) {
        const Candidate c = heap_.top();
        heap_.pop();
        if (incident_[c.u].empty() || incident_[c.v].empty() || version_[c.u] != c.verU ||
            version_[c.v] != c.verV) {
          continue;
        }
        if (params_.maxError && c.cost > *params_.maxError) {
          stoppedOnError = true;
          break;
        }
        if (!legal(c.u, c.v, c.target)) {
          ++stats.rejected;
          continue;
        }
        collapse(c.u, c.v, c.target);
        ++stats.collapses;
        stats.maxCollapseCost = std::max(stats.maxCollapseCost, c.cost);
        stats.collapseCosts.push_back(c.cost);
        for (const auto w : neighbours(c.u)) push(c.u, w);
      }
      if (stoppedOnError || stats.collapses == before) break;
    }
    return compact();
  }

 private:
  std::uint32_t third(const Face& f, std::uint32_t a, std::uint32_t b) const {
    for (const auto x : f) {
      if (x != a && x != b) return x;
    }
    return kNone;
  }

  static bool contains(const Face& f, std::uint32_t v) {
    return f[0] == v || f[1] == v || f[2] == v;
  }

  std::set<std::uint32_t> neighbours(std::uint32_t v) const {
    std::set<std::uint32_t> out;
    for (const auto f : incident_[v]) {
      for (const auto x : faces_[f]) {
        if (x != v) out.insert(x);
      }
    }
    return out;
  }

  std::size_t facesOnEdge(std::uint32_t a, std::uint32_t b) const {
    std::size_t n = 0;
    for (const auto f : incident_[a]) {
      if (contains(faces_[f], b)) ++n;
    }
    return n;
  }

  bool isBoundaryVertex(std::uint32_t v) const {
    for (const auto w : neighbours(v)) {
      if (facesOnEdge(v, w) == 1) return true;
    }
    return false;
  }

  void addBoundaryConstraints() {
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
      const auto& t = faces_[f];
      const Vec3 n = (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
      if (n.norm() < 2 * kDegenerateAreaM2) continue;
      const Vec3 nu = n * (1.0 / n.norm());
      for (int k = 0; k < 3; ++k) {
        const auto a = t[static_cast<std::size_t>(k)];
        const auto b = t[static_cast<std::size_t>((k + 1) % 3)];
        if (facesOnEdge(a, b) != 1) continue;
        const Vec3 e = pos_[b] - pos_[a];
        Vec3 perp = e.cross(nu);
        const double len = perp.norm();
        if (len == 0.0) continue;
        perp = perp * (1.0 / len);
        const Quadric q =
            Quadric::fromPlane(perp.x, perp.y, perp.z, -perp.dot(pos_[a])) * kBoundaryWeight;
        quadrics_[a] += q;
        quadrics_[b] += q;
      }
    }
  }

  void push(std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    const auto u = std::min(a, b), v = std::max(a, b);
    const Quadric q = quadrics_[u] + quadrics_[v];
    Vec3 target;
    double cost;
    if (q.optimum(target)) {
      cost = q.evaluate(target);
    } else {
      const Vec3 options[3] = {pos_[u], pos_[v], (pos_[u] + pos_[v]) * 0.5};
      target = options[0];
      cost = q.evaluate(options[0]);
      for (int i = 1; i < 3; ++i) {
        const double c = q.evaluate(options[i]);
        if (c < cost) {
          cost = c;
          target = options[i];
        }
      }
    }
    heap_.push({std::max(cost, 0.0), u, v, version_[u], version_[v], target});
  }

  void rebuildHeap() {
    heap_ = {};
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
      if (!faceAlive_[f]) continue;
      const auto& t = faces_[f];
      for (int k = 0; k < 3; ++k) {
        auto a = t[static_cast<std::size_t>(k)];
        auto b = t[static_cast<std::size_t>((k + 1) % 3)];
        if (a > b) std::swap(a, b);
        if (seen.insert({a, b}).second) push(a, b);
      }
    }
  }

  bool legal(std::uint32_t u, std::uint32_t v, const Vec3& target) const {
    std::vector<std::uint32_t> shared;
    std::set<std::uint32_t> opposite;
    for (const auto f : incident_[u]) {
      if (contains(faces_[f], v)) {
        shared.push_back(f);
        opposite.insert(third(faces_[f], u, v));
      }
    }
    if (shared.empty() || shared.size() > 2) return false;

    const bool boundaryU = isBoundaryVertex(u);
    const bool boundaryV = isBoundaryVertex(v);
    if (params_.preserveBoundary && (boundaryU || boundaryV)) return false;
    if (shared.size() == 2 && boundaryU && boundaryV) return false;  // would pinch

    // Link condition: common neighbours are exactly the opposite vertices.
    const auto nu = neighbours(u);
    const auto nv = neighbours(v);
    std::set<std::uint32_t> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(),
                          std::inserter(common, common.begin()));
    if (common != opposite) return false;

    // No surviving face may duplicate another after v is merged into u.
    std::set<std::array<std::uint32_t, 3>> uFaces;
    for (const auto f : incident_[u]) {
      if (contains(faces_[f], v)) continue;
      auto t = faces_[f];
      std::sort(t.begin(), t.end());
      uFaces.insert(t);
    }
    for (const auto f : incident_[v]) {
      if (contains(faces_[f], u)) continue;
      auto t = faces_[f];
      for (auto& x : t) {
        if (x == v) x = u;
      }
      std::sort(t.begin(), t.end());
      if (uFaces.count(t) != 0) return false;
    }

    // Reject flipped or degenerate surviving faces.
    auto check = [&](std::uint32_t f) {
      const auto& t = faces_[f];
      Vec3 before[3], after[3];
      for (int k = 0; k < 3; ++k) {
        const auto x = t[static_cast<std::size_t>(k)];
        before[k] = pos_[x];
        after[k] = (x == u || x == v) ? target : pos_[x];
      }
      const Vec3 n0 = (before[1] - before[0]).cross(before[2] - before[0]);
      const Vec3 n1 = (after[1] - after[0]).cross(after[2] - after[0]);
      if (0.5 * n1.norm() < kDegenerateAreaM2) return false;
      return n0.dot(n1) >= 0.0;
    };
    for (const auto f : incident_[u]) {
      if (!contains(faces_[f], v) && !check(f)) return false;
    }
    for (const auto f : incident_[v]) {
      if (!contains(faces_[f], u) && !check(f)) return false;
    }
    return true;
  }

  void detach(std::uint32_t f) {
    faceAlive_[f] = false;
    for (const auto x : faces_[f]) {
      auto& inc = incident_[x];
      inc.erase(std::remove(inc.begin(), inc.end(), f), inc.end());
    }
  }

  void collapse(std::uint32_t u, std::uint32_t v, const Vec3& target) {
    std::vector<std::uint32_t> shared;
    for (const auto f : incident_[u]) {
      if (contains(faces_[f], v)) shared.push_back(f);
    }
    for (const auto f : shared) detach(f);

    for (const auto f : incident_[v]) {
      for (auto& x : faces_[f]) {
        if (x == v) x = u;
      }
      incident_[u].push_back(f);
    }
    incident_[v].clear();
    pos_[u] = target;
    quadrics_[u] += quadrics_[v];
    ++version_[u];
    ++version_[v];
    --alive_;
    // Opposite vertices can be orphaned only on tiny open meshes.
    for (const auto f : shared) {
      for (const auto x : faces_[f]) {
        if (x != u && x != v && incident_[x].empty()) --alive_;
      }
    }
  }

  Mesh compact() const {
    Mesh out;
    std::vector<std::uint32_t> remap(pos_.size(), kNone);
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
      if (!faceAlive_[f]) continue;
      Face t{};
      for (int k = 0; k < 3; ++k) {
        const auto x = faces_[f][static_cast<std::size_t>(k)];
        if (remap[x] == kNone) {
          remap[x] = static_cast<std::uint32_t>(out.vertices.size());
          out.vertices.push_back(pos_[x]);
        }
        t[static_cast<std::size_t>(k)] = remap[x];
      }
      out.faces.push_back(t);
    }
    return out;
  }

  DecimationParams params_;
  std::vector<Vec3> pos_;
  std::vector<Face> faces_;
  std::vector<bool> faceAlive_;
  std::vector<std::vector<std::uint32_t>> incident_;
  std::vector<std::uint64_t> version_;
  std::vector<Quadric> quadrics_;
  std::priority_queue<Candidate> heap_;
  std::size_t alive_ = 0;
};

}  // namespace

Mesh decimate(const Mesh& m, const DecimationParams& p, DecimationStats* stats) {
  if (p.targetVertices < 4) {
    fail(ErrorCode::TargetTooSmall, "target vertex count must be at least 4");
  }
  const auto report = validateMesh(m);
  if (!report.isManifoldEdge) {
    fail(ErrorCode::NotManifold, std::to_string(report.nonManifoldEdges) +
                                     " edges are shared by more than two faces");
  }
  DecimationStats local;
  DecimationStats& s = stats ? *stats : local;
  s = {};
  if (p.targetVertices >= m.vertexCount()) return m;
  Decimator d(m, p);
  return d.run(s);
}

}  // namespace clonar::meshops

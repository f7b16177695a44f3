#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "swarm_pe/common.hpp"

namespace swarm_pe {

using Point2 = Eigen::Vector2d;

inline double cross2(const Point2& a, const Point2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

struct Segment {
  Point2 a;
  Point2 b;

  double length() const { return (b - a).norm(); }
  Point2 centroid() const { return 0.5 * (a + b); }
};

// Convex polygon with counter-clockwise vertex order. Construction
// normalizes orientation, drops near-duplicate vertices and rejects
// degenerate or non-convex input.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point2> vertices);

  static ConvexPolygon box(const Point2& lo, const Point2& hi);

  const std::vector<Point2>& vertices() const { return vertices_; }
  int size() const { return static_cast<int>(vertices_.size()); }

  // Signed-distance style membership test; tol is in arena units.
  bool contains(const Point2& q, double tol = kGeomTol) const;

  // Euclidean projection onto the polygon (identity for interior points).
  Point2 project(const Point2& q) const;

 private:
  std::vector<Point2> vertices_;
};

double polygon_area(const ConvexPolygon& p);
Point2 polygon_centroid(const ConvexPolygon& p);

// Voronoi tessellation of `sites` clipped to a bounded convex domain.
// cells[i] is owned by sites[i]; shared_edges is keyed by (i, j) with i < j.
struct VoronoiDiagram {
  std::vector<Point2> sites;
  std::vector<ConvexPolygon> cells;
  std::vector<std::vector<int>> neighbors;
  std::map<std::pair<int, int>, Segment> shared_edges;
};

// Half-plane intersection per site: cell_i = domain clipped against the
// perpendicular bisector of (i, j) for every other site j. Sites must be
// pairwise distinct beyond kGeomTol and lie inside the domain. Shared edges
// shorter than kGeomTol are treated as non-adjacent.
VoronoiDiagram clipped_voronoi(const std::vector<Point2>& sites,
                               const ConvexPolygon& domain);

// Common edge of cells i and j, or nullopt when not Voronoi-adjacent.
std::optional<Segment> shared_edge(const VoronoiDiagram& d, int i, int j);

// Index of the site nearest to q (lowest index wins ties).
int nearest_site(const std::vector<Point2>& sites, const Point2& q);

}  // namespace swarm_pe

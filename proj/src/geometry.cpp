#include "swarm_pe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace swarm_pe {

namespace {

double signed_area(const std::vector<Point2>& v) {
  double s = 0.0;
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) s += cross2(v[i], v[(i + 1) % n]);
  return 0.5 * s;
}

std::vector<Point2> drop_near_duplicates(std::vector<Point2> v) {
  std::vector<Point2> out;
  for (const Point2& p : v) {
    if (out.empty() || (p - out.back()).norm() > kGeomTol) out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= kGeomTol)
    out.pop_back();
  return out;
}

// Keeps the side {q : n.dot(q - m) <= 0} of a convex polygon.
std::vector<Point2> clip_halfplane(const std::vector<Point2>& poly,
                                   const Point2& m, const Point2& n) {
  std::vector<Point2> out;
  int k = static_cast<int>(poly.size());
  out.reserve(k + 2);
  for (int i = 0; i < k; ++i) {
    const Point2& cur = poly[i];
    const Point2& nxt = poly[(i + 1) % k];
    double dc = n.dot(cur - m);
    double dn = n.dot(nxt - m);
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn <= 0.0)) {
      double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

Point2 closest_on_segment(const Point2& a, const Point2& b, const Point2& q) {
  Point2 d = b - a;
  double len2 = d.squaredNorm();
  if (len2 <= kGeomTol * kGeomTol) return a;
  double t = std::clamp((q - a).dot(d) / len2, 0.0, 1.0);
  return a + t * d;
}

// Intersection of a convex polygon with the line m + t*dir, as a parameter
// interval. Returns false when the line misses the polygon.
bool line_chord(const ConvexPolygon& poly, const Point2& m, const Point2& dir,
                double& lo, double& hi) {
  lo = -std::numeric_limits<double>::max();
  hi = std::numeric_limits<double>::max();
  const auto& v = poly.vertices();
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    Point2 e = v[(i + 1) % n] - v[i];
    double b = cross2(e, dir);
    double a = cross2(e, m - v[i]);
    double par_tol = 1e-12 * std::max(1.0, e.norm());
    if (b > par_tol) {
      lo = std::max(lo, -a / b);
    } else if (b < -par_tol) {
      hi = std::min(hi, -a / b);
    } else if (a < -par_tol) {
      return false;  // parallel and outside
    }
  }
  return lo <= hi;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) {
  vertices_ = drop_near_duplicates(std::move(vertices));
  if (vertices_.size() < 3)
    throw DegeneracyError("polygon needs at least 3 distinct vertices");
  double area = signed_area(vertices_);
  if (std::abs(area) <= kGeomTol * kGeomTol)
    throw DegeneracyError("polygon area vanishes");
  if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());

  int n = static_cast<int>(vertices_.size());
  for (int i = 0; i < n; ++i) {
    Point2 e1 = vertices_[(i + 1) % n] - vertices_[i];
    Point2 e2 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    double tol = kGeomTol * std::max(1.0, e1.norm() * e2.norm());
    if (cross2(e1, e2) < -tol)
      throw DegeneracyError("polygon is not convex");
  }
}

ConvexPolygon ConvexPolygon::box(const Point2& lo, const Point2& hi) {
  return ConvexPolygon({{lo.x(), lo.y()},
                        {hi.x(), lo.y()},
                        {hi.x(), hi.y()},
                        {lo.x(), hi.y()}});
}

bool ConvexPolygon::contains(const Point2& q, double tol) const {
  int n = static_cast<int>(vertices_.size());
  for (int i = 0; i < n; ++i) {
    Point2 e = vertices_[(i + 1) % n] - vertices_[i];
    // cross = |e| * signed distance of q from the edge line
    if (cross2(e, q - vertices_[i]) < -tol * e.norm()) return false;
  }
  return true;
}

Point2 ConvexPolygon::project(const Point2& q) const {
  if (contains(q, 0.0)) return q;
  int n = static_cast<int>(vertices_.size());
  Point2 best = vertices_[0];
  double best_d2 = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) {
    Point2 c = closest_on_segment(vertices_[i], vertices_[(i + 1) % n], q);
    double d2 = (c - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

double polygon_area(const ConvexPolygon& p) {
  return signed_area(p.vertices());  // positive: vertices are CCW
}

Point2 polygon_centroid(const ConvexPolygon& p) {
  const auto& v = p.vertices();
  int n = static_cast<int>(v.size());
  double a = 0.0;
  Point2 c = Point2::Zero();
  for (int i = 0; i < n; ++i) {
    double w = cross2(v[i], v[(i + 1) % n]);
    a += w;
    c += w * (v[i] + v[(i + 1) % n]);
  }
  return c / (3.0 * a);
}

VoronoiDiagram clipped_voronoi(const std::vector<Point2>& sites,
                               const ConvexPolygon& domain) {
  int n = static_cast<int>(sites.size());
  if (n < 1) throw DomainError("clipped_voronoi: no sites");
  for (int i = 0; i < n; ++i) {
    if (!sites[i].allFinite())
      throw DomainError("clipped_voronoi: non-finite site coordinates");
    if (!domain.contains(sites[i]))
      throw DomainError("clipped_voronoi: site outside domain");
    for (int j = i + 1; j < n; ++j) {
      if ((sites[i] - sites[j]).norm() < kGeomTol)
        throw CoincidentSitesError("clipped_voronoi: coincident sites");
    }
  }

  VoronoiDiagram d;
  d.sites = sites;
  d.cells.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<Point2> poly = domain.vertices();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      Point2 m = 0.5 * (sites[i] + sites[j]);
      poly = clip_halfplane(poly, m, sites[j] - sites[i]);
    }
    d.cells.emplace_back(std::move(poly));
  }

  d.neighbors.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Point2 m = 0.5 * (sites[i] + sites[j]);
      Point2 nrm = sites[j] - sites[i];
      Point2 dir = Point2(-nrm.y(), nrm.x()).normalized();
      double lo_i, hi_i, lo_j, hi_j;
      if (!line_chord(d.cells[i], m, dir, lo_i, hi_i)) continue;
      if (!line_chord(d.cells[j], m, dir, lo_j, hi_j)) continue;
      double lo = std::max(lo_i, lo_j);
      double hi = std::min(hi_i, hi_j);
      if (hi - lo <= kGeomTol) continue;  // point contact is not adjacency
      d.neighbors[i].push_back(j);
      d.neighbors[j].push_back(i);
      d.shared_edges.emplace(std::make_pair(i, j),
                             Segment{m + lo * dir, m + hi * dir});
    }
  }
  return d;
}

std::optional<Segment> shared_edge(const VoronoiDiagram& d, int i, int j) {
  int n = static_cast<int>(d.sites.size());
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw DomainError("shared_edge: site index out of range");
  if (i == j) throw DomainError("shared_edge: i == j");
  auto it = d.shared_edges.find({std::min(i, j), std::max(i, j)});
  if (it == d.shared_edges.end()) return std::nullopt;
  return it->second;
}

int nearest_site(const std::vector<Point2>& sites, const Point2& q) {
  int best = 0;
  double best_d2 = (sites[0] - q).squaredNorm();
  for (int i = 1; i < static_cast<int>(sites.size()); ++i) {
    double d2 = (sites[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace swarm_pe

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "swarm_pe/geometry.hpp"
#include "swarm_pe/rng.hpp"

using namespace swarm_pe;

namespace {

const ConvexPolygon kArena = ConvexPolygon::box({0, 0}, {10, 10});

std::vector<Point2> random_sites(int n, Rng& rng, double margin = 0.2) {
  std::vector<Point2> sites;
  while (static_cast<int>(sites.size()) < n) {
    Point2 p{rng.uniform(margin, 10 - margin), rng.uniform(margin, 10 - margin)};
    bool ok = true;
    for (const Point2& s : sites)
      if ((s - p).norm() < 1e-3) ok = false;
    if (ok) sites.push_back(p);
  }
  return sites;
}

}  // namespace

TEST_CASE("polygon area") {
  CHECK(polygon_area(ConvexPolygon::box({0, 0}, {1, 1})) == doctest::Approx(1.0));
  CHECK(polygon_area(ConvexPolygon({{0, 0}, {2, 0}, {0, 2}})) == doctest::Approx(2.0));
  CHECK(polygon_area(kArena) == doctest::Approx(100.0));
}

TEST_CASE("polygon construction rejects degenerate input") {
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 1}}), DegeneracyError);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {2, 0}}), DegeneracyError);
  // clockwise input is normalized, not rejected
  ConvexPolygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  CHECK(polygon_area(cw) == doctest::Approx(1.0));
}

TEST_CASE("polygon centroid") {
  Point2 c1 = polygon_centroid(ConvexPolygon::box({0, 0}, {1, 1}));
  CHECK(c1.x() == doctest::Approx(0.5));
  CHECK(c1.y() == doctest::Approx(0.5));

  Point2 c2 = polygon_centroid(ConvexPolygon({{0, 0}, {3, 0}, {0, 3}}));
  CHECK(c2.x() == doctest::Approx(1.0));
  CHECK(c2.y() == doctest::Approx(1.0));

  Point2 c3 = polygon_centroid(ConvexPolygon::box({5, 0}, {10, 10}));
  CHECK(c3.x() == doctest::Approx(7.5));
  CHECK(c3.y() == doctest::Approx(5.0));
}

TEST_CASE("single site owns the whole domain") {
  VoronoiDiagram d = clipped_voronoi({{5, 5}}, kArena);
  REQUIRE(d.cells.size() == 1);
  CHECK(polygon_area(d.cells[0]) == doctest::Approx(100.0));
  CHECK(d.neighbors[0].empty());
}

TEST_CASE("two sites split the square along the bisector") {
  VoronoiDiagram d = clipped_voronoi({{2, 5}, {8, 5}}, kArena);
  REQUIRE(d.cells.size() == 2);
  CHECK(polygon_area(d.cells[0]) == doctest::Approx(50.0));
  CHECK(polygon_area(d.cells[1]) == doctest::Approx(50.0));
  // left cell covers [0,5]x[0,10]
  CHECK(d.cells[0].contains({0.01, 0.01}));
  CHECK(d.cells[0].contains({4.99, 9.99}));
  CHECK_FALSE(d.cells[0].contains({5.01, 5.0}));

  auto e = shared_edge(d, 0, 1);
  REQUIRE(e.has_value());
  CHECK(e->length() == doctest::Approx(10.0));
  CHECK(e->centroid().x() == doctest::Approx(5.0));
  CHECK(e->centroid().y() == doctest::Approx(5.0));
  double ymin = std::min(e->a.y(), e->b.y());
  double ymax = std::max(e->a.y(), e->b.y());
  CHECK(ymin == doctest::Approx(0.0));
  CHECK(ymax == doctest::Approx(10.0));
}

TEST_CASE("three sites meeting at an interior point are pairwise adjacent") {
  VoronoiDiagram d = clipped_voronoi({{1, 1}, {9, 1}, {5, 9}}, kArena);
  CHECK(shared_edge(d, 0, 1).has_value());
  CHECK(shared_edge(d, 0, 2).has_value());
  CHECK(shared_edge(d, 1, 2).has_value());
}

TEST_CASE("collinear far sites are separated by the middle cell") {
  VoronoiDiagram d = clipped_voronoi({{1, 5}, {5, 5}, {9, 5}}, kArena);
  CHECK(shared_edge(d, 0, 1).has_value());
  CHECK(shared_edge(d, 1, 2).has_value());
  CHECK_FALSE(shared_edge(d, 0, 2).has_value());
}

TEST_CASE("voronoi input validation") {
  CHECK_THROWS_AS(clipped_voronoi({}, kArena), DomainError);
  CHECK_THROWS_AS(clipped_voronoi({{5, 5}, {5, 5 + 1e-12}}, kArena),
                  CoincidentSitesError);
  CHECK_THROWS_AS(clipped_voronoi({{5, 5}, {11, 5}}, kArena), DomainError);
  CHECK_THROWS_AS(shared_edge(clipped_voronoi({{5, 5}}, kArena), 0, 0),
                  DomainError);
}

TEST_CASE("six random sites tile the square and match the sampling oracle") {
  Rng rng(42);
  std::vector<Point2> sites = random_sites(6, rng);
  VoronoiDiagram d = clipped_voronoi(sites, kArena);

  double total = 0.0;
  for (const auto& cell : d.cells) total += polygon_area(cell);
  CHECK(std::abs(total - 100.0) / 100.0 < 1e-6);

  Rng oracle_rng(7);
  std::vector<double> mc = oracles::mc_cell_areas(sites, 0, 10, 100000, oracle_rng);
  for (size_t i = 0; i < sites.size(); ++i)
    CHECK(std::abs(polygon_area(d.cells[i]) - mc[i]) < 2.0);  // 2% of 100
}

TEST_CASE("tiling holds for random site counts") {
  Rng rng(123);
  for (int rep = 0; rep < 50; ++rep) {
    int n = 1 + static_cast<int>(rng.uniform_index(8));
    std::vector<Point2> sites = random_sites(n, rng);
    VoronoiDiagram d = clipped_voronoi(sites, kArena);
    double total = 0.0;
    for (const auto& cell : d.cells) total += polygon_area(cell);
    CHECK(std::abs(total - 100.0) / 100.0 < 1e-6);
    for (int i = 0; i < n; ++i) CHECK(d.cells[i].contains(sites[i]));
  }
}

TEST_CASE("cells contain exactly the points nearest to their site") {
  Rng rng(99);
  std::vector<Point2> sites = random_sites(5, rng);
  VoronoiDiagram d = clipped_voronoi(sites, kArena);
  int mismatches = 0;
  for (int s = 0; s < 10000; ++s) {
    Point2 q{rng.uniform(0, 10), rng.uniform(0, 10)};
    int owner = nearest_site(sites, q);
    // ties sit on cell boundaries; accept membership with tolerance
    if (!d.cells[owner].contains(q, 1e-9)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("mirrored configurations have mirrored areas") {
  Rng rng(7);
  std::vector<Point2> sites = random_sites(6, rng);
  std::vector<Point2> mirrored;
  for (const Point2& s : sites) mirrored.push_back({10.0 - s.x(), s.y()});
  VoronoiDiagram d1 = clipped_voronoi(sites, kArena);
  VoronoiDiagram d2 = clipped_voronoi(mirrored, kArena);
  for (size_t i = 0; i < sites.size(); ++i)
    CHECK(std::abs(polygon_area(d1.cells[i]) - polygon_area(d2.cells[i])) <
          1e-9);
}

TEST_CASE("shared edges are symmetric") {
  Rng rng(5);
  std::vector<Point2> sites = random_sites(6, rng);
  VoronoiDiagram d = clipped_voronoi(sites, kArena);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      auto eij = shared_edge(d, i, j);
      auto eji = shared_edge(d, j, i);
      CHECK(eij.has_value() == eji.has_value());
      if (eij) {
        CHECK(eij->length() == doctest::Approx(eji->length()));
        CHECK((eij->centroid() - eji->centroid()).norm() < 1e-12);
      }
      // adjacency list matches the edge map
      bool in_list = std::count(d.neighbors[i].begin(), d.neighbors[i].end(), j) > 0;
      CHECK(in_list == eij.has_value());
    }
  }
}

TEST_CASE("projection clamps to the polygon") {
  Point2 inside{3, 4};
  CHECK((kArena.project(inside) - inside).norm() == 0.0);
  Point2 out = kArena.project({11, 5});
  CHECK(out.x() == doctest::Approx(10.0));
  CHECK(out.y() == doctest::Approx(5.0));
  Point2 corner = kArena.project({-3, -4});
  CHECK(corner.norm() == doctest::Approx(0.0));
}

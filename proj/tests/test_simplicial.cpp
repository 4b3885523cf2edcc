#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/fixtures.hpp"
#include "dropdecomp/simplicial.hpp"

using namespace dd;

namespace {

// Star diameter by enumeration: every simplex meeting s contributes its
// vertices; the diameter is the largest pairwise path distance.
double star_diameter_oracle(const SimplicialComplex2& x, const Simplex& s) {
    std::set<int> verts;
    auto meets = [&](const std::vector<int>& t) {
        for (int a : t)
            for (int b : s)
                if (a == b) return true;
        return false;
    };
    for (auto& t : x.all_simplices())
        if (meets(t)) verts.insert(t.begin(), t.end());
    double d = 0.0;
    for (int a : verts)
        for (int b : verts) d = std::max(d, path_distance(x, x.vertices()[a], x.vertices()[b]));
    return d;
}

double max_star_oracle(const SimplicialComplex2& x) {
    double d = 0.0;
    for (auto& s : x.all_simplices()) d = std::max(d, star_diameter_oracle(x, s));
    return d;
}

SimplicialComplex2 unit_edge() { return SimplicialComplex2::from_lists(2, {{0, 1}}, {}); }

}  // namespace

TEST_CASE("points are canonical") {
    auto p = Point::from_pairs({{2, 0.25}, {0, 0.75}, {1, 0.0}});
    CHECK(p == Point::on_edge(0, 2, 0.25));
    CHECK(p.dim() == 1);
    CHECK(p.weight_of(2) == doctest::Approx(0.25));
}

TEST_CASE("path distance basics") {
    auto tri = single_triangle();
    CHECK(path_distance(tri, Point::vertex(0), Point::vertex(0)) == 0.0);
    CHECK(path_distance(tri, Point::vertex(0), Point::vertex(1)) == doctest::Approx(1.0));
    auto bary = Point::in_triangle(0, 1, 2, 1.0 / 3, 1.0 / 3, 1.0 / 3);
    CHECK(path_distance(tri, Point::vertex(0), bary) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("path distance on a path graph follows the edges") {
    auto g = SimplicialComplex2::from_lists(3, {{0, 1}, {1, 2}}, {});
    CHECK(path_distance(g, Point::vertex(0), Point::vertex(2)) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(path_distance(g, Point::on_edge(0, 1, 0.5), Point::on_edge(1, 2, 0.25)) ==
          doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("path distance across the hexagonal fan") {
    auto h = hexagon_disk();
    // opposite ring vertices: two unit edges through the center
    CHECK(path_distance(h, Point::vertex(1), Point::vertex(4)) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(path_distance(h, Point::vertex(1), Point::vertex(2)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("star diameters agree with enumeration") {
    for (auto x : {single_triangle(), unit_square(), unit_edge(), single_triangle().barycentric_subdivision()})
        CHECK(max_star_diameter(x) == doctest::Approx(max_star_oracle(x)).epsilon(1e-9));
}

TEST_CASE("subdivide_until leaves a conforming complex unchanged") {
    auto tri = single_triangle();
    int it = -1;
    auto out = subdivide_until(tri, max_star_oracle(tri), 6, &it);
    CHECK(it == 0);
    CHECK(out.triangles().size() == tri.triangles().size());
    int again = -1;
    auto twice = subdivide_until(out, max_star_oracle(tri), 6, &again);
    CHECK(again == 0);
    CHECK(twice.vertices().size() == out.vertices().size());
}

TEST_CASE("subdivide_until on a unit edge with bound 0.6") {
    auto e = unit_edge();
    // the Star of an edge collects every simplex meeting it: after two steps the
    // edge [1/4, 1/2] still sees [0, 3/4], so a third step is needed
    auto e1 = e.barycentric_subdivision(), e2 = e1.barycentric_subdivision(), e3 = e2.barycentric_subdivision();
    CHECK(max_star_oracle(e1) == doctest::Approx(1.0));
    CHECK(max_star_oracle(e2) == doctest::Approx(0.75));
    CHECK(max_star_oracle(e3) == doctest::Approx(0.375));
    int it = -1;
    auto out = subdivide_until(e, 0.6, 6, &it);
    CHECK(it == 3);
    CHECK(out.edges().size() == 8);
    CHECK_THROWS_AS(subdivide_until(e, 0.01, 2), Resource);
}

TEST_CASE("barycenters") {
    auto tri = single_triangle();
    auto b = barycenter(tri, {0, 1, 2});
    for (int v = 0; v < 3; ++v) CHECK(b.weight_of(v) == doctest::Approx(1.0 / 3));
    CHECK(barycenter(tri, {0, 2}) == Point::on_edge(0, 2, 0.5));
}

TEST_CASE("retraction fixes the boundary and follows rays from the puncture") {
    auto tri = single_triangle();
    const auto bary = Point::in_triangle(0, 1, 2, 1.0 / 3, 1.0 / 3, 1.0 / 3);
    const auto edge_pt = Point::on_edge(0, 1, 0.3);
    CHECK(retract_point(tri, 0, bary, edge_pt) == edge_pt);
    // the ray from the barycenter through a point on the segment to vertex 2 exits at vertex 2
    const auto on_ray = tri.lerp(bary, Point::vertex(2), 0.4);
    auto r = retract_point(tri, 0, bary, on_ray);
    CHECK(r.weight_of(2) == doctest::Approx(1.0).epsilon(1e-9));
    // a point off the medians: intersect the ray with the boundary by hand
    const auto q = Point::in_triangle(0, 1, 2, 0.5, 0.3, 0.2);
    auto rq = retract_point(tri, 0, bary, q);
    // along b + s(q - b) the first weight reaching 0 is vertex 2's: s = (1/3)/(1/3 - 0.2)
    const double s = (1.0 / 3) / (1.0 / 3 - 0.2);
    CHECK(rq.weight_of(0) == doctest::Approx(1.0 / 3 + s * (0.5 - 1.0 / 3)).epsilon(1e-9));
    CHECK(rq.weight_of(2) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(retract_point(tri, 0, Point::vertex(0), q), DomainError);
}

TEST_CASE("retraction displacement is bounded by the triangle diameter") {
    auto fine = single_triangle().midpoint_subdivision().midpoint_subdivision();
    std::map<int, Point> punct;
    for (int t = 0; t < static_cast<int>(fine.triangles().size()); ++t) {
        const auto& tri = fine.triangles()[t];
        punct[t] = barycenter(fine, {tri[0], tri[1], tri[2]});
    }
    auto table = retract_to_skeleton(fine, punct, 1e-3, 6);
    CHECK(table.max_displacement < 0.25 + 1e-12);
    CHECK_FALSE(table.from.empty());
}

TEST_CASE("sub-complex checks") {
    auto tri = single_triangle();
    CHECK_NOTHROW(check_connected_subcomplex(tri, SubcomplexSpec{{0, 1}, {{0, 1}}, {}}));
    CHECK_THROWS_AS(check_connected_subcomplex(tri, SubcomplexSpec{{0, 1}, {}, {}}), StructureError);
    CHECK_THROWS_AS(check_connected_subcomplex(tri, SubcomplexSpec{{0, 1}, {{0, 2}}, {}}), StructureError);
}

TEST_CASE("shortest PL paths stay inside base simplices") {
    auto sq = unit_square();
    PathMetric m(sq);
    auto path = shortest_pl_path(m, Point::vertex(0), Point::vertex(2));
    CHECK(path.valid(sq));
    CHECK(path.x.front() == Point::vertex(0));
}

TEST_CASE("nudge moves by the requested chart length") {
    auto tri = single_triangle();
    const auto p = Point::in_triangle(0, 1, 2, 0.4, 0.3, 0.3);
    for (int salt = 0; salt < 5; ++salt) {
        auto q = nudge(tri, p, 0.01, salt);
        CHECK(tri.chart_distance(p, q).value() == doctest::Approx(0.01).epsilon(1e-6));
    }
}

TEST_CASE("bottleneck on a complex matches brute force") {
    auto tri = single_triangle();
    PathMetric m(tri);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point> a, b;
        for (int i = 0; i < 4; ++i) {
            double x = u(rng), y = u(rng) * (1 - x);
            a.push_back(Point::in_triangle(0, 1, 2, 1 - x - y, x, y));
            x = u(rng), y = u(rng) * (1 - x);
            b.push_back(Point::in_triangle(0, 1, 2, 1 - x - y, x, y));
        }
        auto dist = [&](int i, int j) { return m(a[i], b[j]); };
        CHECK(bottleneck(a, b, m).value == doctest::Approx(bottleneck_bruteforce(4, dist)).epsilon(1e-12));
    }
}

#pragma once
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "dropdecomp/spectra.hpp"

namespace dd {

// Point of a complex in barycentric coordinates of a base simplex. Vertex ids
// are ascending, unused slots hold -1, weights are positive and sum to 1.
struct Point {
    std::array<int, 3> v{-1, -1, -1};
    std::array<double, 3> w{0.0, 0.0, 0.0};

    static Point vertex(int a);
    static Point on_edge(int a, int b, double s);  // (1-s)a + s b
    static Point in_triangle(int a, int b, int c, double wa, double wb, double wc);
    // canonical form from arbitrary (id, weight) pairs; near-zero weights dropped
    static Point from_pairs(std::vector<std::pair<int, double>> pairs);

    int count() const;  // number of carrier vertices
    int dim() const { return count() - 1; }
    double weight_of(int id) const;
    bool operator==(const Point&) const = default;
};

using Simplex = std::vector<int>;  // ascending vertex ids (current complex)

// Finite simplicial complex of dimension <= 2. The base complex carries the
// metric (every base edge has unit length in its chart); subdivisions keep
// vertex positions expressed in base coordinates.
class SimplicialComplex2 {
public:
    SimplicialComplex2() = default;
    // Faces of triangles are added automatically.
    static SimplicialComplex2 from_lists(int n_vertices, std::vector<std::array<int, 2>> edges,
                                         std::vector<std::array<int, 3>> triangles);

    int base_vertex_count() const { return n_base_; }
    const std::vector<std::array<int, 2>>& base_edges() const { return base_edges_; }
    const std::vector<std::array<int, 3>>& base_triangles() const { return base_tris_; }

    const std::vector<Point>& vertices() const { return verts_; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

    bool base_is_simplex(const std::vector<int>& ascending_ids) const;
    // common base simplex of the two carriers, if any (ascending ids)
    std::optional<std::vector<int>> common_base_simplex(const Point& a, const Point& b) const;
    std::optional<double> chart_distance(const Point& a, const Point& b) const;
    Point lerp(const Point& a, const Point& b, double s) const;  // needs a common simplex
    Eigen::Vector2d chart2d(const Point& p, const std::array<int, 3>& base_tri) const;
    Point from_chart2d(const Eigen::Vector2d& q, const std::array<int, 3>& base_tri) const;

    bool is_connected() const;

    SimplicialComplex2 barycentric_subdivision() const;
    SimplicialComplex2 midpoint_subdivision() const;
    // Makes p a vertex (splitting the carrying triangle or edge); returns its id.
    int insert_vertex(const Point& p);
    // index of the current triangle containing p (closed), or -1
    int locate_triangle(const Point& p) const;
    SimplicialComplex2 one_skeleton() const;
    // base triangle (index into base_triangles) carrying a current triangle
    int base_triangle_of(int tri) const;
    // barycentric coordinates of p relative to a current triangle
    std::array<double, 3> local_coords(int tri, const Point& p) const;

    std::vector<std::vector<int>> all_simplices() const;

private:
    void close_faces();
    void rebuild(std::vector<std::array<int, 3>> tris, std::vector<std::array<int, 2>> loose);
    std::vector<std::array<int, 2>> loose_edges() const;
    int n_base_ = 0;
    std::vector<std::array<int, 2>> base_edges_;
    std::vector<std::array<int, 3>> base_tris_;
    std::set<std::array<int, 2>> base_edge_set_;
    std::set<std::array<int, 3>> base_tri_set_;
    std::vector<Point> verts_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> tris_;
};

// Geodesic distance on the base complex: chart distance inside a common
// simplex, otherwise Dijkstra over an edge-point refinement graph.
class PathMetric {
public:
    explicit PathMetric(const SimplicialComplex2& x, int level = 32);
    double operator()(const Point& a, const Point& b) const;
    // chart distance when available (an upper bound), else the graph distance
    double local(const Point& a, const Point& b) const;
    const SimplicialComplex2& complex() const { return *x_; }
    // shortest PL path through refinement nodes
    struct PLPathData {
        std::vector<Point> pts;
        std::vector<double> len;
    };
    PLPathData route(const Point& a, const Point& b) const;

private:
    std::vector<std::pair<int, double>> attach(const Point& p) const;
    std::vector<double> dijkstra(const Point& a, std::vector<int>* pred) const;
    const SimplicialComplex2* x_;
    std::vector<Point> nodes_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::map<std::array<int, 3>, std::vector<int>> tri_nodes_;
    std::map<std::array<int, 2>, std::vector<int>> edge_nodes_;
};

// A sub-complex named by vertex ids of x (faces must be listed). Throws
// StructureError unless it is a connected sub-complex of x.
struct SubcomplexSpec {
    std::vector<int> vertices;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> triangles;
};
void check_connected_subcomplex(const SimplicialComplex2& x, const SubcomplexSpec& sub);

double path_distance(const SimplicialComplex2& x, const Point& a, const Point& b);

Point barycenter(const SimplicialComplex2& x, const Simplex& s);

// Brute-force Star diameter of a current simplex: max distance between the
// vertices of all simplices meeting it.
double star_diameter(const SimplicialComplex2& x, const Simplex& s, const PathMetric& metric);
double max_star_diameter(const SimplicialComplex2& x);

SimplicialComplex2 subdivide_until(const SimplicialComplex2& x, double bound, int cap = 6,
                                   int* iterations = nullptr);

// Radial projection from an interior puncture onto the boundary of a current
// triangle; identity on the boundary.
Point retract_point(const SimplicialComplex2& x, int tri, const Point& puncture, const Point& p);

struct RetractionTable {
    std::vector<int> triangle;
    std::vector<Point> from;
    std::vector<Point> to;
    double max_displacement = 0.0;
};
RetractionTable retract_to_skeleton(const SimplicialComplex2& x, const std::map<int, Point>& punctures,
                                    double hole_radius, int grid = 8);

// Piecewise-linear path with every segment inside one base simplex.
struct PLPath {
    std::vector<double> s;
    std::vector<Point> x;
    Point at(const SimplicialComplex2& c, double t) const;
    bool valid(const SimplicialComplex2& c) const;
};

// Shortest PL path between two points (through refinement-graph nodes).
PLPath shortest_pl_path(const PathMetric& metric, const Point& a, const Point& b);

// Moves p by `amount` (chart length) along a direction chosen from `salt`.
Point nudge(const SimplicialComplex2& x, const Point& p, double amount, int salt);

struct ComplexMultiset {
    std::vector<std::pair<Point, int>> points;
    int total() const;
    std::vector<Point> expanded() const;
};
std::optional<Matching> pair_within(const ComplexMultiset& a, const ComplexMultiset& b, double eta,
                                    const PathMetric& metric);
Bottleneck bottleneck(const std::vector<Point>& a, const std::vector<Point>& b, const PathMetric& metric);

}  // namespace dd

#include "dropdecomp/simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/linalg.hpp"

namespace dd {

namespace {

constexpr double kZero = 1e-13;
const double kInf = std::numeric_limits<double>::infinity();

std::array<int, 2> sorted2(int a, int b) { return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a}; }

std::array<int, 3> sorted3(int a, int b, int c) {
    std::array<int, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

const Eigen::Vector2d kCorner[3] = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.0),
                                    Eigen::Vector2d(0.5, std::sqrt(3.0) / 2.0)};

std::vector<std::pair<int, double>> pairs_of(const Point& p) {
    std::vector<std::pair<int, double>> out;
    for (int i = 0; i < 3; ++i)
        if (p.v[i] >= 0) out.emplace_back(p.v[i], p.w[i]);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Point

Point Point::vertex(int a) { return from_pairs({{a, 1.0}}); }

Point Point::on_edge(int a, int b, double s) { return from_pairs({{a, 1.0 - s}, {b, s}}); }

Point Point::in_triangle(int a, int b, int c, double wa, double wb, double wc) {
    return from_pairs({{a, wa}, {b, wb}, {c, wc}});
}

Point Point::from_pairs(std::vector<std::pair<int, double>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::pair<int, double>> merged;
    for (auto& [id, w] : pairs) {
        if (id < 0) throw DomainError("negative vertex id in point");
        if (!merged.empty() && merged.back().first == id)
            merged.back().second += w;
        else
            merged.emplace_back(id, w);
    }
    double total = 0.0;
    for (auto& pr : merged) {
        if (pr.second < -1e-9) throw DomainError("negative barycentric weight");
        total += std::max(0.0, pr.second);
    }
    if (!(total > 0.0)) throw DomainError("point with zero total weight");
    std::vector<std::pair<int, double>> kept;
    for (auto& pr : merged)
        if (pr.second / total > kZero) kept.emplace_back(pr.first, pr.second / total);
    if (kept.size() > 3) throw DomainError("point carried by more than three vertices");
    double s = 0.0;
    for (auto& pr : kept) s += pr.second;
    Point p;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        p.v[i] = kept[i].first;
        p.w[i] = kept[i].second / s;
    }
    return p;
}

int Point::count() const {
    int c = 0;
    for (int i = 0; i < 3; ++i) c += v[i] >= 0;
    return c;
}

double Point::weight_of(int id) const {
    for (int i = 0; i < 3; ++i)
        if (v[i] == id) return w[i];
    return 0.0;
}

// ---------------------------------------------------------------- complex

SimplicialComplex2 SimplicialComplex2::from_lists(int n_vertices, std::vector<std::array<int, 2>> edges,
                                                  std::vector<std::array<int, 3>> triangles) {
    if (n_vertices <= 0) throw DomainError("complex needs at least one vertex");
    SimplicialComplex2 x;
    x.n_base_ = n_vertices;
    auto check = [&](int id) {
        if (id < 0 || id >= n_vertices) throw DomainError("simplex references unknown vertex");
    };
    for (auto& t : triangles) {
        for (int id : t) check(id);
        t = sorted3(t[0], t[1], t[2]);
        if (t[0] == t[1] || t[1] == t[2]) throw DomainError("degenerate triangle");
        x.base_tri_set_.insert(t);
    }
    for (auto& e : edges) {
        for (int id : e) check(id);
        if (e[0] == e[1]) throw DomainError("degenerate edge");
        x.base_edge_set_.insert(sorted2(e[0], e[1]));
    }
    for (auto& t : x.base_tri_set_) {
        x.base_edge_set_.insert({t[0], t[1]});
        x.base_edge_set_.insert({t[0], t[2]});
        x.base_edge_set_.insert({t[1], t[2]});
    }
    x.base_tris_.assign(x.base_tri_set_.begin(), x.base_tri_set_.end());
    x.base_edges_.assign(x.base_edge_set_.begin(), x.base_edge_set_.end());
    for (int i = 0; i < n_vertices; ++i) x.verts_.push_back(Point::vertex(i));
    x.tris_ = x.base_tris_;
    x.edges_ = x.base_edges_;
    return x;
}

void SimplicialComplex2::close_faces() {
    std::set<std::array<int, 2>> es(edges_.begin(), edges_.end());
    for (auto& t : tris_) {
        es.insert({t[0], t[1]});
        es.insert({t[0], t[2]});
        es.insert({t[1], t[2]});
    }
    edges_.assign(es.begin(), es.end());
}

std::vector<std::array<int, 2>> SimplicialComplex2::loose_edges() const {
    std::set<std::array<int, 2>> in_tri;
    for (auto& t : tris_) {
        in_tri.insert({t[0], t[1]});
        in_tri.insert({t[0], t[2]});
        in_tri.insert({t[1], t[2]});
    }
    std::vector<std::array<int, 2>> out;
    for (auto& e : edges_)
        if (!in_tri.count(e)) out.push_back(e);
    return out;
}

void SimplicialComplex2::rebuild(std::vector<std::array<int, 3>> tris, std::vector<std::array<int, 2>> loose) {
    for (auto& t : tris) t = sorted3(t[0], t[1], t[2]);
    std::sort(tris.begin(), tris.end());
    tris_ = std::move(tris);
    for (auto& e : loose) e = sorted2(e[0], e[1]);
    edges_ = std::move(loose);
    close_faces();
}

bool SimplicialComplex2::base_is_simplex(const std::vector<int>& ids) const {
    switch (ids.size()) {
        case 1: return ids[0] >= 0 && ids[0] < n_base_;
        case 2: return base_edge_set_.count({ids[0], ids[1]}) > 0;
        case 3: return base_tri_set_.count({ids[0], ids[1], ids[2]}) > 0;
        default: return false;
    }
}

std::optional<std::vector<int>> SimplicialComplex2::common_base_simplex(const Point& a, const Point& b) const {
    std::vector<int> ids;
    for (int i = 0; i < 3; ++i) {
        if (a.v[i] >= 0) ids.push_back(a.v[i]);
        if (b.v[i] >= 0) ids.push_back(b.v[i]);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!base_is_simplex(ids)) return std::nullopt;
    return ids;
}

std::optional<double> SimplicialComplex2::chart_distance(const Point& a, const Point& b) const {
    auto ids = common_base_simplex(a, b);
    if (!ids) return std::nullopt;
    // unit edges: |x|^2 = -sum_{i<j} d_i d_j for a zero-sum barycentric difference
    std::vector<double> d;
    for (int id : *ids) d.push_back(a.weight_of(id) - b.weight_of(id));
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) s -= d[i] * d[j];
    return std::sqrt(std::max(0.0, s));
}

Point SimplicialComplex2::lerp(const Point& a, const Point& b, double s) const {
    auto ids = common_base_simplex(a, b);
    if (!ids) throw DomainError("interpolation across base simplices");
    std::vector<std::pair<int, double>> pr;
    for (int id : *ids) pr.emplace_back(id, (1.0 - s) * a.weight_of(id) + s * b.weight_of(id));
    return Point::from_pairs(pr);
}

Eigen::Vector2d SimplicialComplex2::chart2d(const Point& p, const std::array<int, 3>& bt) const {
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    double used = 0.0;
    for (int i = 0; i < 3; ++i) {
        double w = p.weight_of(bt[i]);
        q += w * kCorner[i];
        used += w;
    }
    if (std::abs(used - 1.0) > 1e-9) throw DomainError("point outside the chart's base triangle");
    return q;
}

Point SimplicialComplex2::from_chart2d(const Eigen::Vector2d& q, const std::array<int, 3>& bt) const {
    Eigen::Matrix2d m;
    m.col(0) = kCorner[1] - kCorner[0];
    m.col(1) = kCorner[2] - kCorner[0];
    Eigen::Vector2d l = m.inverse() * (q - kCorner[0]);
    double l0 = 1.0 - l(0) - l(1);
    auto clip = [](double w) { return std::abs(w) < 1e-12 ? 0.0 : w; };
    return Point::from_pairs({{bt[0], clip(l0)}, {bt[1], clip(l(0))}, {bt[2], clip(l(1))}});
}

bool SimplicialComplex2::is_connected() const {
    int n = static_cast<int>(verts_.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    for (auto& e : edges_) parent[find(e[0])] = find(e[1]);
    int root = find(0);
    for (int i = 1; i < n; ++i)
        if (find(i) != root) return false;
    return true;
}

int SimplicialComplex2::base_triangle_of(int tri) const {
    std::vector<int> ids;
    for (int vi : tris_[tri])
        for (int j = 0; j < 3; ++j)
            if (verts_[vi].v[j] >= 0) ids.push_back(verts_[vi].v[j]);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() != 3) throw Malformed("current triangle not carried by a base triangle");
    auto it = std::lower_bound(base_tris_.begin(), base_tris_.end(), std::array<int, 3>{ids[0], ids[1], ids[2]});
    if (it == base_tris_.end() || *it != std::array<int, 3>{ids[0], ids[1], ids[2]})
        throw Malformed("current triangle not carried by a base triangle");
    return static_cast<int>(it - base_tris_.begin());
}

std::array<double, 3> SimplicialComplex2::local_coords(int tri, const Point& p) const {
    const auto& bt = base_tris_[base_triangle_of(tri)];
    for (int i = 0; i < 3; ++i)
        if (p.v[i] >= 0 && p.v[i] != bt[0] && p.v[i] != bt[1] && p.v[i] != bt[2])
            return {-1.0, -1.0, -1.0};
    Eigen::Vector2d q = chart2d(p, bt);
    Eigen::Vector2d a = chart2d(verts_[tris_[tri][0]], bt);
    Eigen::Vector2d b = chart2d(verts_[tris_[tri][1]], bt);
    Eigen::Vector2d c = chart2d(verts_[tris_[tri][2]], bt);
    Eigen::Matrix2d m;
    m.col(0) = b - a;
    m.col(1) = c - a;
    Eigen::Vector2d l = m.inverse() * (q - a);
    return {1.0 - l(0) - l(1), l(0), l(1)};
}

int SimplicialComplex2::locate_triangle(const Point& p) const {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
        auto l = local_coords(t, p);
        if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return t;
    }
    return -1;
}

SimplicialComplex2 SimplicialComplex2::barycentric_subdivision() const {
    SimplicialComplex2 out = *this;
    std::map<std::array<int, 2>, int> mid;
    auto midpoint = [&](int a, int b) {
        auto key = sorted2(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        int id = static_cast<int>(out.verts_.size());
        out.verts_.push_back(lerp(verts_[a], verts_[b], 0.5));
        mid[key] = id;
        return id;
    };
    std::vector<std::array<int, 3>> tris;
    for (auto& t : tris_) {
        int c = static_cast<int>(out.verts_.size());
        out.verts_.push_back(barycenter(*this, {t[0], t[1], t[2]}));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                tris.push_back({t[i], midpoint(t[i], t[j]), c});
            }
    }
    std::vector<std::array<int, 2>> loose;
    for (auto& e : loose_edges()) {
        int m = midpoint(e[0], e[1]);
        loose.push_back({e[0], m});
        loose.push_back({m, e[1]});
    }
    out.rebuild(std::move(tris), std::move(loose));
    return out;
}

SimplicialComplex2 SimplicialComplex2::midpoint_subdivision() const {
    SimplicialComplex2 out = *this;
    std::map<std::array<int, 2>, int> mid;
    auto midpoint = [&](int a, int b) {
        auto key = sorted2(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        int id = static_cast<int>(out.verts_.size());
        out.verts_.push_back(lerp(verts_[a], verts_[b], 0.5));
        mid[key] = id;
        return id;
    };
    std::vector<std::array<int, 3>> tris;
    for (auto& t : tris_) {
        int ab = midpoint(t[0], t[1]), ac = midpoint(t[0], t[2]), bc = midpoint(t[1], t[2]);
        tris.push_back({t[0], ab, ac});
        tris.push_back({t[1], ab, bc});
        tris.push_back({t[2], ac, bc});
        tris.push_back({ab, ac, bc});
    }
    std::vector<std::array<int, 2>> loose;
    for (auto& e : loose_edges()) {
        int m = midpoint(e[0], e[1]);
        loose.push_back({e[0], m});
        loose.push_back({m, e[1]});
    }
    out.rebuild(std::move(tris), std::move(loose));
    return out;
}

int SimplicialComplex2::insert_vertex(const Point& p) {
    for (int i = 0; i < static_cast<int>(verts_.size()); ++i) {
        auto d = chart_distance(verts_[i], p);
        if (d && *d < 1e-12) return i;
    }
    int id = static_cast<int>(verts_.size());
    auto split_edge = [&](int a, int b) {
        auto key = sorted2(a, b);
        std::vector<std::array<int, 3>> tris;
        for (auto& t : tris_) {
            bool has = std::count(t.begin(), t.end(), a) && std::count(t.begin(), t.end(), b);
            if (!has) {
                tris.push_back(t);
                continue;
            }
            int c = t[0] + t[1] + t[2] - a - b;
            tris.push_back({a, id, c});
            tris.push_back({id, b, c});
        }
        std::vector<std::array<int, 2>> loose;
        for (auto& e : loose_edges()) {
            if (e == key) {
                loose.push_back({a, id});
                loose.push_back({id, b});
            } else {
                loose.push_back(e);
            }
        }
        verts_.push_back(p);
        rebuild(std::move(tris), std::move(loose));
    };
    int t = locate_triangle(p);
    if (t >= 0) {
        auto l = local_coords(t, p);
        auto tri = tris_[t];
        for (int i = 0; i < 3; ++i) {
            if (std::abs(l[i]) <= 1e-12) {
                split_edge(tri[(i + 1) % 3], tri[(i + 2) % 3]);
                return id;
            }
        }
        std::vector<std::array<int, 3>> tris;
        for (int j = 0; j < static_cast<int>(tris_.size()); ++j)
            if (j != t) tris.push_back(tris_[j]);
        tris.push_back({tri[0], tri[1], id});
        tris.push_back({tri[0], tri[2], id});
        tris.push_back({tri[1], tri[2], id});
        auto loose = loose_edges();
        verts_.push_back(p);
        rebuild(std::move(tris), std::move(loose));
        return id;
    }
    for (auto& e : loose_edges()) {
        auto dab = chart_distance(verts_[e[0]], verts_[e[1]]);
        auto dap = chart_distance(verts_[e[0]], p);
        auto dpb = chart_distance(p, verts_[e[1]]);
        if (dab && dap && dpb && std::abs(*dap + *dpb - *dab) < 1e-12) {
            split_edge(e[0], e[1]);
            return id;
        }
    }
    throw DomainError("point to insert does not lie on the complex");
}

SimplicialComplex2 SimplicialComplex2::one_skeleton() const {
    SimplicialComplex2 out = *this;
    out.tris_.clear();
    return out;
}

std::vector<std::vector<int>> SimplicialComplex2::all_simplices() const {
    std::vector<std::vector<int>> out;
    for (int i = 0; i < static_cast<int>(verts_.size()); ++i) out.push_back({i});
    for (auto& e : edges_) out.push_back({e[0], e[1]});
    for (auto& t : tris_) out.push_back({t[0], t[1], t[2]});
    return out;
}

void check_connected_subcomplex(const SimplicialComplex2& x, const SubcomplexSpec& sub) {
    if (sub.vertices.empty()) throw StructureError("empty sub-complex");
    std::set<int> vs(sub.vertices.begin(), sub.vertices.end());
    for (int v : vs)
        if (v < 0 || v >= static_cast<int>(x.vertices().size())) throw StructureError("unknown vertex in sub-complex");
    std::set<std::array<int, 2>> xe(x.edges().begin(), x.edges().end());
    std::set<std::array<int, 3>> xt(x.triangles().begin(), x.triangles().end());
    std::set<std::array<int, 2>> se;
    for (auto e : sub.edges) {
        e = sorted2(e[0], e[1]);
        if (!xe.count(e)) throw StructureError("sub-complex edge is not an edge of the complex");
        if (!vs.count(e[0]) || !vs.count(e[1])) throw StructureError("sub-complex edge vertex missing");
        se.insert(e);
    }
    for (auto t : sub.triangles) {
        t = sorted3(t[0], t[1], t[2]);
        if (!xt.count(t)) throw StructureError("sub-complex triangle is not a triangle of the complex");
        if (!se.count({t[0], t[1]}) || !se.count({t[0], t[2]}) || !se.count({t[1], t[2]}))
            throw StructureError("sub-complex triangle face missing");
    }
    std::map<int, int> parent;
    for (int v : vs) parent[v] = v;
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    for (auto& e : se) parent[find(e[0])] = find(e[1]);
    int root = find(*vs.begin());
    for (int v : vs)
        if (find(v) != root) throw StructureError("sub-complex is disconnected");
}

// ---------------------------------------------------------------- metric

PathMetric::PathMetric(const SimplicialComplex2& x, int level) : x_(&x) {
    if (level < 1) throw DomainError("refinement level must be positive");
    for (int i = 0; i < x.base_vertex_count(); ++i) nodes_.push_back(Point::vertex(i));
    for (auto& e : x.base_edges()) {
        std::vector<int> ids{e[0]};
        for (int i = 1; i < level; ++i) {
            ids.push_back(static_cast<int>(nodes_.size()));
            nodes_.push_back(Point::on_edge(e[0], e[1], static_cast<double>(i) / level));
        }
        ids.push_back(e[1]);
        edge_nodes_[e] = ids;
    }
    adj_.assign(nodes_.size(), {});
    auto link = [&](int a, int b) {
        double d = *x.chart_distance(nodes_[a], nodes_[b]);
        adj_[a].emplace_back(b, d);
        adj_[b].emplace_back(a, d);
    };
    for (auto& [e, ids] : edge_nodes_)
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) link(ids[i], ids[i + 1]);
    for (auto& t : x.base_triangles()) {
        std::vector<int> ids;
        for (auto e : {std::array<int, 2>{t[0], t[1]}, std::array<int, 2>{t[0], t[2]}, std::array<int, 2>{t[1], t[2]}})
            for (int id : edge_nodes_.at(e)) ids.push_back(id);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        tri_nodes_[t] = ids;
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                // pairs on one edge are already linked along the edge
                auto ci = x.common_base_simplex(nodes_[ids[i]], nodes_[ids[j]]);
                if (ci && ci->size() == 3) link(ids[i], ids[j]);
            }
    }
}

std::vector<std::pair<int, double>> PathMetric::attach(const Point& p) const {
    std::vector<int> carrier;
    for (int i = 0; i < 3; ++i)
        if (p.v[i] >= 0) carrier.push_back(p.v[i]);
    auto contains = [&](auto& simplex) {
        for (int c : carrier)
            if (std::find(simplex.begin(), simplex.end(), c) == simplex.end()) return false;
        return true;
    };
    std::vector<int> ids;
    for (auto& [t, nodes] : tri_nodes_)
        if (contains(t)) ids.insert(ids.end(), nodes.begin(), nodes.end());
    for (auto& [e, nodes] : edge_nodes_)
        if (contains(e)) ids.insert(ids.end(), nodes.begin(), nodes.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::pair<int, double>> out;
    for (int id : ids) {
        auto d = x_->chart_distance(p, nodes_[id]);
        if (d) out.emplace_back(id, *d);
    }
    if (out.empty() && p.count() == 1) out.emplace_back(p.v[0], 0.0);  // isolated vertex
    return out;
}

std::vector<double> PathMetric::dijkstra(const Point& a, std::vector<int>* pred) const {
    std::vector<double> dist(nodes_.size(), kInf);
    if (pred) pred->assign(nodes_.size(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (auto& [id, d] : attach(a)) {
        if (d < dist[id]) {
            dist[id] = d;
            pq.emplace(d, id);
        }
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto& [v, w] : adj_[u]) {
            if (d + w < dist[v]) {
                dist[v] = d + w;
                if (pred) (*pred)[v] = u;
                pq.emplace(dist[v], v);
            }
        }
    }
    return dist;
}

double PathMetric::operator()(const Point& a, const Point& b) const {
    double best = kInf;
    if (auto d = x_->chart_distance(a, b)) best = *d;
    auto dist = dijkstra(a, nullptr);
    for (auto& [id, d] : attach(b)) best = std::min(best, dist[id] + d);
    return best;
}

double PathMetric::local(const Point& a, const Point& b) const {
    if (auto d = x_->chart_distance(a, b)) return *d;
    return (*this)(a, b);
}

PathMetric::PLPathData PathMetric::route(const Point& a, const Point& b) const {
    PLPathData out;
    if (auto d = x_->chart_distance(a, b)) {
        out.pts = {a, b};
        out.len = {0.0, *d};
        return out;
    }
    std::vector<int> pred;
    auto dist = dijkstra(a, &pred);
    int best = -1;
    double bd = kInf;
    for (auto& [id, d] : attach(b))
        if (dist[id] + d < bd) {
            bd = dist[id] + d;
            best = id;
        }
    if (best < 0) throw DomainError("points lie in different components");
    std::vector<int> chain;
    for (int u = best; u >= 0; u = pred[u]) chain.push_back(u);
    std::reverse(chain.begin(), chain.end());
    out.pts.push_back(a);
    out.len.push_back(0.0);
    for (int id : chain) {
        out.len.push_back(out.len.back() + x_->chart_distance(out.pts.back(), nodes_[id]).value());
        out.pts.push_back(nodes_[id]);
    }
    out.len.push_back(out.len.back() + x_->chart_distance(out.pts.back(), b).value());
    out.pts.push_back(b);
    return out;
}

double path_distance(const SimplicialComplex2& x, const Point& a, const Point& b) { return PathMetric(x)(a, b); }

Point barycenter(const SimplicialComplex2& x, const Simplex& s) {
    if (s.empty()) throw DomainError("empty simplex");
    std::vector<std::pair<int, double>> pr;
    for (int vi : s)
        for (auto& q : pairs_of(x.vertices().at(vi))) pr.emplace_back(q.first, q.second / s.size());
    Point p = Point::from_pairs(pr);
    std::vector<int> ids;
    for (auto& q : pairs_of(p)) ids.push_back(q.first);
    if (!x.base_is_simplex(ids)) throw DomainError("simplex not carried by a base simplex");
    return p;
}

double star_diameter(const SimplicialComplex2& x, const Simplex& s, const PathMetric& metric) {
    std::set<int> vs(s.begin(), s.end());
    auto meets = [&](auto& simplex) {
        for (int v : simplex)
            if (std::count(s.begin(), s.end(), v)) return true;
        return false;
    };
    for (auto& e : x.edges())
        if (meets(e)) vs.insert(e.begin(), e.end());
    for (auto& t : x.triangles())
        if (meets(t)) vs.insert(t.begin(), t.end());
    std::vector<int> list(vs.begin(), vs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t j = i + 1; j < list.size(); ++j)
            d = std::max(d, metric.local(x.vertices()[list[i]], x.vertices()[list[j]]));
    return d;
}

double max_star_diameter(const SimplicialComplex2& x) {
    PathMetric metric(x);
    // the star of a simplex contains the stars of its faces
    int n = static_cast<int>(x.vertices().size());
    std::vector<std::vector<int>> nbr(n);
    for (auto& e : x.edges()) {
        nbr[e[0]].push_back(e[1]);
        nbr[e[1]].push_back(e[0]);
    }
    std::vector<std::set<int>> closed(n);
    for (int v = 0; v < n; ++v) {
        closed[v].insert(v);
        closed[v].insert(nbr[v].begin(), nbr[v].end());
    }
    double d = 0.0;
    std::set<std::array<int, 2>> in_tri;
    auto eval = [&](const std::vector<int>& s) {
        std::set<int> vs;
        for (int v : s) vs.insert(closed[v].begin(), closed[v].end());
        std::vector<int> list(vs.begin(), vs.end());
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t j = i + 1; j < list.size(); ++j)
                d = std::max(d, metric.local(x.vertices()[list[i]], x.vertices()[list[j]]));
    };
    for (auto& t : x.triangles()) {
        eval({t[0], t[1], t[2]});
        in_tri.insert({t[0], t[1]});
        in_tri.insert({t[0], t[2]});
        in_tri.insert({t[1], t[2]});
    }
    for (auto& e : x.edges())
        if (!in_tri.count(e)) eval({e[0], e[1]});
    return d;
}

SimplicialComplex2 subdivide_until(const SimplicialComplex2& x, double bound, int cap, int* iterations) {
    if (!(bound > 0.0)) throw DomainError("subdivision bound must be positive");
    SimplicialComplex2 cur = x;
    int it = 0;
    while (max_star_diameter(cur) > bound + 1e-12) {
        if (it >= cap) throw Resource("subdivision cap reached before the Star bound");
        cur = cur.barycentric_subdivision();
        ++it;
    }
    if (iterations) *iterations = it;
    return cur;
}

// ---------------------------------------------------------------- retraction

Point retract_point(const SimplicialComplex2& x, int tri, const Point& puncture, const Point& p) {
    auto lc = x.local_coords(tri, puncture);
    for (double w : lc)
        if (w <= 1e-12) throw DomainError("invalid puncture: not interior to its triangle");
    auto lp = x.local_coords(tri, p);
    for (double w : lp)
        if (w < -1e-12) throw DomainError("point outside the punctured triangle");
    if (std::min({lp[0], lp[1], lp[2]}) <= 1e-12) return p;
    double s = kInf;
    for (int i = 0; i < 3; ++i) {
        double dir = lp[i] - lc[i];
        if (dir < 0.0) s = std::min(s, lc[i] / -dir);
    }
    if (!std::isfinite(s)) throw DomainError("retraction undefined at the puncture");
    std::array<double, 3> l;
    int low = 0;
    for (int i = 0; i < 3; ++i) {
        l[i] = lc[i] + s * (lp[i] - lc[i]);
        if (l[i] < l[low]) low = i;
    }
    l[low] = 0.0;
    std::vector<std::pair<int, double>> pr;
    for (int i = 0; i < 3; ++i)
        for (auto& q : pairs_of(x.vertices()[x.triangles()[tri][i]])) pr.emplace_back(q.first, l[i] * q.second);
    return Point::from_pairs(pr);
}

RetractionTable retract_to_skeleton(const SimplicialComplex2& x, const std::map<int, Point>& punctures,
                                    double hole_radius, int grid) {
    RetractionTable table;
    for (int t = 0; t < static_cast<int>(x.triangles().size()); ++t) {
        auto it = punctures.find(t);
        if (it == punctures.end()) throw DomainError("triangle without a puncture");
        const auto& tri = x.triangles()[t];
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; i + j <= grid; ++j) {
                double a = static_cast<double>(i) / grid, b = static_cast<double>(j) / grid;
                std::vector<std::pair<int, double>> pr;
                double w[3] = {a, b, 1.0 - a - b};
                for (int c = 0; c < 3; ++c)
                    for (auto& q : pairs_of(x.vertices()[tri[c]])) pr.emplace_back(q.first, w[c] * q.second);
                Point p = Point::from_pairs(pr);
                if (x.chart_distance(p, it->second).value() < hole_radius) continue;
                Point r = retract_point(x, t, it->second, p);
                table.triangle.push_back(t);
                table.from.push_back(p);
                table.to.push_back(r);
                table.max_displacement = std::max(table.max_displacement, x.chart_distance(p, r).value());
            }
    }
    return table;
}

// ---------------------------------------------------------------- paths

Point PLPath::at(const SimplicialComplex2& c, double t) const {
    if (s.empty()) throw DomainError("empty path");
    if (t <= s.front()) return x.front();
    if (t >= s.back()) return x.back();
    std::size_t i = std::upper_bound(s.begin(), s.end(), t) - s.begin() - 1;
    double span = s[i + 1] - s[i];
    return c.lerp(x[i], x[i + 1], span > 0 ? (t - s[i]) / span : 0.0);
}

bool PLPath::valid(const SimplicialComplex2& c) const {
    if (s.size() != x.size() || s.size() < 1) return false;
    if (s.front() != 0.0 || s.back() != 1.0) return false;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i + 1] < s[i]) return false;
        if (!c.common_base_simplex(x[i], x[i + 1])) return false;
    }
    return true;
}

PLPath shortest_pl_path(const PathMetric& metric, const Point& a, const Point& b) {
    auto r = metric.route(a, b);
    PLPath p;
    double total = r.len.back();
    for (std::size_t i = 0; i < r.pts.size(); ++i) {
        p.x.push_back(r.pts[i]);
        p.s.push_back(total > 0 ? r.len[i] / total : static_cast<double>(i) / (r.pts.size() - 1));
    }
    p.s.back() = 1.0;
    return p;
}

Point nudge(const SimplicialComplex2& x, const Point& p, double amount, int salt) {
    if (amount <= 0.0) return p;
    salt = std::abs(salt);
    if (p.count() == 1) {
        std::vector<int> others;
        for (auto& e : x.base_edges()) {
            if (e[0] == p.v[0]) others.push_back(e[1]);
            if (e[1] == p.v[0]) others.push_back(e[0]);
        }
        if (others.empty()) throw DomainError("cannot move an isolated vertex");
        std::sort(others.begin(), others.end());
        int o = others[salt % others.size()];
        return Point::on_edge(p.v[0], o, std::min(amount, 0.5));
    }
    int target = p.v[salt % p.count()];
    Point q = Point::vertex(target);
    double d = x.chart_distance(p, q).value();
    double t = std::min(0.5, amount / d);
    return x.lerp(p, q, t);
}

int ComplexMultiset::total() const {
    int t = 0;
    for (auto& [p, m] : points) t += m;
    return t;
}

std::vector<Point> ComplexMultiset::expanded() const {
    std::vector<Point> out;
    for (auto& [p, m] : points)
        for (int i = 0; i < m; ++i) out.push_back(p);
    return out;
}

namespace {
RMat distance_matrix(const std::vector<Point>& a, const std::vector<Point>& b, const PathMetric& metric) {
    RMat d(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) d(i, j) = metric.local(a[i], b[j]);
    return d;
}
}  // namespace

std::optional<Matching> pair_within(const ComplexMultiset& a, const ComplexMultiset& b, double eta,
                                    const PathMetric& metric) {
    if (a.total() != b.total()) throw ClassMismatch("multisets have different totals");
    auto ea = a.expanded(), eb = b.expanded();
    RMat d = distance_matrix(ea, eb, metric);
    return pair_within_metric(static_cast<int>(ea.size()), [&](int i, int j) { return d(i, j); }, eta);
}

Bottleneck bottleneck(const std::vector<Point>& a, const std::vector<Point>& b, const PathMetric& metric) {
    if (a.size() != b.size()) throw ClassMismatch("point lists have different sizes");
    RMat d = distance_matrix(a, b, metric);
    return bottleneck_assignment(static_cast<int>(a.size()), [&](int i, int j) { return d(i, j); });
}

}  // namespace dd

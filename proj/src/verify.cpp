#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dropdecomp/decomp_two.hpp"
#include "dropdecomp/errors.hpp"

namespace dd {

bool Verdict::pass() const {
    for (auto& [name, ok] : clauses)
        if (name.rfind("report.", 0) != 0 && !ok) return false;
    return true;
}

std::vector<std::string> Verdict::failures() const {
    std::vector<std::string> out;
    for (auto& [name, ok] : clauses)
        if (!ok) out.push_back(name);
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const DomainSpec kCX{DomainKind::CX, 1, 1};

std::string str(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string point_str(const Point& p) {
    std::ostringstream os;
    os.precision(10);
    os << "[";
    for (int i = 0; i < p.count(); ++i) os << (i ? ", " : "") << p.v[i] << ":" << p.w[i];
    os << "]";
    return os.str();
}

// covering grid over the simplices of a region (current-complex vertex ids)
std::vector<Point> grid_points(const SimplicialComplex2& x, const SubcomplexSpec& region, double h) {
    const int g = std::max(1, static_cast<int>(std::ceil(1.0 / h)));
    std::vector<Point> out;
    const auto& V = x.vertices();
    for (int v : region.vertices) out.push_back(V.at(v));
    for (auto& e : region.edges)
        for (int i = 1; i < g; ++i) out.push_back(x.lerp(V.at(e[0]), V.at(e[1]), double(i) / g));
    for (auto& t : region.triangles)
        for (int i = 1; i < g; ++i)
            for (int j = 1; i + j < g; ++j) {
                Point a = x.lerp(V.at(t[0]), V.at(t[1]), double(i + j) / g);
                Point b = x.lerp(V.at(t[0]), V.at(t[2]), double(i + j) / g);
                out.push_back(x.lerp(a, b, double(j) / (i + j)));
            }
    return out;
}

SubcomplexSpec whole(const SimplicialComplex2& x) {
    SubcomplexSpec s;
    for (int v = 0; v < static_cast<int>(x.vertices().size()); ++v) s.vertices.push_back(v);
    s.edges = x.edges();
    s.triangles = x.triangles();
    return s;
}

bool in_region(const SimplicialComplex2& x, const SubcomplexSpec& region, const PathMetric& metric, const Point& p) {
    const auto& V = x.vertices();
    for (int v : region.vertices)
        if (V.at(v) == p) return true;
    for (auto& e : region.edges) {
        auto dab = x.chart_distance(V[e[0]], V[e[1]]);
        auto dap = x.chart_distance(V[e[0]], p);
        auto dpb = x.chart_distance(p, V[e[1]]);
        if (dab && dap && dpb && *dap + *dpb - *dab <= 1e-9) return true;
    }
    for (auto& t : region.triangles) {
        auto it = std::find(x.triangles().begin(), x.triangles().end(), t);
        if (it == x.triangles().end()) continue;
        auto l = x.local_coords(static_cast<int>(it - x.triangles().begin()), p);
        if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return true;
    }
    (void)metric;
    return false;
}

Verdict verify_on(const CandidateDecomposition& dec, const HomRep& phi, const HomRep& psi,
                  const std::vector<ScalarField>& F, const VerifyParams& prm, const SubcomplexSpec& region,
                  bool restricted) {
    if (!phi.domain_space || phi.domain.kind != DomainKind::CX || psi.domain.kind != DomainKind::CX)
        throw DomainError("verifier expects homomorphisms from C(X)");
    const SimplicialComplex2& X = *phi.domain_space;
    const PathMetric metric(X);
    const std::size_t S = phi.sample_count();
    if (psi.sample_count() != S || dec.Q0.size() != S || dec.Q1.size() != S || dec.Q2.size() != S ||
        dec.u.size() != S || dec.phi2.size() != S)
        throw MeshIncompatibility("decomposition data must be sampled at the fiber samples");
    for (auto& pi : dec.p)
        if (pi.size() != S) throw MeshIncompatibility("phi1 projections must be sampled at the fiber samples");
    if (dec.p.size() != dec.x.size()) throw Malformed("phi1 needs one projection field per point");
    const double eps = prm.epsilon, tol = prm.tol;
    const Eigen::Index N = phi.fibers.front().u.rows();

    Verdict v;
    auto phi1 = [&](const ScalarField& f, std::size_t s) {
        Mat m = Mat::Zero(N, N);
        for (std::size_t i = 0; i < dec.x.size(); ++i) m += f(dec.x[i]) * dec.p[i][s];
        return m;
    };

    // 1: partition of unity by mutually orthogonal projections
    double c1 = 0.0, cons = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        const Mat I = Mat::Identity(N, N);
        for (const Mat* q : {&dec.Q0[s], &dec.Q1[s], &dec.Q2[s]}) c1 = std::max(c1, op_norm(*q * *q - *q) + op_norm(*q - q->adjoint()));
        c1 = std::max({c1, op_norm(dec.Q0[s] + dec.Q1[s] + dec.Q2[s] - I), op_norm(dec.Q0[s] * dec.Q1[s]),
                       op_norm(dec.Q0[s] * dec.Q2[s]), op_norm(dec.Q1[s] * dec.Q2[s])});
        ScalarField one = ScalarField::constant(X.base_vertex_count(), 1.0);
        cons = std::max({cons, op_norm(phi1(one, s) - dec.Q1[s]),
                         op_norm(assemble(kCX, dec.phi2[s], Element(one)) - dec.Q2[s])});
    }
    v.measures["clause_1.error"] = c1;
    v.clauses["clause_1"] = c1 <= tol;
    v.measures["report.consistency"] = cons;
    v.clauses["report.consistency"] = cons <= tol;

    // 2: both closeness inequalities
    double e_phi = 0.0, e_psi = 0.0;
    std::string w2;
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            const auto& f = F[fi];
            Mat core = phi1(f, s) + assemble(kCX, dec.phi2[s], Element(f));
            Mat a = assemble_hom(phi, f, s);
            Mat b = dec.u[s] * assemble_hom(psi, f, s) * dec.u[s].adjoint();
            double ea = op_norm(a - dec.Q0[s] * a * dec.Q0[s] - core);
            double eb = op_norm(b - dec.Q0[s] * b * dec.Q0[s] - core);
            if (std::max(ea, eb) >= eps && w2.empty())
                w2 = "sample " + std::to_string(s) + ", f " + std::to_string(fi) + ": " + str(std::max(ea, eb));
            e_phi = std::max(e_phi, ea);
            e_psi = std::max(e_psi, eb);
        }
    v.measures["clause_2.phi"] = e_phi;
    v.measures["clause_2.psi"] = e_psi;
    v.clauses["clause_2"] = e_phi < eps && e_psi < eps;
    if (!w2.empty()) v.witnesses["clause_2"] = w2;

    // 3: phi2 lives on the arc gamma and commutes with the arc parameter
    double off = 0.0, comm = 0.0;
    std::string w3;
    for (std::size_t s = 0; s < S; ++s) {
        const Fiber& f2 = dec.phi2[s];
        Eigen::VectorXd param(f2.u.cols());
        param.setZero();
        Eigen::Index c = 0;
        for (auto& b : f2.blocks) {
            if (b.kind != BlockKind::point) throw DomainError("phi2 must carry point blocks");
            double best = kInf, at = 0.0, acc = 0.0;
            for (std::size_t i = 0; i + 1 < dec.gamma.size(); ++i) {
                const Point& a = dec.gamma[i];
                const Point& e = dec.gamma[i + 1];
                double dab = metric.local(a, e), dap = metric.local(a, b.x), dpb = metric.local(b.x, e);
                double ex = dap + dpb - dab;
                if (ex < best) {
                    best = ex;
                    at = acc + dap;
                }
                acc += dab;
            }
            if (dec.gamma.size() == 1) {
                best = metric.local(dec.gamma[0], b.x);
                at = 0.0;
            }
            if (best > off) {
                off = best;
                w3 = "sample " + std::to_string(s) + ", point " + point_str(b.x);
            }
            param(c++) = at;
        }
        Mat H = f2.u * param.cast<cplx>().asDiagonal() * f2.u.adjoint();
        for (auto& f : F) {
            Mat m = assemble(kCX, f2, Element(f));
            comm = std::max(comm, op_norm(m * H - H * m));
        }
    }
    v.measures["clause_3.off_arc"] = off;
    v.measures["clause_3.commutator"] = comm;
    v.clauses["clause_3"] = !dec.gamma.empty() && off <= 1e-9 && comm <= tol;
    if (off > 1e-9) v.witnesses["clause_3"] = w3;

    // 4: rank inequality and density of the phi1 points
    bool rank_ok = !dec.x.empty();
    std::string w4;
    int worst_margin = std::numeric_limits<int>::max();
    for (std::size_t s = 0; s < S; ++s) {
        const int r0 = static_cast<int>(std::lround(dec.Q0[s].trace().real()));
        for (std::size_t i = 0; i < dec.x.size(); ++i) {
            const int ri = static_cast<int>(std::lround(dec.p[i][s].trace().real()));
            worst_margin = std::min(worst_margin, ri - (r0 + 2) * prm.J);
            if (!((r0 + 2) * prm.J < ri)) {
                rank_ok = false;
                if (w4.empty())
                    w4 = "sample " + std::to_string(s) + ", p_" + std::to_string(i) + ": rank " + std::to_string(ri) +
                         " vs (rank Q0 + 2) J = " + std::to_string((r0 + 2) * prm.J);
            }
        }
    }
    v.clauses["clause_4.rank"] = rank_ok;
    v.measures["clause_4.rank_margin"] = dec.x.empty() ? 0.0 : worst_margin;
    if (!w4.empty()) v.witnesses["clause_4.rank"] = w4;
    auto grid = grid_points(X, region, prm.density_grid);
    std::vector<double> near(grid.size(), kInf);
    for_each_index(grid.size(), Exec::parallel, [&](std::size_t g) {
        for (auto& x : dec.x) near[g] = std::min(near[g], metric(grid[g], x));
    });
    std::size_t worst = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (near[g] > near[worst]) worst = g;
    const double cover = grid.empty() ? 0.0 : near[worst];
    v.measures["clause_4.covering_radius"] = cover;
    v.clauses["clause_4.density"] = cover < eps;
    if (!(cover < eps)) v.witnesses["clause_4.density"] = "uncovered ball center " + point_str(grid[worst]);
    v.clauses["clause_4"] = rank_ok && cover < eps;

    if (restricted) {
        bool inside = true;
        std::string w;
        for (const HomRep* rep : {&phi, &psi})
            for (auto& f : rep->fibers)
                for (auto& b : f.blocks)
                    if (!in_region(X, region, metric, b.x)) {
                        inside = false;
                        if (w.empty()) w = "spectral point " + point_str(b.x) + " outside X1";
                    }
        for (auto& x : dec.x)
            if (!in_region(X, region, metric, x)) {
                inside = false;
                if (w.empty()) w = "phi1 point " + point_str(x) + " outside X1";
            }
        v.clauses["restriction"] = inside;
        if (!w.empty()) v.witnesses["restriction"] = w;
    }

    if (prm.delta > 0.0) {
        double h = 0.0;
        for (auto& f : prm.H) {
            auto a = aff_trace(phi, Element(f)), b = aff_trace(psi, Element(f));
            for (std::size_t s = 0; s < a.size(); ++s) h = std::max(h, std::abs(a[s] - b[s]));
        }
        v.measures["report.hypothesis_c"] = h;
        v.clauses["report.hypothesis_c"] = h < prm.delta / 4.0;
    }
    return v;
}

}  // namespace

Verdict verify_decomposition(const CandidateDecomposition& dec, const HomRep& phi, const HomRep& psi,
                             const std::vector<ScalarField>& F, const VerifyParams& params) {
    if (!phi.domain_space) throw DomainError("verifier needs the domain complex");
    return verify_on(dec, phi, psi, F, params, whole(*phi.domain_space), false);
}

Verdict verify_subcomplex_variant(const CandidateDecomposition& dec, const HomRep& phi, const HomRep& psi,
                                  const SubcomplexSpec& X1, const std::vector<ScalarField>& F,
                                  const VerifyParams& params) {
    if (!phi.domain_space) throw DomainError("verifier needs the domain complex");
    check_connected_subcomplex(*phi.domain_space, X1);
    return verify_on(dec, phi, psi, F, params, X1, true);
}

}  // namespace dd

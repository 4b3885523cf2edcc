#include "dropdecomp/decomp_two.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dropdecomp/errors.hpp"

namespace dd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const DomainSpec kCX{DomainKind::CX, 1, 1};

std::vector<Point> fiber_points(const Fiber& f) {
    std::vector<Point> out;
    for (auto& b : f.blocks) {
        if (b.kind != BlockKind::point) throw DomainError("expected a C(X) fiber");
        out.push_back(b.x);
    }
    return out;
}

Fiber with_points(const Fiber& f, const std::vector<Point>& pts) {
    Fiber g = f;
    for (std::size_t i = 0; i < pts.size(); ++i) g.blocks[i] = Block::at(pts[i]);
    return g;
}

double max_lipschitz(const SimplicialComplex2& x, const std::vector<ScalarField>& F) {
    double l = 0.0;
    for (auto& f : F) l = std::max(l, f.lipschitz(x));
    return l;
}

Point random_point(const SimplicialComplex2& x, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (!x.base_triangles().empty()) {
        const auto& t = x.base_triangles()[rng() % x.base_triangles().size()];
        double a = u(rng), b = u(rng);
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        return Point::in_triangle(t[0], t[1], t[2], 1.0 - a - b, a, b);
    }
    if (!x.base_edges().empty()) {
        const auto& e = x.base_edges()[rng() % x.base_edges().size()];
        return Point::on_edge(e[0], e[1], u(rng));
    }
    return Point::vertex(static_cast<int>(rng() % x.base_vertex_count()));
}

// a random point sharing a base simplex with p
Point random_partner(const SimplicialComplex2& x, const Point& p, std::mt19937_64& rng) {
    for (int tries = 0; tries < 64; ++tries) {
        Point q = random_point(x, rng);
        if (x.common_base_simplex(p, q)) return q;
    }
    return p;
}

Mat diag_value(const Fiber& f, const ScalarField& g) { return assemble(kCX, f, Element(g)); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- closeness vs pairing

void check_separates(const SimplicialComplex2& x, const std::vector<ScalarField>& F, int grid) {
    std::vector<Point> pts;
    for (int v = 0; v < x.base_vertex_count(); ++v) pts.push_back(Point::vertex(v));
    for (auto& e : x.base_edges())
        for (int i = 1; i < grid; ++i) pts.push_back(Point::on_edge(e[0], e[1], double(i) / grid));
    for (auto& t : x.base_triangles())
        for (int i = 1; i < grid; ++i)
            for (int j = 1; i + j < grid; ++j)
                pts.push_back(Point::in_triangle(t[0], t[1], t[2], double(grid - i - j) / grid, double(i) / grid,
                                                 double(j) / grid));
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            bool sep = false;
            for (auto& f : F) sep = sep || std::abs(f(pts[a]) - f(pts[b])) > 1e-9;
            if (!sep) throw GeneratorError("F does not separate the sample grid of X");
        }
}

PairingCheckReport pairing_from_closeness_check(const SimplicialComplex2& x, const std::vector<ScalarField>& F,
                                                double eta, int n, const PairingCheckOptions& opts) {
    if (n < 1 || !(eta > 0.0)) throw DomainError("pairing check needs n >= 1 and eta > 0");
    check_separates(x, F);
    const PathMetric metric(x);
    struct Trial {
        std::vector<Point> a, b;
        double close = 0.0, bott = 0.0;
    };
    std::vector<Trial> trials(opts.trials);
    // draws happen serially so the instance set is independent of the thread count
    std::mt19937_64 rng(opts.seed);
    std::vector<Mat> us(opts.trials), vs(opts.trials);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < opts.trials; ++t) {
        const double scale = t % 8 == 0 ? 0.0 : opts.max_perturbation * std::pow(unit(rng), 2.0);
        auto& tr = trials[t];
        for (int i = 0; i < n; ++i) {
            tr.a.push_back(random_point(x, rng));
            tr.b.push_back(x.lerp(tr.a.back(), random_partner(x, tr.a.back(), rng), scale * unit(rng)));
        }
        std::shuffle(tr.b.begin(), tr.b.end(), rng);
        us[t] = haar_unitary(n, rng);
        vs[t] = us[t] * exp_skew(cplx(0.0, 1.0) * random_hermitian(n, rng, scale));
    }
    for_each_index(trials.size(), opts.exec, [&](std::size_t t) {
        auto& tr = trials[t];
        Fiber fa{us[t], {}}, fb{vs[t], {}};
        for (int i = 0; i < n; ++i) {
            fa.blocks.push_back(Block::at(tr.a[i]));
            fb.blocks.push_back(Block::at(tr.b[i]));
        }
        for (auto& f : F) tr.close = std::max(tr.close, op_norm(diag_value(fa, f) - diag_value(fb, f)));
        tr.bott = bottleneck(tr.a, tr.b, metric).value;
    });
    PairingCheckReport rep;
    rep.trials = opts.trials;
    rep.delta = opts.delta_cap;
    for (auto& tr : trials) {
        if (tr.bott <= eta) continue;
        ++rep.failures;
        if (tr.close < rep.delta || !rep.witness) {
            if (tr.close < rep.delta) rep.delta = tr.close;
            if (!rep.witness || tr.close < rep.witness->closeness)
                rep.witness = PairingCounterexample{tr.a, tr.b, tr.close, tr.bott};
        }
    }
    return rep;
}

// ---------------------------------------------------------------- unitary path

UnitaryPathReport unitary_path_conjugation_check(const SimplicialComplex2& x, const std::vector<Point>& points,
                                                 const Mat& u, const Mat& v, const std::vector<ScalarField>& F,
                                                 double epsilon, int steps) {
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    if (u.rows() != n || v.rows() != n) throw Malformed("unitaries do not match the point count");
    if (!is_unitary(u, 1e-9) || !is_unitary(v, 1e-9)) throw Malformed("path ends must be unitary");
    (void)x;
    // commutant of diag(f(x_i)): unitaries mixing equal points only
    const Mat w = u.adjoint() * v;
    Mat c = Mat::Zero(n, n);
    std::vector<bool> done(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (done[i]) continue;
        std::vector<Eigen::Index> g;
        for (Eigen::Index j = i; j < n; ++j)
            if (points[j] == points[i]) {
                g.push_back(j);
                done[j] = true;
            }
        Mat wg(g.size(), g.size());
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = 0; b < g.size(); ++b) wg(a, b) = w(g[a], g[b]);
        Mat cg = polar_unitary(wg.adjoint());
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = 0; b < g.size(); ++b) c(g[a], g[b]) = cg(a, b);
    }
    UnitaryPathReport rep;
    rep.aligned_end = v * c;
    rep.path = unitary_geodesic(u, rep.aligned_end, steps);
    std::vector<std::vector<Mat>> vals(F.size());
    for (std::size_t fi = 0; fi < F.size(); ++fi) {
        Eigen::VectorXcd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = F[fi](points[i]);
        for (auto& ut : rep.path) vals[fi].push_back(ut * d.asDiagonal() * ut.adjoint());
    }
    for (auto& vf : vals)
        for (std::size_t a = 0; a < vf.size(); ++a)
            for (std::size_t b = a + 1; b < vf.size(); ++b) rep.deviation = std::max(rep.deviation, op_norm(vf[a] - vf[b]));
    rep.pass = rep.deviation < epsilon;
    return rep;
}

// ---------------------------------------------------------------- skeleton reduction

namespace {

double seg_dist(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Eigen::Vector2d ab = b - a;
    double l2 = ab.squaredNorm();
    double t = l2 > 0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
    return (a + t * ab - p).norm();
}

bool carried_by(const Point& p, const std::array<int, 3>& tri) {
    for (int i = 0; i < p.count(); ++i)
        if (p.v[i] != tri[0] && p.v[i] != tri[1] && p.v[i] != tri[2]) return false;
    return true;
}

}  // namespace

SkeletonReduction reduce_to_skeleton(const HomRep& phi, const std::vector<ScalarField>& F, double epsilon,
                                     double eta, const SkeletonOptions& opts) {
    if (phi.domain.kind != DomainKind::CX || !phi.domain_space) throw DomainError("reduction expects a C(X) domain");
    if (phi.codomain != CodomainKind::OverInterval) throw DomainError("reduction expects samples over [0,1]");
    if (!(epsilon > 0.0) || !(eta > 0.0)) throw DomainError("epsilon and eta must be positive");
    const SimplicialComplex2& X = *phi.domain_space;
    if (!X.is_connected()) throw DomainError("X must be connected");
    phi.validate();
    const PathMetric metric(X);
    const double eta_p = opts.eta_prime > 0.0 ? opts.eta_prime : eta / 4.0;
    const std::size_t S = phi.sample_count();
    std::vector<std::vector<Point>> spec(S);
    for (std::size_t s = 0; s < S; ++s) spec[s] = fiber_points(phi.fibers[s]);

    SkeletonReduction out;
    // adjacent pairing and the PL spectral paths between samples
    std::vector<PLPath> pieces;
    for (std::size_t s = 0; s + 1 < S; ++s) {
        auto b = bottleneck(spec[s], spec[s + 1], metric);
        out.step_pairing = std::max(out.step_pairing, b.value);
        if (b.value > eta_p)
            throw Continuity("adjacent samples " + std::to_string(s) + "," + std::to_string(s + 1) +
                             " pair only within " + fmt(b.value) + " > eta' = " + fmt(eta_p));
        for (auto [i, j] : b.matching) pieces.push_back(shortest_pl_path(metric, spec[s][i], spec[s + 1][j]));
    }
    if (S == 1)
        for (auto& p : spec[0]) pieces.push_back(PLPath{{0.0, 1.0}, {p, p}});
    for (auto& pc : pieces) out.spectral_paths.push_back(pc.x);

    // mesh size: retraction displacement <= triangle diameter
    const double lip = max_lipschitz(X, F);
    int m = 0;
    double diam = 1.0;
    while (!X.base_triangles().empty() && (diam * lip >= epsilon / 2.0 || diam >= eta / 2.0)) {
        if (++m > opts.max_subdivisions)
            throw Resource("skeleton reduction needs more than " + std::to_string(opts.max_subdivisions) +
                           " midpoint subdivisions");
        diam /= 2.0;
    }
    SimplicialComplex2 C = X;
    for (int i = 0; i < m; ++i) C = C.midpoint_subdivision();
    out.subdivisions = m;
    auto complex = std::make_shared<SimplicialComplex2>(C);
    out.complex = complex;
    out.skeleton = std::make_shared<SimplicialComplex2>(C.one_skeleton());

    // path pieces in the chart of every base triangle
    const auto& btris = X.base_triangles();
    std::vector<std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>>> segs(btris.size());
    for (std::size_t bt = 0; bt < btris.size(); ++bt)
        for (auto& pc : pieces)
            for (std::size_t i = 0; i < pc.x.size(); ++i) {
                const Point& a = pc.x[i];
                const Point& b = i + 1 < pc.x.size() ? pc.x[i + 1] : pc.x[i];
                if (carried_by(a, btris[bt]) && carried_by(b, btris[bt]))
                    segs[bt].emplace_back(X.chart2d(a, btris[bt]), X.chart2d(b, btris[bt]));
            }

    const int T = static_cast<int>(C.triangles().size());
    std::vector<Point> punct(T);
    std::vector<double> margin(T, 0.0);
    std::vector<std::string> fail(T);
    for_each_index(T, opts.exec, [&](std::size_t t) {
        const int bt = C.base_triangle_of(static_cast<int>(t));
        const auto& btri = btris[bt];
        std::array<Eigen::Vector2d, 3> corner;
        for (int i = 0; i < 3; ++i) corner[i] = C.chart2d(C.vertices()[C.triangles()[t][i]], btri);
        auto score = [&](const Eigen::Vector2d& q) {
            double d = kInf;
            for (int i = 0; i < 3; ++i) d = std::min(d, seg_dist(q, corner[i], corner[(i + 1) % 3]));
            for (auto& [a, b] : segs[bt]) d = std::min(d, seg_dist(q, a, b));
            return d;
        };
        Eigen::Vector2d best = (corner[0] + corner[1] + corner[2]) / 3.0;
        double bs = score(best);
        const double inradius = score(best) >= 0 ? std::min({seg_dist(best, corner[0], corner[1]),
                                                             seg_dist(best, corner[1], corner[2]),
                                                             seg_dist(best, corner[2], corner[0])})
                                                 : 0.0;
        if (bs < 0.25 * inradius) {
            const int g = opts.puncture_grid;
            for (int i = 1; i < g; ++i)
                for (int j = 1; i + j < g; ++j) {
                    Eigen::Vector2d q = (double(g - i - j) * corner[0] + double(i) * corner[1] + double(j) * corner[2]) / g;
                    double s = score(q);
                    if (s > bs) {
                        bs = s;
                        best = q;
                    }
                }
        }
        if (!(bs > 1e-12)) {
            fail[t] = "no puncture with positive margin in triangle " + std::to_string(t);
            return;
        }
        punct[t] = C.from_chart2d(best, btri);
        margin[t] = bs;
    });
    for (auto& f : fail)
        if (!f.empty()) throw PunctureSearch(f);
    out.sigma = T ? kInf : 0.0;
    for (int t = 0; t < T; ++t) {
        out.punctures[t] = punct[t];
        out.margins[t] = margin[t];
        out.sigma = std::min(out.sigma, margin[t]);
    }

    auto retract = [&](const Point& p) {
        int t = C.locate_triangle(p);
        if (t < 0) return p;
        return retract_point(C, t, punct[t], p);
    };
    for (auto& pc : pieces)
        for (auto& p : pc.x) {
            Point q = retract(p);
            out.retraction.triangle.push_back(C.locate_triangle(p));
            out.retraction.from.push_back(p);
            out.retraction.to.push_back(q);
            out.retraction.max_displacement = std::max(out.retraction.max_displacement, metric.local(p, q));
        }

    out.phi1 = phi;
    out.phi1.domain_space = out.skeleton;
    std::vector<double> err(S, 0.0), pair(S, 0.0);
    for_each_index(S, opts.exec, [&](std::size_t s) {
        std::vector<Point> r;
        for (auto& p : spec[s]) r.push_back(retract(p));
        out.phi1.fibers[s] = with_points(phi.fibers[s], r);
        for (auto& f : F) err[s] = std::max(err[s], op_norm(diag_value(phi.fibers[s], f) - diag_value(out.phi1.fibers[s], f)));
        pair[s] = bottleneck(spec[s], r, metric).value;
    });
    for (std::size_t s = 0; s < S; ++s) {
        out.error = std::max(out.error, err[s]);
        out.pairing = std::max(out.pairing, pair[s]);
    }
    return out;
}

// ---------------------------------------------------------------- distinct spectra

double spectral_gap(const Fiber& f, const PathMetric& metric) {
    auto pts = fiber_points(f);
    double g = kInf;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) g = std::min(g, metric.local(pts[i], pts[j]));
    return g;
}

DistinctReport make_distinct_spectrum(const HomRep& phi, const std::vector<ScalarField>& F, double epsilon,
                                      double eta) {
    if (phi.domain.kind != DomainKind::CX || !phi.domain_space) throw DomainError("expects a C(X) domain");
    if (phi.codomain != CodomainKind::OverInterval) throw DomainError("expects samples over [0,1]");
    const SimplicialComplex2& X = *phi.domain_space;
    if (!X.base_triangles().empty()) throw DomainError("distinct-spectrum perturbation needs a graph domain");
    if (!(epsilon > 0.0) || !(eta > 0.0)) throw DomainError("epsilon and eta must be positive");
    const PathMetric metric(X);
    const std::size_t S = phi.sample_count();
    const double collide = 1e-9;
    const auto interior = [&](std::size_t s) { return phi.times[s] > 0.0 && phi.times[s] < 1.0; };

    std::vector<std::vector<Point>> spec(S);
    for (std::size_t s = 0; s < S; ++s) spec[s] = fiber_points(phi.fibers[s]);
    const std::size_t N = spec.empty() ? 0 : spec[0].size();
    std::vector<bool> moving(N, false);
    for (std::size_t s = 0; s < S; ++s) {
        if (!interior(s)) continue;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j < N; ++j)
                if (metric.local(spec[s][i], spec[s][j]) <= collide) moving[i] = moving[j] = true;
    }
    const double lip = max_lipschitz(X, F);
    const double A = 0.25 * std::min({eta, lip > 0 ? epsilon / lip : kInf, 0.5});

    DistinctReport rep;
    rep.psi = phi;
    rep.min_gap = kInf;
    for (std::size_t s = 0; s < S; ++s) {
        if (!interior(s)) continue;
        const double t = phi.times[s];
        const double bump = std::min({1.0, t / 0.25, (1.0 - t) / 0.25});
        std::vector<Point> q;
        double gap = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            q = spec[s];
            for (std::size_t j = 0; j < N; ++j)
                if (moving[j]) q[j] = nudge(X, spec[s][j], A * bump * (j + 1.0) / (N + 1.0), int(j) + 7 * attempt);
            gap = kInf;
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = i + 1; j < N; ++j) gap = std::min(gap, metric.local(q[i], q[j]));
            if (gap > collide) break;
        }
        if (!(gap > collide)) throw GapViolation("could not separate the spectrum at t=" + fmt(t));
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.psi.fibers[s] = with_points(phi.fibers[s], q);
        for (std::size_t j = 0; j < N; ++j) rep.pairing = std::max(rep.pairing, metric.local(spec[s][j], q[j]));
        for (auto& f : F)
            rep.error = std::max(rep.error, op_norm(diag_value(phi.fibers[s], f) - diag_value(rep.psi.fibers[s], f)));
    }
    if (rep.min_gap == kInf) rep.min_gap = 0.0;
    return rep;
}

EndpointExtension extend_endpoints_distinct(const HomRep& phi, double delta, double max_disp, int ext) {
    if (phi.domain.kind != DomainKind::CX || !phi.domain_space) throw DomainError("expects a C(X) domain");
    const SimplicialComplex2& X = *phi.domain_space;
    if (X.base_vertex_count() <= 1 || X.base_edges().empty())
        throw DomainError("endpoint extension needs X to be more than a point");
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (phi.sample_count() < 2 || phi.times.front() != 0.0 || phi.times.back() != 1.0)
        throw MeshIncompatibility("samples must start at 0 and end at 1");
    if (max_disp <= 0.0) max_disp = delta;
    const int k = phi.codomain_k;
    const PathMetric metric(X);

    EndpointExtension out;
    // new distinct endpoint points, one per k-group
    auto separate = [&](const Fiber& f) {
        auto pts = fiber_points(f);
        if (k < 1 || pts.size() % k) throw BlockStructure("endpoint fiber size is not a multiple of k");
        const std::size_t G = pts.size() / k;
        std::vector<Point> grp(G);
        for (std::size_t g = 0; g < G; ++g) {
            for (int j = 1; j < k; ++j)
                if (!(pts[g * k + j] == pts[g * k])) throw BlockStructure("endpoint fiber is not of the form M (x) 1_k");
            grp[g] = pts[g * k];
        }
        std::vector<Point> moved = grp;
        for (int attempt = 0; attempt < 8; ++attempt) {
            moved = grp;
            for (std::size_t g = 1; g < G; ++g) {
                bool dup = false;
                for (std::size_t h = 0; h < g; ++h) dup = dup || grp[h] == grp[g];
                if (dup) moved[g] = nudge(X, grp[g], max_disp * double(g) / double(G), int(g) + 5 * attempt);
            }
            bool ok = true;
            for (std::size_t a = 0; a < G && ok; ++a)
                for (std::size_t b = a + 1; b < G && ok; ++b) ok = metric.local(moved[a], moved[b]) > 1e-12;
            if (ok) break;
        }
        std::vector<Point> full(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) full[i] = moved[i / k];
        return std::make_pair(pts, full);
    };
    auto [p0, q0] = separate(phi.fibers.front());
    auto [p1, q1] = separate(phi.fibers.back());
    for (std::size_t i = 0; i < p0.size(); ++i) out.max_displacement = std::max(out.max_displacement, metric.local(p0[i], q0[i]));
    for (std::size_t i = 0; i < p1.size(); ++i) out.max_displacement = std::max(out.max_displacement, metric.local(p1[i], q1[i]));
    if (out.max_displacement > max_disp * (1 + 1e-12))
        throw Hypothesis("endpoint separation moves spectra by " + fmt(out.max_displacement));

    out.psi = phi;
    out.psi.times.clear();
    out.psi.fibers.clear();
    const double L = 1.0 + 2.0 * delta;
    auto lerp_all = [&](const std::vector<Point>& a, const std::vector<Point>& b, double s) {
        std::vector<Point> r;
        for (std::size_t i = 0; i < a.size(); ++i) r.push_back(X.lerp(a[i], b[i], s));
        return r;
    };
    for (int i = 0; i < ext; ++i) {
        double lam = double(i) / ext;
        out.psi.times.push_back(lam * delta / L);
        out.psi.fibers.push_back(with_points(phi.fibers.front(), lerp_all(q0, p0, lam)));
    }
    for (std::size_t s = 0; s < phi.sample_count(); ++s) {
        out.psi.times.push_back((phi.times[s] + delta) / L);
        out.psi.fibers.push_back(phi.fibers[s]);
    }
    for (int i = 1; i <= ext; ++i) {
        double lam = double(i) / ext;
        out.psi.times.push_back((1.0 + delta + lam * delta) / L);
        out.psi.fibers.push_back(with_points(phi.fibers.back(), lerp_all(p1, q1, lam)));
    }
    out.psi.times.front() = 0.0;
    out.psi.times.back() = 1.0;
    for (auto* f : {&out.psi.fibers.front(), &out.psi.fibers.back()}) {
        auto m = point_spectrum(*f);
        for (auto& [p, c] : m.points) out.endpoint_multiplicity.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------- cluster fields

namespace {

Mat polar_cols(const Mat& m) {
    if (m.cols() == 0) return m;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

Mat proj_of(const Mat& cols) { return cols * cols.adjoint(); }

// point at parameter lam on the Grassmann geodesic from span(a) to span(b)
Mat subspace_geodesic(const Mat& a, const Mat& b, double lam) {
    if (lam <= 0.0 || a.cols() == 0) return a;
    if (lam >= 1.0) return b;
    Eigen::JacobiSVD<Mat> svd(a.adjoint() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat av = a * svd.matrixU(), bv = b * svd.matrixV();
    Mat out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
        const double th = std::acos(c);
        Vec q = bv.col(i) - c * av.col(i);
        const double qn = q.norm();
        if (qn < 1e-13 || th < 1e-13)
            out.col(i) = av.col(i);
        else
            out.col(i) = std::cos(lam * th) * av.col(i) + std::sin(lam * th) * (q / qn);
    }
    return out;
}

double tensor_defect(const Mat& p, int k) {
    const Eigen::Index m = p.rows() / k;
    Mat pr = Mat::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            for (int j = 0; j < k; ++j) pr(a, b) += p(a * k + j, b * k + j);
    return op_norm(p - kron_identity(pr / double(k), k));
}

// spectral subspaces of equal points within a column set, as column groups
std::vector<std::vector<int>> point_groups(const std::vector<Point>& pts, const std::vector<int>& cols) {
    std::vector<std::vector<int>> g;
    for (int c : cols) {
        auto it = std::find_if(g.begin(), g.end(), [&](auto& grp) { return pts[grp[0]] == pts[c]; });
        if (it == g.end())
            g.push_back({c});
        else
            it->push_back(c);
    }
    return g;
}

Mat columns(const Mat& u, const std::vector<int>& cols) {
    Mat m(u.rows(), cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(i) = u.col(cols[i]);
    return m;
}

// endpoint subspace made of whole spectral groups of size k, maximizing overlap with ref
Mat endpoint_choice(const Mat& u, const std::vector<Point>& pts, const std::vector<int>& cols, int want, int k,
                    const Mat* ref, double t) {
    auto groups = point_groups(pts, cols);
    for (auto& g : groups)
        if (static_cast<int>(g.size()) % k)
            throw BlockStructure("endpoint cluster at t=" + fmt(t) + " has a spectral point of multiplicity not divisible by k");
    std::vector<std::pair<double, int>> order;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        double ov = ref ? (ref->adjoint() * columns(u, groups[i])).squaredNorm() : -double(i);
        order.emplace_back(-ov, static_cast<int>(i));
    }
    std::stable_sort(order.begin(), order.end());
    std::vector<int> chosen;
    for (auto& [ov, i] : order) {
        if (static_cast<int>(chosen.size()) >= want) break;
        if (static_cast<int>(chosen.size() + groups[i].size()) <= want)
            chosen.insert(chosen.end(), groups[i].begin(), groups[i].end());
    }
    if (static_cast<int>(chosen.size()) != want)
        throw RankError("endpoint cluster cannot host a subprojection of rank " + std::to_string(want) +
                        " built from k-fold spectral groups");
    return columns(u, chosen);
}

}  // namespace

ClusterField cluster_projections(const HomRep& phi, const std::vector<std::vector<Point>>& base, double eta,
                                 const ClusterRanks& ranks, int k, const std::vector<ScalarField>& G, Exec exec) {
    if (phi.domain.kind != DomainKind::CX || !phi.domain_space) throw DomainError("expects a C(X) domain");
    if (ranks.l1 < 1 || ranks.l2 < 1 || ranks.r < 0 || k < 1) throw RankError("invalid cluster ranks");
    if (ranks.l2 < 3) throw RankError("subprojection rank (l2-3)k is negative");
    if (static_cast<int>(base.size()) != ranks.l1) throw Malformed("need one base map per cluster");
    const int N = (ranks.l1 * ranks.l2 + ranks.r) * k;
    const std::size_t S = phi.sample_count();
    if (S < 2) throw MeshIncompatibility("cluster fields need at least two samples");
    for (auto& b : base)
        if (b.size() != S) throw MeshIncompatibility("base maps must be sampled at the fiber samples");
    const PathMetric metric(*phi.domain_space);
    const int L = ranks.l1;

    ClusterField out;
    out.ranks = ranks;
    out.k = k;
    std::vector<int> mult(L);
    for (int j = 0; j < L; ++j) {
        mult[j] = (ranks.l2 + (j == L - 1 ? ranks.r : 0)) * k;
        out.target_rank.push_back((ranks.l2 - 3 + (j == L - 1 ? ranks.r : 0)) * k);
    }
    out.E.assign(S, std::vector<std::vector<int>>(L));
    out.P.assign(S, std::vector<Mat>(L));
    std::vector<std::vector<Point>> pts(S);
    std::vector<std::string> err(S);
    std::vector<double> sep(S, kInf), res(S, 0.0);
    for_each_index(S, exec, [&](std::size_t s) {
        const Fiber& f = phi.fibers[s];
        if (f.u.rows() != N || static_cast<int>(f.blocks.size()) != N) {
            err[s] = "fiber size differs from (l1 l2 + r) k";
            return;
        }
        pts[s] = fiber_points(f);
        for (int i = 0; i < L; ++i)
            for (int j = i + 1; j < L; ++j) sep[s] = std::min(sep[s], metric(base[i][s], base[j][s]));
        if (!(sep[s] > 2.0 * eta)) {
            err[s] = "collision: clusters merge at y=" + fmt(phi.times[s]) + " (base separation " + fmt(sep[s]) + ")";
            return;
        }
        for (int c = 0; c < N; ++c) {
            int best = 0;
            double bd = kInf;
            for (int j = 0; j < L; ++j) {
                double d = metric(pts[s][c], base[j][s]);
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (bd > eta) {
                err[s] = "pairing: spectral point farther than eta from every base map at y=" + fmt(phi.times[s]);
                return;
            }
            out.E[s][best].push_back(c);
        }
        for (int j = 0; j < L; ++j) {
            if (static_cast<int>(out.E[s][j].size()) != mult[j]) {
                err[s] = "pairing: cluster " + std::to_string(j) + " holds " + std::to_string(out.E[s][j].size()) +
                         " points at y=" + fmt(phi.times[s]) + ", expected " + std::to_string(mult[j]);
                return;
            }
            out.P[s][j] = proj_of(columns(f.u, out.E[s][j]));
        }
        Mat sum = Mat::Zero(N, N);
        for (int j = 0; j < L; ++j) {
            sum += out.P[s][j];
            for (int i = j + 1; i < L; ++i) res[s] = std::max(res[s], op_norm(out.P[s][j] * out.P[s][i]));
        }
        res[s] = std::max(res[s], op_norm(sum - Mat::Identity(N, N)));
    });
    for (auto& e : err)
        if (!e.empty()) {
            if (e.rfind("collision", 0) == 0) throw ClusterCollision(e);
            if (e.rfind("pairing", 0) == 0) throw Hypothesis(e);
            throw Malformed(e);
        }
    out.sigma_prime = kInf;
    for (std::size_t s = 0; s < S; ++s) {
        out.sigma_prime = std::min(out.sigma_prime, sep[s] - 2.0 * eta);
        out.resolution_error = std::max(out.resolution_error, res[s]);
    }

    // subprojections: k-fold endpoint choices at both ends, each continued by
    // maximal overlap across the samples and blended along the subspace geodesic
    out.p.assign(S, std::vector<Mat>(L));
    for (int j = 0; j < L; ++j) {
        auto continue_from = [&](Mat cols, std::size_t s) {
            Mat basis = columns(phi.fibers[s].u, out.E[s][j]);
            return Mat(polar_cols(basis * (basis.adjoint() * cols)));
        };
        std::vector<Mat> fwd(S), bwd(S);
        fwd[0] = endpoint_choice(phi.fibers[0].u, pts[0], out.E[0][j], out.target_rank[j], k, nullptr, 0.0);
        for (std::size_t s = 1; s < S; ++s) fwd[s] = continue_from(fwd[s - 1], s);
        bwd[S - 1] = endpoint_choice(phi.fibers[S - 1].u, pts[S - 1], out.E[S - 1][j], out.target_rank[j], k,
                                     &fwd[S - 1], 1.0);
        for (std::size_t s = S - 1; s-- > 0;) bwd[s] = continue_from(bwd[s + 1], s);
        for (std::size_t s = 0; s < S; ++s) {
            const double lam = s == 0 ? 0.0 : s + 1 == S ? 1.0 : phi.times[s];
            out.p[s][j] = proj_of(subspace_geodesic(fwd[s], bwd[s], lam));
            if (s) out.max_jump = std::max(out.max_jump, op_norm(out.p[s][j] - out.p[s - 1][j]));
        }
        out.endpoint_error = std::max({out.endpoint_error, tensor_defect(out.p[0][j], k), tensor_defect(out.p[S - 1][j], k)});
    }
    out.p0.resize(S);
    std::vector<double> ce(S, 0.0);
    for_each_index(S, exec, [&](std::size_t s) {
        Mat p0 = Mat::Identity(N, N);
        for (int j = 0; j < L; ++j) p0 -= out.p[s][j];
        out.p0[s] = p0;
        for (auto& g : G) {
            Mat v = diag_value(phi.fibers[s], g);
            Mat approx = p0 * v * p0;
            for (int j = 0; j < L; ++j) approx += g(base[j][s]) * out.p[s][j];
            ce[s] = std::max(ce[s], op_norm(v - approx));
        }
    });
    for (double e : ce) out.conclusion_error = std::max(out.conclusion_error, e);
    return out;
}

}  // namespace dd

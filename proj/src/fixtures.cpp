#include "dropdecomp/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dropdecomp/errors.hpp"

namespace dd {

SimplicialComplex2 hexagon_disk() {
    std::vector<std::array<int, 3>> tris;
    for (int i = 1; i <= 6; ++i) tris.push_back({0, i, i % 6 + 1});
    return SimplicialComplex2::from_lists(7, {}, tris);
}

SimplicialComplex2 single_triangle() { return SimplicialComplex2::from_lists(3, {}, {{0, 1, 2}}); }

SimplicialComplex2 unit_square() { return SimplicialComplex2::from_lists(4, {}, {{0, 1, 2}, {0, 2, 3}}); }

SimplicialComplex2 star_graph(int arms) {
    std::vector<std::array<int, 2>> edges;
    for (int i = 1; i <= arms; ++i) edges.push_back({0, i});
    return SimplicialComplex2::from_lists(arms + 1, edges, {});
}

namespace {

// affine hermitian field over base vertices
Mat field_at(const std::vector<Mat>& hv, const Point& p) {
    Mat h = Mat::Zero(hv[0].rows(), hv[0].cols());
    for (int i = 0; i < p.count(); ++i) h += p.w[i] * hv[p.v[i]];
    return h;
}

std::vector<double> expanded(const DomainSpec& d, const Fiber& f) {
    std::vector<double> out;
    for (auto& b : f.blocks) {
        int s = d.block_size(b);
        double v = b.kind == BlockKind::under0 ? 0.0 : b.kind == BlockKind::under1 ? 1.0 : b.t;
        for (int i = 0; i < s; ++i) out.push_back(v);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- endpoint mass

EndpointMassFixture endpoint_mass_fixture(std::uint64_t seed, const EndpointMassParams& p) {
    const int k = p.k;
    if (k < 1 || p.n < 1) throw Infeasible("k and n must be positive");
    if (p.n < 2 * k) throw Infeasible("rank " + std::to_string(p.n) + " cannot carry k=" + std::to_string(k) +
                                      " units in both caps (needs at least 2k)");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    EndpointMassFixture fx;
    fx.complex = hexagon_disk();
    fx.domain = DomainSpec{DomainKind::Ik, k, 1};
    fx.epsilon = p.epsilon;
    fx.F = {DimensionDropElement::identity_fn(k), probe_element(k),
            DimensionDropElement::scalar(k, 1, [](double t) { return std::cos(2.0 * t); })};
    fx.eta = eta_for(fx.F, p.epsilon);
    const double eta = fx.eta;

    // block layout: a0 underline-0, c0 small interior, mid interior, c1 near 1, a1 underline-1
    int budget = p.n;
    int a0 = k + static_cast<int>(rng() % (k + 2));
    int a1 = k + static_cast<int>(rng() % (k + 1));
    while (a0 + a1 > budget) (a0 > k ? a0 : a1)--;
    budget -= a0 + a1;
    int c0 = budget >= k && rng() % 2 ? 1 : 0;
    budget -= c0 * k;
    int c1 = budget >= k && rng() % 2 ? 1 : 0;
    budget -= c1 * k;
    int mid = budget / k;
    budget -= mid * k;
    a0 += budget;  // leftover units become underline-0 blocks
    std::vector<Block> blocks;
    for (int i = 0; i < a0; ++i) blocks.push_back(Block::u0());
    if (c0) blocks.push_back(Block::in(eta / 4.0 * (0.3 + 0.4 * unif(rng))));
    std::vector<double> mids;
    for (int i = 0; i < mid; ++i) mids.push_back(0.25 + 0.5 * (i + 0.5 + 0.3 * (unif(rng) - 0.5)) / std::max(mid, 1));
    for (double m : mids) blocks.push_back(Block::in(m));
    if (c1) blocks.push_back(Block::in(1.0 - eta / 4.0 * (0.3 + 0.4 * unif(rng))));
    for (int i = 0; i < a1; ++i) blocks.push_back(Block::u1());
    fx.n = p.n;
    fx.size = p.n + p.pad;

    const int N = fx.size;
    Mat U0 = haar_unitary(N, rng);
    std::vector<Mat> hv;
    std::vector<double> slope;
    for (int v = 0; v < fx.complex.base_vertex_count(); ++v) {
        hv.push_back(random_hermitian(N, rng));
        slope.push_back(unif(rng));
    }
    const double kappa = p.constant ? 0.0 : p.kappa, drift = p.constant ? 0.0 : p.drift;
    fx.sampler = [=](const Point& x) {
        Fiber f;
        f.u = kappa == 0.0 ? U0 : Mat(U0 * exp_skew(cplx(0.0, kappa) * field_at(hv, x)));
        f.blocks = blocks;
        double s = 0.0;
        for (int i = 0; i < x.count(); ++i) s += x.w[i] * slope[x.v[i]];
        for (auto& b : f.blocks)
            if (b.kind == BlockKind::interior) b.t += (b.t < 0.5 ? 1.0 : -1.0) * drift * s;
        return f;
    };
    // self-check on a sample grid
    for (int v = 0; v < fx.complex.base_vertex_count(); ++v) {
        Point probes[] = {Point::vertex(v), fx.complex.lerp(Point::vertex(0), Point::vertex(v), 0.5)};
        for (auto& x : probes) {
            auto e = expanded(fx.domain, fx.sampler(x));
            int lo = 0, hi = 0;
            for (double t : e) {
                lo += t <= eta / 4.0;
                hi += t >= 1.0 - eta / 4.0;
            }
            if (lo < k || hi < k) throw Infeasible("generated fixture misses the endpoint-mass hypothesis");
        }
    }
    return fx;
}

// ---------------------------------------------------------------- disk loop

DiskFixture disk_fixture(std::uint64_t seed, int k, int k_prime, int blocks, int samples, int winding) {
    if (k < 1 || k_prime < 0 || blocks < 0 || samples < 3) throw Infeasible("invalid disk fixture parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DiskFixture fx;
    fx.domain = DomainSpec{DomainKind::Ik, k, 1};
    fx.k_prime = k_prime;
    fx.winding = winding;
    const int r = k_prime + blocks * k;
    if (r == 0) throw Infeasible("empty cap");
    Mat U0 = haar_unitary(r, rng);
    Mat A = random_hermitian(r, rng, 0.6), B = random_hermitian(r, rng, 0.6);
    std::vector<double> base(blocks), amp(blocks), ph(blocks);
    for (int b = 0; b < blocks; ++b) {
        // separated bases keep the value order fixed around the loop
        base[b] = 0.008 + 0.04 * (b + 0.5 * unif(rng)) / std::max(blocks, 1);
        amp[b] = 0.1 * 0.04 / std::max(blocks, 1) * unif(rng);
        ph[b] = 2.0 * std::numbers::pi * unif(rng);
    }
    if (blocks >= 2) {  // one group of equal values
        base[1] = base[0];
        amp[1] = amp[0];
        ph[1] = ph[0];
    }
    for (int j = 0; j < samples; ++j) {
        const double th = 2.0 * std::numbers::pi * j / samples;
        Mat W = Mat::Identity(r, r);
        W(0, 0) = std::exp(cplx(0.0, winding * th));
        Fiber f;
        f.u = U0 * exp_skew(cplx(0.0, 1.0) * (std::cos(th) * A + std::sin(th) * B)) * W;
        std::vector<double> vals;
        for (int b = 0; b < blocks; ++b) vals.push_back(base[b] + amp[b] * std::sin(th + ph[b]));
        // canonical order: ascending values, columns permuted along
        std::vector<int> order(blocks);
        for (int b = 0; b < blocks; ++b) order[b] = b;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        Mat u = f.u;
        for (int i = 0; i < k_prime; ++i) f.blocks.push_back(Block::u0());
        for (int b = 0; b < blocks; ++b) {
            u.middleCols(k_prime + b * k, k) = f.u.middleCols(k_prime + order[b] * k, k);
            f.blocks.push_back(Block::in(vals[order[b]]));
        }
        f.u = u;
        fx.loop.push_back(std::move(f));
    }
    return fx;
}

// ---------------------------------------------------------------- skeleton

SkeletonFixture skeleton_fixture(std::uint64_t seed, int N, int samples, bool through_barycenter,
                                 bool constant_at_vertex) {
    if (N < 1 || samples < 2) throw Infeasible("invalid skeleton fixture parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto X = std::make_shared<SimplicialComplex2>(unit_square());
    SkeletonFixture fx;
    fx.epsilon = 0.3;
    fx.eta = 0.4;
    fx.F = {ScalarField::coordinate(4, 0), ScalarField::coordinate(4, 1), ScalarField::coordinate(4, 2)};
    auto rand_in = [&](int tri) {
        const auto& t = X->base_triangles()[tri];
        double a = unif(rng), b = unif(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        return Point::in_triangle(t[0], t[1], t[2], 1 - a - b, a, b);
    };
    std::vector<std::pair<Point, Point>> paths;
    for (int i = 0; i < N; ++i) {
        int tri = static_cast<int>(rng() % 2);
        Point a = rand_in(tri), b = rand_in(tri);
        if (constant_at_vertex) a = b = Point::vertex(1);
        if (through_barycenter && i == 0) {
            a = Point::in_triangle(0, 1, 2, 0.6, 0.2, 0.2);
            b = Point::in_triangle(0, 1, 2, 0.1, 0.45, 0.45);
        }
        paths.emplace_back(a, b);
    }
    Mat U0 = haar_unitary(N, rng);
    Mat H = random_hermitian(N, rng);
    fx.phi.domain = DomainSpec{DomainKind::CX, 1, 1};
    fx.phi.codomain = CodomainKind::OverInterval;
    fx.phi.size = N;
    fx.phi.domain_space = X;
    for (int s = 0; s < samples; ++s) {
        const double t = double(s) / (samples - 1);
        Fiber f;
        f.u = U0 * exp_skew(cplx(0.0, t) * H);
        for (auto& [a, b] : paths) f.blocks.push_back(Block::at(X->lerp(a, b, t)));
        fx.phi.times.push_back(t);
        fx.phi.fibers.push_back(std::move(f));
    }
    return fx;
}

// ---------------------------------------------------------------- distinct spectra

DistinctFixture distinct_fixture(std::uint64_t seed, int N, int samples) {
    if (N < 2 || samples < 3) throw Infeasible("invalid distinct fixture parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int arms = 3;
    auto X = std::make_shared<SimplicialComplex2>(star_graph(arms));
    DistinctFixture fx;
    fx.epsilon = 0.2;
    fx.eta = 0.2;
    for (int v = 0; v <= arms; ++v) fx.F.push_back(ScalarField::coordinate(arms + 1, v));
    // point j travels along arm(j) between two parameters; pairs share paths
    struct Path {
        int arm;
        double s0, s1;
    };
    std::vector<Path> paths;
    for (int j = 0; j < N; ++j) {
        if (j % 2 == 1 && rng() % 3 != 0) {
            paths.push_back(paths.back());  // forced collision along the whole path
            continue;
        }
        paths.push_back({1 + static_cast<int>(rng() % arms), 0.1 + 0.8 * unif(rng), 0.1 + 0.8 * unif(rng)});
    }
    Mat U0 = haar_unitary(N, rng);
    Mat H = random_hermitian(N, rng);
    fx.phi.domain = DomainSpec{DomainKind::CX, 1, 1};
    fx.phi.codomain = CodomainKind::OverInterval;
    fx.phi.size = N;
    fx.phi.domain_space = X;
    for (int s = 0; s < samples; ++s) {
        const double t = double(s) / (samples - 1);
        Fiber f;
        f.u = U0 * exp_skew(cplx(0.0, t) * H);
        for (auto& p : paths) f.blocks.push_back(Block::at(Point::on_edge(0, p.arm, (1 - t) * p.s0 + t * p.s1)));
        fx.phi.times.push_back(t);
        fx.phi.fibers.push_back(std::move(f));
    }
    return fx;
}

// ---------------------------------------------------------------- clusters

ClusterFixture cluster_fixture(std::uint64_t seed, const ClusterRanks& ranks, int k, double eta, int samples) {
    if (ranks.l1 < 1 || ranks.l1 > 3 || ranks.l2 < 3 || ranks.r < 0 || k < 1)
        throw Infeasible("cluster fixture needs 1 <= l1 <= 3, l2 >= 3, r >= 0, k >= 1");
    if (!(eta > 0.0) || eta > 0.1) throw Infeasible("cluster fixture needs 0 < eta <= 0.1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto X = std::make_shared<SimplicialComplex2>(single_triangle());
    ClusterFixture fx;
    fx.ranks = ranks;
    fx.k = k;
    fx.eta = eta;
    fx.epsilon = 0.2;
    fx.G = {ScalarField::coordinate(3, 0), ScalarField::coordinate(3, 1), ScalarField::coordinate(3, 2)};
    const int L = ranks.l1;
    // base maps near distinct corners, drifting slowly
    const Point corners[3] = {Point::in_triangle(0, 1, 2, 0.8, 0.1, 0.1), Point::in_triangle(0, 1, 2, 0.1, 0.8, 0.1),
                              Point::in_triangle(0, 1, 2, 0.1, 0.1, 0.8)};
    const Point center = Point::in_triangle(0, 1, 2, 1.0 / 3, 1.0 / 3, 1.0 / 3);
    fx.base.assign(L, {});
    // columns: groups of k with a common offset target
    std::vector<int> owner;
    for (int j = 0; j < L; ++j) {
        int m = ranks.l2 + (j == L - 1 ? ranks.r : 0);
        for (int g = 0; g < m; ++g) owner.push_back(j);
    }
    const int G = static_cast<int>(owner.size());
    const int N = G * k;
    std::vector<Point> target(G);
    std::vector<double> gs(G), cs(N);
    for (int g = 0; g < G; ++g) {
        target[g] = Point::in_triangle(0, 1, 2, unif(rng) + 0.1, unif(rng) + 0.1, unif(rng) + 0.1);
        double tot = target[g].w[0] + target[g].w[1] + target[g].w[2];
        target[g] = Point::in_triangle(0, 1, 2, target[g].w[0] / tot, target[g].w[1] / tot, target[g].w[2] / tot);
        gs[g] = 0.4 * eta * unif(rng);
    }
    for (int c = 0; c < N; ++c) cs[c] = 0.4 * eta * (0.2 + 0.8 * unif(rng));
    Mat U0 = haar_unitary(G, rng);
    Mat H = random_hermitian(N, rng);
    const Mat Uend = kron_identity(U0, k);
    fx.phi.domain = DomainSpec{DomainKind::CX, 1, 1};
    fx.phi.codomain = CodomainKind::OverInterval;
    fx.phi.size = N;
    fx.phi.codomain_k = k;
    fx.phi.domain_space = X;
    for (int s = 0; s < samples; ++s) {
        const double y = double(s) / (samples - 1);
        std::vector<Point> a(L);
        for (int j = 0; j < L; ++j) {
            a[j] = X->lerp(corners[j], center, 0.1 * y);
            fx.base[j].push_back(a[j]);
        }
        Fiber f;
        f.u = exp_skew(cplx(0.0, y * (1.0 - y)) * H) * Uend;
        for (int c = 0; c < N; ++c) {
            const int g = c / k;
            const Point& aj = a[owner[g]];
            double d = X->chart_distance(aj, target[g]).value();
            double dist = gs[g] + 4.0 * y * (1.0 - y) * (cs[c] - gs[g]);  // equal within a group at y = 0, 1
            f.blocks.push_back(Block::at(d > 0 ? X->lerp(aj, target[g], std::min(1.0, dist / d)) : aj));
        }
        fx.phi.times.push_back(y);
        fx.phi.fibers.push_back(std::move(f));
    }
    return fx;
}

// ---------------------------------------------------------------- verifier witness

VerifierFixture verifier_fixture(std::uint64_t seed, bool on_edge) {
    std::mt19937_64 rng(seed);
    auto X = std::make_shared<SimplicialComplex2>(single_triangle());
    VerifierFixture fx;
    fx.edge.vertices = {0, 1};
    fx.edge.edges = {{0, 1}};
    fx.params.epsilon = on_edge ? 0.3 : 0.5;
    fx.params.J = 1;
    fx.params.density_grid = 0.05;
    fx.F = {ScalarField::coordinate(3, 0), ScalarField::coordinate(3, 1), ScalarField::coordinate(3, 2)};
    if (on_edge)
        fx.dec.x = {Point::vertex(0), Point::on_edge(0, 1, 0.5), Point::vertex(1)};
    else
        fx.dec.x = {Point::vertex(0), Point::vertex(1), Point::vertex(2),
                    Point::in_triangle(0, 1, 2, 1.0 / 3, 1.0 / 3, 1.0 / 3)};
    fx.dec.gamma = on_edge ? std::vector<Point>{Point::on_edge(0, 1, 0.2), Point::on_edge(0, 1, 0.8)}
                           : std::vector<Point>{Point::vertex(0), Point::on_edge(0, 1, 0.5),
                                                Point::in_triangle(0, 1, 2, 0.25, 0.25, 0.5)};
    const int r0 = 1, rp = 6, r2 = 2;
    const int nx = static_cast<int>(fx.dec.x.size());
    const int N = r0 + rp * nx + r2;
    const int samples = 9;
    Mat U0 = haar_unitary(N, rng), H = random_hermitian(N, rng), V = haar_unitary(N, rng);
    for (auto* rep : {&fx.phi, &fx.psi}) {
        rep->domain = DomainSpec{DomainKind::CX, 1, 1};
        rep->codomain = CodomainKind::OverInterval;
        rep->size = N;
        rep->domain_space = X;
    }
    fx.dec.p.assign(nx, {});
    for (int s = 0; s < samples; ++s) {
        const double t = double(s) / (samples - 1);
        const Mat u = exp_skew(cplx(0.0, t) * H) * U0;
        // column layout: Q0 | p_0 .. p_{nx-1} | phi2
        Fiber f;
        f.u = u;
        Point q0 = on_edge ? Point::on_edge(0, 1, 0.3 + 0.2 * t) : Point::in_triangle(0, 1, 2, 0.5, 0.3, 0.2);
        f.blocks.push_back(Block::at(q0));
        for (int i = 0; i < nx; ++i)
            for (int c = 0; c < rp; ++c) f.blocks.push_back(Block::at(fx.dec.x[i]));
        std::vector<Point> arc;
        if (on_edge) {
            arc = {Point::on_edge(0, 1, 0.2 + 0.1 * t), Point::on_edge(0, 1, 0.7)};
        } else {
            arc = {X->lerp(fx.dec.gamma[0], fx.dec.gamma[1], 0.25 + 0.5 * t),
                   X->lerp(fx.dec.gamma[1], fx.dec.gamma[2], 0.5)};
        }
        for (auto& p : arc) f.blocks.push_back(Block::at(p));
        fx.phi.times.push_back(t);
        fx.phi.fibers.push_back(f);
        Fiber g = f;
        g.u = V.adjoint() * u;
        fx.psi.times.push_back(t);
        fx.psi.fibers.push_back(g);
        fx.dec.u.push_back(V);

        auto proj = [&](int from, int count) {
            return Mat(u.middleCols(from, count) * u.middleCols(from, count).adjoint());
        };
        fx.dec.Q0.push_back(proj(0, r0));
        fx.dec.Q1.push_back(proj(r0, rp * nx));
        fx.dec.Q2.push_back(proj(r0 + rp * nx, r2));
        for (int i = 0; i < nx; ++i) fx.dec.p[i].push_back(proj(r0 + rp * i, rp));
        Fiber f2;
        f2.u.resize(N, N);
        f2.u << u.rightCols(r2), u.leftCols(N - r2);
        for (auto& p : arc) f2.blocks.push_back(Block::at(p));
        fx.dec.phi2.push_back(f2);
    }
    return fx;
}

void mutate_verifier(VerifierFixture& fx, const std::string& which) {
    const bool on_edge = fx.dec.x.size() == 3;
    if (which == "sum") {
        for (auto& q : fx.dec.Q2) q.setZero();
    } else if (which == "u") {
        for (auto& u : fx.dec.u) u = Mat::Identity(u.rows(), u.cols());
    } else if (which == "gamma") {
        fx.dec.gamma = on_edge ? std::vector<Point>{Point::on_edge(0, 1, 0.75), Point::on_edge(0, 1, 0.9)}
                               : std::vector<Point>{Point::vertex(2), Point::on_edge(1, 2, 0.5)};
    } else if (which == "J") {
        fx.params.J = 2;
    } else {
        throw DomainError("unknown verifier mutation '" + which + "'");
    }
}

// ---------------------------------------------------------------- sdp

SdpFixture sdp_fixture(std::uint64_t seed, int k, int l, int blocks, double eta, int samples) {
    if (k < 1 || l < 1 || blocks < 1 || !(eta > 0.0)) throw Infeasible("invalid sdp fixture parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SdpFixture fx;
    fx.eta = eta;
    const int spacing_blocks = static_cast<int>(std::ceil(1.0 / eta)) + 1;
    if (blocks < spacing_blocks)
        throw Infeasible("sdp fixture needs at least " + std::to_string(spacing_blocks) + " blocks for eta spacing");
    const int N = blocks * l * k;
    Mat U0 = haar_unitary(N, rng);
    Mat H = random_hermitian(N, rng);
    fx.rep.domain = DomainSpec{DomainKind::MlIk, k, l};
    fx.rep.codomain = CodomainKind::OverInterval;
    fx.rep.size = N;
    const double jitter = 0.2 * eta * unif(rng);
    for (int s = 0; s < samples; ++s) {
        const double y = double(s) / (samples - 1);
        Fiber f;
        f.u = U0 * exp_skew(cplx(0.0, y) * H);
        for (int b = 0; b < blocks; ++b) {
            double t = (b + 0.5) / blocks + jitter * std::sin(2 * std::numbers::pi * (y + double(b) / blocks)) / blocks;
            f.blocks.push_back(Block::in(std::clamp(t, 0.0, 1.0)));
        }
        fx.rep.times.push_back(y);
        fx.rep.fibers.push_back(std::move(f));
    }
    // every eta-ball around x in [0,1] contains at least floor(eta * blocks) - 1 interior blocks
    fx.delta = std::max(0.0, (std::floor(eta * blocks) - 1.0)) / blocks;
    auto rep = check_sdp(fx.rep, eta, fx.delta, Exec::serial);
    if (!rep.pass) throw Infeasible("generated sdp fixture fails its own check");
    return fx;
}

}  // namespace dd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dropdecomp/decomp_one.hpp"
#include "dropdecomp/errors.hpp"
#include "dropdecomp/fixtures.hpp"

using namespace dd;

namespace {

int count_under0(const Fiber& f) {
    int c = 0;
    for (auto& b : f.blocks) c += b.kind == BlockKind::under0;
    return c;
}

using Iv = std::vector<std::pair<double, double>>;

std::vector<cplx> power_loop(int m, int samples, double phase = 0.0) {
    std::vector<cplx> z;
    for (int j = 0; j < samples; ++j)
        z.push_back(std::exp(cplx(0.0, m * 2.0 * std::numbers::pi * j / samples + phase)));
    return z;
}

}  // namespace

TEST_CASE("eta from the modulus of continuity") {
    // identity has Lipschitz constant 1: eps/6 safety halved
    CHECK(eta_for({DimensionDropElement::identity_fn(2)}, 0.6) == doctest::Approx(0.05));
    CHECK(eta_for({DimensionDropElement::unit(2)}, 0.6) == doctest::Approx(0.99));
    double prev = 0.0;
    for (double eps : {0.05, 0.1, 0.3, 0.6, 1.0, 3.0}) {
        const double e = eta_for({DimensionDropElement::identity_fn(2), probe_element(2)}, eps);
        CHECK(e >= prev);
        prev = e;
    }
}

TEST_CASE("partition of the worked interval family") {
    const Iv iv{{0, 0.01}, {0.02, 0.03}, {0.2, 0.21}, {0.212, 0.22}, {0.5, 0.505}, {0.99, 1}};
    // the family violates the count and length hypotheses, so they are not enforced here
    CHECK_THROWS_AS(partition_spectrum(iv, 0.24, 4, true), PartitionHypothesis);
    auto p = partition_spectrum(iv, 0.24, 4, false);
    REQUIRE(p.groups.size() == 4);
    CHECK(p.groups[0] == Iv{{0, 0.01}, {0.02, 0.03}});
    CHECK(p.groups[1] == Iv{{0.2, 0.21}, {0.212, 0.22}});
    CHECK(p.groups[2] == Iv{{0.5, 0.505}});
    CHECK(p.groups[3] == Iv{{0.99, 1}});
    REQUIRE(p.envelopes.size() == 4);
    CHECK(p.envelopes[0].first == 0.0);
    CHECK(p.envelopes[0].second == doctest::Approx(0.06));
    CHECK(p.envelopes[1] == std::pair<double, double>{0.2, 0.22});
    CHECK(p.envelopes[2] == std::pair<double, double>{0.5, 0.505});
    CHECK(p.envelopes[3].first == doctest::Approx(0.94));
    CHECK(p.envelopes[3].second == 1.0);
}

TEST_CASE("partition with a single cap interval") {
    auto p = partition_spectrum({{0, 0.05}}, 0.24, 4, false);
    CHECK(p.last() == 1);
    CHECK(p.groups[0].size() == 1);
    CHECK(p.groups[1].empty());
    CHECK(p.s0() == doctest::Approx(0.06));
    CHECK(p.t_last() == doctest::Approx(0.94));
}

TEST_CASE("partition with intervals only in the caps") {
    auto p = partition_spectrum({{0, 0.001}, {0.999, 1}}, 0.24, 4);
    CHECK(p.last() == 1);
    CHECK(partition_bound_violations(p).empty());
    CHECK(p.t_last() - p.s0() > 0.24 / 48.0);
}

TEST_CASE("partition bounds hold on random valid families") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double eta = 0.05 + 0.45 * u(rng);
        const int n = 1 + trial % 12;
        const double w = eta / (12.0 * n);
        Iv iv;
        double at = 0.0;
        for (int i = 0; i < n && at < 1.0; ++i) {
            const double a = at + (i ? w * 1.5 * u(rng) + 1e-6 : 0.0) + 0.3 * u(rng) * u(rng);
            const double b = std::min(1.0, a + w * u(rng));
            if (a > 1.0) break;
            iv.push_back({a, b});
            at = b + 1e-9;
        }
        auto p = partition_spectrum(iv, eta, n);
        CHECK(partition_bound_violations(p).empty());
    }
}

TEST_CASE("vertex modification") {
    auto a = modify_vertex(CapBlocks{5, {0.02, 0.03}}, 2);
    CHECK(a.j == 1);
    CHECK(a.xi == std::vector<double>{0.01, 0.01, 0.02, 0.03});
    auto b = modify_vertex(CapBlocks{0, {0.03, 0.05}}, 2);
    CHECK(b.j == 2);
    CHECK(b.xi == std::vector<double>{0.05});
    CapBlocks c{2, {0.04}};
    CHECK(modify_vertex(c, 2) == c);
    CHECK_THROWS_AS(modify_vertex(CapBlocks{0, {}}, 2), Hypothesis);
}

TEST_CASE("edge extension: equal ends give a constant field") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    std::mt19937_64 rng(1);
    const Fiber a{haar_unitary(3, rng), {Block::u0(), Block::in(0.2)}};
    std::vector<double> mesh{0, 0.25, 0.5, 0.75, 1};
    const auto F = Element(probe_element(2));
    for (auto& f : extend_edge(d, a, a, mesh)) CHECK(op_norm(assemble(d, f, F) - assemble(d, a, F)) < 1e-12);
}

TEST_CASE("edge extension interpolates the interior value") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber a{Mat::Identity(3, 3), {Block::u0(), Block::in(0.2)}};
    const Fiber b{Mat::Identity(3, 3), {Block::u0(), Block::in(0.4)}};
    auto path = extend_edge(d, a, b, {0, 0.5, 0.75, 1});
    // the frame moves on the first half, the values on the second
    REQUIRE(path.size() == 4);
    CHECK(path[1].blocks[1].t == doctest::Approx(0.2));
    CHECK(path[2].blocks[1].t == doctest::Approx(0.3));
    CHECK(op_norm(path[3].u - b.u) == 0.0);
}

TEST_CASE("edge extension stays within the cap oscillation of f") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    std::mt19937_64 rng(6);
    const Fiber a{haar_unitary(5, rng), {Block::u0(), Block::in(0.05), Block::in(0.1)}};
    const Fiber b{haar_unitary(5, rng), {Block::u0(), Block::in(0.02), Block::in(0.08)}};
    std::vector<double> mesh;
    for (int i = 0; i <= 16; ++i) mesh.push_back(i / 16.0);
    auto path = extend_edge(d, a, b, mesh);
    const double s0 = 0.1;
    for (int trial = 0; trial < 5; ++trial) {
        const Mat c = random_hermitian(2, rng), e = random_hermitian(2, rng);
        auto f = DimensionDropElement::from_function(
            2, 1, [&](double t) { return Mat(Mat::Identity(2, 2) * std::cos(3 * t) + t * (1 - t) * (c + t * e)); });
        double sup = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double x = s0 * i / 1000.0;
            sup = std::max(sup, op_norm(f.at(x) - f.at(0.0)));
        }
        for (auto& fib : path) {
            const Mat P = cut_projection(fib, d);
            const Mat dev = assemble(d, fib, Element(f)) - f.under0()(0, 0) * P;
            CHECK(op_norm(dev) <= sup + 1e-12);
        }
    }
}

TEST_CASE("winding numbers of power loops") {
    CHECK(winding_number(power_loop(1, 64)) == 1);
    CHECK(winding_number(std::vector<cplx>(10, cplx(0.3, 0.4))) == 0);
    CHECK(winding_number(power_loop(2, 720, std::numbers::pi / 7)) == 2);
    CHECK_THROWS_AS(winding_number(power_loop(2, 4)), Undersampling);
}

TEST_CASE("disk extension of a constant loop is constant in the angle") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    std::mt19937_64 rng(12);
    const Fiber f{haar_unitary(5, rng), {Block::u0(), Block::in(0.02), Block::in(0.03)}};
    auto ext = extend_disk(d, std::vector<Fiber>(24, f));
    CHECK(ext.winding == 0);
    CHECK(ext.boundary_error < 1e-8);
    const auto P = Element(probe_element(2));
    for (auto& ring : ext.rings) {
        const Mat ref = assemble(d, ring.front(), P);
        for (auto& g : ring) CHECK(op_norm(assemble(d, g, P) - ref) < 1e-9);
    }
}

TEST_CASE("disk extension of diag(z, 1, ...)") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    std::vector<Fiber> loop;
    const int M = 48;
    for (int j = 0; j < M; ++j) {
        Mat w = Mat::Identity(3, 3);
        w(0, 0) = std::exp(cplx(0.0, 2.0 * std::numbers::pi * j / M));
        loop.push_back(Fiber{w, {Block::u0(), Block::in(0.03)}});
    }
    auto ext = extend_disk(d, loop);
    CHECK(ext.input_winding == 1);
    // z sits in the commutant of the single underline-0 block, so the tracked
    // frame absorbs it and no determinant correction is left
    CHECK(ext.winding == 0);
    CHECK(ext.boundary_error < 1e-6);
    for (auto& ring : ext.rings)
        for (auto& g : ring) CHECK(count_under0(g) == 1);
    CHECK(count_under0(ext.center) == 1);
}

TEST_CASE("disk extension without underline-0 blocks is obstructed") {
    auto fx = disk_fixture(3, 2, 0, 2);
    CHECK_THROWS_AS(extend_disk(fx.domain, fx.loop), Obstruction);
}

TEST_CASE("decomposition of the constant spectrum {0, 0.5, 1}") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber f{Mat::Identity(4, 4), {Block::u0(), Block::in(0.5), Block::u1()}};
    DecompOptions opts;
    opts.require_endpoint_mass = false;
    auto cert = decompose_theorem_I(single_triangle(), [f](const Point&) { return f; }, d, 4,
                                    {DimensionDropElement::identity_fn(2)}, 0.2, opts);
    CHECK(cert.max_error == 0.0);
    CHECK(cert.rank_Q0_max == 1);
    CHECK(cert.rank_Q1_max == 1);
    for (auto& p : cert.P1) CHECK(std::lround(p.trace().real()) == 2);
    auto s = spectrum_at(cert.psi1, 0);
    REQUIRE(s.interior.size() == 1);
    CHECK(s.interior[0].first == doctest::Approx(0.5));
    CHECK(cert.xi1 == doctest::Approx(0.5));
    CHECK(cert.xi2 == doctest::Approx(0.5));
}

TEST_CASE("the cap-count hypothesis is checked by default") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber f{Mat::Identity(4, 4), {Block::u0(), Block::in(0.5), Block::u1()}};
    CHECK_THROWS_AS(decompose_theorem_I(single_triangle(), [f](const Point&) { return f; }, d, 4,
                                        {DimensionDropElement::identity_fn(2)}, 0.2),
                    Hypothesis);
}

TEST_CASE("an already decomposed fiber is a fixed point") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    std::mt19937_64 rng(4);
    const Fiber f{haar_unitary(6, rng), {Block::u0(), Block::u0(), Block::in(0.5), Block::u1(), Block::u1()}};
    auto cert = decompose_theorem_I(single_triangle(), [f](const Point&) { return f; }, d, 6,
                                    {DimensionDropElement::identity_fn(2), probe_element(2)}, 0.3);
    CHECK(cert.max_error < 1e-12);
    CHECK(cert.sdp_identity);
    CHECK(cert.sum_error < 1e-10);
}

TEST_CASE("random endpoint-mass representation over the disk") {
    EndpointMassParams p;
    p.k = 2;
    p.n = 12;
    p.epsilon = 0.3;
    auto fx = endpoint_mass_fixture(5, p);
    auto cert = decompose_theorem_I(fx.complex, fx.sampler, fx.domain, fx.size, fx.F, fx.epsilon);
    CHECK(cert.max_error < 0.3);
    CHECK(cert.rank_Q0_max <= 2);
    CHECK(cert.rank_Q1_max <= 2);
    CHECK(cert.sum_error < 1e-8);
    CHECK(cert.orth_error < 1e-8);
    CHECK(cert.sdp_identity);
}

TEST_CASE("endpoint-mass fixtures re-check their hypothesis and reject rank < 2k") {
    EndpointMassParams p;
    p.k = 2;
    p.n = 6;
    auto fx = endpoint_mass_fixture(9, p);
    const double eta = fx.eta;
    for (auto& v : fx.complex.vertices()) {
        auto f = canonical_fiber(fx.domain, fx.sampler(v));
        int lo = 0, hi = 0;
        for (auto& b : f.blocks) {
            const int s = fx.domain.block_size(b);
            const double t = b.kind == BlockKind::under0 ? 0.0 : b.kind == BlockKind::under1 ? 1.0 : b.t;
            lo += t <= eta / 4 ? s : 0;
            hi += t >= 1 - eta / 4 ? s : 0;
        }
        CHECK(lo >= 2);
        CHECK(hi >= 2);
    }
    p.n = 1;
    CHECK_THROWS_AS(endpoint_mass_fixture(9, p), Infeasible);
}

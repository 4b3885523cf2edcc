#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/matrix_rep.hpp"

using namespace dd;

namespace {

HomRep interval_rep(int k, int size, std::vector<Fiber> fibers) {
    HomRep r;
    r.domain = DomainSpec{DomainKind::Ik, k, 1};
    r.codomain = CodomainKind::OverInterval;
    r.size = size;
    for (std::size_t i = 0; i < fibers.size(); ++i)
        r.times.push_back(fibers.size() == 1 ? 0.0 : double(i) / (fibers.size() - 1));
    r.fibers = std::move(fibers);
    return r;
}

Mat diag(std::initializer_list<double> d) {
    Eigen::VectorXcd v(d.size());
    int i = 0;
    for (double x : d) v(i++) = x;
    return v.asDiagonal();
}

}  // namespace

TEST_CASE("underline evaluations of dimension-drop elements") {
    auto id = DimensionDropElement::identity_fn(2);
    CHECK(id.under0().rows() == 1);
    CHECK(std::abs(id.under0()(0, 0)) < 1e-15);
    CHECK(op_norm(id.at(0.5) - 0.5 * Mat::Identity(2, 2)) < 1e-15);
    auto g = DimensionDropElement::scalar(2, 1, [](double t) { return 1.0 + 2.0 * t; });
    CHECK(std::abs(g.under1()(0, 0) - cplx(3.0)) < 1e-15);
}

TEST_CASE("element validation rejects non-scalar endpoint values") {
    auto f = DimensionDropElement::identity_fn(2);
    f.values.back()(0, 1) = 0.3;
    CHECK_THROWS_AS(f.validate(), Malformed);
}

TEST_CASE("assembly of a single underline-0 block on f = t is zero") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber f{Mat::Identity(1, 1), {Block::u0()}};
    CHECK(op_norm(assemble(d, f, Element(DimensionDropElement::identity_fn(2)))) == 0.0);
}

TEST_CASE("assembly of (underline-0, 0.5) for k = 2 is diag(0, 0.5, 0.5)") {
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber f{Mat::Identity(3, 3), {Block::u0(), Block::in(0.5)}};
    CHECK(op_norm(assemble(d, f, Element(DimensionDropElement::identity_fn(2))) - diag({0, 0.5, 0.5})) < 1e-15);
}

TEST_CASE("the unit maps to the cut projection") {
    std::mt19937_64 rng(3);
    const DomainSpec d{DomainKind::Ik, 2, 1};
    const Fiber f{haar_unitary(5, rng), {Block::u0(), Block::in(0.4), Block::u1()}};
    const Mat p = assemble(d, f, Element(DimensionDropElement::unit(2)));
    CHECK(op_norm(p - cut_projection(f, d)) < 1e-12);
    CHECK(is_projection(p, 1e-10));
    CHECK(std::abs(p.trace() - cplx(4.0)) < 1e-12);
}

TEST_CASE("spectrum read from blocks") {
    auto rep = interval_rep(2, 10, {Fiber{Mat::Identity(10, 10),
                                          {Block::u0(), Block::u0(), Block::u0(), Block::in(0.3), Block::in(0.6),
                                           Block::u1(), Block::u1()}}});
    auto s = spectrum_at(rep, 0);
    CHECK(s.end0_units == 3);
    CHECK(s.end1_units == 2);
    REQUIRE(s.interior.size() == 2);
    CHECK(s.total_n == 9);

    auto single = interval_rep(2, 2, {Fiber{Mat::Identity(2, 2), {Block::in(0.5)}}});
    auto s1 = spectrum_at(single, 0);
    REQUIRE(s1.interior.size() == 1);
    CHECK(s1.interior[0].first == 0.5);
    CHECK(s1.total_n == 2);
}

TEST_CASE("block spectrum agrees with the eigenvalue route") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Fiber f{haar_unitary(8, rng), {Block::u0(), Block::u0(), Block::in(0.2 + 0.05 * trial),
                                             Block::in(0.7), Block::u1(), Block::u1()}};
        auto rep = interval_rep(2, 8, {f});
        const Mat h = assemble_hom(rep, Element(DimensionDropElement::identity_fn(2)), 0);
        auto eig = herm_eig(h);
        std::vector<double> ev(eig.values.data(), eig.values.data() + eig.values.size());
        for (auto& x : ev) x = std::abs(x) < 1e-10 ? 0.0 : std::abs(x - 1.0) < 1e-10 ? 1.0 : x;
        auto oracle = fractionalize(ev, 2, 1e-9);
        auto s = spectrum_at(rep, 0);
        CHECK(s.end0_units == oracle.end0_units);
        CHECK(s.end1_units == oracle.end1_units);
        REQUIRE(s.interior.size() == oracle.interior.size());
        for (std::size_t i = 0; i < s.interior.size(); ++i)
            CHECK(s.interior[i].first == doctest::Approx(oracle.interior[i].first).epsilon(1e-10));
    }
}

TEST_CASE("test function h_Y") {
    const double eta = 0.24;
    const int n = 2;
    auto h = test_function_hY({{0.4, 0.5}}, eta, n);
    CHECK(h(0.45) == doctest::Approx(1.0));
    CHECK(h(0.4) == doctest::Approx(1.0));
    CHECK(h(0.5 + eta / (12.0 * n)) == doctest::Approx(0.0));
    CHECK(h(0.9) == doctest::Approx(0.0));
    CHECK(h(0.5 + eta / (24.0 * n)) == doctest::Approx(0.5));
    CHECK(h(0.4 - eta / (24.0 * n)) == doctest::Approx(0.5));
}

TEST_CASE("distance on F") {
    const double d = 0.07;
    auto a = interval_rep(2, 2, {Fiber{Mat::Identity(2, 2), {Block::in(0.5)}}});
    auto b = interval_rep(2, 2, {Fiber{Mat::Identity(2, 2), {Block::in(0.5 + d)}}});
    const std::vector<Element> F{DimensionDropElement::identity_fn(2)};
    CHECK(hom_distance_on_F(a, a, F) == 0.0);
    CHECK(hom_distance_on_F(a, b, F) == doctest::Approx(d).epsilon(1e-12));
    std::mt19937_64 rng(2);
    auto c = interval_rep(2, 2, {Fiber{haar_unitary(2, rng), {Block::in(0.5)}}});
    CHECK(hom_distance_on_F(a, c, F) < 1e-14);
}

TEST_CASE("normalized trace field") {
    auto r = interval_rep(1, 2, {Fiber{Mat::Identity(2, 2), {Block::in(0.2), Block::in(0.4)}}});
    CHECK(aff_trace(r, Element(DimensionDropElement::identity_fn(1)))[0] == doctest::Approx(0.3));
    CHECK(aff_trace(r, Element(DimensionDropElement::unit(1)))[0] == doctest::Approx(1.0));
    auto r2 = interval_rep(2, 4, {Fiber{Mat::Identity(4, 4), {Block::in(0.1), Block::in(0.9)}},
                                  Fiber{Mat::Identity(4, 4), {Block::in(0.1), Block::in(0.9)}}});
    for (double v : aff_trace(r2, Element(DimensionDropElement::identity_fn(2)))) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("unitary geodesic") {
    std::mt19937_64 rng(4);
    const Mat u = haar_unitary(3, rng);
    for (auto& w : unitary_geodesic(u, u, 5)) CHECK(op_norm(w - u) < 1e-12);

    Mat one = Mat::Identity(1, 1), i1(1, 1);
    i1(0, 0) = cplx(0.0, 1.0);
    auto path = unitary_geodesic(one, i1, 8);
    REQUIRE(path.size() == 9);
    for (std::size_t s = 0; s < path.size(); ++s)
        CHECK(std::abs(path[s](0, 0) - std::exp(cplx(0.0, std::numbers::pi / 2 * s / 8.0))) < 1e-12);

    const Mat v = haar_unitary(3, rng);
    auto p2 = unitary_geodesic(u, v, 16);
    CHECK(op_norm(p2.front() - u) < 1e-10);
    CHECK(op_norm(p2.back() - v) < 1e-10);
    for (auto& w : p2) CHECK(is_unitary(w, 1e-10));
}

TEST_CASE("spectral projections") {
    auto pf = spectral_projection({diag({0, 0, 0.5})}, -0.1, 0.1, 0.2);
    CHECK(op_norm(pf.p[0] - diag({1, 1, 0})) < 1e-12);

    const double c = std::cos(0.3), s = std::sin(0.3);
    Mat rot(2, 2);
    rot << c, -s, s, c;
    auto pr = spectral_projection({Mat(rot * diag({0.1, 0.9}) * rot.adjoint())}, 0.0, 0.5, 0.2);
    CHECK(pr.rank == 1);
    CHECK(op_norm(pr.p[0] - rot * diag({1, 0}) * rot.adjoint()) < 1e-12);

    auto all = spectral_projection({diag({0.2, 0.6})}, 0.0, 1.0, 0.1);
    CHECK(op_norm(all.p[0] - Mat::Identity(2, 2)) < 1e-12);
}

TEST_CASE("homomorphism validation") {
    auto r = interval_rep(2, 2, {Fiber{Mat::Identity(2, 2), {Block::in(0.5), Block::in(0.6)}}});
    CHECK_THROWS_AS(r.validate(), Malformed);
    auto ok = interval_rep(2, 3, {Fiber{Mat::Identity(3, 3), {Block::in(0.5)}}});
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("sdp on a representation agrees with the multiset checker") {
    std::vector<Fiber> fs;
    for (int i = 0; i < 5; ++i)
        fs.push_back(Fiber{Mat::Identity(6, 6), {Block::u0(), Block::in(0.2 + 0.1 * i), Block::in(0.8), Block::u1()}});
    auto rep = interval_rep(2, 6, fs);
    std::vector<SpectralMultiset> specs;
    for (std::size_t i = 0; i < rep.sample_count(); ++i) specs.push_back(spectrum_at(rep, i));
    auto a = check_sdp(rep, 0.2, 0.1), b = check_sdp(specs, 0.2, 0.1);
    CHECK(a.pass == b.pass);
    CHECK(a.worst_ratio == b.worst_ratio);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/spectra.hpp"

using namespace dd;

namespace {

// Independent evaluation of the P^{(n,k)} metric: compare the endpoint
// remainders, then try every bijection of the reduced points.
double pnk_oracle(const SpectralMultiset& a, const SpectralMultiset& b) {
    auto flat = [](const SpectralMultiset& s, int& k0, int& k1) {
        k0 = s.end0_units % s.k;
        k1 = s.end1_units % s.k;
        std::vector<double> pts(s.end0_units / s.k, 0.0);
        for (auto& [t, m] : s.interior) pts.insert(pts.end(), m, t);
        pts.insert(pts.end(), s.end1_units / s.k, 1.0);
        return pts;
    };
    int a0, a1, b0, b1;
    auto pa = flat(a, a0, a1), pb = flat(b, b0, b1);
    if (a0 != b0 || a1 != b1 || pa.size() != pb.size()) return 1.0;
    std::vector<int> perm(pb.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e9;
    do {
        double m = 0.0;
        for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[perm[i]]));
        best = std::min(best, m);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::min(best, 1.0);
}

SpectralMultiset random_multiset(std::mt19937_64& rng, int n, int k) {
    // n = total units; split into endpoint units and interior points of k units
    std::uniform_int_distribution<int> pick(0, n / k);
    std::uniform_real_distribution<double> t(0.01, 0.99);
    const int m = pick(rng);
    int rest = n - m * k;
    std::uniform_int_distribution<int> split(0, rest);
    const int e0 = split(rng);
    std::vector<std::pair<double, int>> in;
    for (int i = 0; i < m; ++i) in.push_back({t(rng), 1});
    return SpectralMultiset::make(k, e0, rest - e0, in);
}

}  // namespace

TEST_CASE("multiset construction merges and validates") {
    auto s = SpectralMultiset::make(2, 1, 3, {{0.7, 1}, {0.3, 1}, {0.3, 2}});
    CHECK(s.total_n == 1 + 3 + 2 * 4);
    REQUIRE(s.interior.size() == 2);
    CHECK(s.interior[0] == std::pair<double, int>{0.3, 3});
    CHECK_THROWS_AS(SpectralMultiset::make(2, 0, 0, {{1.0, 1}}), DomainError);
    CHECK_THROWS_AS(SpectralMultiset::make(2, 0, 0, {{0.5, 0}}), DomainError);
}

TEST_CASE("reduced form converts whole endpoint groups into points at 0 and 1") {
    auto r = reduce(SpectralMultiset::make(2, 5, 2, {{0.4, 1}}));
    CHECK(r.k0 == 1);
    CHECK(r.k1 == 0);
    CHECK(r.points == std::vector<double>{0.0, 0.0, 0.4, 1.0});
}

TEST_CASE("pnk distance: endpoint remainder mismatch gives 1") {
    auto a = SpectralMultiset::make(2, 1, 0, {{0.3, 1}, {0.7, 1}});
    auto b = SpectralMultiset::make(2, 0, 1, {{0.2, 1}, {0.3, 1}});
    REQUIRE(a.total_n == b.total_n);
    CHECK(pnk_distance(a, b) == 1.0);
}

TEST_CASE("pnk distance: identical multisets are at distance 0") {
    auto a = SpectralMultiset::make(3, 2, 4, {{0.25, 2}});
    CHECK(pnk_distance(a, a) == 0.0);
}

TEST_CASE("pnk distance: matched remainders use the sorted sup distance") {
    auto a = SpectralMultiset::make(2, 1, 0, {{0.30, 1}, {0.70, 1}});
    auto b = SpectralMultiset::make(2, 1, 0, {{0.35, 1}, {0.68, 1}});
    CHECK(pnk_distance(a, b) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(pnk_distance(a, b) == doctest::Approx(pnk_oracle(a, b)).epsilon(1e-12));
}

TEST_CASE("pnk distance agrees with the permutation oracle on random inputs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 3, n = 2 * k + trial % 5;
        auto a = random_multiset(rng, n, k), b = random_multiset(rng, n, k);
        CHECK(pnk_distance(a, b) == doctest::Approx(pnk_oracle(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("line pairing finds the bottleneck matching") {
    auto m = pair_within_line({0.10, 0.20, 0.90}, {0.15, 0.25, 0.85}, 0.06);
    REQUIRE(m.has_value());
    CHECK(m->size() == 3);
    CHECK_FALSE(pair_within_line({0.10, 0.20, 0.90}, {0.15, 0.25, 0.85}, 0.05).has_value());
}

TEST_CASE("pairing of identical multisets is the identity") {
    auto a = SpectralMultiset::make(1, 0, 0, {{0.2, 1}, {0.6, 1}});
    auto m = pair_within(a, a, 1e-3);
    REQUIRE(m.has_value());
    for (auto& [i, j] : *m) CHECK(i == j);
}

TEST_CASE("{0,1} cannot pair with {0.5,0.5} within 0.4") {
    auto a = SpectralMultiset::make(1, 1, 1, {});
    auto b = SpectralMultiset::make(1, 0, 0, {{0.5, 2}});
    CHECK_FALSE(pair_within(a, b, 0.4).has_value());
    CHECK(pair_within(a, b, 0.51).has_value());
}

TEST_CASE("bottleneck assignment matches brute force") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 7;
        std::vector<double> d(n * n);
        for (auto& x : d) x = u(rng);
        auto dist = [&](int i, int j) { return d[i * n + j]; };
        CHECK(bottleneck_assignment(n, dist).value == bottleneck_bruteforce(n, dist));
    }
}

TEST_CASE("sdp passes on a spread spectrum with the worst ball at 0") {
    auto s = SpectralMultiset::make(1, 0, 0, {{0.1, 1}, {0.5, 1}, {0.9, 1}});
    auto r = check_sdp(std::vector<SpectralMultiset>{s}, 0.5, 1.0 / 3.0);
    CHECK(r.pass);
    CHECK(r.worst_count == 1.0);
    CHECK(r.worst_x == doctest::Approx(0.0));
}

TEST_CASE("sdp fails for {0,1} with radius 0.25 at the midpoint") {
    auto s = SpectralMultiset::make(1, 1, 1, {});
    auto r = check_sdp(std::vector<SpectralMultiset>{s}, 0.25, 0.5);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_count == 0.0);
    CHECK(r.worst_x == doctest::Approx(0.5));
}

TEST_CASE("sdp occupancy on a dense grid") {
    std::vector<std::pair<double, int>> grid;
    for (int i = 1; i < 20; ++i) grid.push_back({i / 20.0, 1});
    auto s = SpectralMultiset::make(1, 1, 1, grid);
    // brute-force minimal occupancy on a fine grid of centers
    double worst = 1e9;
    for (int i = 0; i <= 1000; ++i) worst = std::min(worst, ball_units(s, i / 1000.0, 0.1));
    CHECK(check_sdp(std::vector<SpectralMultiset>{s}, 0.1, worst / s.total_n).pass);
}

TEST_CASE("serial and parallel sdp agree") {
    std::mt19937_64 rng(9);
    std::vector<SpectralMultiset> v;
    for (int i = 0; i < 40; ++i) v.push_back(random_multiset(rng, 8, 2));
    auto a = check_sdp(v, 0.2, 0.1, Exec::serial), b = check_sdp(v, 0.2, 0.1, Exec::parallel);
    CHECK(a.pass == b.pass);
    CHECK(a.worst_ratio == b.worst_ratio);
    CHECK(a.worst_sample == b.worst_sample);
}

TEST_CASE("fractionalize unfolds endpoint units") {
    auto s = fractionalize({0, 0, 0.5, 0.5, 1, 1}, 2);
    CHECK(s.end0_units == 2);
    CHECK(s.end1_units == 2);
    REQUIRE(s.interior.size() == 1);
    CHECK(s.interior[0].second == 1);
    CHECK(s.total_n == 6);
}

TEST_CASE("fractionalize with k = 1 keeps integer multiplicities") {
    auto s = fractionalize({0.0, 0.25, 0.25, 1.0}, 1);
    CHECK(s.end0_units == 1);
    CHECK(s.end1_units == 1);
    REQUIRE(s.interior.size() == 1);
    CHECK(s.interior[0].second == 2);
}

TEST_CASE("fractionalize rejects an interior count not divisible by k") {
    CHECK_THROWS_AS(fractionalize({0.0, 0.5, 1.0}, 2), BlockStructure);
}

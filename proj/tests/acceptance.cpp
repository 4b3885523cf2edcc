// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Expected values come from the brute-force oracles below, not from the library.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dropdecomp/decomp_one.hpp"
#include "dropdecomp/decomp_two.hpp"
#include "dropdecomp/errors.hpp"
#include "dropdecomp/fixtures.hpp"
#include "dropdecomp/spectra.hpp"

using namespace dd;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

int g_failed = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && dt >= limit_s) o.fail("over time limit");
    if (!o.ok) ++g_failed;
    std::printf("criterion %2d %-28s %s  %.2fs (limit %.0fs)%s%s\n", id, name, o.ok ? "PASS" : "FAIL", dt, limit_s,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------- multiset oracles

SpectralMultiset random_multiset(std::mt19937_64& rng, int n, int k) {
    std::uniform_int_distribution<int> pick(0, n / k);
    std::uniform_real_distribution<double> t(0.0, 1.0);
    const int m = pick(rng);
    const int rest = n - m * k;
    const int e0 = std::uniform_int_distribution<int>(0, rest)(rng);
    std::vector<std::pair<double, int>> in;
    for (int i = 0; i < m; ++i) {
        double x = t(rng);
        // occasional exact repeats exercise multiplicities
        if (!in.empty() && rng() % 5 == 0) x = in.back().first;
        in.push_back({std::clamp(x, 1e-6, 1 - 1e-6), 1});
    }
    return SpectralMultiset::make(k, e0, rest - e0, in);
}

// whole endpoint groups of k units become points at 0 and 1; the remainders stay
std::vector<double> flatten(const SpectralMultiset& s, int& r0, int& r1) {
    r0 = s.end0_units % s.k;
    r1 = s.end1_units % s.k;
    std::vector<double> p(s.end0_units / s.k, 0.0);
    for (auto& [t, m] : s.interior) p.insert(p.end(), m, t);
    p.insert(p.end(), s.end1_units / s.k, 1.0);
    return p;
}

// smallest sup displacement over all bijections
double perm_bottleneck(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<int> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size() && m < best; ++i) m = std::max(m, std::abs(a[i] - b[perm[i]]));
        best = std::min(best, m);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool same_multiset(const SpectralMultiset& a, const SpectralMultiset& b) {
    return a.k == b.k && a.end0_units == b.end0_units && a.end1_units == b.end1_units && a.interior == b.interior;
}

// ---------------------------------------------------------------- criteria

Outcome metric_suite() {
    Outcome o;
    const double tol = 1e-12;
    std::mt19937_64 rng(101);
    for (auto [n, k] : {std::pair{4, 2}, std::pair{6, 2}, std::pair{6, 3}, std::pair{8, 4}}) {
        for (int trial = 0; trial < 1000; ++trial) {
            auto a = random_multiset(rng, n, k), b = random_multiset(rng, n, k), c = random_multiset(rng, n, k);
            if (trial % 7 == 0) b = a;
            const double ab = pnk_distance(a, b), ba = pnk_distance(b, a), aa = pnk_distance(a, a);
            const double bc = pnk_distance(b, c), ac = pnk_distance(a, c);
            const std::string where = " at (n,k)=(" + std::to_string(n) + "," + std::to_string(k) + ")";
            if (aa != 0.0) o.fail("d(a,a) != 0" + where);
            if (ab < 0.0) o.fail("negative distance" + where);
            if (std::abs(ab - ba) > tol) o.fail("asymmetric" + where);
            if (ab > ac + bc + tol) o.fail("triangle inequality" + where);
            if (!same_multiset(a, b) && !(ab > 0.0)) o.fail("distinct points at distance 0" + where);
        }
    }
    return o;
}

Outcome pairing_oracle() {
    Outcome o;
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int k = 1 + trial % 2;
        const int n = k + static_cast<int>(rng() % (9 - k));  // n <= 8 units
        auto a = random_multiset(rng, n, k);
        auto b = random_multiset(rng, n, k);
        if (trial % 3 == 0) {
            // small perturbation of a so that pairings exist at small eta
            std::vector<std::pair<double, int>> in;
            for (auto& [t, m] : a.interior) in.push_back({std::clamp(t + 0.05 * (u(rng) - 0.5), 1e-6, 1 - 1e-6), m});
            b = SpectralMultiset::make(k, a.end0_units, a.end1_units, in);
        }
        const double eta = 0.01 + 0.5 * u(rng);
        int a0, a1, b0, b1;
        auto pa = flatten(a, a0, a1), pb = flatten(b, b0, b1);
        const bool expect = a0 == b0 && a1 == b1 && pa.size() == pb.size() && perm_bottleneck(pa, pb) < eta;
        auto got = pair_within(a, b, eta);
        if (got.has_value() != expect) {
            o.fail("disagreement on trial " + std::to_string(trial));
            continue;
        }
        if (got) {
            // the returned matching must itself be a valid pairing
            std::vector<int> seen(pb.size(), 0);
            for (auto& [i, j] : *got) {
                if (std::abs(pa[i] - pb[j]) >= eta) o.fail("matched pair too far on trial " + std::to_string(trial));
                ++seen[j];
            }
            if (got->size() != pa.size() || std::count(seen.begin(), seen.end(), 1) != int(seen.size()))
                o.fail("matching is not a bijection on trial " + std::to_string(trial));
        }
    }
    return o;
}

Outcome partition_bounds() {
    Outcome o;
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double eta = 0.05 + 0.45 * u(rng);
        const int n = 1 + static_cast<int>(rng() % 12);
        const double w = eta / (12.0 * n);
        std::vector<std::pair<double, double>> iv;
        double at = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = at + (i ? w * 1.5 * u(rng) + 1e-6 : 0.0) + 0.3 * u(rng) * u(rng);
            if (a > 1.0) break;
            const double b = std::min(1.0, a + w * u(rng));
            iv.push_back({a, b});
            at = b + 1e-9;
        }
        auto p = partition_spectrum(iv, eta, n);
        // envelopes recomputed from the groups themselves
        std::vector<std::pair<double, double>> env;
        std::size_t covered = 0;
        for (auto& g : p.groups) {
            if (g.empty()) continue;
            double lo = 2.0, hi = -1.0;
            for (auto& [a, b] : g) lo = std::min(lo, a), hi = std::max(hi, b);
            env.push_back({lo, hi});
            covered += g.size();
        }
        const double cap = eta / 4 + eta / 6;
        bool bad = covered != iv.size();
        if (env.front().second - env.front().first > cap * (1 + 1e-12)) bad = true;
        if (env.back().second - env.back().first > cap * (1 + 1e-12)) bad = true;
        for (std::size_t i = 1; i + 1 < env.size(); ++i)
            if (env[i].second - env[i].first > eta / 6 * (1 + 1e-12)) bad = true;
        for (std::size_t i = 0; i + 1 < env.size(); ++i)
            if (!(env[i + 1].first - env[i].second > w)) bad = true;
        if (bad) ++violations;
    }
    if (violations) o.fail(std::to_string(violations) + " families violate a bound");
    return o;
}

Outcome first_decomposition() {
    Outcome o;
    int done = 0;
    const int ns[] = {8, 12, 16};
    for (int i = 0; i < 20; ++i) {
        EndpointMassParams p;
        p.k = 2 + i % 2;
        p.epsilon = (i / 2) % 2 ? 0.5 : 0.2;
        p.n = ns[i % 3];
        auto fx = endpoint_mass_fixture(1000 + i, p);
        auto c = decompose_theorem_I(fx.complex, fx.sampler, fx.domain, fx.size, fx.F, fx.epsilon);
        const std::string tag = " (fixture " + std::to_string(i) + ")";
        if (!(c.max_error < fx.epsilon)) o.fail("error " + std::to_string(c.max_error) + tag);
        // ranks recomputed from the projections
        for (std::size_t s = 0; s < c.Q0.size(); ++s) {
            auto rank = [](const Mat& q) { return static_cast<int>(std::lround(q.trace().real())); };
            if (rank(c.Q0[s]) > p.k || rank(c.Q1[s]) > p.k) o.fail("endpoint rank exceeds k" + tag);
        }
        if (!(c.sum_error <= 1e-8)) o.fail("Q0 + Q1 + P1 != P" + tag);
        if (!c.sdp_identity || c.sdp_mismatches != 0) o.fail("sdp identity broken" + tag);
        ++done;
    }
    o.detail = o.ok ? std::to_string(done) + " fixtures" : o.detail;
    return o;
}

int count_under0(const Fiber& f) {
    int c = 0;
    for (auto& b : f.blocks) c += b.kind == BlockKind::under0;
    return c;
}

Outcome disk_extension() {
    Outcome o;
    for (int i = 0; i < 10; ++i) {
        const int k = 2 + i % 2;
        const int kp = 1 + i % k;
        auto fx = disk_fixture(2000 + i, k, kp, 2);
        auto ext = extend_disk(fx.domain, fx.loop);
        const std::string tag = " (fixture " + std::to_string(i) + ")";
        if (!(ext.boundary_error < 1e-6)) o.fail("boundary error " + std::to_string(ext.boundary_error) + tag);
        for (auto& ring : ext.rings)
            for (auto& g : ring)
                if (count_under0(g) != kp) o.fail("zero-block count changed" + tag);
        if (count_under0(ext.center) != kp) o.fail("zero-block count changed at the center" + tag);
    }
    try {
        auto fx = disk_fixture(2100, 2, 0, 2);
        extend_disk(fx.domain, fx.loop);
        o.fail("k' = 0 did not raise the obstruction");
    } catch (const Obstruction&) {
    }
    return o;
}

Outcome windings() {
    Outcome o;
    const int S = 720;
    for (int m = -3; m <= 3; ++m) {
        std::vector<cplx> z;
        for (int j = 0; j < S; ++j) z.push_back(std::exp(cplx(0.0, 2.0 * std::numbers::pi * m * j / S + 0.3)));
        if (winding_number(z) != m) o.fail("wrong winding for m = " + std::to_string(m));
    }
    return o;
}

Outcome skeleton() {
    Outcome o;
    for (int i = 0; i < 10; ++i) {
        auto fx = skeleton_fixture(3000 + i, 2 + i % 3, 33, i % 2 == 0);
        auto r = reduce_to_skeleton(fx.phi, fx.F, fx.epsilon, fx.eta);
        const std::string tag = " (fixture " + std::to_string(i) + ")";
        // error recomputed against the retracted homomorphism
        double err = 0.0;
        for (std::size_t s = 0; s < fx.phi.sample_count(); ++s)
            for (auto& f : fx.F)
                err = std::max(err, op_norm(assemble_hom(fx.phi, f, s) - assemble_hom(r.phi1, f, s)));
        if (!(err < fx.epsilon)) o.fail("error " + std::to_string(err) + tag);
        PathMetric m(*fx.phi.domain_space);
        for (std::size_t s = 0; s < fx.phi.sample_count(); ++s) {
            std::vector<Point> a, b;
            for (auto& blk : fx.phi.fibers[s].blocks) a.push_back(blk.x);
            for (auto& blk : r.phi1.fibers[s].blocks) b.push_back(blk.x);
            auto d = [&](int x, int y) { return m(a[x], b[y]); };
            if (!(bottleneck_bruteforce(static_cast<int>(a.size()), d) < fx.eta)) o.fail("pairing" + tag);
        }
        if (!(r.sigma > 0.0)) o.fail("puncture margin not positive" + tag);
    }
    return o;
}

Outcome distinct() {
    Outcome o;
    for (int i = 0; i < 10; ++i) {
        auto fx = distinct_fixture(4000 + i, 3 + i % 4);
        auto r = make_distinct_spectrum(fx.phi, fx.F, fx.epsilon, fx.eta);
        const std::string tag = " (fixture " + std::to_string(i) + ")";
        if (r.psi.times != fx.phi.times) {
            o.fail("sample times changed" + tag);
            continue;
        }
        const std::size_t S = fx.phi.sample_count();
        for (std::size_t s : {std::size_t{0}, S - 1}) {
            const auto &a = fx.phi.fibers[s], &b = r.psi.fibers[s];
            bool same = a.u == b.u && a.blocks.size() == b.blocks.size();
            for (std::size_t j = 0; same && j < a.blocks.size(); ++j) same = a.blocks[j].x == b.blocks[j].x;
            if (!same) o.fail("endpoint fiber changed" + tag);
        }
        const auto& X = *fx.phi.domain_space;
        for (std::size_t s = 1; s + 1 < S; ++s) {
            const auto& bl = r.psi.fibers[s].blocks;
            double gap = 1e300;
            for (std::size_t a = 0; a < bl.size(); ++a)
                for (std::size_t b = a + 1; b < bl.size(); ++b) gap = std::min(gap, path_distance(X, bl[a].x, bl[b].x));
            if (!(gap > 0.0)) o.fail("collision at sample " + std::to_string(s) + tag);
        }
        double err = 0.0;
        for (std::size_t s = 0; s < S; ++s)
            for (auto& f : fx.F) err = std::max(err, op_norm(assemble_hom(fx.phi, f, s) - assemble_hom(r.psi, f, s)));
        if (!(err < fx.epsilon)) o.fail("perturbation " + std::to_string(err) + tag);
    }
    return o;
}

Outcome clusters() {
    Outcome o;
    int count = 0;
    std::uint64_t seed = 5000;
    for (int l1 = 1; l1 <= 3; ++l1)
        for (int l2 = 3; l2 <= 5; ++l2)
            for (int k = 1; k <= 3; ++k)
                for (int r = 0; r <= 2; ++r) {
                    const ClusterRanks rk{l1, l2, r};
                    auto fx = cluster_fixture(seed++, rk, k, 0.05);
                    auto c = cluster_projections(fx.phi, fx.base, fx.eta, rk, k, fx.G);
                    const std::string tag = " (l1,l2,r,k)=(" + std::to_string(l1) + "," + std::to_string(l2) + "," +
                                            std::to_string(rk.r) + "," + std::to_string(k) + ")";
                    const int N = fx.phi.size;
                    std::mt19937_64 rng(seed);
                    for (std::size_t s = 0; s < c.P.size(); ++s) {
                        Mat sum = Mat::Zero(N, N);
                        for (int j = 0; j < l1; ++j) {
                            sum += c.P[s][j];
                            for (int i = 0; i < j; ++i)
                                if (op_norm(c.P[s][i] * c.P[s][j]) > 1e-8) o.fail("P not orthogonal" + tag);
                        }
                        if (op_norm(sum - Mat::Identity(N, N)) > 1e-8) o.fail("P does not sum to 1" + tag);
                        Mat p0 = Mat::Identity(N, N);
                        for (int j = 0; j < l1; ++j) {
                            const Mat& p = c.p[s][j];
                            Eigen::SelfAdjointEigenSolver<Mat> es(p);
                            int rank = 0;
                            for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) rank += es.eigenvalues()(e) > 0.5;
                            const int want = (j + 1 == l1 ? l2 + rk.r - 3 : l2 - 3) * k;
                            if (rank != want) o.fail("subprojection rank" + tag);
                            p0 -= p;
                        }
                        for (auto& g : fx.G) {
                            const Mat v = assemble_hom(fx.phi, g, s);
                            Mat approx = p0 * v * p0;
                            for (int j = 0; j < l1; ++j) approx += g(fx.base[j][s]) * c.p[s][j];
                            if (!(op_norm(v - approx) < fx.epsilon)) o.fail("conclusion error" + tag);
                        }
                    }
                    // endpoint subprojections commute with 1 (x) M_k
                    for (std::size_t s : {std::size_t{0}, c.p.size() - 1})
                        for (int j = 0; j < l1; ++j) {
                            const Mat m = random_hermitian(k, rng);
                            Mat big = Mat::Zero(N, N);
                            for (int b = 0; b < N / k; ++b) big.block(b * k, b * k, k, k) = m;
                            const Mat& p = c.p[s][j];
                            if (op_norm(p * big - big * p) > 1e-8) o.fail("endpoint tensor form" + tag);
                        }
                    ++count;
                }
    if (o.ok) o.detail = std::to_string(count) + " fixtures";
    return o;
}

Outcome verifier() {
    Outcome o;
    auto w = verifier_fixture(6000);
    if (!verify_decomposition(w.dec, w.phi, w.psi, w.F, w.params).pass()) o.fail("witness rejected");
    auto e = verifier_fixture(6001, true);
    if (!verify_subcomplex_variant(e.dec, e.phi, e.psi, e.edge, e.F, e.params).pass()) o.fail("edge witness rejected");
    const std::pair<const char*, const char*> muts[] = {
        {"sum", "clause_1"}, {"u", "clause_2"}, {"gamma", "clause_3"}, {"J", "clause_4"}};
    for (auto [mut, clause] : muts) {
        auto fx = verifier_fixture(6000);
        mutate_verifier(fx, mut);
        auto v = verify_decomposition(fx.dec, fx.phi, fx.psi, fx.F, fx.params);
        if (v.pass() || v.clauses.at(clause)) o.fail(std::string("mutation ") + mut + " not detected");
        // only the targeted clause should break
        for (auto c : {"clause_1", "clause_2", "clause_3", "clause_4"})
            if (std::string(c) != clause && !v.clauses.at(c))
                o.fail(std::string("mutation ") + mut + " also broke " + c);
    }
    return o;
}

}  // namespace

int main() {
    criterion(1, "metric axioms", 5, metric_suite);
    criterion(2, "pairing oracle", 10, pairing_oracle);
    criterion(3, "partition bounds", 5, partition_bounds);
    criterion(4, "decomposition I", 120, first_decomposition);
    criterion(5, "disk extension", 30, disk_extension);
    criterion(6, "winding numbers", 1, windings);
    criterion(7, "skeleton reduction", 60, skeleton);
    criterion(8, "distinct spectra", 30, distinct);
    criterion(9, "cluster fields", 60, clusters);
    criterion(10, "verifier soundness", 10, verifier);
    std::printf("%d of 10 criteria failed\n", g_failed);
    return g_failed ? 1 : 0;
}

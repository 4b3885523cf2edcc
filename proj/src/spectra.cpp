#include "dropdecomp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dropdecomp/errors.hpp"

namespace dd {

SpectralMultiset SpectralMultiset::make(int k, int end0_units, int end1_units,
                                        std::vector<std::pair<double, int>> interior) {
    if (k < 1) throw DomainError("multiset: k must be positive");
    if (end0_units < 0 || end1_units < 0) throw DomainError("multiset: negative endpoint units");
    std::sort(interior.begin(), interior.end());
    SpectralMultiset s;
    s.k = k;
    s.end0_units = end0_units;
    s.end1_units = end1_units;
    for (auto [t, m] : interior) {
        if (!(t > 0.0 && t < 1.0)) throw DomainError("multiset: interior point outside (0,1)");
        if (m < 1) throw DomainError("multiset: nonpositive multiplicity");
        if (!s.interior.empty() && s.interior.back().first == t)
            s.interior.back().second += m;
        else
            s.interior.emplace_back(t, m);
    }
    s.total_n = end0_units + end1_units + k * s.interior_count();
    if (s.total_n < 1) throw DomainError("multiset: empty");
    return s;
}

int SpectralMultiset::interior_count() const {
    int c = 0;
    for (const auto& p : interior) c += p.second;
    return c;
}

std::vector<double> SpectralMultiset::expanded() const {
    std::vector<double> out(end0_units, 0.0);
    for (auto [t, m] : interior) out.insert(out.end(), static_cast<std::size_t>(m) * k, t);
    out.insert(out.end(), end1_units, 1.0);
    return out;
}

ReducedForm reduce(const SpectralMultiset& a) {
    ReducedForm r;
    r.k0 = a.end0_units % a.k;
    r.k1 = a.end1_units % a.k;
    r.points.assign(a.end0_units / a.k, 0.0);
    for (auto [t, m] : a.interior) r.points.insert(r.points.end(), m, t);
    r.points.insert(r.points.end(), a.end1_units / a.k, 1.0);
    return r;
}

static void require_same_class(const SpectralMultiset& a, const SpectralMultiset& b) {
    if (a.k != b.k || a.total_n != b.total_n)
        throw ClassMismatch("multisets belong to different (n,k) classes");
}

double pnk_distance(const SpectralMultiset& a, const SpectralMultiset& b) {
    require_same_class(a, b);
    ReducedForm ra = reduce(a), rb = reduce(b);
    if (ra.k0 != rb.k0 || ra.k1 != rb.k1) return 1.0;
    double d = 0.0;
    for (std::size_t i = 0; i < ra.points.size(); ++i)
        d = std::max(d, std::abs(ra.points[i] - rb.points[i]));
    return d;
}

std::optional<Matching> pair_within_line(const std::vector<double>& a, const std::vector<double>& b,
                                         double eta) {
    if (a.size() != b.size()) throw ClassMismatch("pairing: totals differ");
    std::vector<int> ia(a.size()), ib(b.size());
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), 0);
    std::stable_sort(ia.begin(), ia.end(), [&](int x, int y) { return a[x] < a[y]; });
    std::stable_sort(ib.begin(), ib.end(), [&](int x, int y) { return b[x] < b[y]; });
    Matching m;
    for (std::size_t i = 0; i < ia.size(); ++i) {
        if (!(std::abs(a[ia[i]] - b[ib[i]]) < eta)) return std::nullopt;
        m.emplace_back(ia[i], ib[i]);
    }
    return m;
}

std::optional<Matching> pair_within(const SpectralMultiset& a, const SpectralMultiset& b, double eta) {
    require_same_class(a, b);
    ReducedForm ra = reduce(a), rb = reduce(b);
    if (ra.k0 != rb.k0 || ra.k1 != rb.k1) return std::nullopt;
    return pair_within_line(ra.points, rb.points, eta);
}

namespace {

// Kuhn's augmenting paths on an adjacency predicate.
struct Kuhn {
    int n;
    const std::vector<std::vector<char>>& ok;
    std::vector<int> match_r;
    std::vector<char> seen;
    bool augment(int u) {
        for (int v = 0; v < n; ++v) {
            if (!ok[u][v] || seen[v]) continue;
            seen[v] = 1;
            if (match_r[v] < 0 || augment(match_r[v])) {
                match_r[v] = u;
                return true;
            }
        }
        return false;
    }
    std::optional<Matching> run() {
        match_r.assign(n, -1);
        for (int u = 0; u < n; ++u) {
            seen.assign(n, 0);
            if (!augment(u)) return std::nullopt;
        }
        Matching m(n);
        for (int v = 0; v < n; ++v) m[match_r[v]] = {match_r[v], v};
        return m;
    }
};

std::optional<Matching> feasible(int n, const std::vector<std::vector<double>>& d,
                                 const std::function<bool(double)>& admit) {
    std::vector<std::vector<char>> ok(n, std::vector<char>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ok[i][j] = admit(d[i][j]) ? 1 : 0;
    Kuhn k{n, ok, {}, {}};
    return k.run();
}

std::vector<std::vector<double>> table(int n, const std::function<double(int, int)>& dist) {
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d[i][j] = dist(i, j);
    return d;
}

}  // namespace

Bottleneck bottleneck_assignment(int n, const std::function<double(int, int)>& dist) {
    if (n == 0) return {};
    auto d = table(n, dist);
    std::vector<double> vals;
    for (const auto& row : d) vals.insert(vals.end(), row.begin(), row.end());
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::size_t lo = 0, hi = vals.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        double thr = vals[mid];
        if (feasible(n, d, [thr](double x) { return x <= thr; }))
            hi = mid;
        else
            lo = mid + 1;
    }
    double thr = vals[lo];
    auto m = feasible(n, d, [thr](double x) { return x <= thr; });
    return {thr, *m};
}

std::optional<Matching> pair_within_metric(int n, const std::function<double(int, int)>& dist,
                                           double eta) {
    auto d = table(n, dist);
    return feasible(n, d, [eta](double x) { return x < eta; });
}

double bottleneck_bruteforce(int n, const std::function<double(int, int)>& dist) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    double best = n == 0 ? 0.0 : INFINITY;
    if (n == 0) return best;
    do {
        double w = 0.0;
        for (int i = 0; i < n; ++i) w = std::max(w, dist(i, p[i]));
        best = std::min(best, w);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

double ball_units(const SpectralMultiset& s, double x, double eta) {
    double c = 0.0;
    if (std::abs(x) < eta) c += s.end0_units;
    if (std::abs(x - 1.0) < eta) c += s.end1_units;
    for (auto [t, m] : s.interior)
        if (std::abs(x - t) < eta) c += static_cast<double>(m) * s.k;
    return c;
}

namespace {

struct Worst {
    double ratio, count, total, x;
};

Worst sdp_one(const SpectralMultiset& s, double eta) {
    std::vector<double> support;
    if (s.end0_units > 0) support.push_back(0.0);
    for (auto [t, m] : s.interior) support.push_back(t);
    if (s.end1_units > 0) support.push_back(1.0);
    if (support.empty()) throw Malformed("sdp: empty spectrum at a sample");

    // occupancy is piecewise constant with jumps at t +- eta; the grid plus
    // breakpoints plus midpoints between them visits every level set
    std::vector<double> cand;
    const double step = eta / 10.0;
    for (long i = 0;; ++i) {
        double x = static_cast<double>(i) * step;
        if (x >= 1.0) break;
        cand.push_back(x);
    }
    cand.push_back(1.0);
    for (double t : support)
        for (double x : {t - eta, t + eta})
            if (x >= 0.0 && x <= 1.0) cand.push_back(x);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    const std::size_t base = cand.size();
    for (std::size_t i = 0; i + 1 < base; ++i) cand.push_back(0.5 * (cand[i] + cand[i + 1]));
    std::sort(cand.begin(), cand.end());

    auto gap = [&](double x) {
        double g = INFINITY;
        for (double t : support) g = std::min(g, std::abs(x - t));
        return g;
    };
    const double total = static_cast<double>(s.total_n);
    Worst w{INFINITY, 0.0, total, 0.0};
    double wgap = -1.0;
    for (double x : cand) {
        double c = ball_units(s, x, eta);
        double g = gap(x);
        if (c < w.count || w.ratio == INFINITY || (c == w.count && g > wgap)) {
            w = {c / total, c, total, x};
            wgap = g;
        }
    }
    return w;
}

}  // namespace

SdpReport check_sdp(const std::vector<SpectralMultiset>& spectra, double eta, double delta, Exec exec) {
    if (!(eta > 0.0)) throw DomainError("sdp: eta must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("sdp: delta must lie in (0,1]");
    std::vector<Worst> per(spectra.size());
    for_each_index(spectra.size(), exec, [&](std::size_t i) { per[i] = sdp_one(spectra[i], eta); });
    SdpReport r;
    if (spectra.empty()) return r;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < per.size(); ++i)
        if (per[i].ratio < per[arg].ratio) arg = i;
    r.worst_sample = arg;
    r.worst_ratio = per[arg].ratio;
    r.worst_count = per[arg].count;
    r.total = per[arg].total;
    r.worst_x = per[arg].x;
    r.pass = per[arg].count >= delta * per[arg].total * (1.0 - 1e-12);
    return r;
}

SpectralMultiset fractionalize(std::vector<double> eigenvalues, int k, double tol_end) {
    if (k < 1) throw DomainError("fractionalize: k must be positive");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    int n0 = 0, n1 = 0;
    std::vector<double> mid;
    for (double v : eigenvalues) {
        if (v < -tol_end || v > 1.0 + tol_end) throw DomainError("fractionalize: eigenvalue outside [0,1]");
        if (v <= tol_end)
            ++n0;
        else if (v >= 1.0 - tol_end)
            ++n1;
        else
            mid.push_back(v);
    }
    if (mid.size() % static_cast<std::size_t>(k) != 0)
        throw BlockStructure("fractionalize: interior count not divisible by k");
    std::vector<std::pair<double, int>> pts;
    for (std::size_t i = 0; i < mid.size(); i += k) {
        double lo = mid[i], hi = mid[i + k - 1];
        if (hi - lo > tol_end) throw BlockStructure("fractionalize: k-block spread exceeds tolerance");
        double t = 0.0;
        for (int j = 0; j < k; ++j) t += mid[i + j];
        t /= k;
        if (!pts.empty() && t - pts.back().first <= tol_end)
            pts.back().second += 1;
        else
            pts.emplace_back(t, 1);
    }
    return SpectralMultiset::make(k, n0, n1, std::move(pts));
}

}  // namespace dd

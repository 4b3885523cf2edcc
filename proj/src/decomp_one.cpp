#include "dropdecomp/decomp_one.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "dropdecomp/errors.hpp"

namespace dd {

// ---------------------------------------------------------------- eta

double eta_for(const std::vector<DimensionDropElement>& F, double eps, double cap, double max_jump) {
    if (F.empty()) throw DomainError("eta_for needs a nonempty element list");
    if (!(eps > 0.0)) throw DomainError("eta_for needs eps > 0");
    double lip = 0.0;
    for (const auto& f : F) {
        std::vector<double> ts = f.nodes;
        if (f.exact) {
            ts.clear();
            for (int i = 0; i <= 1024; ++i) ts.push_back(i / 1024.0);
        }
        Mat prev = f.at(ts[0]);
        for (std::size_t i = 1; i < ts.size(); ++i) {
            Mat cur = f.at(ts[i]);
            double jump = op_norm(cur - prev);
            if (jump > max_jump)
                throw Continuity("element jumps by " + std::to_string(jump) + " between adjacent nodes near t=" +
                                 std::to_string(ts[i]));
            lip = std::max(lip, jump / (ts[i] - ts[i - 1]));
            prev = std::move(cur);
        }
    }
    if (lip <= 0.0) return cap;
    return std::min(cap, 0.5 * (eps / 6.0) / lip);
}

// ---------------------------------------------------------------- partition

SpectrumPartition partition_spectrum(std::vector<std::pair<double, double>> iv, double eta, int n,
                                     bool enforce_hypothesis) {
    if (!(eta > 0.0) || n < 1) throw PartitionHypothesis("partition needs eta > 0 and n >= 1");
    const double w = eta / (12.0 * n);
    const double cap = eta / 4.0 + w;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        auto [a, b] = iv[i];
        std::string where = "interval " + std::to_string(i) + " [" + std::to_string(a) + "," + std::to_string(b) + "]";
        if (!(a <= b) || a < 0.0 || b > 1.0) throw PartitionHypothesis(where + " is not a subinterval of [0,1]");
        if (i > 0 && !(a > iv[i - 1].second)) throw PartitionHypothesis(where + " is not sorted and disjoint");
        if (enforce_hypothesis && b - a > w * (1.0 + 1e-12))
            throw PartitionHypothesis(where + " is longer than eta/12n");
    }
    if (enforce_hypothesis && static_cast<int>(iv.size()) > n)
        throw PartitionHypothesis("more than n intervals");
    const int m = static_cast<int>(iv.size());
    int p = 0;
    while (p < m && iv[p].first <= cap) ++p;
    while (p > 0 && p < m && iv[p].first - iv[p - 1].second <= w) ++p;
    int q = m;
    while (q > 0 && iv[q - 1].second >= 1.0 - cap) --q;
    while (q < m && q > 0 && iv[q].first - iv[q - 1].second <= w) --q;
    if (q < p) throw PartitionHypothesis("spectrum chains connect both endpoint caps");

    SpectrumPartition out;
    out.eta = eta;
    out.n = n;
    out.groups.emplace_back(iv.begin(), iv.begin() + p);
    for (int i = p; i < q; ++i) {
        if (i == p || iv[i].first - iv[i - 1].second > w) out.groups.emplace_back();
        out.groups.back().push_back(iv[i]);
    }
    out.groups.emplace_back(iv.begin() + q, iv.end());
    out.envelopes.emplace_back(0.0, std::max(eta / 4.0, p > 0 ? iv[p - 1].second : 0.0));
    for (std::size_t g = 1; g + 1 < out.groups.size(); ++g)
        out.envelopes.emplace_back(out.groups[g].front().first, out.groups[g].back().second);
    out.envelopes.emplace_back(std::min(1.0 - eta / 4.0, q < m ? iv[q].first : 1.0), 1.0);
    return out;
}

std::vector<std::string> partition_bound_violations(const SpectrumPartition& p) {
    std::vector<std::string> out;
    const double eta = p.eta, w = eta / (12.0 * p.n);
    const double cap_len = eta / 4.0 + eta / 6.0;
    const auto& e = p.envelopes;
    if (e.front().second - e.front().first > cap_len * (1 + 1e-12)) out.push_back("first cap too long");
    if (e.back().second - e.back().first > cap_len * (1 + 1e-12)) out.push_back("last cap too long");
    for (std::size_t i = 1; i + 1 < e.size(); ++i)
        if (e[i].second - e[i].first > eta / 6.0 * (1 + 1e-12)) out.push_back("middle group " + std::to_string(i) + " too long");
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        if (!(e[i + 1].first - e[i].second > w)) out.push_back("gap after group " + std::to_string(i) + " too small");
    return out;
}

std::vector<std::pair<double, double>> spectrum_intervals(const std::vector<std::vector<double>>& spectra) {
    if (spectra.empty()) return {};
    const std::size_t n = spectra[0].size();
    std::vector<std::pair<double, double>> r(n, {2.0, -1.0});
    for (auto& s : spectra) {
        if (s.size() != n) throw Malformed("spectra of different sizes");
        for (std::size_t i = 0; i < n; ++i) {
            r[i].first = std::min(r[i].first, s[i]);
            r[i].second = std::max(r[i].second, s[i]);
        }
    }
    std::sort(r.begin(), r.end());
    std::vector<std::pair<double, double>> out;
    for (auto& iv : r) {
        if (!out.empty() && iv.first <= out.back().second)
            out.back().second = std::max(out.back().second, iv.second);
        else
            out.push_back(iv);
    }
    return out;
}

// ---------------------------------------------------------------- vertex step

CapBlocks modify_vertex(const CapBlocks& in, int k, double fallback_xi) {
    if (k < 1) throw DomainError("k must be positive");
    CapBlocks out = in;
    if (in.j > 0 && in.j <= k) return out;
    if (in.j > k) {
        const int jp = (in.j - 1) % k + 1;
        const int kp = (in.j - jp) / k;
        double xi1 = in.xi.empty() ? fallback_xi : in.xi.front();
        if (!(xi1 > 0.0)) throw Hypothesis("vertex modification needs a positive interior value");
        out.j = jp;
        out.xi.assign(kp, xi1 / 2.0);
        out.xi.insert(out.xi.end(), in.xi.begin(), in.xi.end());
    } else {
        if (in.xi.empty()) throw Hypothesis("empty cap at a vertex");
        out.j = k;
        out.xi.assign(in.xi.begin() + 1, in.xi.end());
    }
    if (out.j + k * static_cast<int>(out.xi.size()) != in.j + k * static_cast<int>(in.xi.size()))
        throw Malformed("vertex modification changed the rank");
    return out;
}

// ---------------------------------------------------------------- fibers

Fiber canonical_fiber(const DomainSpec& d, const Fiber& f) {
    struct Item {
        Block b;
        Eigen::Index col;
        int size;
    };
    std::vector<Item> items;
    Eigen::Index pos = 0;
    const bool split_ends = d.kind == DomainKind::Ik || (d.kind == DomainKind::MlIk && d.l == 1);
    for (auto& b : f.blocks) {
        int s = d.block_size(b);
        if (b.kind == BlockKind::interior && split_ends && (b.t <= 0.0 || b.t >= 1.0)) {
            Block e = b.t <= 0.0 ? Block::u0() : Block::u1();
            for (int i = 0; i < s; ++i) items.push_back({e, pos + i, 1});
        } else {
            items.push_back({b, pos, s});
        }
        pos += s;
    }
    if (d.kind == DomainKind::CX) return f;
    auto key = [](const Block& b) {
        return b.kind == BlockKind::under0 ? std::make_pair(0, 0.0)
               : b.kind == BlockKind::under1 ? std::make_pair(2, 0.0)
                                             : std::make_pair(1, b.t);
    };
    std::stable_sort(items.begin(), items.end(), [&](auto& x, auto& y) { return key(x.b) < key(y.b); });
    Fiber out;
    out.u = f.u;
    Eigen::Index c = 0;
    for (auto& it : items) {
        out.u.middleCols(c, it.size) = f.u.middleCols(it.col, it.size);
        out.blocks.push_back(it.b);
        c += it.size;
    }
    return out;
}

namespace {

// column groups of the commutant of a canonical block list
std::vector<std::pair<std::vector<Eigen::Index>, int>> commutant_groups(const std::vector<Block>& blocks, int k) {
    // (start columns of each member, member size)
    std::vector<std::pair<std::vector<Eigen::Index>, int>> groups;
    Eigen::Index pos = 0;
    const Block* prev = nullptr;
    for (auto& b : blocks) {
        int s = b.kind == BlockKind::interior ? k : 1;
        bool same = prev && prev->kind == b.kind && (b.kind != BlockKind::interior || std::abs(prev->t - b.t) <= 1e-14);
        if (!same) groups.push_back({{}, s});
        groups.back().first.push_back(pos);
        pos += s;
        prev = &b;
    }
    return groups;
}

Mat polar_cols(const Mat& m) {
    if (m.cols() == 0) return m;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

Mat align_in_commutant(const Mat& w, const std::vector<Block>& blocks, int k) {
    const Eigen::Index n = w.rows();
    Mat c = Mat::Zero(n, n);
    for (auto& [starts, s] : commutant_groups(blocks, k)) {
        const Eigen::Index g = static_cast<Eigen::Index>(starts.size());
        Mat t(g, g);
        for (Eigen::Index a = 0; a < g; ++a)
            for (Eigen::Index b = 0; b < g; ++b) t(a, b) = w.block(starts[a], starts[b], s, s).trace();
        Mat cg = polar_unitary(t.adjoint());
        for (Eigen::Index a = 0; a < g; ++a)
            for (Eigen::Index b = 0; b < g; ++b)
                c.block(starts[a], starts[b], s, s) = cg(a, b) * Mat::Identity(s, s);
    }
    return c;
}

namespace {

struct EdgeStep {
    Mat w;
    std::vector<Block> blocks;
};

int count_kind(const std::vector<Block>& bl, BlockKind kind) {
    return static_cast<int>(std::count_if(bl.begin(), bl.end(), [&](const Block& b) { return b.kind == kind; }));
}

// frame-coordinate edge path with w(0) = 1
std::vector<EdgeStep> edge_path(int k, const std::vector<Block>& ba, const std::vector<Block>& bb, const Mat& wb,
                                const std::vector<double>& times) {
    if (count_kind(ba, BlockKind::under0) != count_kind(bb, BlockKind::under0))
        throw EndpointIncompatibility("edge ends carry different numbers of underline-0 blocks");
    if (count_kind(ba, BlockKind::under1) != count_kind(bb, BlockKind::under1) || ba.size() != bb.size())
        throw EndpointIncompatibility("edge ends have different block structure");
    for (std::size_t i = 0; i < ba.size(); ++i)
        if (ba[i].kind != bb[i].kind) throw EndpointIncompatibility("edge ends have different block order");
    Mat c = align_in_commutant(wb, bb, k);
    Mat l;
    const double phases[] = {0.0, 0.1, -0.17, 0.23, -0.31, 0.41};
    bool ok = false;
    for (double ph : phases) {
        try {
            Mat cc = c * std::exp(cplx(0.0, ph));
            l = log_unitary(wb * cc, 1e-10);
            c = cc;
            ok = true;
            break;
        } catch (const BranchAmbiguity&) {
        }
    }
    if (!ok) throw BranchAmbiguity("edge unitary path: no admissible logarithm");
    const Mat target = wb * c;
    std::vector<EdgeStep> out;
    for (double t : times) {
        EdgeStep st;
        if (t <= 0.0) {
            st.w = Mat::Identity(wb.rows(), wb.cols());
            st.blocks = ba;
        } else if (t >= 1.0) {
            st.w = wb;
            st.blocks = bb;
        } else if (t < 0.5) {
            st.w = exp_skew(l * (2.0 * t));
            st.blocks = ba;
        } else {
            st.w = target;
            st.blocks = ba;
            for (std::size_t i = 0; i < ba.size(); ++i)
                if (ba[i].kind == BlockKind::interior)
                    st.blocks[i].t = (2.0 - 2.0 * t) * ba[i].t + (2.0 * t - 1.0) * bb[i].t;
        }
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace

std::vector<Fiber> extend_edge(const DomainSpec& d, const Fiber& alpha0, const Fiber& alpha1,
                               const std::vector<double>& mesh) {
    if (alpha0.u.rows() != alpha1.u.rows()) throw EndpointIncompatibility("edge ends have different sizes");
    Fiber a = canonical_fiber(d, alpha0), b = canonical_fiber(d, alpha1);
    int ra = 0, rb = 0;
    for (auto& x : a.blocks) ra += d.block_size(x);
    for (auto& x : b.blocks) rb += d.block_size(x);
    if (ra != rb) throw EndpointIncompatibility("edge ends have different ranks");
    const int kp0 = count_kind(a.blocks, BlockKind::under0);
    if (kp0 < 1 || kp0 > d.k) throw EndpointIncompatibility("edge ends need 1..k underline-0 blocks");
    auto path = edge_path(d.k, a.blocks, b.blocks, a.u.adjoint() * b.u, mesh);
    std::vector<Fiber> out;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh[i] <= 0.0)
            out.push_back(alpha0);
        else if (mesh[i] >= 1.0)
            out.push_back(alpha1);
        else
            out.push_back({a.u * path[i].w, path[i].blocks});
    }
    return out;
}

int winding_number(const std::vector<cplx>& dets) {
    if (dets.size() < 2) throw DomainError("winding number needs at least two samples");
    double scale = 0.0;
    for (auto& z : dets) scale = std::max(scale, std::abs(z));
    double total = 0.0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const cplx& a = dets[i];
        const cplx& b = dets[(i + 1) % dets.size()];
        if (std::abs(a) <= 1e-12 * scale || scale == 0.0) throw DomainError("vanishing determinant on the loop");
        double delta = std::arg(b / a);
        if (std::abs(delta) >= std::numbers::pi - 1e-9)
            throw Undersampling("phase jump of at least pi between samples " + std::to_string(i) + " and " +
                                std::to_string((i + 1) % dets.size()));
        total += delta;
    }
    double w = total / (2.0 * std::numbers::pi);
    return static_cast<int>(std::lround(w));
}

DimensionDropElement probe_element(int k) {
    Mat c(k, k);
    for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q) c(p, q) = cplx((p + 1.0) / (q + 2.0), (p - q) / 5.0);
    return DimensionDropElement::from_function(
        k, 1,
        [c, k](double t) -> Mat {
            return Mat::Identity(k, k) * cplx((1.0 - t) * 0.3 + t * -0.7, 0.2 * t) + t * (1.0 - t) * c;
        },
        64, false);
}

// ---------------------------------------------------------------- first decomposition

namespace {

struct Part {
    Mat cols;
    std::vector<Block> blocks;
};

struct Split {
    Part cap0, mid, cap1;
    Mat pad;
};

bool in_cap0(const Block& b, double s0) {
    return b.kind == BlockKind::under0 || (b.kind == BlockKind::interior && b.t <= s0);
}
bool in_cap1(const Block& b, double tl) {
    return b.kind == BlockKind::under1 || (b.kind == BlockKind::interior && b.t >= tl);
}

Split split_fiber(const DomainSpec& d, const Fiber& f, double s0, double tl) {
    const std::size_t nb = f.blocks.size();
    std::size_t i0 = 0;
    while (i0 < nb && in_cap0(f.blocks[i0], s0)) ++i0;
    std::size_t i1 = nb;
    while (i1 > i0 && in_cap1(f.blocks[i1 - 1], tl)) --i1;
    auto cols_of = [&](std::size_t from, std::size_t to, Eigen::Index& pos) {
        Part p;
        Eigen::Index start = pos;
        for (std::size_t i = from; i < to; ++i) {
            p.blocks.push_back(f.blocks[i]);
            pos += d.block_size(f.blocks[i]);
        }
        p.cols = f.u.middleCols(start, pos - start);
        return p;
    };
    Split s;
    Eigen::Index pos = 0;
    s.cap0 = cols_of(0, i0, pos);
    s.mid = cols_of(i0, i1, pos);
    s.cap1 = cols_of(i1, nb, pos);
    s.pad = f.u.rightCols(f.u.cols() - pos);
    return s;
}

Part mirror(const DomainSpec& d, const Part& p) {
    Part out;
    out.cols.resize(p.cols.rows(), p.cols.cols());
    std::vector<Eigen::Index> starts;
    Eigen::Index pos = 0;
    for (auto& b : p.blocks) {
        starts.push_back(pos);
        pos += d.block_size(b);
    }
    Eigen::Index c = 0;
    for (std::size_t i = p.blocks.size(); i-- > 0;) {
        Block b = p.blocks[i];
        if (b.kind == BlockKind::under0)
            b.kind = BlockKind::under1;
        else if (b.kind == BlockKind::under1)
            b.kind = BlockKind::under0;
        else
            b.t = 1.0 - b.t;
        int s = d.block_size(b);
        out.cols.middleCols(c, s) = p.cols.middleCols(starts[i], s);
        out.blocks.push_back(b);
        c += s;
    }
    return out;
}

Fiber join(const Split& s) {
    Fiber f;
    const Eigen::Index n = s.cap0.cols.rows() ? s.cap0.cols.rows() : (s.mid.cols.rows() ? s.mid.cols.rows() : s.pad.rows());
    f.u.resize(n, s.cap0.cols.cols() + s.mid.cols.cols() + s.cap1.cols.cols() + s.pad.cols());
    f.u << s.cap0.cols, s.mid.cols, s.cap1.cols, s.pad;
    for (auto* p : {&s.cap0, &s.mid, &s.cap1}) f.blocks.insert(f.blocks.end(), p->blocks.begin(), p->blocks.end());
    return f;
}

Part modify_part(const Part& p, int k, double s0) {
    CapBlocks cb;
    for (auto& b : p.blocks) {
        if (b.kind == BlockKind::under0)
            ++cb.j;
        else
            cb.xi.push_back(b.t);
    }
    CapBlocks m = modify_vertex(cb, k, s0 / 2.0);
    Part out;
    out.cols = p.cols;
    for (int i = 0; i < m.j; ++i) out.blocks.push_back(Block::u0());
    for (double x : m.xi) out.blocks.push_back(Block::in(x));
    return out;
}

std::vector<double> expanded_spectrum(const DomainSpec& d, const Fiber& f) {
    std::vector<double> out;
    for (auto& b : f.blocks) {
        if (b.kind == BlockKind::under0)
            out.push_back(0.0);
        else if (b.kind == BlockKind::under1)
            out.push_back(1.0);
        else
            for (int i = 0; i < d.k; ++i) out.push_back(b.t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string point_str(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < p.count(); ++i) os << (i ? "," : "") << p.v[i] << ":" << p.w[i];
    os << ")";
    return os.str();
}

struct Context {
    const DomainSpec& d;
    const FiberSampler& sampler;
    double eta;
    int k;
    Exec exec;
    bool require_mass = true;
    int n = 0;

    Fiber sample(const Point& x) const {
        Fiber f = canonical_fiber(d, sampler(x));
        auto s = expanded_spectrum(d, f);
        if (n && static_cast<int>(s.size()) != n) throw Malformed("rank changes at " + point_str(x));
        int lo = 0, hi = 0;
        for (double t : s) {
            lo += t <= eta / 4.0;
            hi += t >= 1.0 - eta / 4.0;
        }
        if (require_mass && (lo < k || hi < k))
            throw Hypothesis("endpoint-mass hypothesis fails at sample " + point_str(x) + " (" + std::to_string(lo) +
                             " units near 0, " + std::to_string(hi) + " near 1)");
        return f;
    }

    std::vector<Fiber> sample_all(const std::vector<Point>& xs) const {
        std::vector<Fiber> out(xs.size());
        for_each_index(xs.size(), exec, [&](std::size_t i) { out[i] = sample(xs[i]); });
        return out;
    }

    SpectrumPartition partition(const std::vector<const Fiber*>& fibers) const {
        std::vector<std::vector<double>> spectra;
        for (auto* f : fibers) spectra.push_back(expanded_spectrum(d, *f));
        return partition_spectrum(spectrum_intervals(spectra), eta, n, true);
    }
};

double spectral_pairing(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Mat functional_value(const DomainSpec& d, const Fiber& f, const std::function<double(double)>& h) {
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(f.u.cols());
    Eigen::Index pos = 0;
    for (auto& b : f.blocks) {
        int s = d.block_size(b);
        double v = b.kind == BlockKind::under0 ? h(0.0) : b.kind == BlockKind::under1 ? h(1.0) : h(b.t);
        diag.segment(pos, s).setConstant(v);
        pos += s;
    }
    return f.u * diag.asDiagonal() * f.u.adjoint();
}

std::string trace_line(const std::string& what, const SpectrumPartition& p) {
    std::ostringstream os;
    os.precision(12);
    os << what << ": l=" << p.last() << " s0=" << p.s0() << " t_last=" << p.t_last();
    return os.str();
}

}  // namespace

DecompositionCertificate decompose_theorem_I(const SimplicialComplex2& X, const FiberSampler& phi, const DomainSpec& d,
                                             int size, const std::vector<DimensionDropElement>& F, double eps,
                                             const DecompOptions& opts) {
    if (d.kind != DomainKind::Ik) throw DomainError("decomposition I expects the domain I_k");
    if (!X.is_connected()) throw DomainError("decomposition I expects a connected complex");
    if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
    DecompositionCertificate cert;
    cert.epsilon = eps;
    cert.k = d.k;
    cert.eta = opts.eta > 0.0 ? opts.eta : eta_for(F, eps);
    Context ctx{d, phi, cert.eta, d.k, opts.exec, opts.require_endpoint_mass};
    {
        Fiber f0 = canonical_fiber(d, phi(X.vertices().front()));
        if (f0.u.rows() != size) throw Malformed("sampler returns fibers of the wrong size");
        ctx.n = static_cast<int>(expanded_spectrum(d, f0).size());
    }
    cert.n = ctx.n;
    const int n = ctx.n;

    // mesh fineness: refine until the measured pairing and oscillation bounds hold
    SimplicialComplex2 cur = X;
    std::vector<Fiber> vfib;
    for (int iter = 0;; ++iter) {
        vfib = ctx.sample_all(cur.vertices());
        if (!opts.check_tau) break;
        const int nv = static_cast<int>(cur.vertices().size());
        std::vector<std::set<int>> star(nv);
        for (int v = 0; v < nv; ++v) star[v].insert(v);
        for (auto& e : cur.edges()) {
            star[e[0]].insert(e[1]);
            star[e[1]].insert(e[0]);
        }
        std::set<std::pair<int, int>> pairs;
        for (auto& s : star)
            for (int a : s)
                for (int b : s)
                    if (a < b) pairs.insert({a, b});
        std::vector<std::pair<int, int>> plist(pairs.begin(), pairs.end());
        std::vector<std::vector<double>> spec(nv);
        for (int v = 0; v < nv; ++v) spec[v] = expanded_spectrum(d, vfib[v]);
        std::vector<std::function<double(double)>> H;
        for (int i = 0; i <= opts.h_grid; ++i) {
            double y = static_cast<double>(i) / opts.h_grid;
            auto lo = test_function_hY({{0.0, y}}, cert.eta, n);
            auto hi = test_function_hY({{y, 1.0}}, cert.eta, n);
            H.push_back([lo](double t) { return lo(t); });
            H.push_back([hi](double t) { return hi(t); });
        }
        std::vector<double> pair_d(plist.size()), osc(plist.size());
        for_each_index(plist.size(), opts.exec, [&](std::size_t i) {
            auto [a, b] = plist[i];
            pair_d[i] = spectral_pairing(spec[a], spec[b]);
            double o = 0.0;
            for (auto& h : H) o = std::max(o, op_norm(functional_value(d, vfib[a], h) - functional_value(d, vfib[b], h)));
            osc[i] = o;
        });
        cert.tau_pairing = 0.0;
        cert.tau_oscillation = 0.0;
        for (std::size_t i = 0; i < plist.size(); ++i) {
            cert.tau_pairing = std::max(cert.tau_pairing, pair_d[i]);
            cert.tau_oscillation = std::max(cert.tau_oscillation, osc[i]);
        }
        const double pb = cert.eta / (24.0 * n * n), ob = eps / (12.0 * (n + 1.0) * (n + 1.0));
        if (cert.tau_pairing <= pb && cert.tau_oscillation <= ob) break;
        if (iter >= opts.refine_cap) {
            std::ostringstream os;
            os << "mesh fineness not reached after " << iter << " refinements: pairing " << cert.tau_pairing
               << " (bound " << pb << "), oscillation " << cert.tau_oscillation << " (bound " << ob << ")";
            throw Continuity(os.str());
        }
        cur = cur.barycentric_subdivision();
        cert.refinements = iter + 1;
    }
    auto complex = std::make_shared<SimplicialComplex2>(cur);
    cert.complex = complex;
    const auto& V = complex->vertices();

    // vertices
    std::vector<Fiber> vpsi(V.size());
    for (std::size_t v = 0; v < V.size(); ++v) {
        auto part = ctx.partition({&vfib[v]});
        cert.partition_trace.push_back(trace_line("vertex " + std::to_string(v), part));
        Split s = split_fiber(d, vfib[v], part.s0(), part.t_last());
        s.cap0 = modify_part(s.cap0, d.k, part.s0());
        s.cap1 = mirror(d, modify_part(mirror(d, s.cap1), d.k, 1.0 - part.t_last()));
        vpsi[v] = join(s);
        cert.samples.push_back(V[v]);
        cert.sample_kind.push_back("vertex");
        cert.phi.push_back(vfib[v]);
        cert.psi.push_back(vpsi[v]);
    }

    // edges
    const int me = std::max(2, opts.edge_samples);
    std::map<std::array<int, 2>, std::vector<Fiber>> edge_phi, edge_psi;
    std::map<std::array<int, 2>, std::vector<Point>> edge_pts;
    for (auto& e : complex->edges()) {
        std::vector<Point> pts;
        for (int i = 0; i <= me; ++i) pts.push_back(complex->lerp(V[e[0]], V[e[1]], static_cast<double>(i) / me));
        std::vector<Point> inner(pts.begin() + 1, pts.end() - 1);
        auto inner_phi = ctx.sample_all(inner);
        std::vector<Fiber> ph{vfib[e[0]]};
        ph.insert(ph.end(), inner_phi.begin(), inner_phi.end());
        ph.push_back(vfib[e[1]]);
        std::vector<const Fiber*> refs;
        for (auto& f : ph) refs.push_back(&f);
        auto part = ctx.partition(refs);
        cert.partition_trace.push_back(
            trace_line("edge " + std::to_string(e[0]) + "-" + std::to_string(e[1]), part));
        const double s0 = part.s0(), tl = part.t_last();
        Split sa = split_fiber(d, vpsi[e[0]], s0, tl), sb = split_fiber(d, vpsi[e[1]], s0, tl);
        std::vector<Split> sp;
        for (auto& f : ph) sp.push_back(split_fiber(d, f, s0, tl));
        // frames continued from a
        auto frames = [&](const Mat& start, bool one) {
            std::vector<Mat> fr{start};
            for (int i = 1; i <= me; ++i) {
                const Mat& c = one ? sp[i].cap1.cols : sp[i].cap0.cols;
                fr.push_back(polar_cols(c * (c.adjoint() * fr.back())));
            }
            return fr;
        };
        std::vector<double> times;
        for (int i = 0; i <= me; ++i) times.push_back(static_cast<double>(i) / me);
        Part ma1 = mirror(d, sa.cap1), mb1 = mirror(d, sb.cap1);
        auto f0 = frames(sa.cap0.cols, false);
        auto f1 = frames(ma1.cols, true);
        auto p0 = edge_path(d.k, sa.cap0.blocks, sb.cap0.blocks, f0.back().adjoint() * sb.cap0.cols, times);
        auto p1 = edge_path(d.k, ma1.blocks, mb1.blocks, f1.back().adjoint() * mb1.cols, times);
        std::vector<Fiber> ps{vpsi[e[0]]};
        for (int i = 1; i < me; ++i) {
            Split s = sp[i];
            s.cap0 = {f0[i] * p0[i].w, p0[i].blocks};
            s.cap1 = mirror(d, Part{f1[i] * p1[i].w, p1[i].blocks});
            ps.push_back(join(s));
            cert.samples.push_back(pts[i]);
            cert.sample_kind.push_back("edge");
            cert.phi.push_back(ph[i]);
            cert.psi.push_back(ps.back());
        }
        ps.push_back(vpsi[e[1]]);
        edge_phi[e] = ph;
        edge_psi[e] = ps;
        edge_pts[e] = pts;
    }

    // triangles
    const auto radii = disk_radii(opts.outer_rings, opts.inner_rings);
    for (auto& t : complex->triangles()) {
        std::vector<Point> bpts;
        std::vector<Fiber> bphi, bpsi;
        for (auto [p, q] : {std::pair{t[0], t[1]}, std::pair{t[1], t[2]}, std::pair{t[2], t[0]}}) {
            std::array<int, 2> key{std::min(p, q), std::max(p, q)};
            auto pts = edge_pts.at(key);
            auto ph = edge_phi.at(key);
            auto ps = edge_psi.at(key);
            if (p > q) {
                std::reverse(pts.begin(), pts.end());
                std::reverse(ph.begin(), ph.end());
                std::reverse(ps.begin(), ps.end());
            }
            for (int i = 0; i < me; ++i) {
                bpts.push_back(pts[i]);
                bphi.push_back(ph[i]);
                bpsi.push_back(ps[i]);
            }
        }
        const std::size_t M = bpts.size();
        const Point c = barycenter(*complex, {t[0], t[1], t[2]});
        std::vector<Point> ipts;  // ring i >= 1, angle j, then the center
        for (std::size_t i = 1; i < radii.size(); ++i)
            for (std::size_t j = 0; j < M; ++j) ipts.push_back(complex->lerp(c, bpts[j], radii[i]));
        ipts.push_back(c);
        auto iphi = ctx.sample_all(ipts);
        std::vector<const Fiber*> refs;
        for (auto& f : bphi) refs.push_back(&f);
        for (auto& f : iphi) refs.push_back(&f);
        auto part = ctx.partition(refs);
        cert.partition_trace.push_back(trace_line(
            "triangle " + std::to_string(t[0]) + "-" + std::to_string(t[1]) + "-" + std::to_string(t[2]), part));
        const double s0 = part.s0(), tl = part.t_last();
        auto at = [&](std::size_t i, std::size_t j) -> const Fiber& {
            return i == 0 ? bphi[j] : iphi[(i - 1) * M + j];
        };
        const Fiber& cphi = iphi.back();
        Split cs = split_fiber(d, cphi, s0, tl);
        // frames along rays from the center
        std::vector<std::vector<Mat>> fr0(radii.size(), std::vector<Mat>(M)), fr1 = fr0;
        for_each_index(M, opts.exec, [&](std::size_t j) {
            Mat a = cs.cap0.cols, b = mirror(d, cs.cap1).cols;
            for (std::size_t i = radii.size(); i-- > 0;) {
                Split s = split_fiber(d, at(i, j), s0, tl);
                a = polar_cols(s.cap0.cols * (s.cap0.cols.adjoint() * a));
                b = polar_cols(s.cap1.cols * (s.cap1.cols.adjoint() * b));
                fr0[i][j] = a;
                fr1[i][j] = b;
            }
        });
        std::vector<Fiber> loop0, loop1;
        for (std::size_t j = 0; j < M; ++j) {
            Split s = split_fiber(d, bpsi[j], s0, tl);
            if (s.cap0.cols.cols() != fr0[0][j].cols() || s.cap1.cols.cols() != fr1[0][j].cols())
                throw Malformed("cap rank differs between the boundary and the triangle partition");
            loop0.push_back({fr0[0][j].adjoint() * s.cap0.cols, s.cap0.blocks});
            Part m1 = mirror(d, s.cap1);
            loop1.push_back({fr1[0][j].adjoint() * m1.cols, m1.blocks});
        }
        auto ext0 = extend_disk(d, loop0, opts.outer_rings, opts.inner_rings);
        auto ext1 = extend_disk(d, loop1, opts.outer_rings, opts.inner_rings);
        cert.disk_boundary_error = std::max({cert.disk_boundary_error, ext0.boundary_error, ext1.boundary_error});
        auto build = [&](const Fiber& ph, const Mat& a, const Fiber& e0, const Mat& b, const Fiber& e1) {
            Split s = split_fiber(d, ph, s0, tl);
            s.cap0 = {a * e0.u, e0.blocks};
            s.cap1 = mirror(d, Part{b * e1.u, e1.blocks});
            return join(s);
        };
        for (std::size_t i = 1; i < radii.size(); ++i)
            for (std::size_t j = 0; j < M; ++j) {
                cert.samples.push_back(ipts[(i - 1) * M + j]);
                cert.sample_kind.push_back("triangle");
                cert.phi.push_back(at(i, j));
                cert.psi.push_back(build(at(i, j), fr0[i][j], ext0.rings[i][j], fr1[i][j], ext1.rings[i][j]));
            }
        Mat ca = cs.cap0.cols, cb = mirror(d, cs.cap1).cols;
        cert.samples.push_back(c);
        cert.sample_kind.push_back("triangle");
        cert.phi.push_back(cphi);
        cert.psi.push_back(build(cphi, ca, ext0.center, cb, ext1.center));
    }

    // factorization and certificate checks
    const std::size_t S = cert.samples.size();
    cert.Q0.resize(S);
    cert.Q1.resize(S);
    cert.P1.resize(S);
    cert.errors.assign(S, std::vector<double>(F.size(), 0.0));
    std::vector<Fiber> psi1(S);
    std::vector<double> sum_err(S), orth_err(S), lo(S, 1.0), hi(S, 0.0);
    std::vector<int> kp(S), kp1(S), sdp_bad(S);
    DomainSpec d1{DomainKind::MkC01, d.k, 1};
    for_each_index(S, opts.exec, [&](std::size_t i) {
        const Fiber& ps = cert.psi[i];
        const Eigen::Index N = ps.u.rows();
        Eigen::VectorXd m0 = Eigen::VectorXd::Zero(N), m1 = m0, mi = m0;
        std::vector<Eigen::Index> icols, ocols;
        Eigen::Index pos = 0;
        for (auto& b : ps.blocks) {
            int s = d.block_size(b);
            Eigen::VectorXd& tgt = b.kind == BlockKind::under0 ? m0 : b.kind == BlockKind::under1 ? m1 : mi;
            tgt.segment(pos, s).setOnes();
            for (int c = 0; c < s; ++c) (b.kind == BlockKind::interior ? icols : ocols).push_back(pos + c);
            if (b.kind == BlockKind::interior) {
                lo[i] = std::min(lo[i], b.t);
                hi[i] = std::max(hi[i], b.t);
            }
            pos += s;
        }
        for (Eigen::Index c = pos; c < N; ++c) ocols.push_back(c);
        auto proj = [&](const Eigen::VectorXd& m) -> Mat {
            return ps.u * m.cast<cplx>().asDiagonal() * ps.u.adjoint();
        };
        cert.Q0[i] = proj(m0);
        cert.Q1[i] = proj(m1);
        cert.P1[i] = proj(mi);
        kp[i] = static_cast<int>(m0.sum());
        kp1[i] = static_cast<int>(m1.sum());
        Fiber f1;
        f1.u.resize(N, N);
        Eigen::Index c = 0;
        for (auto col : icols) f1.u.col(c++) = ps.u.col(col);
        for (auto col : ocols) f1.u.col(c++) = ps.u.col(col);
        for (auto& b : ps.blocks)
            if (b.kind == BlockKind::interior) f1.blocks.push_back(b);
        psi1[i] = f1;
        Mat P = cut_projection(cert.phi[i], d);
        sum_err[i] = op_norm(cert.Q0[i] + cert.Q1[i] + cert.P1[i] - P);
        orth_err[i] = std::max({op_norm(cert.Q0[i] * cert.Q1[i]), op_norm(cert.Q0[i] * cert.P1[i]),
                                op_norm(cert.Q1[i] * cert.P1[i])});
        for (std::size_t fi = 0; fi < F.size(); ++fi) {
            const auto& f = F[fi];
            Mat pf = assemble(d, cert.phi[i], f);
            Mat sf = f.under0()(0, 0) * cert.Q0[i] + f.under1()(0, 0) * cert.Q1[i] + assemble(d1, f1, f);
            cert.errors[i][fi] = op_norm(pf - sf);
        }
        // multiset identity on [eta/2, 1 - eta/2]
        auto band = [&](const Fiber& f) {
            std::vector<double> v;
            for (auto& b : f.blocks)
                if (b.kind == BlockKind::interior && b.t >= cert.eta / 2.0 && b.t <= 1.0 - cert.eta / 2.0)
                    v.push_back(b.t);
            std::sort(v.begin(), v.end());
            return v;
        };
        sdp_bad[i] = band(cert.phi[i]) != band(ps);
    });
    cert.k_prime = kp[0];
    cert.k1_prime = kp1[0];
    for (std::size_t i = 0; i < S; ++i) {
        if (kp[i] != cert.k_prime || kp1[i] != cert.k1_prime)
            throw Malformed("number of endpoint blocks varies over the complex");
        cert.rank_Q0_max = std::max(cert.rank_Q0_max, kp[i]);
        cert.rank_Q1_max = std::max(cert.rank_Q1_max, kp1[i]);
        cert.sum_error = std::max(cert.sum_error, sum_err[i]);
        cert.orth_error = std::max(cert.orth_error, orth_err[i]);
        cert.xi1 = std::min(cert.xi1, lo[i]);
        cert.xi2 = std::max(cert.xi2, hi[i]);
        cert.sdp_mismatches += sdp_bad[i];
        for (double e : cert.errors[i]) cert.max_error = std::max(cert.max_error, e);
    }
    cert.sdp_identity = cert.sdp_mismatches == 0;
    cert.psi1.domain = d1;
    cert.psi1.codomain = CodomainKind::OverComplex;
    cert.psi1.size = size;
    cert.psi1.codomain_space = complex;
    cert.psi1.points = cert.samples;
    cert.psi1.fibers = std::move(psi1);
    return cert;
}

}  // namespace dd

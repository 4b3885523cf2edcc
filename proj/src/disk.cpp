#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dropdecomp/decomp_one.hpp"
#include "dropdecomp/errors.hpp"

namespace dd {

std::vector<double> disk_radii(int outer, int inner) {
    if (outer < 1 || inner < 1) throw DomainError("disk needs at least one outer and one inner ring");
    std::vector<double> r;
    for (int i = 0; i <= outer; ++i) r.push_back(1.0 - i / (2.0 * outer));
    for (int i = 1; i < inner; ++i) r.push_back(0.5 - i / (2.0 * inner));
    return r;
}

namespace {

// SU(2) rotation in span(a, b) taking a to b; identity on the complement.
Mat rotate_to(const Vec& a, const Vec& b) {
    const Eigen::Index n = a.size();
    const cplx alpha = a.dot(b);  // a* b
    Vec e = b - alpha * a;
    const double beta = e.norm();
    Mat r = Mat::Identity(n, n);
    if (beta < 1e-14) return r + (alpha - 1.0) * a * a.adjoint();
    e /= beta;
    r -= a * a.adjoint() + e * e.adjoint();
    r += (alpha * a + beta * e) * a.adjoint() + (-beta * a + std::conj(alpha) * e) * e.adjoint();
    return r;
}

Vec blend(const Vec& a, const Vec& q, double s) {
    Vec v = (1.0 - s) * a + s * q;
    return v / v.norm();
}

struct Layout {
    int kp = 0;                                            // underline-0 columns
    int blocks = 0;                                        // interior blocks
    std::vector<int> group;                                // group id per interior block
    std::vector<std::vector<int>> members;                 // blocks per group
    std::vector<Block> synthetic;                          // for align_in_commutant
};

// Groups interior blocks that carry equal values at every loop sample.
Layout layout_of(const std::vector<Fiber>& loop) {
    Layout lay;
    const auto& b0 = loop.front().blocks;
    for (auto& b : b0) {
        if (b.kind == BlockKind::under0) {
            if (lay.blocks) throw Hypothesis("disk loop blocks are not in canonical order");
            ++lay.kp;
        } else if (b.kind == BlockKind::interior) {
            ++lay.blocks;
        } else {
            throw Hypothesis("disk loop carries a non-cap block");
        }
    }
    for (std::size_t j = 0; j < loop.size(); ++j) {
        const auto& bl = loop[j].blocks;
        int kp = 0, ib = 0;
        for (auto& b : bl) {
            if (b.kind == BlockKind::under0) ++kp;
            else if (b.kind == BlockKind::interior) {
                if (!(b.t > 0.0 && b.t < 1.0)) throw Hypothesis("disk loop interior value outside (0,1)");
                ++ib;
            } else
                throw Hypothesis("disk loop carries a non-cap block");
        }
        if (kp == 0) throw Obstruction("no underline-0 block on the loop (k' = 0): the disk extension is obstructed");
        if (kp != lay.kp || ib != lay.blocks) throw Hypothesis("k' varies around the disk loop");
    }
    for (int b = 0; b < lay.blocks; ++b) {
        bool same = b > 0;
        for (std::size_t j = 0; same && j < loop.size(); ++j)
            same = std::abs(loop[j].blocks[lay.kp + b].t - loop[j].blocks[lay.kp + b - 1].t) <= 1e-14;
        if (!same) lay.members.emplace_back();
        lay.members.back().push_back(b);
        lay.group.push_back(static_cast<int>(lay.members.size()) - 1);
    }
    for (int i = 0; i < lay.kp; ++i) lay.synthetic.push_back(Block::u0());
    for (int b = 0; b < lay.blocks; ++b) lay.synthetic.push_back(Block::in(lay.group[b] + 1.0));
    return lay;
}

}  // namespace

DiskExtension extend_disk(const DomainSpec& d, const std::vector<Fiber>& loop, int outer, int inner) {
    if (loop.size() < 3) throw Undersampling("disk loop needs at least three samples");
    const int k = d.k;
    const Layout lay = layout_of(loop);
    const Eigen::Index r = lay.kp + static_cast<Eigen::Index>(lay.blocks) * k;
    for (auto& f : loop)
        if (f.u.rows() != r || f.u.cols() != r) throw Malformed("disk loop fibers must be square of the cap rank");
    const std::size_t M = loop.size();
    DiskExtension out;
    {
        std::vector<cplx> given;
        for (auto& f : loop) given.push_back(f.u.determinant());
        out.input_winding = winding_number(given);
    }

    // frames continued around the loop inside the commutant
    std::vector<Mat> Z(M + 1);
    Z[0] = loop[0].u;
    for (std::size_t j = 1; j <= M; ++j) {
        const Mat& u = loop[j % M].u;
        Z[j] = u * align_in_commutant(Z[j - 1].adjoint() * u, lay.synthetic, k);
    }
    const Mat H = Z[0].adjoint() * Z[M];

    // holonomy split into its commutant blocks
    Mat L = Mat::Zero(r, r), Lint = Mat::Zero(r, r), Hc = Mat::Zero(r, r);
    {
        Mat h0 = polar_unitary(H.topLeftCorner(lay.kp, lay.kp));
        L.topLeftCorner(lay.kp, lay.kp) = log_unitary(h0, -1.0);
        Hc.topLeftCorner(lay.kp, lay.kp) = h0;
        for (auto& mem : lay.members) {
            const Eigen::Index g = static_cast<Eigen::Index>(mem.size());
            Mat h(g, g);
            for (Eigen::Index a = 0; a < g; ++a)
                for (Eigen::Index b = 0; b < g; ++b)
                    h(a, b) = H.block(lay.kp + mem[a] * k, lay.kp + mem[b] * k, k, k).trace() / double(k);
            h = polar_unitary(h);
            Mat lg = log_unitary(h, -1.0);
            for (Eigen::Index a = 0; a < g; ++a)
                for (Eigen::Index b = 0; b < g; ++b) {
                    Lint.block(lay.kp + mem[a] * k, lay.kp + mem[b] * k, k, k) = lg(a, b) * Mat::Identity(k, k);
                    Hc.block(lay.kp + mem[a] * k, lay.kp + mem[b] * k, k, k) = h(a, b) * Mat::Identity(k, k);
                }
        }
        L += Lint;
    }
    out.radii = disk_radii(outer, inner);
    out.k_prime = lay.kp;
    out.holonomy_defect = op_norm(H - Hc);

    std::vector<Mat> Zh(M), V(M), Wp(M), Y(M);
    std::vector<cplx> dets(M);
    for (std::size_t j = 0; j < M; ++j) {
        const double s = static_cast<double>(j) / M;
        Zh[j] = Z[j] * exp_skew(-s * L);
        V[j] = exp_skew(s * Lint);
        dets[j] = Zh[j].determinant();
    }
    out.winding = winding_number(dets);
    for (std::size_t j = 0; j < M; ++j) {
        Wp[j] = Mat::Identity(r, r);
        Wp[j](0, 0) = std::exp(cplx(0.0, 2.0 * std::numbers::pi * out.winding * j / double(M)));
        Y[j] = Zh[j] * Wp[j].adjoint();
    }

    // contraction of Y: one stage per column, the last stage removes the phase
    const int stages = static_cast<int>(r);
    std::vector<std::vector<Mat>> start(stages + 1, std::vector<Mat>(M));
    std::vector<Vec> q(r);
    start[0] = Y;
    for (int c = 0; c + 1 < stages; ++c) {
        auto complement = [&](Vec v) {
            for (int i = 0; i < c; ++i) v -= q[i] * q[i].dot(v);
            return Vec(v / v.norm());
        };
        std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(c));
        std::normal_distribution<double> gauss;
        double best = -1.0;
        for (int cand = 0; cand < 64; ++cand) {
            Vec g(r);
            if (cand == 0)
                g = start[c][0].col(c);
            else
                for (Eigen::Index i = 0; i < r; ++i) g(i) = cplx(gauss(rng), gauss(rng));
            g = complement(g);
            double score = 2.0;
            for (std::size_t j = 0; j < M; ++j) {
                Vec a = start[c][j].col(c);
                score = std::min({score, (a + g).norm(), std::sqrt(std::max(0.0, 1.0 - std::norm(g.dot(a))))});
            }
            if (score > best) {
                best = score;
                q[c] = g;
            }
        }
        if (best < 1e-6) throw Undersampling("no admissible contraction direction for the disk loop");
        for (std::size_t j = 0; j < M; ++j) {
            Vec a = start[c][j].col(c);
            start[c + 1][j] = rotate_to(a, q[c]) * start[c][j];
            start[c + 1][j].col(c) = q[c];
        }
    }
    // phase of the remaining column
    const int lastc = stages - 1;
    q[lastc] = start[lastc][0].col(lastc);
    std::vector<double> phase(M);
    {
        double acc = 0.0;
        cplx prev = 1.0;
        for (std::size_t j = 0; j < M; ++j) {
            cplx z = q[lastc].dot(start[lastc][j].col(lastc));
            if (j > 0) acc += std::arg(z / prev);
            phase[j] = acc;
            prev = z;
        }
        acc += std::arg(q[lastc].dot(start[lastc][0].col(lastc)) / prev);
        if (std::abs(acc) > 1e-6) throw Undersampling("residual phase winds around the disk loop");
    }
    auto Y_at = [&](double sigma, std::size_t j) -> Mat {
        if (sigma <= 0.0) return Y[j];
        double x = std::min(sigma, 1.0) * stages;
        int c = std::min(static_cast<int>(x), stages - 1);
        double s = x - c;
        const Mat& base = start[c][j];
        if (c + 1 < stages) {
            Vec a = base.col(c);
            return rotate_to(a, blend(a, q[c], s)) * base;
        }
        Mat g = Mat::Identity(r, r) + (std::exp(cplx(0.0, -s * phase[j])) - 1.0) * q[c] * q[c].adjoint();
        return g * base;
    };
    const Mat C = Y_at(1.0, 0);

    double xi = 1.0;
    for (auto& f : loop)
        for (auto& b : f.blocks)
            if (b.kind == BlockKind::interior) xi = std::min(xi, b.t);

    const std::size_t R = out.radii.size();
    out.rings.assign(R, std::vector<Fiber>(M));
    out.rings[0] = loop;
    for_each_index((R - 1) * M, Exec::parallel, [&](std::size_t idx) {
        const std::size_t i = idx / M + 1, j = idx % M;
        const double rad = out.radii[i];
        Fiber f;
        f.blocks = loop[j].blocks;
        if (rad >= 0.5) {
            f.u = Y_at(2.0 * (1.0 - rad), j) * Wp[j] * V[j];
        } else {
            f.u = C * Wp[j] * V[j];
            for (auto& b : f.blocks)
                if (b.kind == BlockKind::interior) b.t = xi + 2.0 * rad * (b.t - xi);
        }
        out.rings[i][j] = std::move(f);
    });
    out.center.u = C;
    out.center.blocks = loop[0].blocks;
    for (auto& b : out.center.blocks)
        if (b.kind == BlockKind::interior) b.t = xi;

    const Element probe = probe_element(k);
    for (std::size_t j = 0; j < M; ++j) {
        Fiber f0{Y[j] * Wp[j] * V[j], loop[j].blocks};
        out.boundary_error = std::max(out.boundary_error, op_norm(assemble(d, f0, probe) - assemble(d, loop[j], probe)));
    }
    std::vector<std::vector<Mat>> A(R, std::vector<Mat>(M));
    for_each_index(R * M, Exec::parallel,
                   [&](std::size_t idx) { A[idx / M][idx % M] = assemble(d, out.rings[idx / M][idx % M], probe); });
    const Mat Ac = assemble(d, out.center, probe);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            out.max_jump = std::max(out.max_jump, op_norm(A[i][j] - A[i][(j + 1) % M]));
            const Mat& nxt = i + 1 < R ? A[i + 1][j] : Ac;
            out.max_jump = std::max(out.max_jump, op_norm(A[i][j] - nxt));
        }
    return out;
}

}  // namespace dd

#include "dropdecomp/matrix_rep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dropdecomp/errors.hpp"

namespace dd {

// ---------------------------------------------------------------- elements

Mat DimensionDropElement::at(double t) const {
    if (exact) return exact(t);
    if (nodes.empty()) throw Malformed("element without samples");
    if (t <= nodes.front()) return values.front();
    if (t >= nodes.back()) return values.back();
    std::size_t i = std::upper_bound(nodes.begin(), nodes.end(), t) - nodes.begin() - 1;
    double s = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return (1.0 - s) * values[i] + s * values[i + 1];
}

void DimensionDropElement::validate(double tol) const {
    if (k < 1 || l < 1) throw Malformed("element orders must be positive");
    if (nodes.size() < 2 || nodes.size() != values.size()) throw Malformed("element samples malformed");
    if (nodes.front() != 0.0 || nodes.back() != 1.0) throw Malformed("element mesh must span [0,1]");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (!(nodes[i] < nodes[i + 1])) throw Malformed("element mesh not increasing");
    const int n = l * k;
    for (auto& v : values) {
        if (v.rows() != n || v.cols() != n) throw Malformed("element sample has wrong size");
        if (!v.allFinite()) throw Malformed("element sample not finite");
        if (hermitian && !is_hermitian(v, tol)) throw Malformed("element flagged hermitian is not");
    }
    if (a.rows() != l || a.cols() != l || b.rows() != l || b.cols() != l)
        throw Malformed("boundary blocks have wrong size");
    if (op_norm(values.front() - kron_identity(a, k)) > tol)
        throw Malformed("value at 0 differs from a (x) 1_k");
    if (op_norm(values.back() - kron_identity(b, k)) > tol)
        throw Malformed("value at 1 differs from b (x) 1_k");
    if (exact)
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (op_norm(exact(nodes[i]) - values[i]) > tol) throw Malformed("exact evaluator disagrees with samples");
}

DimensionDropElement DimensionDropElement::from_function(int k, int l, const std::function<Mat(double)>& fn, int n,
                                                         bool hermitian) {
    DimensionDropElement e;
    e.k = k;
    e.l = l;
    e.hermitian = hermitian;
    for (int i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        e.nodes.push_back(t);
        e.values.push_back(fn(t));
    }
    e.nodes.back() = 1.0;
    auto corner = [&](const Mat& m) {
        Mat c(l, l);
        for (int r = 0; r < l; ++r)
            for (int s = 0; s < l; ++s) c(r, s) = m(r * k, s * k);
        return c;
    };
    e.a = corner(e.values.front());
    e.b = corner(e.values.back());
    e.exact = fn;
    e.validate();
    return e;
}

DimensionDropElement DimensionDropElement::scalar(int k, int l, const std::function<double(double)>& g, int n) {
    const int dim = l * k;
    return from_function(
        k, l, [g, dim](double t) -> Mat { return Mat::Identity(dim, dim) * cplx(g(t), 0.0); }, n, true);
}

DimensionDropElement DimensionDropElement::identity_fn(int k, int l) {
    return scalar(k, l, [](double t) { return t; }, 1);
}

DimensionDropElement DimensionDropElement::unit(int k, int l) {
    return scalar(k, l, [](double) { return 1.0; }, 1);
}

cplx ScalarField::operator()(const Point& x) const {
    cplx s = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (x.v[i] < 0) continue;
        if (x.v[i] >= static_cast<int>(vertex_values.size())) throw Malformed("field lacks a vertex value");
        s += x.w[i] * vertex_values[x.v[i]];
    }
    return s;
}

double ScalarField::lipschitz(const SimplicialComplex2& x) const {
    double m = 0.0;
    for (auto& e : x.base_edges()) m = std::max(m, std::abs(vertex_values.at(e[0]) - vertex_values.at(e[1])));
    // gradient of an affine function on a unit equilateral triangle
    return x.base_triangles().empty() ? m : 2.0 / std::sqrt(3.0) * m;
}

ScalarField ScalarField::coordinate(int n_vertices, int vertex) {
    ScalarField f;
    f.vertex_values.assign(n_vertices, 0.0);
    f.vertex_values.at(vertex) = 1.0;
    return f;
}

ScalarField ScalarField::constant(int n_vertices, cplx c) {
    ScalarField f;
    f.vertex_values.assign(n_vertices, c);
    return f;
}

double ScalarPL::operator()(double t) const {
    if (t <= nodes.front()) return values.front();
    if (t >= nodes.back()) return values.back();
    std::size_t i = std::upper_bound(nodes.begin(), nodes.end(), t) - nodes.begin() - 1;
    double s = (t - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return (1.0 - s) * values[i] + s * values[i + 1];
}

// ---------------------------------------------------------------- homs

int DomainSpec::block_size(const Block& b) const {
    switch (kind) {
        case DomainKind::Ik:
            if (b.kind == BlockKind::point) break;
            return b.kind == BlockKind::interior ? k : 1;
        case DomainKind::MlIk:
            if (b.kind == BlockKind::point) break;
            return b.kind == BlockKind::interior ? l * k : l;
        case DomainKind::CX:
            if (b.kind != BlockKind::point) break;
            return 1;
        case DomainKind::MkC01:
            if (b.kind != BlockKind::interior) break;
            return k;
    }
    throw Malformed("block kind not allowed for this domain");
}

int HomRep::rank(std::size_t i) const {
    int r = 0;
    for (auto& b : fibers.at(i).blocks) r += domain.block_size(b);
    return r;
}

void HomRep::validate(double tol) const {
    if (codomain == CodomainKind::OverComplex && points.size() != fibers.size())
        throw Malformed("sample points and fibers differ in count");
    if (codomain == CodomainKind::OverInterval && times.size() != fibers.size())
        throw Malformed("sample times and fibers differ in count");
    if (domain.kind == DomainKind::CX && !domain_space) throw Malformed("C(X) domain without a space");
    for (std::size_t i = 0; i < fibers.size(); ++i) {
        const auto& f = fibers[i];
        if (f.u.rows() != size || f.u.cols() != size) throw Malformed("fiber unitary has wrong size");
        if (!is_unitary(f.u, std::max(tol, 1e-9))) throw Malformed("fiber unitary is not unitary");
        if (rank(i) > size) throw Malformed("blocks exceed the fiber size");
        for (auto& b : f.blocks)
            if (b.kind == BlockKind::interior && !(b.t >= 0.0 && b.t <= 1.0)) throw Malformed("block outside [0,1]");
    }
}

Mat block_value(const Element& f, const DomainSpec& d, const Block& b) {
    if (b.kind == BlockKind::point) {
        auto* g = std::get_if<ScalarField>(&f);
        if (!g) throw Malformed("point block needs a scalar field element");
        Mat m(1, 1);
        m(0, 0) = (*g)(b.x);
        return m;
    }
    auto* e = std::get_if<DimensionDropElement>(&f);
    if (!e) throw Malformed("interval block needs a dimension-drop element");
    Mat m;
    if (b.kind == BlockKind::under0)
        m = e->under0();
    else if (b.kind == BlockKind::under1)
        m = e->under1();
    else
        m = e->at(b.t);
    if (m.rows() != d.block_size(b)) throw Malformed("element size does not match the domain");
    return m;
}

Mat assemble(const DomainSpec& d, const Fiber& fiber, const Element& f) {
    const Eigen::Index n = fiber.u.rows();
    Mat diag = Mat::Zero(n, n);
    Eigen::Index pos = 0;
    for (auto& b : fiber.blocks) {
        Mat v = block_value(f, d, b);
        if (pos + v.rows() > n) throw Malformed("blocks exceed the fiber size");
        diag.block(pos, pos, v.rows(), v.cols()) = v;
        pos += v.rows();
    }
    return fiber.u * diag * fiber.u.adjoint();
}

Mat assemble_hom(const HomRep& rep, const Element& f, std::size_t sample) {
    return assemble(rep.domain, rep.fibers.at(sample), f);
}

Mat cut_projection(const Fiber& fiber, const DomainSpec& d) {
    int r = 0;
    for (auto& b : fiber.blocks) r += d.block_size(b);
    const Eigen::Index n = fiber.u.rows();
    Mat diag = Mat::Zero(n, n);
    diag.topLeftCorner(r, r).setIdentity();
    return fiber.u * diag * fiber.u.adjoint();
}

SpectralMultiset fiber_spectrum(const DomainSpec& d, const Fiber& fiber) {
    if (d.kind == DomainKind::CX) throw DomainError("interval spectrum requested for a C(X) domain");
    int n0 = 0, n1 = 0;
    std::vector<std::pair<double, int>> pts;
    for (auto& b : fiber.blocks) {
        if (b.kind == BlockKind::under0)
            ++n0;
        else if (b.kind == BlockKind::under1)
            ++n1;
        else if (b.t <= 0.0)
            n0 += d.k;
        else if (b.t >= 1.0)
            n1 += d.k;
        else
            pts.emplace_back(b.t, 1);
    }
    if (n0 + n1 + static_cast<int>(pts.size()) == 0) throw Malformed("empty spectrum");
    return SpectralMultiset::make(d.k, n0, n1, pts);
}

SpectralMultiset spectrum_at(const HomRep& rep, std::size_t sample) { return fiber_spectrum(rep.domain, rep.fibers.at(sample)); }

ComplexMultiset point_spectrum(const Fiber& fiber) {
    ComplexMultiset m;
    for (auto& b : fiber.blocks) {
        if (b.kind != BlockKind::point) throw DomainError("point spectrum of a non-C(X) fiber");
        auto it = std::find_if(m.points.begin(), m.points.end(), [&](auto& pr) { return pr.first == b.x; });
        if (it == m.points.end())
            m.points.emplace_back(b.x, 1);
        else
            ++it->second;
    }
    return m;
}

ScalarPL test_function_hY(const std::vector<std::pair<double, double>>& Y, double eta, int n) {
    if (Y.empty()) throw DomainError("test function needs a nonempty set");
    if (!(eta > 0.0) || n < 1) throw DomainError("test function needs eta > 0 and n >= 1");
    auto ys = Y;
    for (auto& [a, b] : ys)
        if (!(a <= b) || a < 0.0 || b > 1.0) throw DomainError("test-function set must be intervals in [0,1]");
    std::sort(ys.begin(), ys.end());
    const double w = eta / (12.0 * n);
    auto h = [&](double t) {
        double d = 1e300;
        for (auto& [a, b] : ys) d = std::min(d, t < a ? a - t : (t > b ? t - b : 0.0));
        return std::max(0.0, 1.0 - d / w);
    };
    std::vector<double> br{0.0, 1.0};
    for (std::size_t i = 0; i < ys.size(); ++i) {
        auto [a, b] = ys[i];
        for (double t : {a, b, a - w, b + w}) br.push_back(t);
        if (i + 1 < ys.size()) br.push_back(0.5 * (b + ys[i + 1].first));
    }
    std::vector<double> nodes;
    for (double t : br)
        if (t >= 0.0 && t <= 1.0) nodes.push_back(t);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    ScalarPL out;
    out.nodes = nodes;
    for (double t : nodes) out.values.push_back(h(t));
    return out;
}

namespace {
void check_same_mesh(const HomRep& a, const HomRep& b) {
    if (a.sample_count() != b.sample_count() || a.size != b.size || a.codomain != b.codomain)
        throw MeshIncompatibility("representations live on different meshes");
    for (std::size_t i = 0; i < a.points.size() && i < b.points.size(); ++i)
        if (!(a.points[i] == b.points[i])) throw MeshIncompatibility("sample points differ");
    for (std::size_t i = 0; i < a.times.size() && i < b.times.size(); ++i)
        if (a.times[i] != b.times[i]) throw MeshIncompatibility("sample times differ");
    if (a.points.size() != b.points.size() || a.times.size() != b.times.size())
        throw MeshIncompatibility("sample lists differ");
}
}  // namespace

double hom_distance_on_F(const HomRep& a, const HomRep& b, const std::vector<Element>& F, Exec exec) {
    check_same_mesh(a, b);
    std::vector<double> per(a.sample_count(), 0.0);
    for_each_index(a.sample_count(), exec, [&](std::size_t i) {
        double m = 0.0;
        for (auto& f : F) m = std::max(m, op_norm(assemble_hom(a, f, i) - assemble_hom(b, f, i)));
        per[i] = m;
    });
    double m = 0.0;
    for (double v : per) m = std::max(m, v);
    return m;
}

std::vector<double> aff_trace(const HomRep& rep, const Element& h) {
    std::vector<double> out;
    for (std::size_t i = 0; i < rep.sample_count(); ++i) {
        int r = rep.rank(i);
        if (r == 0) throw DomainError("normalized trace of a zero-rank fiber");
        out.push_back(assemble_hom(rep, h, i).trace().real() / r);
    }
    return out;
}

std::vector<Mat> unitary_geodesic(const Mat& u, const Mat& v, int steps) {
    if (steps < 1) throw DomainError("geodesic needs at least one step");
    if (u.rows() != v.rows() || !is_unitary(u, 1e-9) || !is_unitary(v, 1e-9))
        throw DomainError("geodesic endpoints must be unitaries of equal size");
    Mat l = log_unitary(u.adjoint() * v);
    std::vector<Mat> path;
    for (int i = 0; i <= steps; ++i) path.push_back(u * exp_skew(l * (static_cast<double>(i) / steps)));
    return path;
}

ProjectionField spectral_projection(const std::vector<Mat>& field, double lo, double hi, double gap, Exec exec) {
    ProjectionField out;
    out.p.resize(field.size());
    std::vector<int> ranks(field.size());
    std::vector<std::string> errors(field.size());
    for_each_index(field.size(), exec, [&](std::size_t i) {
        HermEig e = herm_eig(field[i]);
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < e.values.size(); ++j) {
            double lam = e.values(j);
            // the window is closed; only the shell of width gap outside it must be empty
            if ((lam < lo && lam > lo - gap) || (lam > hi && lam < hi + gap)) {
                errors[i] = "eigenvalue within the gap outside the window";
                return;
            }
            if (lam >= lo && lam <= hi) cols.push_back(j);
        }
        Mat v(field[i].rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) v.col(c) = e.vectors.col(cols[c]);
        out.p[i] = v * v.adjoint();
        ranks[i] = static_cast<int>(cols.size());
    });
    for (std::size_t i = 0; i < field.size(); ++i)
        if (!errors[i].empty()) throw GapViolation(errors[i] + " at sample " + std::to_string(i));
    for (std::size_t i = 0; i < field.size(); ++i)
        if (ranks[i] != ranks[0]) throw GapViolation("projection rank changes at sample " + std::to_string(i));
    out.rank = field.empty() ? 0 : ranks[0];
    out.max_jump = max_adjacent_jump(out.p);
    return out;
}

TrackedEig tracked_eigensystem(const std::vector<Mat>& field) {
    TrackedEig out;
    for (std::size_t s = 0; s < field.size(); ++s) {
        HermEig e = herm_eig(field[s]);
        if (s == 0) {
            out.values.push_back(e.values);
            out.vectors.push_back(e.vectors);
            continue;
        }
        const Mat& prev = out.vectors.back();
        const Eigen::Index n = e.values.size();
        RMat cost(n, n);
        Mat ov = prev.adjoint() * e.vectors;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = -std::norm(ov(i, j));
        auto col = min_cost_assignment(cost);
        Eigen::VectorXd vals(n);
        Mat vecs(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            vals(i) = e.values(col[i]);
            vecs.col(i) = e.vectors.col(col[i]);
        }
        // inside a degenerate cluster pick the frame closest to the previous one
        const double scale = 1e-10 * std::max(1.0, e.values.cwiseAbs().maxCoeff());
        std::vector<bool> done(n, false);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (done[i]) continue;
            std::vector<Eigen::Index> grp;
            for (Eigen::Index j = i; j < n; ++j)
                if (!done[j] && std::abs(vals(j) - vals(i)) <= scale) grp.push_back(j);
            for (auto j : grp) done[j] = true;
            Mat basis(n, static_cast<Eigen::Index>(grp.size())), old(n, static_cast<Eigen::Index>(grp.size()));
            for (std::size_t c = 0; c < grp.size(); ++c) {
                basis.col(c) = vecs.col(grp[c]);
                old.col(c) = prev.col(grp[c]);
            }
            Mat aligned = basis * polar_unitary(basis.adjoint() * old);
            for (std::size_t c = 0; c < grp.size(); ++c) vecs.col(grp[c]) = aligned.col(c);
        }
        out.values.push_back(vals);
        out.vectors.push_back(vecs);
    }
    return out;
}

double max_adjacent_jump(const std::vector<Mat>& field) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < field.size(); ++i) m = std::max(m, op_norm(field[i + 1] - field[i]));
    return m;
}

SdpReport check_sdp(const HomRep& rep, double eta, double delta, Exec exec) {
    std::vector<SpectralMultiset> spectra;
    for (std::size_t i = 0; i < rep.sample_count(); ++i) spectra.push_back(spectrum_at(rep, i));
    return check_sdp(spectra, eta, delta, exec);
}

}  // namespace dd

#pragma once
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "dropdecomp/exec.hpp"
#include "dropdecomp/linalg.hpp"
#include "dropdecomp/simplicial.hpp"
#include "dropdecomp/spectra.hpp"

namespace dd {

// Element of M_l(I_k): lk x lk matrices sampled on an ascending node list in
// [0,1], evaluated piecewise-linearly unless an exact callable is attached.
// Endpoint values must equal a (x) 1_k and b (x) 1_k.
struct DimensionDropElement {
    int k = 1;
    int l = 1;
    std::vector<double> nodes;
    std::vector<Mat> values;
    Mat a;  // l x l
    Mat b;  // l x l
    bool hermitian = false;
    std::function<Mat(double)> exact;  // optional; must agree with the samples

    Mat at(double t) const;  // lk x lk
    Mat under0() const { return a; }
    Mat under1() const { return b; }
    void validate(double tol = 1e-9) const;  // throws Malformed

    // samples fn on n+1 uniform nodes and keeps fn as the exact evaluator
    static DimensionDropElement from_function(int k, int l, const std::function<Mat(double)>& fn, int n = 64,
                                              bool hermitian = false);
    // f(t) = g(t) 1_{lk} for a scalar g
    static DimensionDropElement scalar(int k, int l, const std::function<double(double)>& g, int n = 64);
    static DimensionDropElement identity_fn(int k, int l = 1);  // t -> t 1
    static DimensionDropElement unit(int k, int l = 1);
};

// Continuous scalar function on a complex: affine in every base simplex,
// fixed by its values at the base vertices.
struct ScalarField {
    std::vector<cplx> vertex_values;
    cplx operator()(const Point& x) const;
    // Lipschitz constant of |g| for the unit-edge chart metric (upper bound)
    double lipschitz(const SimplicialComplex2& x) const;
    static ScalarField coordinate(int n_vertices, int vertex);
    static ScalarField constant(int n_vertices, cplx c);
};

// Piecewise-linear scalar function on [0,1].
struct ScalarPL {
    std::vector<double> nodes;
    std::vector<double> values;
    double operator()(double t) const;
};

using Element = std::variant<DimensionDropElement, ScalarField>;

enum class DomainKind { Ik, MlIk, CX, MkC01 };
enum class CodomainKind { OverComplex, OverInterval };
enum class BlockKind { under0, under1, interior, point };

struct Block {
    BlockKind kind = BlockKind::interior;
    double t = 0.0;
    Point x;
    static Block u0() { return {BlockKind::under0, 0.0, {}}; }
    static Block u1() { return {BlockKind::under1, 1.0, {}}; }
    static Block in(double t) { return {BlockKind::interior, t, {}}; }
    static Block at(const Point& p) { return {BlockKind::point, 0.0, p}; }
};

// phi(f)(y) = u diag(block values, 0) u*
struct Fiber {
    Mat u;
    std::vector<Block> blocks;
};

struct DomainSpec {
    DomainKind kind = DomainKind::Ik;
    int k = 1;
    int l = 1;
    int block_size(const Block& b) const;
};

using FiberSampler = std::function<Fiber(const Point&)>;

struct HomRep {
    DomainSpec domain;
    CodomainKind codomain = CodomainKind::OverComplex;
    int size = 0;          // N, fiber matrix size
    int codomain_k = 1;    // codomain M_l(I_k): endpoint fibers in M_l (x) 1_k
    std::shared_ptr<const SimplicialComplex2> domain_space;    // C(X) domain
    std::shared_ptr<const SimplicialComplex2> codomain_space;  // samples over a complex
    std::vector<Point> points;  // codomain samples (OverComplex)
    std::vector<double> times;  // codomain samples (OverInterval)
    std::vector<Fiber> fibers;

    std::size_t sample_count() const { return fibers.size(); }
    int rank(std::size_t i) const;  // total block size = rank of the cut projection
    void validate(double tol = 1e-9) const;  // throws Malformed
};

Mat block_value(const Element& f, const DomainSpec& d, const Block& b);
Mat assemble(const DomainSpec& d, const Fiber& fiber, const Element& f);
Mat assemble_hom(const HomRep& rep, const Element& f, std::size_t sample);
Mat cut_projection(const Fiber& fiber, const DomainSpec& d);

// Fractional spectrum read from the block list (domains I_k, M_l(I_k), M_k(C[0,1])).
SpectralMultiset spectrum_at(const HomRep& rep, std::size_t sample);
SpectralMultiset fiber_spectrum(const DomainSpec& d, const Fiber& fiber);
// Spectrum of a C(X) fiber.
ComplexMultiset point_spectrum(const Fiber& fiber);

// 1 on Y, 0 at distance >= eta/12n, linear in between.
ScalarPL test_function_hY(const std::vector<std::pair<double, double>>& Y, double eta, int n);

double hom_distance_on_F(const HomRep& a, const HomRep& b, const std::vector<Element>& F,
                         Exec exec = Exec::parallel);
std::vector<double> aff_trace(const HomRep& rep, const Element& h);

std::vector<Mat> unitary_geodesic(const Mat& u, const Mat& v, int steps);

struct ProjectionField {
    std::vector<Mat> p;
    int rank = 0;
    double max_jump = 0.0;  // measured modulus: max adjacent ||P_i - P_{i+1}||
};
// Projection onto eigenvalues in [lo, hi]; GapViolation when an eigenvalue sits
// in (lo - gap, lo) or (hi, hi + gap), or when the rank changes.
ProjectionField spectral_projection(const std::vector<Mat>& field, double lo, double hi, double gap,
                                    Exec exec = Exec::parallel);

// Eigen-decompositions whose columns are matched across adjacent samples by
// maximal eigenvector overlap, so each column index follows one branch.
struct TrackedEig {
    std::vector<Eigen::VectorXd> values;
    std::vector<Mat> vectors;
};
TrackedEig tracked_eigensystem(const std::vector<Mat>& field);

double max_adjacent_jump(const std::vector<Mat>& field);

SdpReport check_sdp(const HomRep& rep, double eta, double delta, Exec exec = Exec::parallel);

}  // namespace dd

#pragma once
#include <string>
#include <vector>

#include "dropdecomp/matrix_rep.hpp"

namespace dd {

// eta < 1 with ||f(t) - f(t')|| < eps/6 whenever |t - t'| < eta, from the
// measured Lipschitz moduli of F and a safety factor 1/2.
double eta_for(const std::vector<DimensionDropElement>& F, double eps, double cap = 0.99, double max_jump = 0.25);

struct SpectrumPartition {
    double eta = 0.0;
    int n = 1;
    std::vector<std::vector<std::pair<double, double>>> groups;  // T_0 .. T_last
    std::vector<std::pair<double, double>> envelopes;            // [t_j, s_j]
    int last() const { return static_cast<int>(groups.size()) - 1; }
    double s0() const { return envelopes.front().second; }
    double t_last() const { return envelopes.back().first; }
};

// Groups sorted disjoint intervals by the gap threshold eta/12n with endpoint
// caps of size eta/4 + eta/12n. With enforce_hypothesis the count (<= n) and
// length (<= eta/12n) hypotheses are validated too.
SpectrumPartition partition_spectrum(std::vector<std::pair<double, double>> intervals, double eta, int n,
                                     bool enforce_hypothesis = true);
std::vector<std::string> partition_bound_violations(const SpectrumPartition& p);
// Connected components of the union of sampled eigenvalue ranges.
std::vector<std::pair<double, double>> spectrum_intervals(const std::vector<std::vector<double>>& sorted_spectra);

// Cap data at one point: j copies of underline-0 and interior values xi.
struct CapBlocks {
    int j = 0;
    std::vector<double> xi;  // ascending
    bool operator==(const CapBlocks&) const = default;
};
// fallback_xi is used for the new interior value when xi is empty.
CapBlocks modify_vertex(const CapBlocks& in, int k, double fallback_xi = 0.0);

// Blocks sorted as underline-0, interior ascending, underline-1, with the
// column groups of u permuted alongside; interior blocks at exactly 0 or 1
// become k endpoint blocks.
Fiber canonical_fiber(const DomainSpec& d, const Fiber& f);

// Unitary c in the commutant of the canonical cap block structure that brings
// w*c closest to the identity (blockwise polar factor).
Mat align_in_commutant(const Mat& w, const std::vector<Block>& blocks, int k);

// Edge interpolation in frame coordinates. First half: geodesic from w0 to
// w1*c with alpha0's spectrum; second half: spectra move linearly to alpha1's.
// Endpoint fibers are returned exactly.
std::vector<Fiber> extend_edge(const DomainSpec& d, const Fiber& alpha0, const Fiber& alpha1,
                               const std::vector<double>& mesh);

int winding_number(const std::vector<cplx>& dets);

// Ring radii used by extend_disk: 1 = boundary, descending, excluding 0.
std::vector<double> disk_radii(int outer_rings, int inner_rings);

struct DiskExtension {
    std::vector<double> radii;               // ring radii, radii[0] = 1
    std::vector<std::vector<Fiber>> rings;   // rings[i][j]: radius i, angle j
    Fiber center;
    int k_prime = 0;
    int winding = 0;                         // m of the correction diag(z^m,1,..)
    int input_winding = 0;                   // winding of det u along the given loop
    double boundary_error = 0.0;             // outer formula vs given boundary
    double holonomy_defect = 0.0;            // distance of the holonomy from its block form
    double max_jump = 0.0;                   // largest adjacent-sample change on probe elements
};

// Extends a loop of cap representations (blocks: k' underline-0 then interior
// values in (0, s0]) over the disk. Throws Obstruction when k' = 0 and
// Hypothesis when k' varies.
DiskExtension extend_disk(const DomainSpec& d, const std::vector<Fiber>& loop, int outer_rings = 8,
                          int inner_rings = 6);

// Fixed non-scalar probe f(t) = ((1-t)a + tb) 1_k + t(1-t) C used for checks.
DimensionDropElement probe_element(int k);

struct DecompOptions {
    double eta = 0.0;  // 0 = eta_for(F, eps)
    int edge_samples = 8;
    int outer_rings = 6;
    int inner_rings = 4;
    int refine_cap = 2;
    bool check_tau = true;
    // false skips the >= k cap-count check (the construction still needs one unit per cap)
    bool require_endpoint_mass = true;
    int h_grid = 32;
    Exec exec = Exec::parallel;
};

struct DecompositionCertificate {
    double eta = 0.0;
    double epsilon = 0.0;
    int n = 0;  // rank(P)
    int k = 1;
    int k_prime = 0;
    int k1_prime = 0;
    int refinements = 0;
    double tau_pairing = 0.0;
    double tau_oscillation = 0.0;
    std::shared_ptr<const SimplicialComplex2> complex;
    std::vector<Point> samples;
    std::vector<std::string> sample_kind;
    std::vector<Fiber> phi;
    std::vector<Fiber> psi;
    std::vector<Mat> Q0, Q1, P1;
    HomRep psi1;
    std::vector<std::vector<double>> errors;  // [sample][f]
    double max_error = 0.0;
    int rank_Q0_max = 0;
    int rank_Q1_max = 0;
    double sum_error = 0.0;    // max ||Q0 + Q1 + P1 - P||
    double orth_error = 0.0;   // max pairwise ||Qa Qb||
    double xi1 = 1.0;
    double xi2 = 0.0;
    bool sdp_identity = true;
    int sdp_mismatches = 0;
    double disk_boundary_error = 0.0;
    std::vector<std::string> partition_trace;
};

DecompositionCertificate decompose_theorem_I(const SimplicialComplex2& X, const FiberSampler& phi, const DomainSpec& d,
                                             int size, const std::vector<DimensionDropElement>& F, double eps,
                                             const DecompOptions& opts = {});

}  // namespace dd

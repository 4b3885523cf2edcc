#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dropdecomp/matrix_rep.hpp"

namespace dd {

// ---------------------------------------------------------------- closeness vs pairing

struct PairingCheckOptions {
    int trials = 2000;
    std::uint64_t seed = 1;
    double delta_cap = 1.0;      // reported delta never exceeds this
    double max_perturbation = 0.5;
    Exec exec = Exec::parallel;
};

struct PairingCounterexample {
    std::vector<Point> a, b;
    double closeness = 0.0;   // max_f ||phi(f) - psi(f)||
    double bottleneck = 0.0;
};

struct PairingCheckReport {
    // Largest delta such that no sampled pair closer than delta on F failed
    // to pair within eta (infimum of closeness over failing pairs, capped).
    double delta = 0.0;
    int trials = 0;
    int failures = 0;
    std::optional<PairingCounterexample> witness;  // failing pair of smallest closeness
};

// Throws GeneratorError when F does not separate a sample grid of X.
void check_separates(const SimplicialComplex2& x, const std::vector<ScalarField>& F, int grid = 6);

PairingCheckReport pairing_from_closeness_check(const SimplicialComplex2& x, const std::vector<ScalarField>& F,
                                                double eta, int n, const PairingCheckOptions& opts = {});

// ---------------------------------------------------------------- unitary path

struct UnitaryPathReport {
    std::vector<Mat> path;
    Mat aligned_end;        // v times a unitary commuting with the diagonal
    double deviation = 0.0; // sup over path samples and F of the conjugated-diagonal difference
    bool pass = false;
};

UnitaryPathReport unitary_path_conjugation_check(const SimplicialComplex2& x, const std::vector<Point>& points,
                                                 const Mat& u, const Mat& v, const std::vector<ScalarField>& F,
                                                 double epsilon, int steps = 32);

// ---------------------------------------------------------------- skeleton reduction

struct SkeletonOptions {
    double eta_prime = 0.0;        // 0 = eta / 4
    int max_subdivisions = 6;
    int puncture_grid = 12;
    Exec exec = Exec::parallel;
};

struct SkeletonReduction {
    std::shared_ptr<const SimplicialComplex2> complex;   // subdivided X
    std::shared_ptr<const SimplicialComplex2> skeleton;  // its 1-skeleton
    std::map<int, Point> punctures;                      // triangle -> puncture
    std::map<int, double> margins;                       // triangle -> distance to the spectral paths
    double sigma = 0.0;                                  // min margin
    int subdivisions = 0;
    std::vector<std::vector<Point>> spectral_paths;      // sampled PL paths of psi
    RetractionTable retraction;                          // along the spectral paths
    HomRep phi1;                                         // domain C(skeleton)
    double step_pairing = 0.0;                           // max adjacent bottleneck of phi
    double error = 0.0;                                  // max ||phi(f) - phi1(pi f)||
    double pairing = 0.0;                                // max bottleneck Sp phi vs Sp phi1 pi
};

SkeletonReduction reduce_to_skeleton(const HomRep& phi, const std::vector<ScalarField>& F, double epsilon,
                                     double eta, const SkeletonOptions& opts = {});

// ---------------------------------------------------------------- distinct spectra

struct DistinctReport {
    HomRep psi;
    double min_gap = 0.0;        // over interior samples
    double error = 0.0;          // max ||phi(f) - psi(f)|| on F
    double pairing = 0.0;        // max displacement of spectral points
};

DistinctReport make_distinct_spectrum(const HomRep& phi, const std::vector<ScalarField>& F, double epsilon,
                                      double eta);

// Minimal pairwise distance of the spectral points of a fiber.
double spectral_gap(const Fiber& f, const PathMetric& metric);

struct EndpointExtension {
    HomRep psi;                 // over [0,1], reparametrizing [-delta, 1 + delta]
    double max_displacement = 0.0;
    std::vector<int> endpoint_multiplicity;  // multiplicities at the new endpoints (both ends)
};

EndpointExtension extend_endpoints_distinct(const HomRep& phi, double delta, double max_displacement = 0.0,
                                            int extension_samples = 4);

// ---------------------------------------------------------------- cluster fields

struct ClusterRanks {
    int l1 = 2;
    int l2 = 4;
    int r = 1;
};

struct ClusterField {
    ClusterRanks ranks;
    int k = 1;
    std::vector<std::vector<std::vector<int>>> E;   // [sample][cluster] -> fiber columns
    std::vector<std::vector<Mat>> P;                // [sample][cluster]
    std::vector<std::vector<Mat>> p;                // [sample][cluster] subprojections
    std::vector<Mat> p0;                            // 1 - sum p_j
    std::vector<int> target_rank;                   // per cluster
    double resolution_error = 0.0;                  // max ||sum P - 1|| and ||P_i P_j||
    double endpoint_error = 0.0;                    // max distance of p_j(0), p_j(1) from M (x) 1_k
    double max_jump = 0.0;                          // max adjacent ||p_j(y) - p_j(y')||
    double sigma_prime = 0.0;                       // min separation minus 2 eta
    double conclusion_error = 0.0;                  // conclusion (i) on G
};

// phi: C(X) -> M_N(I_k) sampled over [0,1] with N = (l1 l2 + r) k; base[j][s] is
// a_j at sample s.
ClusterField cluster_projections(const HomRep& phi, const std::vector<std::vector<Point>>& base, double eta,
                                 const ClusterRanks& ranks, int k, const std::vector<ScalarField>& G,
                                 Exec exec = Exec::parallel);

// ---------------------------------------------------------------- verifiers

struct CandidateDecomposition {
    std::vector<Mat> Q0, Q1, Q2;                 // per sample
    std::vector<Point> x;                        // phi1 points
    std::vector<std::vector<Mat>> p;             // [i][sample], phi1(f) = sum f(x_i) p_i
    std::vector<Fiber> phi2;                     // point blocks over X per sample
    std::vector<Point> gamma;                    // polyline carrying Sp phi2
    std::vector<Mat> u;                          // per sample
};

struct VerifyParams {
    double epsilon = 0.1;
    int J = 1;
    double density_grid = 0.05;   // spacing of the covering grid (chart units)
    double tol = 1e-8;
    double delta = 0.0;           // > 0 enables hypothesis (c)
    std::vector<ScalarField> H;   // test functions for hypothesis (c)
};

struct Verdict {
    std::map<std::string, bool> clauses;        // clause_1 .. clause_4 and sub-checks
    std::map<std::string, std::string> witnesses;
    std::map<std::string, double> measures;
    bool pass() const;
    std::vector<std::string> failures() const;
};

Verdict verify_decomposition(const CandidateDecomposition& dec, const HomRep& phi, const HomRep& psi,
                                  const std::vector<ScalarField>& F, const VerifyParams& params);

// Same checks with everything restricted to the sub-complex X1. Throws
// StructureError unless X1 is a connected sub-complex.
Verdict verify_subcomplex_variant(const CandidateDecomposition& dec, const HomRep& phi, const HomRep& psi,
                                  const SubcomplexSpec& X1, const std::vector<ScalarField>& F,
                                  const VerifyParams& params);

}  // namespace dd

#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dropdecomp/decomp_one.hpp"
#include "dropdecomp/decomp_two.hpp"

namespace dd {

// Hexagonal fan: center 0, ring 1..6, six triangles.
SimplicialComplex2 hexagon_disk();
SimplicialComplex2 single_triangle();
SimplicialComplex2 unit_square();  // two triangles
// Star graph with `arms` unit edges around vertex 0.
SimplicialComplex2 star_graph(int arms);

struct EndpointMassParams {
    int k = 2;
    int n = 12;            // target rank of the cut projection
    int pad = 0;           // extra zero columns
    double epsilon = 0.2;
    double kappa = 1e-7;   // size of the unitary variation
    double drift = 1e-11;  // size of the eigenvalue variation
    bool constant = false; // exact constant fiber (no variation)
};

struct EndpointMassFixture {
    SimplicialComplex2 complex;
    DomainSpec domain;
    int size = 0;
    int n = 0;
    std::vector<DimensionDropElement> F;
    double epsilon = 0.0;
    double eta = 0.0;
    FiberSampler sampler;
};

// Spectra with at least k units in each cap [0, eta/4], [1 - eta/4, 1] at every
// point; re-checked on a sample grid. Throws Infeasible when n < 2k.
EndpointMassFixture endpoint_mass_fixture(std::uint64_t seed, const EndpointMassParams& p);

struct DiskFixture {
    DomainSpec domain;
    std::vector<Fiber> loop;
    int k_prime = 0;
    int winding = 0;
};
// Loop of cap representations with k' underline-0 blocks and `blocks`
// interior blocks in (0, 0.05); the frame winds `winding` times.
DiskFixture disk_fixture(std::uint64_t seed, int k, int k_prime, int blocks, int samples = 48, int winding = 1);

struct SkeletonFixture {
    HomRep phi;
    std::vector<ScalarField> F;
    double epsilon = 0.0;
    double eta = 0.0;
};
// Spectral points moving along straight paths in a 2-complex; with
// through_barycenter one path crosses the barycenter of triangle 0.
SkeletonFixture skeleton_fixture(std::uint64_t seed, int N, int samples = 33, bool through_barycenter = false,
                                 bool constant_at_vertex = false);

struct DistinctFixture {
    HomRep phi;
    std::vector<ScalarField> F;
    double epsilon = 0.0;
    double eta = 0.0;
};
// Points on a star graph with forced collisions at interior samples.
DistinctFixture distinct_fixture(std::uint64_t seed, int N, int samples = 21);

struct ClusterFixture {
    HomRep phi;
    std::vector<std::vector<Point>> base;
    ClusterRanks ranks;
    int k = 1;
    double eta = 0.0;
    double epsilon = 0.0;
    std::vector<ScalarField> G;
};
// Sp phi_y paired with Theta(y) = {a_j(y) with multiplicity l2 k (last: (l2 + r) k)}
// within eta; endpoint fibers in M (x) 1_k with multiplicity exactly k.
ClusterFixture cluster_fixture(std::uint64_t seed, const ClusterRanks& ranks, int k, double eta, int samples = 17);

struct VerifierFixture {
    CandidateDecomposition dec;
    HomRep phi, psi;
    std::vector<ScalarField> F;
    VerifyParams params;
    SubcomplexSpec edge;  // the edge 0-1, on which the edge variant is valid
};
// Witness satisfying all four clauses. With on_edge everything lives on the
// edge 0-1 of a triangle, so density holds on that edge but not on X.
VerifierFixture verifier_fixture(std::uint64_t seed, bool on_edge = false);

// Breaks exactly one clause of a verifier witness: "sum" (clause 1), "u"
// (clause 2), "gamma" (clause 3) or "J" (clause 4). Throws DomainError otherwise.
void mutate_verifier(VerifierFixture& fx, const std::string& which);

struct SdpFixture {
    HomRep rep;
    double eta = 0.0;
    double delta = 0.0;
};
// Fibers of M_l(I_k) over [0,1] with evenly spread spectra.
SdpFixture sdp_fixture(std::uint64_t seed, int k, int l, int blocks, double eta, int samples = 9);

}  // namespace dd

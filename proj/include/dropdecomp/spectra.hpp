#pragma once
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dropdecomp/exec.hpp"

namespace dd {

// Point of P^{(n,k)}[0,1]: endpoint weights in units of 1/k, interior points
// with integer multiplicity (each worth k units).
struct SpectralMultiset {
    int k = 1;
    int total_n = 0;
    int end0_units = 0;
    int end1_units = 0;
    std::vector<std::pair<double, int>> interior;  // strictly increasing t in (0,1)

    // Sorts, merges equal points and fills total_n. Throws DomainError on
    // points outside (0,1) or nonpositive multiplicities.
    static SpectralMultiset make(int k, int end0_units, int end1_units,
                                 std::vector<std::pair<double, int>> interior);

    int interior_count() const;
    // n0 zeros, each interior point k times, n1 ones (ascending).
    std::vector<double> expanded() const;
    bool operator==(const SpectralMultiset&) const = default;
};

// Canonical representative: k0 = n0 mod k, k1 = n1 mod k; every further k
// endpoint units become one reduced point at exactly 0 or 1.
struct ReducedForm {
    int k0 = 0;
    int k1 = 0;
    std::vector<double> points;  // ascending, may contain 0 and 1
};
ReducedForm reduce(const SpectralMultiset& a);

double pnk_distance(const SpectralMultiset& a, const SpectralMultiset& b);

using Matching = std::vector<std::pair<int, int>>;

// Pairing on the line by sorted order (strict: every |a_i - b_j| < eta).
std::optional<Matching> pair_within_line(const std::vector<double>& a, const std::vector<double>& b,
                                         double eta);
// Pairing of reduced forms; indices refer to reduce(a).points / reduce(b).points.
std::optional<Matching> pair_within(const SpectralMultiset& a, const SpectralMultiset& b, double eta);

// Bottleneck assignment for an arbitrary n x n distance: smallest threshold
// admitting a perfect matching, found by bisection over the distinct
// distances with a bipartite feasibility test.
struct Bottleneck {
    double value = 0.0;
    Matching matching;
};
Bottleneck bottleneck_assignment(int n, const std::function<double(int, int)>& dist);
std::optional<Matching> pair_within_metric(int n, const std::function<double(int, int)>& dist,
                                           double eta);
// Brute force over all permutations; test oracle, n <= 9.
double bottleneck_bruteforce(int n, const std::function<double(int, int)>& dist);

struct SdpReport {
    bool pass = true;
    double worst_ratio = 1.0;
    double worst_count = 0.0;  // in units of 1/k
    double total = 0.0;
    double worst_x = 0.0;
    std::size_t worst_sample = 0;
};

// Occupancy of the open ball B_eta(x) in units of 1/k.
double ball_units(const SpectralMultiset& s, double x, double eta);
SdpReport check_sdp(const std::vector<SpectralMultiset>& spectra, double eta, double delta,
                    Exec exec = Exec::parallel);

SpectralMultiset fractionalize(std::vector<double> eigenvalues, int k, double tol_end = 1e-9);

}  // namespace dd

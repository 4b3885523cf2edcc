#pragma once
#include <Eigen/Dense>

#include <complex>
#include <random>
#include <vector>

namespace dd {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

struct Tolerances {
    double projection = 1e-8;
    double unitarity = 1e-9;
    double gap = 1e-6;
    double end = 1e-9;
};

double op_norm(const Mat& m);
bool is_unitary(const Mat& u, double tol);
bool is_projection(const Mat& p, double tol);
bool is_hermitian(const Mat& h, double tol);

// Nearest unitary (polar factor).
Mat polar_unitary(const Mat& m);

// Principal log of a unitary, eigenphases in (-pi, pi]. Throws
// BranchAmbiguity when an eigenvalue sits at -1 (within branch_tol).
Mat log_unitary(const Mat& u, double branch_tol = 1e-12);

// exp of a skew-hermitian matrix, computed spectrally so the result is
// unitary to rounding.
Mat exp_skew(const Mat& l);

// Hermitian eigen-decomposition with ascending eigenvalues.
struct HermEig {
    Eigen::VectorXd values;
    Mat vectors;
};
HermEig herm_eig(const Mat& h);

Mat kron_identity(const Mat& a, int k);  // a (x) 1_k
Mat haar_unitary(int n, std::mt19937_64& rng);
Mat random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0);

// Minimum-cost perfect assignment on a square cost matrix (Hungarian).
// Returns col[i] for every row i.
std::vector<int> min_cost_assignment(const RMat& cost);

}  // namespace dd

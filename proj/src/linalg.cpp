#include "dropdecomp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>

#include "dropdecomp/errors.hpp"

namespace dd {

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    // largest singular value; the Hermitian solvers keep it to full relative
    // accuracy and are far cheaper than a Jacobi SVD
    if (m.rows() == m.cols() && m.isApprox(m.adjoint(), 0.0)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    const Mat g = m.rows() >= m.cols() ? Mat(m.adjoint() * m) : Mat(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

bool is_unitary(const Mat& u, double tol) {
    if (u.rows() != u.cols()) return false;
    if (u.size() == 0) return true;
    Mat d = u.adjoint() * u - Mat::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const Mat& h, double tol) {
    if (h.rows() != h.cols()) return false;
    if (h.size() == 0) return true;
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_projection(const Mat& p, double tol) {
    if (!is_hermitian(p, tol)) return false;
    if (p.size() == 0) return true;
    return (p * p - p).cwiseAbs().maxCoeff() <= tol;
}

Mat polar_unitary(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

Mat log_unitary(const Mat& u, double branch_tol) {
    const long n = u.rows();
    if (n == 0) return u;
    Eigen::ComplexSchur<Mat> schur(u);
    const Mat& t = schur.matrixT();
    const Mat& z = schur.matrixU();
    Eigen::VectorXcd phase(n);
    for (long i = 0; i < n; ++i) {
        cplx lam = t(i, i);
        if (std::abs(lam + 1.0) <= branch_tol)
            throw BranchAmbiguity("unitary logarithm: eigenvalue at -1, perturb the endpoint");
        phase(i) = cplx(0.0, std::arg(lam));
    }
    Mat l = z * phase.asDiagonal() * z.adjoint();
    // project onto skew-hermitian matrices to remove Schur rounding
    return 0.5 * (l - l.adjoint());
}

HermEig herm_eig(const Mat& h) {
    Mat hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(hs);
    return {es.eigenvalues(), es.eigenvectors()};
}

Mat exp_skew(const Mat& l) {
    if (l.size() == 0) return l;
    const cplx i(0.0, 1.0);
    HermEig e = herm_eig(-i * l);
    Eigen::VectorXcd d(e.values.size());
    for (long j = 0; j < d.size(); ++j) d(j) = std::exp(i * e.values(j));
    return e.vectors * d.asDiagonal() * e.vectors.adjoint();
}

Mat kron_identity(const Mat& a, int k) {
    Mat out = Mat::Zero(a.rows() * k, a.cols() * k);
    for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c)
            for (int j = 0; j < k; ++j) out(r * k + j, c * k + j) = a(r, c);
    return out;
}

Mat haar_unitary(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat z(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) z(r, c) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ();
    Mat rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < n; ++c) {
        cplx d = rr(c, c);
        double a = std::abs(d);
        if (a > 0) q.col(c) *= d / a;
    }
    return q;
}

Mat random_hermitian(int n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat z(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) z(r, c) = cplx(g(rng), g(rng));
    return scale * 0.5 * (z + z.adjoint());
}

// Shortest augmenting path formulation (potentials u, v), O(n^3).
std::vector<int> min_cost_assignment(const RMat& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) col[p[j] - 1] = j - 1;
    return col;
}

}  // namespace dd

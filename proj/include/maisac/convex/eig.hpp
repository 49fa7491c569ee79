#pragma once

#include <complex>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace maisac::convex {

inline void check_hermitian(const Eigen::MatrixXcd& A, double tol = 1e-12) {
    const double scale = std::max(1.0, A.norm());
    if ((A - A.adjoint()).norm() > tol * scale)
        throw std::invalid_argument("matrix is not Hermitian to tolerance");
}

/// Largest eigenpair of a Hermitian matrix. The eigenvector phase is fixed
/// so that its largest-magnitude entry is real positive, which makes the
/// output independent of the underlying eigensolver's phase convention.
inline std::pair<double, Eigen::VectorXcd> principal_eigvec(const Eigen::MatrixXcd& A) {
    check_hermitian(A);
    Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("principal_eigvec: eigendecomposition failed");
    const Eigen::Index last = H.rows() - 1;
    double lambda = es.eigenvalues()(last);
    Eigen::VectorXcd v = es.eigenvectors().col(last);

    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> pivot = v(imax);
    if (std::abs(pivot) > 0) v *= std::conj(pivot) / std::abs(pivot);
    v.normalize();
    return {lambda, v};
}

}  // namespace maisac::convex

#pragma once

#include <Eigen/Dense>
#include <utility>

#include "ssldyn/errors.hpp"

namespace ssldyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigendecomposition of a symmetric matrix with deterministic conventions:
/// eigenvalues descending, columns of `eigenvectors` paired with them, and
/// each eigenvector's largest-magnitude component made nonnegative.
struct SpectralDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
    double rank_tolerance = 1e-10;  // relative to max |eigenvalue|
    // Set when some eigenvalue gap is below 1e-8 * lambda_max; predictions
    // that require unique eigenvalues are unreliable in that case.
    bool degenerate = false;

    /// Number of eigenvalues classified as nonzero under rank_tolerance.
    int numerical_rank() const;

    /// Top-k eigenvectors as rows (k x m).
    Matrix top_rows(int k) const;
};

/// Decompose a symmetric matrix. Input must be symmetric within 1e-9
/// relative tolerance and finite.
SpectralDecomposition sym_eigendecompose(const Matrix& S);

/// (S^+)^p for p in {-1, -1/2, +1/2} on a symmetric PSD matrix. Eigenvalues
/// below tol * lambda_max are treated as exact zeros; eigenvalues below
/// -tol * lambda_max raise NumericalError.
Matrix pseudo_inverse_power(const Matrix& S, double exponent, double tol = 1e-10);

/// QR factorization M = Q R with Q (a x a) orthogonal and R (a x b, a <= b)
/// upper-triangular with nonnegative diagonal. Unique for full-row-rank M.
std::pair<Matrix, Matrix> qr_nonneg(const Matrix& M);

/// Q * R-tilde where R-tilde keeps only the diagonal of R. Converts a generic
/// matrix into one with orthogonal columns scaled by R's diagonal.
Matrix alignment_transform(const Matrix& M);

}  // namespace ssldyn

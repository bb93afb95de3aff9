#include "ssldyn/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace ssldyn {

namespace {

void check_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) throw InvalidInputError(std::string(what) + ": non-finite entries");
}

// Flip each column so its largest-magnitude component is nonnegative.
void fix_signs(Matrix& V) {
    for (int j = 0; j < V.cols(); ++j) {
        int imax = 0;
        V.col(j).cwiseAbs().maxCoeff(&imax);
        if (V(imax, j) < 0) V.col(j) = -V.col(j);
    }
}

}  // namespace

int SpectralDecomposition::numerical_rank() const {
    if (eigenvalues.size() == 0) return 0;
    const double cutoff = rank_tolerance * eigenvalues.cwiseAbs().maxCoeff();
    int r = 0;
    for (int i = 0; i < eigenvalues.size(); ++i)
        if (std::abs(eigenvalues[i]) > cutoff) ++r;
    return r;
}

Matrix SpectralDecomposition::top_rows(int k) const {
    if (k < 0 || k > eigenvectors.cols())
        throw InvalidInputError("top_rows: k out of range");
    return eigenvectors.leftCols(k).transpose();
}

SpectralDecomposition sym_eigendecompose(const Matrix& S) {
    check_finite(S, "sym_eigendecompose");
    if (S.rows() != S.cols())
        throw InvalidInputError("sym_eigendecompose: matrix not square");
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw InvalidInputError("sym_eigendecompose: matrix not symmetric within 1e-9");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (S + S.transpose()));
    if (solver.info() != Eigen::Success)
        throw NumericalError("sym_eigendecompose: eigensolver failed");

    const int n = static_cast<int>(S.rows());
    SpectralDecomposition out;
    out.eigenvalues = Vector(n);
    out.eigenvectors = Matrix(n, n);
    // Eigen returns ascending order; reverse.
    for (int i = 0; i < n; ++i) {
        out.eigenvalues[i] = solver.eigenvalues()[n - 1 - i];
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    fix_signs(out.eigenvectors);

    const double lmax = out.eigenvalues.cwiseAbs().maxCoeff();
    for (int i = 0; i + 1 < n; ++i) {
        if (out.eigenvalues[i] - out.eigenvalues[i + 1] < 1e-8 * lmax) {
            out.degenerate = true;
            break;
        }
    }
    return out;
}

Matrix pseudo_inverse_power(const Matrix& S, double exponent, double tol) {
    if (exponent != -1.0 && exponent != -0.5 && exponent != 0.5)
        throw InvalidInputError("pseudo_inverse_power: exponent must be -1, -1/2 or +1/2");
    SpectralDecomposition eig = sym_eigendecompose(S);
    const double lmax = eig.eigenvalues.size() ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    const double cutoff = tol * lmax;

    Vector powered = Vector::Zero(eig.eigenvalues.size());
    for (int i = 0; i < eig.eigenvalues.size(); ++i) {
        const double lam = eig.eigenvalues[i];
        if (lam < -cutoff)
            throw NumericalError("pseudo_inverse_power: matrix not PSD (eigenvalue " +
                                 std::to_string(lam) + ")");
        if (lam <= cutoff) continue;  // null direction
        powered[i] = std::pow(lam, exponent);
    }
    Matrix result = eig.eigenvectors * powered.asDiagonal() * eig.eigenvectors.transpose();
    return 0.5 * (result + result.transpose());
}

std::pair<Matrix, Matrix> qr_nonneg(const Matrix& M) {
    check_finite(M, "qr_nonneg");
    const auto a = M.rows(), b = M.cols();
    if (a > b) throw InvalidInputError("qr_nonneg: expected a wide matrix (rows <= cols)");

    Eigen::JacobiSVD<Matrix> svd(M);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (smax <= 0.0 || smin <= 1e-12 * smax)
        throw NumericalError("qr_nonneg: rank-deficient input, singular value ratio " +
                             std::to_string(smax > 0 ? smin / smax : 0.0));

    Eigen::HouseholderQR<Matrix> qr(M);
    Matrix Qfull = qr.householderQ() * Matrix::Identity(a, a);
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();

    for (int j = 0; j < a; ++j) {
        if (R(j, j) < 0) {
            R.row(j) = -R.row(j);
            Qfull.col(j) = -Qfull.col(j);
        }
    }
    return {Qfull, R};
}

Matrix alignment_transform(const Matrix& M) {
    auto [Q, R] = qr_nonneg(M);
    Matrix Rtilde = Matrix::Zero(R.rows(), R.cols());
    const int k = static_cast<int>(std::min(R.rows(), R.cols()));
    for (int j = 0; j < k; ++j) Rtilde(j, j) = R(j, j);
    return Q * Rtilde;
}

}  // namespace ssldyn

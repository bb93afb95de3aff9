#include "ssldyn/kernel.hpp"

#include <cmath>

#include "ssldyn/linear_dynamics.hpp"

namespace ssldyn {

namespace {

void check_symmetric_block(const Matrix& K, const char* name) {
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw InvalidInputError(std::string("assemble_bundle: ") + name +
                                " block not symmetric");
}

}  // namespace

KernelBundle assemble_bundle(const Matrix& Kaa, const Matrix& Kab, const Matrix& Kbb) {
    const long n = Kaa.rows();
    if (Kaa.cols() != n || Kab.rows() != n || Kab.cols() != n || Kbb.rows() != n ||
        Kbb.cols() != n)
        throw InvalidInputError("assemble_bundle: all blocks must be n x n");
    check_symmetric_block(Kaa, "Kaa");
    check_symmetric_block(Kbb, "Kbb");

    KernelBundle bundle;
    bundle.n = n;
    bundle.Kaa = Kaa;
    bundle.Kab = Kab;
    bundle.Kba = Kab.transpose();
    bundle.Kbb = Kbb;
    bundle.Ktilde = Matrix(2 * n, 2 * n);
    bundle.Ktilde.topLeftCorner(n, n) = Kaa;
    bundle.Ktilde.topRightCorner(n, n) = Kab;
    bundle.Ktilde.bottomLeftCorner(n, n) = bundle.Kba;
    bundle.Ktilde.bottomRightCorner(n, n) = Kbb;
    return bundle;
}

KernelBundle linear_kernel_bundle(const PairedDataset& ds) {
    return assemble_bundle(ds.X * ds.X.transpose(), ds.X * ds.Xprime.transpose(),
                           ds.Xprime * ds.Xprime.transpose());
}

namespace {

// Z = (1/2n) (T + T^T) with T = [[Kab Kaa, Kab^2], [Kbb Kaa, Kbb Kab]]: the
// stacked-data quadratic form [X; X'] Gamma [X^T X'^T].
Matrix contrastive_numerator(const KernelBundle& b) {
    const long n = b.n;
    Matrix T(2 * n, 2 * n);
    T.topLeftCorner(n, n) = b.Kab * b.Kaa;
    T.topRightCorner(n, n) = b.Kab * b.Kab;
    T.bottomLeftCorner(n, n) = b.Kbb * b.Kaa;
    T.bottomRightCorner(n, n) = b.Kbb * b.Kab;
    return (T + T.transpose()) / (2.0 * static_cast<double>(n));
}

}  // namespace

ContrastiveKernel build_contrastive_kernel(const KernelBundle& bundle, double tol) {
    Matrix Z = contrastive_numerator(bundle);
    Matrix Kinv_half = pseudo_inverse_power(bundle.Ktilde, -0.5, tol);
    Matrix KGamma = Kinv_half * Z * Kinv_half;
    KGamma = 0.5 * (KGamma + KGamma.transpose());

    ContrastiveKernel ck;
    ck.KGamma = KGamma;
    ck.eig = sym_eigendecompose(KGamma);
    ck.rank_tolerance = tol;
    return ck;
}

Matrix nonsymmetric_Q(const KernelBundle& bundle, double tol) {
    return contrastive_numerator(bundle) * pseudo_inverse_power(bundle.Ktilde, -1.0, tol);
}

Matrix prediction_coefficients(const ContrastiveKernel& ck, const KernelBundle& bundle, int d,
                               const Matrix* U) {
    if (d < 1 || d > ck.eig.eigenvalues.size())
        throw InvalidInputError("prediction_coefficients: d out of range");
    Vector s(d);
    for (int j = 0; j < d; ++j) {
        const double zeta = ck.eig.eigenvalues[j];
        if (!(zeta > 0.0))
            throw NumericalError("prediction_coefficients: nonpositive kernel eigenvalue at "
                                 "index " + std::to_string(j + 1));
        s[j] = 1.0 / std::sqrt(zeta);
    }
    Matrix Bd = ck.eig.eigenvectors.leftCols(d);  // 2n x d
    Matrix coeff = s.asDiagonal() * Bd.transpose() *
                   pseudo_inverse_power(bundle.Ktilde, -0.5, ck.rank_tolerance);
    if (U) {
        if (U->rows() != d || U->cols() != d)
            throw InvalidInputError("prediction_coefficients: U must be d x d");
        coeff = (*U) * coeff;
    }
    return coeff;
}

Vector predict_embeddings(const ContrastiveKernel& ck, const KernelBundle& bundle, int d,
                          const Vector& KxX, const Vector& KxXp, const Matrix* U) {
    if (KxX.size() != bundle.n || KxXp.size() != bundle.n)
        throw InvalidInputError("predict_embeddings: kernel rows must have n entries");
    Vector kx(2 * bundle.n);
    kx << KxX, KxXp;
    return prediction_coefficients(ck, bundle, d, U) * kx;
}

KernelizedTrajectory kernelized_trajectory(const ContrastiveKernel& ck,
                                           const KernelBundle& bundle, int d,
                                           const Matrix& f0_train,
                                           const std::vector<double>& times) {
    if (f0_train.rows() != d || f0_train.cols() != 2 * bundle.n)
        throw InvalidInputError("kernelized_trajectory: f0_train must be d x 2n");
    Vector gammas(d);
    for (int j = 0; j < d; ++j) {
        gammas[j] = ck.eig.eigenvalues[j];
        if (!(gammas[j] > 0.0))
            throw NumericalError("kernelized_trajectory: nonpositive kernel eigenvalue at "
                                 "index " + std::to_string(j + 1));
    }

    Matrix Kinv_half = pseudo_inverse_power(bundle.Ktilde, -0.5, ck.rank_tolerance);
    Matrix Bd = ck.eig.eigenvectors.leftCols(d);  // 2n x d
    // U S(0) = alignment transform of f0 expressed in the kernel eigenbasis.
    Matrix US0 = alignment_transform(f0_train * Kinv_half * Bd);

    KernelizedTrajectory out;
    out.times = times;
    out.s0 = Vector(d);
    out.U = Matrix(d, d);
    for (int j = 0; j < d; ++j) {
        const double norm = US0.col(j).norm();
        if (!(norm > 0.0))
            throw NumericalError("kernelized_trajectory: alignment failure at mode " +
                                 std::to_string(j + 1));
        out.s0[j] = norm;
        out.U.col(j) = US0.col(j) / norm;
    }

    Matrix base = Bd.transpose() * Kinv_half;  // d x 2n
    out.coefficients.reserve(times.size());
    for (double t : times) {
        Vector s(d);
        for (int j = 0; j < d; ++j) s[j] = singular_value_at(gammas[j], out.s0[j], t);
        out.coefficients.push_back(out.U * s.asDiagonal() * base);
    }
    return out;
}

}  // namespace ssldyn

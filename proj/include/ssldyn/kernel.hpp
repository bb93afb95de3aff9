#pragma once

#include <string>
#include <vector>

#include "ssldyn/dataset.hpp"
#include "ssldyn/spectral.hpp"

namespace ssldyn {

/// The four kernel blocks over a paired dataset plus the assembled 2n x 2n
/// combined kernel.
struct KernelBundle {
    Matrix Kaa, Kab, Kba, Kbb;  // n x n each
    Matrix Ktilde;              // 2n x 2n
    long n = 0;
};

/// Symmetric kernelization of the feature cross-correlation, with its
/// eigensystem (zeta_j, b_j).
struct ContrastiveKernel {
    Matrix KGamma;  // 2n x 2n
    SpectralDecomposition eig;
    double rank_tolerance = 1e-10;
};

/// Assemble a bundle from the three independent blocks; Kba is set to Kab^T.
KernelBundle assemble_bundle(const Matrix& Kaa, const Matrix& Kab, const Matrix& Kbb);

/// Linear-kernel bundle Kaa = X X^T etc. -- the explicit-feature oracle path.
KernelBundle linear_kernel_bundle(const PairedDataset& ds);

/// K_Gamma = Ktilde^{-1/2} Z Ktilde^{-1/2} with Z the two-term block expansion
/// of the stacked-data quadratic form; inverse square roots are pseudo-inverses.
ContrastiveKernel build_contrastive_kernel(const KernelBundle& bundle, double tol = 1e-10);

/// Non-symmetric kernelization Q = Z Ktilde^+; its right-eigenvalue spectrum
/// coincides with the nonzero spectrum of K_Gamma on the data span.
Matrix nonsymmetric_Q(const KernelBundle& bundle, double tol = 1e-10);

/// Final embedding of a test point x from kernel rows (K(x, x_i)) and
/// (K(x, x'_i)): f(x) = U S [b_1..b_d]^T Ktilde^{-1/2} [KxX KxXp]^T with
/// S = diag(zeta_j^{-1/2}). U defaults to identity.
Vector predict_embeddings(const ContrastiveKernel& ck, const KernelBundle& bundle, int d,
                          const Vector& KxX, const Vector& KxXp, const Matrix* U = nullptr);

/// Coefficient matrix M (d x 2n) such that f(x) = M [KxX KxXp]^T for the
/// converged top spectral solution.
Matrix prediction_coefficients(const ContrastiveKernel& ck, const KernelBundle& bundle, int d,
                               const Matrix* U = nullptr);

struct KernelizedTrajectory {
    std::vector<double> times;
    std::vector<Matrix> coefficients;  // d x 2n each; f(x,t) = coeff [KxX KxXp]^T
    Matrix U;                          // derived orthogonal factor
    Vector s0;                         // effective initial singular values
};

/// Time-dependent embedding maps from a small initial embedding of the train
/// set (f0_train is d x 2n): the singular values evolve by the closed form and
/// U, s0 come from the alignment transform of f0 in the kernel eigenbasis.
KernelizedTrajectory kernelized_trajectory(const ContrastiveKernel& ck,
                                           const KernelBundle& bundle, int d,
                                           const Matrix& f0_train,
                                           const std::vector<double>& times);

}  // namespace ssldyn

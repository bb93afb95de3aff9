#pragma once

#include <cstdint>
#include <vector>

#include "ssldyn/spectral.hpp"

namespace ssldyn {

struct LambdaConfig {
    int d = 8;          // embedding dimension
    double lambda = 1;  // off-diagonal weight, in (0, 1]
    int k = 0;          // number of learned modes, 0 <= k <= d

    void validate() const;
};

/// Full Barlow Twins loss sum_j (1 - C_jj)^2 + lambda * sum_{j != k} C_jk^2.
/// Reduces to ||C - I||_F^2 at lambda = 1.
double bt_loss_lambda(const Matrix& C, double lambda);

/// Optimal shared eigenvalue d / (lambda d + (1 - lambda) k) for k learned
/// modes with maximally delocalized eigenvectors.
double optimal_delocalized_eigenvalue(const LambdaConfig& cfg);

/// Loss at the k-mode optimum: d - d k / (lambda d + (1 - lambda) k).
double optimal_loss_at_k(const LambdaConfig& cfg);

enum class ModeBasis {
    delocalized,  // all entries of magnitude d^{-1/2}
    axis_aligned  // standard basis vectors
};

/// Orthonormal basis whose first k vectors are used as fixed eigenvectors in
/// simulate_lambda_steps. For d a power of two, the delocalized basis is the
/// normalized Walsh-Hadamard system (all entries exactly +-d^{-1/2}); other d
/// fall back to a random orthogonal basis with the delocalization check
/// max_ij |u_ij| <= 2 d^{-1/2}.
Matrix delocalized_basis(int d, std::uint64_t seed = 0);

struct LambdaStepResult {
    int k = 0;
    std::vector<double> converged_scales;  // learned eta_i
    double converged_loss = 0.0;
    double predicted_scale = 0.0;
    double predicted_loss = 0.0;
};

/// For each k <= k_max, gradient descent on bt_loss_lambda over
/// C = sum_{i<=k} eta_i u_i u_i^T with fixed orthonormal u_i and learnable
/// scales eta_i; throws NumericalError (reporting the residual gradient norm)
/// if descent does not converge within `steps`.
std::vector<LambdaStepResult> simulate_lambda_steps(int d, double lambda, int k_max,
                                                    double eta_lr, long steps,
                                                    std::uint64_t seed,
                                                    ModeBasis basis = ModeBasis::delocalized);

}  // namespace ssldyn

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssldyn/spectral.hpp"

namespace ssldyn {

/// Aligned initialization W0 = U * diag(s0) * eigvec_rows, with eigvec_rows
/// the top-d eigenvector rows of Gamma and gammas the matched eigenvalues.
struct AlignedInit {
    Matrix U;            // d x d orthogonal
    Vector s0;           // d positive initial singular values
    Matrix eigvec_rows;  // d x m, orthonormal rows
    Vector gammas;       // d, descending
    // Mirrors SpectralDecomposition::degenerate; step ordering predictions
    // are unreliable when set.
    bool degenerate_warning = false;

    long d() const { return U.rows(); }
    long m() const { return eigvec_rows.cols(); }
    Matrix weight0() const { return U * s0.asDiagonal() * eigvec_rows; }
};

/// Sampled training curve: loss and embedding eigenvalues over flow time,
/// plus optional weight snapshots.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> losses;
    Matrix eig_history;  // times.size() x d, row t holds eigenvalues at times[t]
    std::vector<std::pair<double, Matrix>> snapshots;

    void validate() const;
    /// CSV with header "t,loss,eig_1,...,eig_d".
    void save_csv(const std::string& path) const;
};

/// Critical time tau = -ln(s0^2 gamma) / (8 gamma) at which a small mode with
/// eigenvalue gamma > 0 starts to grow. Negative when s0^2 gamma > 1.
double step_timescale(double gamma, double s0);

/// Closed-form singular value e^{4 gamma t} / sqrt(s0^{-2} + (e^{8 gamma t} - 1) gamma),
/// evaluated overflow-free for |gamma t| <= 700.
double singular_value_at(double gamma, double s0, double t);

/// Exact trajectory from an aligned initialization: W(t) = U S(t) eigvec_rows,
/// loss = sum_j (1 - gamma_j s_j^2)^2, eigenvalues gamma_j s_j(t)^2.
Trajectory aligned_trajectory(const AlignedInit& init, const std::vector<double>& times,
                              const std::vector<double>& snapshot_times = {});

/// Zero-loss minimum-norm solution U * diag(gamma_j^{-1/2} if gamma_j > 0 else 0)
/// * top-d eigenvector rows. U defaults to identity.
Matrix top_spectral_solution(const SpectralDecomposition& gamma_decomp, int d,
                             const Matrix* U = nullptr);

/// ||W Gamma W^T - I_d||_F^2.
double barlow_loss(const Matrix& W, const Matrix& Gamma);

/// Effective aligned initialization for a generic small W0: U and s0 from the
/// alignment transform of W0 projected onto the eigenbasis of Gamma.
AlignedInit effective_aligned_init(const Matrix& W0, const SpectralDecomposition& gamma_decomp);

/// Number of modes not yet learned at time t: |{j : tau_j > t}|.
int loss_staircase(const std::vector<double>& taus, double t);

}  // namespace ssldyn

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssldyn/linear_dynamics.hpp"
#include "ssldyn/spectral.hpp"

namespace ssldyn {

enum class IntegratorMethod { rk4_fixed, euler_fixed };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::rk4_fixed;
    double dt = 1e-3;
    double t_end = 1.0;
    long record_every = 1;
    std::vector<double> snapshot_times;

    void validate() const;
};

/// State for the eigenbasis parameterization W = U A Gamma^(<=m). Time here is
/// the reparameterized unit (main-text time divided by 4).
struct AMatrixState {
    Matrix A;       // d x m
    Vector Lambda;  // m eigenvalues, descending
    enum class Mode { exact, approx } mode = Mode::exact;
};

/// Full-matrix gradient flow dW/dt = -4 (W Gamma W^T - I) W Gamma, integrated
/// with a fixed-step scheme. Records loss and the eigenvalues of W Gamma W^T.
/// Throws NumericalError reporting the last stable time if ||W||_F exceeds 1e6.
Trajectory integrate_W(const Matrix& W0, const Matrix& Gamma, const IntegratorConfig& cfg);

struct ATrace {
    std::vector<double> times;
    std::vector<Matrix> states;

    /// CSV with columns "t,s_1..s_d,a_jk..." naming every off-diagonal entry.
    void save_csv(const std::string& path) const;
};

/// Eigenbasis dynamics dA/dt = (I - A Lambda A^T) A Lambda (exact mode) or its
/// diagonal approximation (I - diag(gamma_j s_j^2)) A Lambda (approx mode).
ATrace integrate_A(const AMatrixState& state0, const IntegratorConfig& cfg);

/// Closed-form off-diagonal coefficient a0 * (s_j(t)/s_j(0))^(gamma_k/gamma_j).
double closed_form_a_jk(double a0, double gamma_j, double gamma_k, double s_j_ratio);

/// One candidate critical point of the eps-regularized loss: an eigenvalue
/// subset with a zero/nonzero branch choice per mode.
struct CriticalPoint {
    std::vector<int> subset;          // eigenvalue indices, 0-based
    std::vector<double> singular_values;
    double loss = 0.0;                // unregularized L
    double frob_sq = 0.0;             // ||W||_F^2
    double regularized_loss = 0.0;    // L + eps ||W||_F^2
};

/// Enumerate every size-d eigenvalue subset and branch choice (m <= 16),
/// sorted by regularized loss ascending.
std::vector<CriticalPoint> regularized_critical_points(
    const SpectralDecomposition& gamma_decomp, int d, double eps);

struct LandscapeProbeReport {
    std::vector<double> terminal_losses;          // one per converged trial
    std::vector<double> distinct_loss_clusters;   // clustered at 1e-6 resolution
};

/// Gradient flow on L(W) = -tr(W^T A W) + tr((W^T B W)^2) from random starts;
/// reports the distinct terminal losses reached.
LandscapeProbeReport quartic_landscape_probe(const Matrix& A, const Matrix& B, int d,
                                             int trials, std::uint64_t seed);

}  // namespace ssldyn

#include "ssldyn/lambda_effects.hpp"

#include <cmath>
#include <random>

namespace ssldyn {

void LambdaConfig::validate() const {
    if (d < 1) throw ConfigError("LambdaConfig: d must be >= 1");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("LambdaConfig: lambda must be in (0, 1]");
    if (k < 0 || k > d) throw ConfigError("LambdaConfig: k must be in [0, d]");
}

double bt_loss_lambda(const Matrix& C, double lambda) {
    if (C.rows() != C.cols()) throw InvalidInputError("bt_loss_lambda: C must be square");
    double loss = 0.0;
    for (long j = 0; j < C.rows(); ++j) {
        const double diag = 1.0 - C(j, j);
        loss += diag * diag;
        for (long k = 0; k < C.cols(); ++k)
            if (k != j) loss += lambda * C(j, k) * C(j, k);
    }
    return loss;
}

double optimal_delocalized_eigenvalue(const LambdaConfig& cfg) {
    cfg.validate();
    if (cfg.k < 1) throw InvalidInputError("optimal_delocalized_eigenvalue: k must be >= 1");
    const double d = cfg.d;
    return d / (cfg.lambda * d + (1.0 - cfg.lambda) * cfg.k);
}

double optimal_loss_at_k(const LambdaConfig& cfg) {
    cfg.validate();
    if (cfg.k == 0) return cfg.d;
    const double d = cfg.d;
    return d - d * cfg.k / (cfg.lambda * d + (1.0 - cfg.lambda) * cfg.k);
}

namespace {

bool is_power_of_two(int d) { return d > 0 && (d & (d - 1)) == 0; }

Matrix hadamard_basis(int d) {
    Matrix H(1, 1);
    H(0, 0) = 1.0;
    while (H.rows() < d) {
        const long s = H.rows();
        Matrix H2(2 * s, 2 * s);
        H2.topLeftCorner(s, s) = H;
        H2.topRightCorner(s, s) = H;
        H2.bottomLeftCorner(s, s) = H;
        H2.bottomRightCorner(s, s) = -H;
        H = (1.0 / std::sqrt(2.0)) * H2;
    }
    return H;
}

}  // namespace

Matrix delocalized_basis(int d, std::uint64_t seed) {
    if (d < 1) throw ConfigError("delocalized_basis: d must be >= 1");
    if (is_power_of_two(d)) return hadamard_basis(d);

    const double bound = 2.0 / std::sqrt(static_cast<double>(d));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < 2000; ++attempt) {
        Matrix G(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) G(i, j) = normal(rng);
        Eigen::HouseholderQR<Matrix> qr(G);
        Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
        if (Q.cwiseAbs().maxCoeff() <= bound) return Q;
    }
    throw NumericalError("delocalized_basis: no sufficiently delocalized orthogonal basis "
                         "found for d = " + std::to_string(d));
}

std::vector<LambdaStepResult> simulate_lambda_steps(int d, double lambda, int k_max,
                                                    double eta_lr, long steps,
                                                    std::uint64_t seed, ModeBasis basis) {
    LambdaConfig{d, lambda, 0}.validate();
    if (k_max < 1 || k_max > d) throw ConfigError("simulate_lambda_steps: k_max must be in [1, d]");
    if (steps < 1) throw ConfigError("simulate_lambda_steps: steps must be >= 1");

    Matrix U = basis == ModeBasis::delocalized ? delocalized_basis(d, seed)
                                               : Matrix(Matrix::Identity(d, d));

    std::vector<LambdaStepResult> results;
    for (int k = 1; k <= k_max; ++k) {
        Matrix Uk = U.leftCols(k);
        Vector eta = Vector::Constant(k, 0.5);
        // The loss is a convex quadratic in eta; a step at the inverse of the
        // largest Hessian eigenvalue converges quickly when eta_lr <= 0.
        // Delocalized basis: H = 2 lambda I + (2/d)(1 - lambda) J over the k
        // scales, largest eigenvalue 2 lambda + 2 (1 - lambda) k / d.
        // Axis basis: H = 2 I.
        const double curvature =
            basis == ModeBasis::delocalized
                ? 2.0 * lambda + 2.0 * (1.0 - lambda) * static_cast<double>(k) / d
                : 2.0;
        const double lr = eta_lr > 0.0 ? eta_lr : 1.0 / curvature;

        double grad_norm = 0.0;
        bool converged = false;
        for (long it = 0; it < steps; ++it) {
            Matrix C = Uk * eta.asDiagonal() * Uk.transpose();
            // Weighted residual: diagonal weight 1, off-diagonal weight lambda.
            Matrix M = lambda * C;
            for (int j = 0; j < d; ++j) M(j, j) = C(j, j) - 1.0;
            Vector grad(k);
            for (int i = 0; i < k; ++i) grad[i] = 2.0 * Uk.col(i).dot(M * Uk.col(i));
            grad_norm = grad.norm();
            if (grad_norm < 1e-12 * d) {
                converged = true;
                break;
            }
            eta -= lr * grad;
        }
        if (!converged)
            throw NumericalError("simulate_lambda_steps: no convergence at k = " +
                                 std::to_string(k) + ", residual gradient norm " +
                                 std::to_string(grad_norm));

        LambdaStepResult res;
        res.k = k;
        res.converged_scales.assign(eta.data(), eta.data() + k);
        res.converged_loss = bt_loss_lambda(Uk * eta.asDiagonal() * Uk.transpose(), lambda);
        if (basis == ModeBasis::delocalized) {
            res.predicted_scale = optimal_delocalized_eigenvalue({d, lambda, k});
            res.predicted_loss = optimal_loss_at_k({d, lambda, k});
        } else {
            res.predicted_scale = 1.0;
            res.predicted_loss = static_cast<double>(d - k);
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace ssldyn

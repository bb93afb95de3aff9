#include "ssldyn/linear_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ssldyn/matrix_io.hpp"

namespace ssldyn {

void Trajectory::validate() const {
    if (times.size() != losses.size() ||
        static_cast<long>(times.size()) != eig_history.rows())
        throw InvalidInputError("Trajectory: inconsistent series lengths");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidInputError("Trajectory: times not strictly increasing");
    for (double l : losses)
        if (!(l >= 0.0)) throw InvalidInputError("Trajectory: negative loss");
}

void Trajectory::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "t,loss";
    for (long j = 0; j < eig_history.cols(); ++j) out << ",eig_" << (j + 1);
    out << "\n";
    for (size_t i = 0; i < times.size(); ++i) {
        out << format_double(times[i]) << "," << format_double(losses[i]);
        for (long j = 0; j < eig_history.cols(); ++j)
            out << "," << format_double(eig_history(static_cast<long>(i), j));
        out << "\n";
    }
}

double step_timescale(double gamma, double s0) {
    if (!(gamma > 0.0))
        throw InvalidInputError("step_timescale: gamma must be positive (no finite step time)");
    if (!(s0 > 0.0)) throw InvalidInputError("step_timescale: s0 must be positive");
    return -std::log(s0 * s0 * gamma) / (8.0 * gamma);
}

double singular_value_at(double gamma, double s0, double t) {
    if (!(s0 > 0.0)) throw InvalidInputError("singular_value_at: s0 must be positive");
    if (t == 0.0 || gamma == 0.0) return s0;
    const double x = 8.0 * gamma * t;
    const double inv_s0sq = 1.0 / (s0 * s0);
    if (x >= 0.0) {
        // 1 / sqrt(e^{-x} s0^{-2} + (1 - e^{-x}) gamma): no overflow for large x.
        const double emx = std::exp(-x);
        return 1.0 / std::sqrt(emx * inv_s0sq + (1.0 - emx) * gamma);
    }
    // gamma < 0: e^x <= 1, denominator = s0^{-2} + |gamma| (1 - e^x) > 0.
    const double ex = std::exp(x);
    return std::exp(0.5 * x) / std::sqrt(inv_s0sq + (ex - 1.0) * gamma);
}

Trajectory aligned_trajectory(const AlignedInit& init, const std::vector<double>& times,
                              const std::vector<double>& snapshot_times) {
    const long d = init.d();
    if (init.s0.size() != d || init.gammas.size() != d || init.eigvec_rows.rows() != d)
        throw InvalidInputError("aligned_trajectory: inconsistent init dimensions");
    if ((init.U * init.U.transpose() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidInputError("aligned_trajectory: U not orthogonal within 1e-10");

    Trajectory traj;
    traj.times = times;
    traj.losses.resize(times.size());
    traj.eig_history = Matrix(static_cast<long>(times.size()), d);
    for (size_t i = 0; i < times.size(); ++i) {
        double loss = 0.0;
        for (long j = 0; j < d; ++j) {
            const double s = singular_value_at(init.gammas[j], init.s0[j], times[i]);
            const double eig = init.gammas[j] * s * s;
            traj.eig_history(static_cast<long>(i), j) = eig;
            loss += (1.0 - eig) * (1.0 - eig);
        }
        traj.losses[i] = loss;
    }
    for (double ts : snapshot_times) {
        Vector s(d);
        for (long j = 0; j < d; ++j) s[j] = singular_value_at(init.gammas[j], init.s0[j], ts);
        traj.snapshots.emplace_back(ts, init.U * s.asDiagonal() * init.eigvec_rows);
    }
    traj.validate();
    return traj;
}

Matrix top_spectral_solution(const SpectralDecomposition& gamma_decomp, int d,
                             const Matrix* U) {
    const long m = gamma_decomp.eigenvalues.size();
    if (d < 0 || d > m) throw InvalidInputError("top_spectral_solution: d out of range");
    Vector s(d);
    for (int j = 0; j < d; ++j) {
        const double g = gamma_decomp.eigenvalues[j];
        s[j] = g > 0.0 ? 1.0 / std::sqrt(g) : 0.0;
    }
    Matrix W = s.asDiagonal() * gamma_decomp.top_rows(d);
    if (U) {
        if (U->rows() != d || U->cols() != d)
            throw InvalidInputError("top_spectral_solution: U must be d x d");
        W = (*U) * W;
    }
    return W;
}

double barlow_loss(const Matrix& W, const Matrix& Gamma) {
    if (W.cols() != Gamma.rows() || Gamma.rows() != Gamma.cols())
        throw InvalidInputError("barlow_loss: shapes do not conform");
    const long d = W.rows();
    Matrix C = W * Gamma * W.transpose();
    return (C - Matrix::Identity(d, d)).squaredNorm();
}

AlignedInit effective_aligned_init(const Matrix& W0,
                                   const SpectralDecomposition& gamma_decomp) {
    const long d = W0.rows();
    const long m = W0.cols();
    if (gamma_decomp.eigenvectors.rows() != m)
        throw InvalidInputError("effective_aligned_init: Gamma dimension mismatch");
    if (d > m) throw InvalidInputError("effective_aligned_init: d must be <= m");

    // Coordinates of W0 in the eigenbasis: column j is W0 v_j. QR of these
    // coordinates performs the Gram-Schmidt residual computation; R's diagonal
    // entries are the effective initial singular values.
    Matrix B = W0 * gamma_decomp.eigenvectors;
    Eigen::HouseholderQR<Matrix> qr(B);
    Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (long j = 0; j < d; ++j) {
        if (R(j, j) < 0) {
            R.row(j) = -R.row(j);
            Q.col(j) = -Q.col(j);
        }
    }

    const double diag_scale = R.diagonal().head(d).cwiseAbs().maxCoeff();
    for (long j = 0; j < d; ++j) {
        if (!(R(j, j) > 1e-12 * std::max(diag_scale, 1e-300)))
            throw NumericalError("effective_aligned_init: alignment failure at mode " +
                                 std::to_string(j + 1) +
                                 " (W0 deficient on the top-d eigenspace)");
    }

    AlignedInit init;
    init.U = Q;
    init.s0 = R.diagonal().head(d);
    init.eigvec_rows = gamma_decomp.top_rows(static_cast<int>(d));
    init.gammas = gamma_decomp.eigenvalues.head(d);
    init.degenerate_warning = gamma_decomp.degenerate;
    return init;
}

int loss_staircase(const std::vector<double>& taus, double t) {
    return static_cast<int>(std::count_if(taus.begin(), taus.end(),
                                          [t](double tau) { return tau > t; }));
}

}  // namespace ssldyn

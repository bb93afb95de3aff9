#include "ssldyn/gradient_flow.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "ssldyn/matrix_io.hpp"

namespace ssldyn {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("IntegratorConfig: dt must be positive");
    if (!(t_end > 0.0)) throw ConfigError("IntegratorConfig: t_end must be positive");
    if (!(dt < t_end)) throw ConfigError("IntegratorConfig: dt must be less than t_end");
    if (record_every < 1) throw ConfigError("IntegratorConfig: record_every must be >= 1");
}

namespace {

constexpr double kBlowUpNorm = 1e6;

// Descending eigenvalues of the symmetric part of C.
Vector descending_eigenvalues(const Matrix& C) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (C + C.transpose()),
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse();
}

template <typename Deriv>
Matrix rk4_step(const Matrix& W, double dt, const Deriv& f) {
    Matrix k1 = f(W);
    Matrix k2 = f(W + 0.5 * dt * k1);
    Matrix k3 = f(W + 0.5 * dt * k2);
    Matrix k4 = f(W + dt * k3);
    return W + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename Deriv, typename Record>
void run_fixed_step(Matrix state, const IntegratorConfig& cfg, const Deriv& f,
                    const Record& record) {
    const long n_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    size_t next_snapshot = 0;
    record(0.0, state, false);
    for (long step = 1; step <= n_steps; ++step) {
        if (cfg.method == IntegratorMethod::rk4_fixed)
            state = rk4_step(state, cfg.dt, f);
        else
            state = state + cfg.dt * f(state);
        const double t = static_cast<double>(step) * cfg.dt;
        if (!state.allFinite() || state.norm() > kBlowUpNorm)
            throw NumericalError("integration blow-up at t = " + std::to_string(t) +
                                 " (last stable t = " + std::to_string(t - cfg.dt) + ")");
        bool snapshot = false;
        while (next_snapshot < cfg.snapshot_times.size() &&
               cfg.snapshot_times[next_snapshot] <= t + 0.5 * cfg.dt) {
            snapshot = true;
            ++next_snapshot;
        }
        if (step % cfg.record_every == 0 || step == n_steps || snapshot)
            record(t, state, snapshot);
    }
}

}  // namespace

Trajectory integrate_W(const Matrix& W0, const Matrix& Gamma, const IntegratorConfig& cfg) {
    cfg.validate();
    if (W0.cols() != Gamma.rows() || Gamma.rows() != Gamma.cols())
        throw InvalidInputError("integrate_W: shapes do not conform");
    const long d = W0.rows();
    const Matrix I = Matrix::Identity(d, d);

    auto deriv = [&](const Matrix& W) -> Matrix {
        Matrix WG = W * Gamma;
        return -4.0 * (WG * W.transpose() - I) * WG;
    };

    Trajectory traj;
    traj.eig_history = Matrix(0, d);
    std::vector<Vector> eig_rows;
    run_fixed_step(W0, cfg, deriv, [&](double t, const Matrix& W, bool snapshot) {
        if (!traj.times.empty() && t <= traj.times.back()) return;
        Matrix C = W * Gamma * W.transpose();
        traj.times.push_back(t);
        traj.losses.push_back((C - I).squaredNorm());
        eig_rows.push_back(descending_eigenvalues(C));
        if (snapshot) traj.snapshots.emplace_back(t, W);
    });
    traj.eig_history = Matrix(static_cast<long>(eig_rows.size()), d);
    for (size_t i = 0; i < eig_rows.size(); ++i)
        traj.eig_history.row(static_cast<long>(i)) = eig_rows[i].transpose();
    traj.validate();
    return traj;
}

ATrace integrate_A(const AMatrixState& state0, const IntegratorConfig& cfg) {
    cfg.validate();
    const long d = state0.A.rows();
    const long m = state0.A.cols();
    if (state0.Lambda.size() != m)
        throw InvalidInputError("integrate_A: Lambda size must match A columns");
    if (!state0.A.allFinite()) throw InvalidInputError("integrate_A: non-finite A");
    for (long j = 0; j + 1 < m; ++j)
        if (state0.Lambda[j] < state0.Lambda[j + 1])
            throw InvalidInputError("integrate_A: Lambda must be descending");

    const Matrix I = Matrix::Identity(d, d);
    const auto& Lambda = state0.Lambda;
    auto deriv_exact = [&](const Matrix& A) -> Matrix {
        Matrix AL = A * Lambda.asDiagonal();
        return (I - AL * A.transpose()) * AL;
    };
    auto deriv_approx = [&](const Matrix& A) -> Matrix {
        Vector damp(d);
        for (long j = 0; j < d; ++j) damp[j] = 1.0 - Lambda[j] * A(j, j) * A(j, j);
        return damp.asDiagonal() * (A * Lambda.asDiagonal());
    };

    ATrace trace;
    auto record = [&](double t, const Matrix& A, bool) {
        if (!trace.times.empty() && t <= trace.times.back()) return;
        trace.times.push_back(t);
        trace.states.push_back(A);
    };
    if (state0.mode == AMatrixState::Mode::exact)
        run_fixed_step(state0.A, cfg, deriv_exact, record);
    else
        run_fixed_step(state0.A, cfg, deriv_approx, record);
    return trace;
}

void ATrace::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    if (states.empty()) throw InvalidInputError("ATrace: nothing to save");
    const long d = states.front().rows();
    const long m = states.front().cols();
    out << "t";
    for (long j = 0; j < d; ++j) out << ",s_" << (j + 1);
    for (long j = 0; j < d; ++j)
        for (long k = 0; k < m; ++k)
            if (j != k) out << ",a_" << (j + 1) << "_" << (k + 1);
    out << "\n";
    for (size_t i = 0; i < times.size(); ++i) {
        out << format_double(times[i]);
        const Matrix& A = states[i];
        for (long j = 0; j < d; ++j) out << "," << format_double(A(j, j));
        for (long j = 0; j < d; ++j)
            for (long k = 0; k < m; ++k)
                if (j != k) out << "," << format_double(A(j, k));
        out << "\n";
    }
}

double closed_form_a_jk(double a0, double gamma_j, double gamma_k, double s_j_ratio) {
    if (gamma_j == 0.0)
        throw InvalidInputError("closed_form_a_jk: gamma_j must be nonzero");
    if (!(s_j_ratio > 0.0))
        throw InvalidInputError("closed_form_a_jk: s_j_ratio must be positive");
    return a0 * std::pow(s_j_ratio, gamma_k / gamma_j);
}

std::vector<CriticalPoint> regularized_critical_points(
    const SpectralDecomposition& gamma_decomp, int d, double eps) {
    const int m = static_cast<int>(gamma_decomp.eigenvalues.size());
    if (m > 16) throw InvalidInputError("regularized_critical_points: enumeration bound m <= 16");
    if (d < 1 || d > m) throw InvalidInputError("regularized_critical_points: d out of range");
    if (!(eps > 0.0)) throw InvalidInputError("regularized_critical_points: eps must be positive");
    double min_positive = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (gamma_decomp.eigenvalues[i] > 0) min_positive =
            std::min(min_positive, gamma_decomp.eigenvalues[i]);
    if (std::isfinite(min_positive) && eps >= min_positive)
        throw InvalidInputError("regularized_critical_points: eps must be below the smallest "
                                "positive eigenvalue");

    std::vector<CriticalPoint> out;
    // Subsets of size d via bitmask enumeration.
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        if (__builtin_popcount(mask) != d) continue;
        std::vector<int> subset;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) subset.push_back(i);
        // Branch choice per mode: bit set selects the nonzero branch.
        for (unsigned branch = 0; branch < (1u << d); ++branch) {
            CriticalPoint cp;
            cp.subset = subset;
            bool feasible = true;
            for (int j = 0; j < d; ++j) {
                const double g = gamma_decomp.eigenvalues[subset[static_cast<size_t>(j)]];
                double s = 0.0;
                if (branch & (1u << j)) {
                    if (!(g > eps)) {
                        feasible = false;
                        break;
                    }
                    s = std::sqrt((g - eps) / (g * g));
                }
                cp.singular_values.push_back(s);
                const double eig = g * s * s;
                cp.loss += (1.0 - eig) * (1.0 - eig);
                cp.frob_sq += s * s;
            }
            if (!feasible) continue;
            cp.regularized_loss = cp.loss + eps * cp.frob_sq;
            out.push_back(std::move(cp));
        }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return a.regularized_loss < b.regularized_loss;
    });
    return out;
}

LandscapeProbeReport quartic_landscape_probe(const Matrix& A, const Matrix& B, int d,
                                             int trials, std::uint64_t seed) {
    const long m = A.rows();
    if (A.cols() != m || B.rows() != m || B.cols() != m)
        throw InvalidInputError("quartic_landscape_probe: A and B must be m x m");
    {
        SpectralDecomposition beig = sym_eigendecompose(B);
        if (beig.eigenvalues[beig.eigenvalues.size() - 1] <= 0.0)
            throw InvalidInputError("quartic_landscape_probe: B must be positive definite");
    }
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw InvalidInputError("quartic_landscape_probe: A must be symmetric");

    auto loss = [&](const Matrix& W) {
        Matrix M = W.transpose() * B * W;  // d x d
        return -(W.transpose() * A * W).trace() + (M * M).trace();
    };
    auto grad = [&](const Matrix& W) -> Matrix {
        return -2.0 * A * W + 4.0 * B * W * (W.transpose() * B * W);
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    LandscapeProbeReport report;

    for (int trial = 0; trial < trials; ++trial) {
        Matrix W(m, d);
        for (long i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j) W(i, j) = normal(rng);
        W *= 0.5 / std::sqrt(static_cast<double>(m));

        // Gradient descent with backtracking; robust across instance scales.
        double step = 1e-2;
        double L = loss(W);
        double L_window = L;
        const long max_iters = 2'000'000;
        for (long it = 0; it < max_iters; ++it) {
            Matrix G = grad(W);
            const double gnorm = G.norm();
            if (gnorm < 1e-10) break;
            Matrix W_new = W - step * G;
            double L_new = loss(W_new);
            if (L_new <= L) {
                W = std::move(W_new);
                L = L_new;
                step *= 1.1;
            } else {
                step *= 0.5;
                if (step < 1e-16)
                    throw NumericalError("quartic_landscape_probe: line search stalled");
            }
            if (it % 2000 == 1999) {
                if (std::abs(L_window - L) < 1e-14 * std::max(1.0, std::abs(L))) break;
                L_window = L;
            }
        }
        report.terminal_losses.push_back(L);
    }

    std::vector<double> sorted = report.terminal_losses;
    std::sort(sorted.begin(), sorted.end());
    for (double l : sorted) {
        if (report.distinct_loss_clusters.empty() ||
            l - report.distinct_loss_clusters.back() > 1e-6)
            report.distinct_loss_clusters.push_back(l);
    }
    return report;
}

}  // namespace ssldyn

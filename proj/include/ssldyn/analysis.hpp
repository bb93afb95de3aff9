#pragma once

#include <string>
#include <vector>

#include "ssldyn/linear_dynamics.hpp"
#include "ssldyn/spectral.hpp"

namespace ssldyn {

struct DetectedStep {
    int mode_index = 0;  // 1-based eigenvalue rank
    double step_time = 0.0;
    double final_eigenvalue = 0.0;
};

struct StepReport {
    std::vector<DetectedStep> steps;  // sorted ascending by step_time
    double fraction_used = 0.5;
    double noise_floor_used = 0.1;

    std::vector<double> step_times() const;
    /// JSON array of {mode_index, step_time, final_eigenvalue}.
    std::string to_json() const;
    void save_json(const std::string& path) const;
};

/// Normalized subspace alignment a(P, P') = (1/d) ||P P'^T||_F^2 for two d x N
/// matrices with orthonormal rows; 1 for identical spans, ~d/(2N) for random
/// d-dimensional subspaces of an N-dimensional ambient space.
double subspace_alignment(const Matrix& P, const Matrix& Pprime);

/// For each mode whose final eigenvalue clears the noise floor, the first time
/// its eigenvalue crosses fraction * final (linearly interpolated between
/// samples). Requires the trajectory to have settled: the last 5% of samples
/// of every reported mode vary by < 1%.
StepReport detect_steps(const Trajectory& traj, double fraction = 0.5,
                        double noise_floor = 0.1);

struct BandCounts {
    long below = 0;
    long between = 0;
    long above = 0;
};

/// Partition counts against [low, high); used to check that stepwise spectra
/// are bimodal (sparse middle band).
BandCounts eigenvalue_band_counts(const std::vector<double>& eigs, double low, double high);

}  // namespace ssldyn

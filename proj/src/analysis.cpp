#include "ssldyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ssldyn/errors.hpp"

namespace ssldyn {

std::vector<double> StepReport::step_times() const {
    std::vector<double> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.step_time);
    return out;
}

std::string StepReport::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : steps)
        arr.push_back({{"mode_index", s.mode_index},
                       {"step_time", s.step_time},
                       {"final_eigenvalue", s.final_eigenvalue}});
    nlohmann::json doc = {{"fraction", fraction_used},
                          {"noise_floor", noise_floor_used},
                          {"steps", arr}};
    return doc.dump(2);
}

void StepReport::save_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("StepReport::save_json: cannot open " + path);
    out << to_json() << '\n';
}

double subspace_alignment(const Matrix& P, const Matrix& Pprime) {
    if (P.cols() != Pprime.cols())
        throw InvalidInputError("subspace_alignment: ambient dimensions differ");
    if (P.rows() != Pprime.rows())
        throw InvalidInputError("subspace_alignment: subspace dimensions differ");
    const long d = P.rows();
    if (d < 1) throw InvalidInputError("subspace_alignment: empty subspace");
    const Matrix I = Matrix::Identity(d, d);
    if ((P * P.transpose() - I).cwiseAbs().maxCoeff() > 1e-8 ||
        (Pprime * Pprime.transpose() - I).cwiseAbs().maxCoeff() > 1e-8)
        throw InvalidInputError("subspace_alignment: rows must be orthonormal (within 1e-8)");
    return (P * Pprime.transpose()).squaredNorm() / static_cast<double>(d);
}

StepReport detect_steps(const Trajectory& traj, double fraction, double noise_floor) {
    traj.validate();
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidInputError("detect_steps: fraction must be in (0, 1)");
    const long T = static_cast<long>(traj.times.size());
    const long d = traj.eig_history.cols();
    if (T < 2) throw InvalidInputError("detect_steps: need at least two samples");

    StepReport report;
    report.fraction_used = fraction;
    report.noise_floor_used = noise_floor;

    const long tail_start = std::min<long>(T - 1, T - std::max<long>(2, T / 20));
    for (long j = 0; j < d; ++j) {
        const double final_val = traj.eig_history(T - 1, j);
        if (final_val < noise_floor) continue;

        // Settled check: the last 5% of samples vary by < 1% of the final value.
        for (long t = tail_start; t < T; ++t)
            if (std::abs(traj.eig_history(t, j) - final_val) > 0.01 * std::abs(final_val))
                throw NumericalError("detect_steps: mode " + std::to_string(j + 1) +
                                     " has not settled over the trailing window");

        const double threshold = fraction * final_val;
        for (long t = 0; t < T; ++t) {
            if (traj.eig_history(t, j) >= threshold) {
                double crossing = traj.times[t];
                if (t > 0) {
                    const double prev = traj.eig_history(t - 1, j);
                    const double cur = traj.eig_history(t, j);
                    if (cur > prev) {
                        const double frac = (threshold - prev) / (cur - prev);
                        crossing = traj.times[t - 1] +
                                   frac * (traj.times[t] - traj.times[t - 1]);
                    }
                }
                report.steps.push_back({static_cast<int>(j + 1), crossing, final_val});
                break;
            }
        }
    }
    std::sort(report.steps.begin(), report.steps.end(),
              [](const DetectedStep& a, const DetectedStep& b) {
                  return a.step_time < b.step_time;
              });
    return report;
}

BandCounts eigenvalue_band_counts(const std::vector<double>& eigs, double low, double high) {
    if (!(low < high)) throw InvalidInputError("eigenvalue_band_counts: need low < high");
    BandCounts counts;
    for (double e : eigs) {
        if (e < low)
            ++counts.below;
        else if (e < high)
            ++counts.between;
        else
            ++counts.above;
    }
    return counts;
}

}  // namespace ssldyn

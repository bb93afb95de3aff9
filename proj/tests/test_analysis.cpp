#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ssldyn/analysis.hpp"
#include "ssldyn/linear_dynamics.hpp"

using namespace ssldyn;

namespace {

Matrix random_orthonormal_rows(int d, int N, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix G(N, d);
    for (long i = 0; i < G.rows(); ++i)
        for (long j = 0; j < G.cols(); ++j) G(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(N, d);
    return Q.transpose();
}

AlignedInit make_aligned(const std::vector<double>& gammas, double s0_scale, int m) {
    const int d = static_cast<int>(gammas.size());
    AlignedInit init;
    init.U = Matrix::Identity(d, d);
    init.s0 = Vector::Constant(d, s0_scale);
    init.eigvec_rows = Matrix::Identity(d, m);
    init.gammas = Vector(d);
    for (int j = 0; j < d; ++j) init.gammas(j) = gammas[j];
    return init;
}

std::vector<double> uniform_times(double t_end, int count) {
    std::vector<double> ts(count);
    for (int i = 0; i < count; ++i) ts[i] = t_end * i / (count - 1);
    return ts;
}

}  // namespace

TEST_CASE("subspace alignment extremes") {
    Matrix P = random_orthonormal_rows(3, 10, 7);
    CHECK(subspace_alignment(P, P) == doctest::Approx(1.0).epsilon(1e-10));

    // Disjoint axis-aligned subspaces are orthogonal.
    Matrix A = Matrix::Zero(2, 6), B = Matrix::Zero(2, 6);
    A(0, 0) = A(1, 1) = 1.0;
    B(0, 2) = B(1, 3) = 1.0;
    CHECK(subspace_alignment(A, B) == doctest::Approx(0.0));
    CHECK(subspace_alignment(A, A) == doctest::Approx(1.0));
}

TEST_CASE("subspace alignment is symmetric and rotation invariant") {
    Matrix P = random_orthonormal_rows(4, 20, 1);
    Matrix Pp = random_orthonormal_rows(4, 20, 2);
    const double a = subspace_alignment(P, Pp);
    CHECK(a == doctest::Approx(subspace_alignment(Pp, P)).epsilon(1e-12));
    CHECK(a > 0.0);
    CHECK(a < 1.0);

    // Left-multiplying by an orthogonal matrix does not change the row span.
    Matrix R = random_orthonormal_rows(4, 4, 3);  // 4x4 orthogonal
    CHECK(subspace_alignment(R * P, Pp) == doctest::Approx(a).epsilon(1e-10));
    CHECK(subspace_alignment(P, R * Pp) == doctest::Approx(a).epsilon(1e-10));
}

TEST_CASE("subspace alignment input validation") {
    Matrix P = random_orthonormal_rows(3, 10, 11);
    CHECK_THROWS_AS(subspace_alignment(P, random_orthonormal_rows(3, 12, 11)),
                    InvalidInputError);
    CHECK_THROWS_AS(subspace_alignment(P, random_orthonormal_rows(2, 10, 11)),
                    InvalidInputError);
    Matrix bad = P;
    bad.row(0) *= 2.0;  // not unit norm
    CHECK_THROWS_AS(subspace_alignment(bad, P), InvalidInputError);
    Matrix bad2 = P;
    bad2.row(0) = bad2.row(1);  // not mutually orthogonal
    CHECK_THROWS_AS(subspace_alignment(bad2, P), InvalidInputError);
}

TEST_CASE("random 50-dim subspaces of a 2000-dim space align at about d/N") {
    const int d = 50, N = 2000, trials = 20;
    std::vector<double> vals;
    for (int t = 0; t < trials; ++t) {
        Matrix P = random_orthonormal_rows(d, N, 100 + 2 * t);
        Matrix Pp = random_orthonormal_rows(d, N, 101 + 2 * t);
        vals.push_back(subspace_alignment(P, Pp));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= trials;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= (trials - 1);
    const double se = std::sqrt(var / trials);
    CHECK(std::abs(mean - 0.025) < 3.0 * se + 1e-6);
}

TEST_CASE("detected steps on the closed-form trajectory match the timescales") {
    const std::vector<double> gammas = {4.0, 1.0, 0.25};
    AlignedInit init = make_aligned(gammas, 1e-6, 8);
    Trajectory traj = aligned_trajectory(init, uniform_times(40.0, 8001));

    StepReport report = detect_steps(traj);
    REQUIRE(report.steps.size() == 3);
    for (const auto& step : report.steps) {
        const int j = step.mode_index - 1;
        const double tau = step_timescale(gammas[j], 1e-6);
        CHECK(step.step_time == doctest::Approx(tau).epsilon(0.02));
        CHECK(step.final_eigenvalue == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Descending gammas with equal init scales step in order.
    auto times = report.step_times();
    for (size_t i = 0; i + 1 < times.size(); ++i) CHECK(times[i] < times[i + 1]);
    CHECK(report.steps.front().mode_index == 1);
    CHECK(report.steps.back().mode_index == 3);
}

TEST_CASE("single growing mode yields a single step") {
    AlignedInit init = make_aligned({1.0}, 1e-4, 4);
    Trajectory traj = aligned_trajectory(init, uniform_times(12.0, 2401));
    StepReport report = detect_steps(traj);
    REQUIRE(report.steps.size() == 1);
    CHECK(report.steps[0].mode_index == 1);
    CHECK(report.steps[0].step_time ==
          doctest::Approx(step_timescale(1.0, 1e-4)).epsilon(0.02));
}

TEST_CASE("modes that never grow produce no steps") {
    AlignedInit init = make_aligned({-0.5, -2.0}, 1e-3, 4);
    Trajectory traj = aligned_trajectory(init, uniform_times(10.0, 1001));
    StepReport report = detect_steps(traj);
    CHECK(report.steps.empty());
}

TEST_CASE("an unsettled trajectory is rejected") {
    AlignedInit init = make_aligned({1.0}, 1e-6, 4);
    // tau ~ 3.45; at t = 4 the eigenvalue is still climbing through ~0.99.
    Trajectory traj = aligned_trajectory(init, uniform_times(4.0, 801));
    CHECK_THROWS_AS(detect_steps(traj), NumericalError);
}

TEST_CASE("detect_steps argument validation") {
    AlignedInit init = make_aligned({1.0}, 1e-4, 4);
    Trajectory traj = aligned_trajectory(init, uniform_times(12.0, 1201));
    CHECK_THROWS_AS(detect_steps(traj, 0.0), InvalidInputError);
    CHECK_THROWS_AS(detect_steps(traj, 1.0), InvalidInputError);
    Trajectory tiny = aligned_trajectory(init, {0.0});
    CHECK_THROWS_AS(detect_steps(tiny), InvalidInputError);
}

TEST_CASE("eigenvalue band counts") {
    BandCounts zeros = eigenvalue_band_counts({0.0, 0.0, 0.0, 0.0}, 0.25, 0.75);
    CHECK(zeros.below == 4);
    CHECK(zeros.between == 0);
    CHECK(zeros.above == 0);

    // Mid-staircase the spectrum is bimodal: learned modes sit at 1, unlearned
    // near 0, and the middle band is empty.
    const std::vector<double> gammas = {4.0, 1.0, 0.01};
    AlignedInit init = make_aligned(gammas, 1e-6, 8);
    Trajectory traj = aligned_trajectory(init, {8.0});
    std::vector<double> eigs(traj.eig_history.cols());
    for (long j = 0; j < traj.eig_history.cols(); ++j) eigs[j] = traj.eig_history(0, j);
    BandCounts mid = eigenvalue_band_counts(eigs, 0.25, 0.75);
    CHECK(mid.below == 1);
    CHECK(mid.between == 0);
    CHECK(mid.above == 2);

    // Boundary convention: [low, high) half-open on both thresholds.
    BandCounts edge = eigenvalue_band_counts({0.25, 0.75}, 0.25, 0.75);
    CHECK(edge.below == 0);
    CHECK(edge.between == 1);
    CHECK(edge.above == 1);

    CHECK_THROWS_AS(eigenvalue_band_counts({1.0}, 0.5, 0.5), InvalidInputError);
}

TEST_CASE("step report JSON serialization") {
    StepReport report;
    report.steps = {{1, 1.5, 0.99}, {2, 3.25, 0.97}};
    nlohmann::json doc = nlohmann::json::parse(report.to_json());
    REQUIRE(doc["steps"].size() == 2);
    CHECK(doc["steps"][0]["mode_index"] == 1);
    CHECK(doc["steps"][0]["step_time"] == doctest::Approx(1.5));
    CHECK(doc["steps"][1]["final_eigenvalue"] == doctest::Approx(0.97));

    const std::string path = "step_report_test.json";
    report.save_json(path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(nlohmann::json::parse(buf.str()) == doc);
    std::remove(path.c_str());
}

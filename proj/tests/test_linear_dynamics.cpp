#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ssldyn/linear_dynamics.hpp"

using namespace ssldyn;

TEST_CASE("step timescale formula and edge cases") {
    // s0 = gamma^{-1/2} sits exactly at threshold.
    CHECK(step_timescale(4.0, 0.5) == doctest::Approx(0.0));
    CHECK(step_timescale(1.0, 1e-3) == doctest::Approx(1.7269388).epsilon(1e-6));
    // Monotone decreasing in gamma below threshold.
    CHECK(step_timescale(2.0, 1e-3) < step_timescale(1.0, 1e-3));
    // Past threshold the value goes negative rather than clamping.
    CHECK(step_timescale(1.0, 2.0) < 0.0);
    CHECK_THROWS_AS(step_timescale(-1.0, 0.1), InvalidInputError);
    CHECK_THROWS_AS(step_timescale(0.0, 0.1), InvalidInputError);
}

TEST_CASE("singular value closed form: fixed point, critical time, limits") {
    // gamma = 1, s0 = 1 is a fixed point.
    for (double t : {0.0, 0.5, 3.0, 100.0}) {
        CHECK(singular_value_at(1.0, 1.0, t) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // At the critical time, gamma * s^2 = 1/2 up to an O(s0^2) correction:
    // s(tau)^2 = 1 / (gamma (2 - gamma s0^2)).
    const double tau = step_timescale(1.0, 1e-3);
    CHECK(singular_value_at(1.0, 1e-3, tau) ==
          doctest::Approx(1.0 / std::sqrt(2.0 - 1e-6)).epsilon(1e-12));
    // Long-time limits: gamma^{-1/2} for gamma > 0, zero for gamma < 0.
    CHECK(singular_value_at(4.0, 0.123, 1e3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(singular_value_at(-1.0, 0.1, 1e3) == doctest::Approx(0.0));
    // t = 0 and gamma = 0 return s0 exactly.
    CHECK(singular_value_at(2.0, 0.37, 0.0) == 0.37);
    CHECK(singular_value_at(0.0, 0.37, 5.0) == 0.37);
    // No overflow at extreme gamma * t.
    CHECK(std::isfinite(singular_value_at(7.0, 1e-3, 100.0)));
    CHECK(std::isfinite(singular_value_at(-7.0, 1e-3, 100.0)));
}

TEST_CASE("singular value is monotone toward its limit") {
    double prev = singular_value_at(2.0, 1e-2, 0.0);
    for (double t = 0.25; t <= 10.0; t += 0.25) {
        double cur = singular_value_at(2.0, 1e-2, t);
        CHECK(cur >= prev);
        prev = cur;
    }
    prev = singular_value_at(-2.0, 0.3, 0.0);
    for (double t = 0.25; t <= 10.0; t += 0.25) {
        double cur = singular_value_at(-2.0, 0.3, t);
        CHECK(cur <= prev);
        prev = cur;
    }
}

namespace {

AlignedInit diagonal_init(const Vector& gammas, const Vector& s0, long m) {
    const long d = gammas.size();
    AlignedInit init;
    init.U = Matrix::Identity(d, d);
    init.s0 = s0;
    init.gammas = gammas;
    init.eigvec_rows = Matrix::Identity(d, m);
    return init;
}

}  // namespace

TEST_CASE("aligned trajectory reproduces the initialization and converges") {
    Vector gammas(2), s0(2);
    gammas << 1.0, 0.5;
    s0 << 1e-3, 2e-3;
    AlignedInit init = diagonal_init(gammas, s0, 4);

    std::vector<double> times = {0.0, 1.0, 5.0, 50.0};
    Trajectory traj = aligned_trajectory(init, times, {0.0, 50.0});
    REQUIRE(traj.snapshots.size() == 2);
    CHECK((traj.snapshots[0].second - init.weight0()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(traj.losses.back() < 1e-8);  // all gammas positive: loss -> 0
    // Eigenvalues stay in [0, 1] for positive gammas and small s0.
    CHECK(traj.eig_history.minCoeff() >= 0.0);
    CHECK(traj.eig_history.maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("single-mode loss crosses 0.25 at the critical time") {
    Vector gammas(1), s0(1);
    gammas << 1.0;
    s0 << 1e-3;
    AlignedInit init = diagonal_init(gammas, s0, 1);
    const double tau = step_timescale(1.0, 1e-3);
    // Loss = (1 - gamma s^2)^2 = 0.25 exactly at tau; bisect the 0.25 crossing.
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        Trajectory t = aligned_trajectory(init, {mid});
        (t.losses[0] > 0.25 ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - tau) < 0.02 * tau);
}

TEST_CASE("top spectral solution on a diagonal gamma") {
    Matrix G = Matrix::Zero(3, 3);
    G(0, 0) = 4.0;
    G(1, 1) = 1.0;
    G(2, 2) = 0.25;
    auto dec = sym_eigendecompose(G);
    Matrix W = top_spectral_solution(dec, 2);
    Matrix expected(2, 3);
    expected << 0.5, 0, 0, 0, 1, 0;
    CHECK((W - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(barlow_loss(W, G) < 1e-12);

    Matrix Gneg = -G;
    auto dec_neg = sym_eigendecompose(Gneg);
    CHECK(top_spectral_solution(dec_neg, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("barlow loss basics") {
    Matrix G = Matrix::Identity(3, 3);
    Matrix W0 = Matrix::Zero(2, 3);
    CHECK(barlow_loss(W0, G) == doctest::Approx(2.0));  // equals d at W = 0

    // Aligned W: loss equals the modewise sum.
    Vector gammas(2), s0(2);
    gammas << 2.0, 0.5;
    s0 << 0.3, 0.4;
    AlignedInit init = diagonal_init(gammas, s0, 3);
    Matrix Gd = Matrix::Zero(3, 3);
    Gd(0, 0) = 2.0;
    Gd(1, 1) = 0.5;
    Gd(2, 2) = 0.1;
    double expected = 0.0;
    for (int j = 0; j < 2; ++j) {
        const double e = gammas[j] * s0[j] * s0[j];
        expected += (1.0 - e) * (1.0 - e);
    }
    CHECK(barlow_loss(init.weight0(), Gd) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(barlow_loss(Matrix::Zero(2, 3), Matrix::Zero(4, 4)), InvalidInputError);
}

TEST_CASE("effective aligned init is idempotent on aligned weights") {
    Matrix G = Matrix::Zero(4, 4);
    G(0, 0) = 3.0;
    G(1, 1) = 1.5;
    G(2, 2) = 0.5;
    G(3, 3) = 0.1;
    auto dec = sym_eigendecompose(G);

    const double c = std::cos(0.7), s = std::sin(0.7);
    Matrix U(2, 2);
    U << c, -s, s, c;
    Vector s0(2);
    s0 << 1e-3, 5e-4;
    Matrix W0 = U * s0.asDiagonal() * dec.top_rows(2);

    AlignedInit init = effective_aligned_init(W0, dec);
    CHECK((init.U - U).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((init.s0 - s0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((init.weight0() - W0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("effective aligned init: d = 1 reduces to a projection norm") {
    Matrix G = Matrix::Zero(3, 3);
    G(0, 0) = 2.0;
    G(1, 1) = 1.0;
    G(2, 2) = 0.5;
    auto dec = sym_eigendecompose(G);
    Matrix W0(1, 3);
    W0 << 0.3, -0.2, 0.1;
    AlignedInit init = effective_aligned_init(W0, dec);
    const Vector v1 = dec.eigenvectors.col(0);
    CHECK(init.s0[0] == doctest::Approx(std::abs(W0.row(0).dot(v1))).epsilon(1e-12));
}

TEST_CASE("effective aligned init statistics: s0_j ~ sigma sqrt(d - j + 1)") {
    Matrix G = Matrix::Zero(10, 10);
    for (int i = 0; i < 10; ++i) G(i, i) = 2.0 * std::pow(0.8, i);
    auto dec = sym_eigendecompose(G);
    const int d = 4;
    const double sigma = 1e-5;
    const int trials = 400;
    Vector mean_sq = Vector::Zero(d);
    std::mt19937_64 rng(123);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < trials; ++trial) {
        Matrix W0(d, 10);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < 10; ++j) W0(i, j) = sigma * normal(rng);
        AlignedInit init = effective_aligned_init(W0, dec);
        for (int j = 0; j < d; ++j) mean_sq[j] += init.s0[j] * init.s0[j];
    }
    mean_sq /= trials;
    // Mode j (1-indexed) is a chi-distributed residual with d - j + 1 degrees
    // of freedom, so E[s0_j^2] = sigma^2 (d - j + 1).
    for (int j = 0; j < d; ++j) {
        const double pred = sigma * sigma * static_cast<double>(d - j);
        CHECK(mean_sq[j] == doctest::Approx(pred).epsilon(0.25));
    }
}

TEST_CASE("effective aligned init names the deficient mode") {
    Matrix G = Matrix::Zero(3, 3);
    G(0, 0) = 2.0;
    G(1, 1) = 1.0;
    G(2, 2) = 0.5;
    auto dec = sym_eigendecompose(G);
    Matrix W0(2, 3);
    W0 << 1e-3, 0, 0, 2e-3, 0, 0;  // both rows on the top eigenvector only
    try {
        effective_aligned_init(W0, dec);
        FAIL("expected an alignment failure");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("mode 2") != std::string::npos);
    }
}

TEST_CASE("loss staircase counts unlearned modes") {
    std::vector<double> taus = {1.0, 2.0, 3.0};
    CHECK(loss_staircase(taus, 0.0) == 3);
    CHECK(loss_staircase(taus, 2.5) == 1);
    CHECK(loss_staircase(taus, 10.0) == 0);
}

TEST_CASE("staircase matches the rounded closed-form loss between steps") {
    // Well-separated gammas so plateaus are flat.
    Vector gammas(3), s0(3);
    gammas << 4.0, 1.0, 0.25;
    s0 << 1e-6, 1e-6, 1e-6;
    AlignedInit init = diagonal_init(gammas, s0, 3);
    std::vector<double> taus;
    for (int j = 0; j < 3; ++j) taus.push_back(step_timescale(gammas[j], s0[j]));
    const double delta = 1.0 / (2.0 * gammas[2]);
    for (double t = 0.0; t < taus.back() + 20.0; t += 0.37) {
        bool near_step = false;
        for (double tau : taus)
            if (std::abs(t - tau) < delta) near_step = true;
        if (near_step) continue;
        Trajectory traj = aligned_trajectory(init, {std::max(t, 1e-12)});
        CHECK(loss_staircase(taus, t) == doctest::Approx(std::round(traj.losses[0])));
    }
}

TEST_CASE("Frobenius minimality across zero-loss spectral subsets") {
    Matrix G = Matrix::Zero(3, 3);
    G(0, 0) = 4.0;
    G(1, 1) = 1.0;
    G(2, 2) = 0.25;
    auto dec = sym_eigendecompose(G);
    // Enumerate all 2-subsets of positive eigenvalues.
    double best = 1e300;
    int best_mask = -1;
    for (int mask = 0; mask < 8; ++mask) {
        if (__builtin_popcount(mask) != 2) continue;
        double frob_sq = 0.0;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) frob_sq += 1.0 / dec.eigenvalues[i];
        if (frob_sq < best) {
            best = frob_sq;
            best_mask = mask;
        }
    }
    CHECK(best_mask == 0b011);  // top-two subset
    CHECK(best == doctest::Approx(1.25));
    // The competing {4, 0.25} subset is strictly worse.
    CHECK(1.0 / 4.0 + 1.0 / 0.25 == doctest::Approx(4.25));
}

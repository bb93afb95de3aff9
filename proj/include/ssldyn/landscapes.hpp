#pragma once

#include <string>
#include <vector>

#include "ssldyn/spectral.hpp"

namespace ssldyn {

enum class PotentialVariant {
    quartic,               // (1 - gamma s^2)^2
    supervised_quadratic,  // (target - gamma c)^2 in the eigencoefficient c
    sqrt_sharpened,        // (1 - g_sqrt(gamma s^2))^2, g_sqrt(x) = sign(x) sqrt(|x|)
    smoothed_min,          // (1 - min(gamma s^2, 1))^2
    quartic_flat           // (1 - gamma s^2)^4
};

/// One-dimensional modewise loss shape. Time units follow the plain
/// convention s' = -dV/ds (no factor-4 reparameterization).
struct ModewisePotential {
    PotentialVariant variant = PotentialVariant::quartic;
    double gamma = 1.0;
    double target = 1.0;  // only used by supervised_quadratic
};

/// Value and analytic gradient at s. The sqrt variant's subgradient at
/// exactly 0 is defined as 0.
std::pair<double, double> potential_value_and_grad(const ModewisePotential& p, double s);

struct EscapeResult {
    bool escaped = false;
    double time = 0.0;  // elapsed flow time if escaped
};

/// Integrate s' = -dV/ds from the rescaled coordinate s_bar(0) = s0 until
/// |s_bar| = sqrt(gamma) |s| reaches eps_ball. s0 and eps_ball are both in
/// the s_bar variable. Returns escaped = false if the budget runs out
/// (e.g. attractive gamma < 0).
EscapeResult escape_time(const ModewisePotential& p, double s0, double eps_ball, double dt,
                         double time_budget = 1e6);

/// Discrete-gradient-descent stability bound 2 / V''(s*) at the potential's
/// minimum; +infinity for flat minima (smoothed_min basin, quartic_flat).
double stability_threshold(const ModewisePotential& p);

/// grad_F (F^T F + eps I_d)^{-1}: suppresses the gradient along directions of
/// large embedding variance.
Matrix precondition_gradient(const Matrix& grad_F, const Matrix& F, double eps);

struct SpeedupRow {
    PotentialVariant variant;
    double gamma = 0.0;
    double s0 = 0.0;
    EscapeResult escape;
    EscapeResult converge;  // time to within 1% of the minimum position
    double stability = 0.0;
};

/// Escape and convergence times per (variant, gamma) at a fixed init scale.
std::vector<SpeedupRow> compare_speedups(const std::vector<double>& gammas, double s0,
                                         const std::vector<PotentialVariant>& variants,
                                         double dt, double time_budget);

std::string variant_name(PotentialVariant v);

/// CSV "variant,gamma,s0,escape_time,converge_time,stability_threshold".
void save_speedup_csv(const std::vector<SpeedupRow>& rows, const std::string& path);

}  // namespace ssldyn

#include "ssldyn/landscapes.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "ssldyn/errors.hpp"

namespace ssldyn {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::pair<double, double> potential_value_and_grad(const ModewisePotential& p, double s) {
    const double g = p.gamma;
    const double gs2 = g * s * s;
    switch (p.variant) {
        case PotentialVariant::quartic: {
            const double r = 1.0 - gs2;
            return {r * r, -4.0 * r * g * s};
        }
        case PotentialVariant::supervised_quadratic: {
            // Quadratic in the coefficient itself, not its square.
            const double r = p.target - g * s;
            return {r * r, -2.0 * r * g};
        }
        case PotentialVariant::sqrt_sharpened: {
            // g_sqrt(x) = sign(x) sqrt(|x|); subgradient at s = 0 taken as 0.
            const double x = gs2;
            const double r = 1.0 - sign_of(x) * std::sqrt(std::abs(x));
            if (s == 0.0) return {r * r, 0.0};
            // d/ds g_sqrt(gamma s^2) = g_sqrt(gamma) * sign(s) for all s != 0.
            const double dg = sign_of(g) * std::sqrt(std::abs(g)) * sign_of(s);
            return {r * r, -2.0 * r * dg};
        }
        case PotentialVariant::smoothed_min: {
            if (gs2 >= 1.0) return {0.0, 0.0};
            const double r = 1.0 - gs2;
            return {r * r, -4.0 * r * g * s};
        }
        case PotentialVariant::quartic_flat: {
            const double r = 1.0 - gs2;
            const double r3 = r * r * r;
            return {r3 * r, -8.0 * r3 * g * s};
        }
    }
    throw InvalidInputError("potential_value_and_grad: unknown variant");
}

EscapeResult escape_time(const ModewisePotential& p, double s0, double eps_ball, double dt,
                         double time_budget) {
    if (!(dt > 0.0)) throw ConfigError("escape_time: dt must be positive");
    if (!(time_budget > 0.0)) throw ConfigError("escape_time: time_budget must be positive");
    if (!(eps_ball > 0.0)) throw ConfigError("escape_time: eps_ball must be positive");
    if (!(std::abs(s0) < eps_ball))
        throw InvalidInputError("escape_time: |s0| must start inside the eps ball");

    // s0 and eps_ball live in the rescaled coordinate s_bar = sqrt(gamma) s,
    // so repulsive strength is comparable across gamma. For gamma <= 0 there
    // is no rescaling to do and no escape: report a budget exhaustion.
    const double scale = p.gamma > 0.0 ? 1.0 / std::sqrt(p.gamma) : 1.0;
    double s = s0 * scale;
    double t = 0.0;
    double prev_sbar = std::abs(s0);
    while (t < time_budget) {
        const double grad = potential_value_and_grad(p, s).second;
        const double s_next = s - dt * grad;
        const double sbar_next = std::abs(s_next) / scale;
        if (sbar_next >= eps_ball) {
            // Linear interpolation of the crossing within the step.
            const double frac =
                sbar_next > prev_sbar ? (eps_ball - prev_sbar) / (sbar_next - prev_sbar) : 1.0;
            return {true, t + frac * dt};
        }
        s = s_next;
        prev_sbar = sbar_next;
        t += dt;
    }
    return {false, time_budget};
}

double stability_threshold(const ModewisePotential& p) {
    const double inf = std::numeric_limits<double>::infinity();
    const double g = p.gamma;
    switch (p.variant) {
        case PotentialVariant::quartic:
            // Minimum at gamma s^2 = 1 with V'' = 8 gamma.
            if (g <= 0.0) return inf;
            return 2.0 / (8.0 * g);
        case PotentialVariant::supervised_quadratic:
            if (g == 0.0) return inf;
            return 2.0 / (2.0 * g * g);
        case PotentialVariant::sqrt_sharpened: {
            // V(s) = (1 - sqrt(gamma)|s|)^2 for s > 0: V'' = 2 gamma, constant.
            if (g <= 0.0) return inf;
            return 2.0 / (2.0 * g);
        }
        case PotentialVariant::smoothed_min:
        case PotentialVariant::quartic_flat:
            // Flat (zero-curvature) minima: no finite curvature bound.
            return inf;
    }
    throw InvalidInputError("stability_threshold: unknown variant");
}

Matrix precondition_gradient(const Matrix& grad_F, const Matrix& F, double eps) {
    if (grad_F.cols() != F.cols())
        throw InvalidInputError("precondition_gradient: grad_F and F need equal column counts");
    if (!(eps > 0.0)) throw ConfigError("precondition_gradient: eps must be positive");
    const long d = F.cols();
    Matrix G = F.transpose() * F + eps * Matrix::Identity(d, d);
    return G.ldlt().solve(grad_F.transpose()).transpose();
}

std::vector<SpeedupRow> compare_speedups(const std::vector<double>& gammas, double s0,
                                         const std::vector<PotentialVariant>& variants,
                                         double dt, double time_budget) {
    std::vector<SpeedupRow> rows;
    for (PotentialVariant v : variants) {
        for (double g : gammas) {
            ModewisePotential p{v, g, 1.0};
            SpeedupRow row;
            row.variant = v;
            row.gamma = g;
            row.s0 = s0;
            row.escape = escape_time(p, s0, 0.1, dt, time_budget);
            // Convergence: reach within 1% of the rescaled minimum s_bar = 1.
            row.converge = escape_time(p, s0, 0.99, dt, time_budget);
            row.stability = stability_threshold(p);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string variant_name(PotentialVariant v) {
    switch (v) {
        case PotentialVariant::quartic: return "quartic";
        case PotentialVariant::supervised_quadratic: return "supervised_quadratic";
        case PotentialVariant::sqrt_sharpened: return "sqrt_sharpened";
        case PotentialVariant::smoothed_min: return "smoothed_min";
        case PotentialVariant::quartic_flat: return "quartic_flat";
    }
    throw InvalidInputError("variant_name: unknown variant");
}

void save_speedup_csv(const std::vector<SpeedupRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("save_speedup_csv: cannot open " + path);
    out << "variant,gamma,s0,escape_time,converge_time,stability_threshold\n";
    out.precision(17);
    for (const auto& r : rows) {
        out << variant_name(r.variant) << ',' << r.gamma << ',' << r.s0 << ','
            << (r.escape.escaped ? r.escape.time : std::numeric_limits<double>::infinity())
            << ','
            << (r.converge.escaped ? r.converge.time : std::numeric_limits<double>::infinity())
            << ',' << r.stability << '\n';
    }
}

}  // namespace ssldyn

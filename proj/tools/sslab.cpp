// sslab: config-driven experiment runner over the ssldyn library.
//
// Subcommands: simulate-linear, kernel-predict, lambda-sweep, speedup-compare,
// landscape-probe, align-compare. Each reads an optional flat JSON config,
// echoes the resolved parameters into <out>/manifest.json, and writes its
// CSV/JSON artifacts into the per-run output directory. Exit codes: 0 success,
// 2 validation/config error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssldyn/analysis.hpp"
#include "ssldyn/dataset.hpp"
#include "ssldyn/errors.hpp"
#include "ssldyn/gradient_flow.hpp"
#include "ssldyn/kernel.hpp"
#include "ssldyn/lambda_effects.hpp"
#include "ssldyn/landscapes.hpp"
#include "ssldyn/linear_dynamics.hpp"
#include "ssldyn/matrix_io.hpp"
#include "ssldyn/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssldyn;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object: " + path);
    return cfg;
}

// Overlay user config onto defaults; reject unknown keys so typos surface.
json resolve_config(const json& defaults, const json& user) {
    json out = defaults;
    for (const auto& [key, value] : user.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown config key: " + key);
        out[key] = value;
    }
    return out;
}

void write_manifest(const fs::path& dir, const std::string& command, std::uint64_t seed,
                    const json& resolved, const std::vector<std::string>& outputs) {
    json manifest = {{"command", command},
                     {"seed", seed},
                     {"config", resolved},
                     {"outputs", outputs}};
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

Vector geometric_spectrum(long m, double base, double ratio) {
    Vector s(m);
    double v = base;
    for (long j = 0; j < m; ++j, v *= ratio) s[j] = v;
    return s;
}

Vector spectrum_from_config(const json& cfg, long m) {
    if (cfg.contains("spectrum") && !cfg["spectrum"].is_null()) {
        auto vals = cfg["spectrum"].get<std::vector<double>>();
        if (static_cast<long>(vals.size()) != m)
            throw ConfigError("spectrum length must equal m");
        return Eigen::Map<const Vector>(vals.data(), m);
    }
    return geometric_spectrum(m, cfg["spectrum_base"].get<double>(),
                              cfg["spectrum_ratio"].get<double>());
}

Matrix gaussian_matrix(long rows, long cols, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) M(i, j) = scale * normal(rng);
    return M;
}

// Orthonormal row basis of the row space of a full-row-rank d x N matrix.
Matrix orthonormal_rows(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinV);
    return svd.matrixV().transpose();
}

std::vector<double> linspace(double t0, double t1, long count) {
    std::vector<double> out;
    out.reserve(count);
    for (long i = 0; i < count; ++i)
        out.push_back(t0 + (t1 - t0) * static_cast<double>(i) / (count - 1));
    return out;
}

// ---------------------------------------------------------------------------

int cmd_simulate_linear(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {
        {"n", 100},        {"m", 50},       {"d", 8},
        {"alpha", 1e-6},   {"sigma_aug", 0.05}, {"spectrum", nullptr},
        {"spectrum_base", 2.0}, {"spectrum_ratio", 0.6},
        {"dt", 0.005},     {"t_end", 90.0}, {"record_every", 20}};
    json cfg = resolve_config(defaults, user);

    const long n = cfg["n"], m = cfg["m"];
    const int d = cfg["d"];
    const double alpha = cfg["alpha"];
    if (alpha <= 0.0) throw ConfigError("alpha must be positive (degenerate init otherwise)");

    auto ds = generate_synthetic_pairs(n, m, spectrum_from_config(cfg, m),
                                       AdditiveNoise{cfg["sigma_aug"].get<double>()}, seed);
    Matrix Gamma = compute_gamma(ds);
    auto decomp = sym_eigendecompose(Gamma);
    Matrix W0 = gaussian_matrix(d, m, alpha, seed + 1);
    AlignedInit init = effective_aligned_init(W0, decomp);

    IntegratorConfig icfg;
    icfg.dt = cfg["dt"];
    icfg.t_end = cfg["t_end"];
    icfg.record_every = cfg["record_every"];
    Trajectory integrated = integrate_W(W0, Gamma, icfg);
    Trajectory predicted = aligned_trajectory(init, integrated.times);

    integrated.save_csv((dir / "trajectory.csv").string());
    predicted.save_csv((dir / "prediction.csv").string());

    StepReport steps = detect_steps(integrated);
    steps.save_json((dir / "steps.json").string());

    double max_eig_dev = (integrated.eig_history - predicted.eig_history).cwiseAbs().maxCoeff();
    double max_loss_dev = 0.0;
    for (size_t i = 0; i < integrated.losses.size(); ++i)
        max_loss_dev = std::max(max_loss_dev,
                                std::abs(integrated.losses[i] - predicted.losses[i]));
    json summary = {{"max_eigenvalue_deviation", max_eig_dev},
                    {"max_loss_deviation", max_loss_dev},
                    {"detected_steps", steps.steps.size()},
                    {"degenerate_spectrum", init.degenerate_warning}};
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

    write_manifest(dir, "simulate-linear", seed, cfg,
                   {"trajectory.csv", "prediction.csv", "steps.json", "summary.json"});
    return 0;
}

int cmd_kernel_predict(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {{"n", 15},  {"m", 30}, {"d", 4},
                           {"sigma_aug", 0.05}, {"spectrum", nullptr},
                           {"spectrum_base", 2.0}, {"spectrum_ratio", 0.7}};
    json cfg = resolve_config(defaults, user);

    const long n = cfg["n"], m = cfg["m"];
    const int d = cfg["d"];
    auto ds = generate_synthetic_pairs(n, m, spectrum_from_config(cfg, m),
                                       AdditiveNoise{cfg["sigma_aug"].get<double>()}, seed);
    Matrix Gamma = compute_gamma(ds);
    auto gdec = sym_eigendecompose(Gamma);
    Matrix W_explicit = top_spectral_solution(gdec, d);

    KernelBundle bundle = linear_kernel_bundle(ds);
    ContrastiveKernel ck = build_contrastive_kernel(bundle);
    Matrix coeff = prediction_coefficients(ck, bundle, d);

    // Train-set predictions for all 2n points: kernel rows are rows of Ktilde.
    Matrix F_kernel = (coeff * bundle.Ktilde).transpose();  // 2n x d
    Matrix stacked(2 * n, m);
    stacked << ds.X, ds.Xprime;
    Matrix F_explicit = stacked * W_explicit.transpose();  // 2n x d

    const double alignment = subspace_alignment(orthonormal_rows(F_kernel.transpose()),
                                                orthonormal_rows(F_explicit.transpose()));
    CrossCorrelation cc =
        compute_cross_correlation(F_kernel.topRows(n), F_kernel.bottomRows(n));
    const double cc_dev = (cc.C - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();

    save_matrix_csv(F_kernel, (dir / "predicted_embeddings.csv").string());
    save_matrix_csv(F_explicit, (dir / "explicit_embeddings.csv").string());
    json summary = {{"alignment_to_explicit_oracle", alignment},
                    {"cross_correlation_identity_deviation", cc_dev}};
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

    write_manifest(dir, "kernel-predict", seed, cfg,
                   {"predicted_embeddings.csv", "explicit_embeddings.csv", "summary.json"});
    return 0;
}

int cmd_lambda_sweep(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {{"d", 8},
                           {"lambdas", std::vector<double>{1.0, 0.1, 0.0051}},
                           {"k_max", 0},  // 0 means d
                           {"steps", 2000000},
                           {"basis", "delocalized"}};
    json cfg = resolve_config(defaults, user);
    const int d = cfg["d"];
    const int k_max = cfg["k_max"].get<int>() > 0 ? cfg["k_max"].get<int>() : d;
    const std::string basis_name = cfg["basis"];
    if (basis_name != "delocalized" && basis_name != "axis_aligned")
        throw ConfigError("basis must be 'delocalized' or 'axis_aligned'");
    const ModeBasis basis =
        basis_name == "delocalized" ? ModeBasis::delocalized : ModeBasis::axis_aligned;

    double max_loss_rel = 0.0, max_scale_rel = 0.0;
    std::vector<std::string> outputs;
    for (double lambda : cfg["lambdas"].get<std::vector<double>>()) {
        const std::string fname = "sweep_lambda=" + std::to_string(lambda) + ".csv";
        std::ofstream csv(dir / fname);
        csv.precision(17);
        csv << "k,predicted_eig,simulated_eig,predicted_loss,simulated_loss\n";
        auto results = simulate_lambda_steps(d, lambda, k_max, 0.0,
                                             cfg["steps"].get<long>(), seed, basis);
        for (const auto& r : results) {
            double mean_scale = 0.0;
            for (double s : r.converged_scales) mean_scale += s;
            mean_scale /= r.converged_scales.size();
            csv << r.k << ',' << r.predicted_scale << ',' << mean_scale << ','
                << r.predicted_loss << ',' << r.converged_loss << '\n';
            if (r.predicted_loss > 0)
                max_loss_rel = std::max(max_loss_rel,
                                        std::abs(r.converged_loss - r.predicted_loss) /
                                            r.predicted_loss);
            max_scale_rel = std::max(max_scale_rel,
                                     std::abs(mean_scale - r.predicted_scale) /
                                         r.predicted_scale);
        }
        outputs.push_back(fname);
    }
    json summary = {{"max_relative_loss_error", max_loss_rel},
                    {"max_relative_scale_error", max_scale_rel}};
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
    outputs.push_back("summary.json");
    write_manifest(dir, "lambda-sweep", seed, cfg, outputs);
    return 0;
}

int cmd_speedup_compare(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {{"gammas", std::vector<double>{1.0, 0.01}},
                           {"s0", 1e-6},
                           {"dt", 0.01},
                           {"time_budget", 20000.0},
                           {"variants",
                            std::vector<std::string>{"quartic", "supervised_quadratic",
                                                     "sqrt_sharpened", "smoothed_min",
                                                     "quartic_flat"}}};
    json cfg = resolve_config(defaults, user);
    std::vector<PotentialVariant> variants;
    for (const std::string& name : cfg["variants"].get<std::vector<std::string>>()) {
        if (name == "quartic") variants.push_back(PotentialVariant::quartic);
        else if (name == "supervised_quadratic")
            variants.push_back(PotentialVariant::supervised_quadratic);
        else if (name == "sqrt_sharpened") variants.push_back(PotentialVariant::sqrt_sharpened);
        else if (name == "smoothed_min") variants.push_back(PotentialVariant::smoothed_min);
        else if (name == "quartic_flat") variants.push_back(PotentialVariant::quartic_flat);
        else throw ConfigError("unknown variant: " + name);
    }
    auto rows = compare_speedups(cfg["gammas"].get<std::vector<double>>(), cfg["s0"],
                                 variants, cfg["dt"], cfg["time_budget"]);
    save_speedup_csv(rows, (dir / "speedups.csv").string());
    write_manifest(dir, "speedup-compare", seed, cfg, {"speedups.csv"});
    return 0;
}

int cmd_landscape_probe(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {{"m", 4}, {"d", 2}, {"trials", 50}};
    json cfg = resolve_config(defaults, user);
    const long m = cfg["m"];

    Matrix Araw = gaussian_matrix(m, m, 1.0, seed);
    Matrix A = 0.5 * (Araw + Araw.transpose());
    Matrix Braw = gaussian_matrix(m, m, 1.0, seed + 1);
    Matrix B = Braw * Braw.transpose() + 0.1 * Matrix::Identity(m, m);

    auto report = quartic_landscape_probe(A, B, cfg["d"], cfg["trials"], seed + 2);
    double spread = 0.0;
    if (!report.terminal_losses.empty()) {
        auto [lo, hi] = std::minmax_element(report.terminal_losses.begin(),
                                            report.terminal_losses.end());
        spread = *hi - *lo;
    }
    json summary = {{"terminal_losses", report.terminal_losses},
                    {"distinct_clusters", report.distinct_loss_clusters},
                    {"cluster_count", report.distinct_loss_clusters.size()},
                    {"loss_spread", spread}};
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
    write_manifest(dir, "landscape-probe", seed, cfg, {"summary.json"});
    return 0;
}

int cmd_align_compare(const json& user, std::uint64_t seed, fs::path dir) {
    const json defaults = {{"n", 60},  {"m", 30}, {"d", 5},
                           {"alphas", std::vector<double>{1e-4, 1e-6}},
                           {"sigma_aug", 0.05}, {"spectrum", nullptr},
                           {"spectrum_base", 2.0}, {"spectrum_ratio", 0.7},
                           {"dt", 0.005}, {"t_end", 40.0}, {"snapshot_count", 50}};
    json cfg = resolve_config(defaults, user);

    const long n = cfg["n"], m = cfg["m"];
    const int d = cfg["d"];
    auto ds = generate_synthetic_pairs(n, m, spectrum_from_config(cfg, m),
                                       AdditiveNoise{cfg["sigma_aug"].get<double>()}, seed);
    Matrix Gamma = compute_gamma(ds);
    auto decomp = sym_eigendecompose(Gamma);
    Matrix W0_unit = gaussian_matrix(d, m, 1.0, seed + 1);

    std::ofstream csv(dir / "alpha_sweep.csv");
    csv.precision(17);
    csv << "alpha,max_deviation\n";
    std::vector<double> deviations;
    for (double alpha : cfg["alphas"].get<std::vector<double>>()) {
        if (alpha <= 0.0) throw ConfigError("alphas must be positive");
        Matrix W0 = alpha * W0_unit;
        AlignedInit init = effective_aligned_init(W0, decomp);

        IntegratorConfig icfg;
        icfg.dt = cfg["dt"];
        icfg.t_end = cfg["t_end"];
        icfg.record_every = 1000000;  // snapshots carry the comparison
        icfg.snapshot_times = linspace(0.0, icfg.t_end, cfg["snapshot_count"]);
        Trajectory traj = integrate_W(W0, Gamma, icfg);

        double max_dev = 0.0;
        for (const auto& [t, W] : traj.snapshots) {
            Vector s(d);
            for (int j = 0; j < d; ++j)
                s[j] = singular_value_at(init.gammas[j], init.s0[j], t);
            Matrix Wstar = init.U * s.asDiagonal() * init.eigvec_rows;
            max_dev = std::max(max_dev, (W - Wstar).norm());
        }
        csv << alpha << ',' << max_dev << '\n';
        deviations.push_back(max_dev);
    }
    json summary = {{"alphas", cfg["alphas"]}, {"max_deviations", deviations}};
    if (deviations.size() >= 2)
        summary["last_over_first_ratio"] = deviations.back() / deviations.front();
    std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
    write_manifest(dir, "align-compare", seed, cfg, {"alpha_sweep.csv", "summary.json"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for stepwise self-supervised learning dynamics"};
    app.require_subcommand(1);

    struct SubSpec {
        std::string name;
        int (*run)(const json&, std::uint64_t, fs::path);
    };
    const std::vector<SubSpec> specs = {
        {"simulate-linear", cmd_simulate_linear}, {"kernel-predict", cmd_kernel_predict},
        {"lambda-sweep", cmd_lambda_sweep},       {"speedup-compare", cmd_speedup_compare},
        {"landscape-probe", cmd_landscape_probe}, {"align-compare", cmd_align_compare}};

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    std::string chosen;
    for (const auto& spec : specs) {
        auto* sub = app.add_subcommand(spec.name);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->callback([&chosen, name = spec.name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        json user = load_config(config_path);
        fs::path dir = out_dir.empty()
                           ? fs::path("runs") / (chosen + "-" + std::to_string(seed))
                           : fs::path(out_dir);
        fs::create_directories(dir);
        for (const auto& spec : specs)
            if (spec.name == chosen) return spec.run(user, seed, dir);
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

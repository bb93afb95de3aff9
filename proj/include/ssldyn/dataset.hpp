#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "ssldyn/spectral.hpp"

namespace ssldyn {

/// n positive pairs: row i of X and row i of Xprime are two views of the
/// same underlying sample.
struct PairedDataset {
    Matrix X;       // n x m
    Matrix Xprime;  // n x m
    std::optional<std::uint64_t> seed;
    bool multimodal = false;

    long n() const { return X.rows(); }
    long m() const { return X.cols(); }
};

struct CrossCorrelation {
    Matrix C;  // d x d, symmetric
};

/// Additive Gaussian noise of scale sigma applied independently to each view.
struct AdditiveNoise {
    double sigma = 0.1;
};

/// Crop analogue: each view independently keeps a coordinate with probability
/// keep_fraction and zeroes it otherwise.
struct CoordinateMask {
    double keep_fraction = 0.5;
};

using Augmentation = std::variant<AdditiveNoise, CoordinateMask>;

/// Gaussian base samples with diagonal covariance `spectrum`; each pair is two
/// independent augmentations of one base sample. Deterministic under seed.
PairedDataset generate_synthetic_pairs(long n, long m, const Vector& spectrum,
                                       const Augmentation& aug, std::uint64_t seed);

/// Feature cross-correlation (X^T Xprime + Xprime^T X) / (2n), m x m symmetric.
Matrix compute_gamma(const PairedDataset& ds);

/// Embedding cross-correlation (F^T Fprime + Fprime^T F) / (2n) for n x d
/// embedding matrices.
CrossCorrelation compute_cross_correlation(const Matrix& F, const Matrix& Fprime);

// Pair CSV layout: comment header "# n=<n> m=<m> multimodal=<0|1> seed=<seed|none>",
// then n rows of X followed by n rows of Xprime. Round-trip exact for finite doubles.
void save_pairs_csv(const PairedDataset& ds, const std::string& path);
PairedDataset load_pairs_csv(const std::string& path);

}  // namespace ssldyn

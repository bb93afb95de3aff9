#include "ssldyn/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "ssldyn/matrix_io.hpp"

namespace ssldyn {

namespace {

Matrix gaussian_matrix(long rows, long cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

}  // namespace

PairedDataset generate_synthetic_pairs(long n, long m, const Vector& spectrum,
                                       const Augmentation& aug, std::uint64_t seed) {
    if (n < 1 || m < 1) throw ConfigError("generate_synthetic_pairs: n and m must be >= 1");
    if (spectrum.size() != m)
        throw ConfigError("generate_synthetic_pairs: spectrum must have m entries");
    if (!spectrum.allFinite() || (spectrum.array() < 0).any())
        throw ConfigError("generate_synthetic_pairs: spectrum must be finite and nonnegative");
    if (const auto* mask = std::get_if<CoordinateMask>(&aug)) {
        if (!(mask->keep_fraction > 0.0 && mask->keep_fraction <= 1.0))
            throw ConfigError("generate_synthetic_pairs: keep_fraction must lie in (0, 1]");
    }

    std::mt19937_64 rng(seed);
    Matrix base = gaussian_matrix(n, m, rng);
    base = base * spectrum.cwiseSqrt().asDiagonal();

    PairedDataset ds;
    ds.seed = seed;
    if (const auto* noise = std::get_if<AdditiveNoise>(&aug)) {
        ds.X = base + noise->sigma * gaussian_matrix(n, m, rng);
        ds.Xprime = base + noise->sigma * gaussian_matrix(n, m, rng);
    } else {
        const double keep = std::get<CoordinateMask>(aug).keep_fraction;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        ds.X = base;
        ds.Xprime = base;
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < m; ++j)
                if (unif(rng) > keep) ds.X(i, j) = 0.0;
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < m; ++j)
                if (unif(rng) > keep) ds.Xprime(i, j) = 0.0;
    }
    return ds;
}

Matrix compute_gamma(const PairedDataset& ds) {
    if (ds.X.size() == 0) throw InvalidInputError("compute_gamma: empty dataset");
    if (ds.X.rows() != ds.Xprime.rows() || ds.X.cols() != ds.Xprime.cols())
        throw InvalidInputError("compute_gamma: view shapes differ");
    const double inv2n = 1.0 / (2.0 * static_cast<double>(ds.n()));
    Matrix cross = ds.X.transpose() * ds.Xprime;
    return inv2n * (cross + cross.transpose());
}

CrossCorrelation compute_cross_correlation(const Matrix& F, const Matrix& Fprime) {
    if (F.rows() != Fprime.rows() || F.cols() != Fprime.cols())
        throw InvalidInputError("compute_cross_correlation: embedding shapes differ");
    if (F.rows() == 0) throw InvalidInputError("compute_cross_correlation: empty embeddings");
    const double inv2n = 1.0 / (2.0 * static_cast<double>(F.rows()));
    Matrix cross = F.transpose() * Fprime;
    return CrossCorrelation{inv2n * (cross + cross.transpose())};
}

void save_pairs_csv(const PairedDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "# n=" << ds.n() << " m=" << ds.m() << " multimodal=" << (ds.multimodal ? 1 : 0)
        << " seed=" << (ds.seed ? std::to_string(*ds.seed) : std::string("none")) << "\n";
    auto write_rows = [&](const Matrix& M) {
        for (long i = 0; i < M.rows(); ++i) {
            for (long j = 0; j < M.cols(); ++j) {
                if (j) out << ",";
                out << format_double(M(i, j));
            }
            out << "\n";
        }
    };
    write_rows(ds.X);
    write_rows(ds.Xprime);
}

PairedDataset load_pairs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw InvalidInputError("empty pairs file: " + path);
    long n = -1, m = -1;
    int multimodal = 0;
    std::string seed_str;
    {
        std::istringstream hdr(line);
        std::string tok;
        while (hdr >> tok) {
            if (tok.rfind("n=", 0) == 0) n = std::stol(tok.substr(2));
            else if (tok.rfind("m=", 0) == 0) m = std::stol(tok.substr(2));
            else if (tok.rfind("multimodal=", 0) == 0) multimodal = std::stoi(tok.substr(11));
            else if (tok.rfind("seed=", 0) == 0) seed_str = tok.substr(5);
        }
    }
    if (n < 1 || m < 1) throw ParseError("missing or invalid n/m header in " + path, 1);

    PairedDataset ds;
    ds.multimodal = multimodal != 0;
    if (!seed_str.empty() && seed_str != "none") ds.seed = std::stoull(seed_str);
    ds.X = Matrix(n, m);
    ds.Xprime = Matrix(n, m);

    long row = 0;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> vals;
        size_t pos = 0;
        while (pos <= line.size()) {
            size_t comma = line.find(',', pos);
            std::string tok = line.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ParseError("malformed value '" + tok + "'", lineno);
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (static_cast<long>(vals.size()) != m)
            throw ParseError("ragged row: expected " + std::to_string(m) + " values, got " +
                                 std::to_string(vals.size()),
                             lineno);
        if (row >= 2 * n) throw ParseError("too many data rows", lineno);
        Matrix& target = row < n ? ds.X : ds.Xprime;
        const long r = row < n ? row : row - n;
        for (long j = 0; j < m; ++j) target(r, j) = vals[static_cast<size_t>(j)];
        ++row;
    }
    if (row != 2 * n)
        throw ParseError("expected " + std::to_string(2 * n) + " data rows, got " +
                         std::to_string(row));
    if (!ds.X.allFinite() || !ds.Xprime.allFinite())
        throw InvalidInputError("non-finite entries in " + path);
    return ds;
}

}  // namespace ssldyn

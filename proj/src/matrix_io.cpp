#include "ssldyn/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace ssldyn {

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, 17);
    return std::string(buf, ptr);
}

void save_matrix_csv(const Matrix& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "# " << M.rows() << "," << M.cols() << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ",";
            out << format_double(M(i, j));
        }
        out << "\n";
    }
}

namespace {

std::vector<double> parse_csv_row(const std::string& line, long lineno) {
    std::vector<double> vals;
    size_t pos = 0;
    while (pos <= line.size()) {
        size_t comma = line.find(',', pos);
        std::string tok = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
        try {
            size_t used = 0;
            vals.push_back(std::stod(tok, &used));
            if (used != tok.size() && tok.find_first_not_of(" \t\r", used) != std::string::npos)
                throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError("malformed value '" + tok + "'", lineno);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return vals;
}

}  // namespace

Matrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    long lineno = 0;
    long rows = -1, cols = -1;
    std::vector<std::vector<double>> data;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            if (rows < 0 && line.size() > 1) {
                std::istringstream hdr(line.substr(1));
                char comma = 0;
                if (hdr >> rows >> comma >> cols && comma == ',') continue;
                rows = cols = -1;
            }
            continue;
        }
        auto vals = parse_csv_row(line, lineno);
        if (!data.empty() && vals.size() != data.front().size())
            throw ParseError("ragged row: expected " + std::to_string(data.front().size()) +
                                 " values, got " + std::to_string(vals.size()),
                             lineno);
        data.push_back(std::move(vals));
    }
    if (data.empty()) throw InvalidInputError("empty matrix file: " + path);
    if (rows >= 0 && (rows != static_cast<long>(data.size()) ||
                      cols != static_cast<long>(data.front().size())))
        throw ParseError("header dimensions disagree with body in " + path);
    Matrix M(data.size(), data.front().size());
    for (size_t i = 0; i < data.size(); ++i)
        for (size_t j = 0; j < data[i].size(); ++j) M(i, j) = data[i][j];
    return M;
}

void save_matrix_json(const Matrix& M, const std::string& path) {
    nlohmann::json j;
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    std::vector<double> data;
    data.reserve(static_cast<size_t>(M.size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
    j["data"] = data;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Matrix load_matrix_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON in ") + path + ": " + e.what());
    }
    const long rows = j.at("rows").get<long>();
    const long cols = j.at("cols").get<long>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows * cols)
        throw ParseError("inconsistent dimensions in " + path);
    Matrix M(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long k = 0; k < cols; ++k) M(i, k) = data[static_cast<size_t>(i * cols + k)];
    return M;
}

}  // namespace ssldyn

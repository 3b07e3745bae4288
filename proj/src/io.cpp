#include "tggm/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "tggm/errors.hpp"

namespace tggm {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write file: " + path);
    os << std::setprecision(17);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read file: " + path);
    return is;
}

}  // namespace

void write_graph(const std::string& path, const DecomposableGraph& g) {
    auto os = open_out(path);
    os << "p=" << g.dim() << '\n';
    for (const auto& [j, k] : g.edges()) os << j + 1 << ' ' << k + 1 << '\n';
}

DecomposableGraph read_graph(const std::string& path) {
    auto is = open_in(path);
    std::string header;
    if (!(is >> header) || header.rfind("p=", 0) != 0)
        throw DataError(path + ": expected a p=<count> header");
    int p = 0;
    try {
        p = std::stoi(header.substr(2));
    } catch (const std::exception&) {
        throw DataError(path + ": bad vertex count in header");
    }
    if (p < 1) throw DataError(path + ": bad vertex count in header");
    DecomposableGraph g(p);
    int j = 0, k = 0;
    while (is >> j >> k) {
        if (j < 1 || j > p || k < 1 || k > p || j == k)
            throw DataError(path + ": edge endpoints out of range");
        g.add_edge(j - 1, k - 1);
    }
    if (!is.eof() && is.fail()) throw DataError(path + ": malformed edge line");
    return g;
}

void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    auto os = open_out(path);
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
}

Eigen::MatrixXd read_dense_matrix(const std::string& path) {
    auto is = open_in(path);
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0)
        throw DataError(path + ": expected a rows/cols header");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(is >> m(i, j))) throw DataError(path + ": truncated matrix body");
    return m;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& m,
               const std::vector<std::string>& colnames) {
    if (!colnames.empty() && static_cast<Eigen::Index>(colnames.size()) != m.cols())
        throw DataError(path + ": column name count mismatch");
    auto os = open_out(path);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) os << ',';
        if (colnames.empty())
            os << 'v' << j + 1;
        else
            os << colnames[static_cast<std::size_t>(j)];
    }
    os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
}

void write_edge_probabilities(const std::string& path, const Eigen::MatrixXd& probs) {
    if (probs.rows() != probs.cols()) throw DataError(path + ": probability matrix not square");
    auto os = open_out(path);
    os << "j,k,prob\n";
    for (Eigen::Index j = 0; j < probs.rows(); ++j)
        for (Eigen::Index k = j + 1; k < probs.cols(); ++k)
            os << j + 1 << ',' << k + 1 << ',' << probs(j, k) << '\n';
}

Eigen::MatrixXd read_edge_probabilities(const std::string& path, int p) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("j,k,prob", 0) != 0)
        throw DataError(path + ": expected a j,k,prob header");
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(p, p);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int j = 0, k = 0;
        double v = 0.0;
        char c1 = 0, c2 = 0;
        if (!(ls >> j >> c1 >> k >> c2 >> v) || c1 != ',' || c2 != ',')
            throw DataError(path + ": malformed probability row");
        if (j < 1 || j > p || k < 1 || k > p || j == k)
            throw DataError(path + ": pair out of range");
        if (!(v >= 0.0 && v <= 1.0)) throw DataError(path + ": probability out of [0,1]");
        probs(j - 1, k - 1) = v;
        probs(k - 1, j - 1) = v;
    }
    return probs;
}

}  // namespace tggm

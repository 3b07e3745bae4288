#include "tggm/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tggm/errors.hpp"
#include "tggm/special.hpp"

namespace tggm {

EdgePosterior::EdgePosterior(int p_dim) : p(p_dim), counts(Eigen::MatrixXd::Zero(p_dim, p_dim)) {
    if (p_dim < 2) throw std::invalid_argument("EdgePosterior: need at least two variables");
}

void EdgePosterior::add_graph(const DecomposableGraph& g) {
    if (g.dim() != p) throw std::invalid_argument("EdgePosterior: dimension mismatch");
    for (auto [j, k] : g.edges()) counts(std::min(j, k), std::max(j, k)) += 1.0;
    ++total;
}

void EdgePosterior::add_counts(const Eigen::MatrixXd& upper_counts, long n_snapshots) {
    if (upper_counts.rows() != p || upper_counts.cols() != p)
        throw std::invalid_argument("EdgePosterior: dimension mismatch");
    if (n_snapshots < 0) throw std::invalid_argument("EdgePosterior: negative snapshot count");
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) counts(j, k) += upper_counts(j, k);
    total += n_snapshots;
}

Eigen::MatrixXd EdgePosterior::probabilities() const {
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(p, p);
    if (total == 0) return probs;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            double pr = counts(j, k) / static_cast<double>(total);
            probs(j, k) = pr;
            probs(k, j) = pr;
        }
    return probs;
}

double RocTable::auc() const {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size() + 2);
    pts.emplace_back(0.0, 0.0);
    pts.emplace_back(1.0, 1.0);
    for (const auto& r : points) pts.emplace_back(r.fpr, r.tpr);
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += 0.5 * (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second);
    return area;
}

std::vector<double> roc_grid(int steps) {
    if (steps < 2) throw std::invalid_argument("roc_grid: need at least two thresholds");
    std::vector<double> grid(steps);
    for (int i = 0; i < steps; ++i) grid[i] = static_cast<double>(i) / (steps - 1);
    return grid;
}

RocTable roc(const std::vector<Eigen::MatrixXd>& posteriors,
             const std::vector<DecomposableGraph>& truths, const std::vector<double>& grid) {
    if (posteriors.size() != truths.size())
        throw std::invalid_argument("roc: posterior/truth count mismatch");
    if (posteriors.empty()) throw std::invalid_argument("roc: no replicates");

    long n_pos = 0;
    long n_neg = 0;
    for (std::size_t r = 0; r < truths.size(); ++r) {
        int p = truths[r].dim();
        if (posteriors[r].rows() != p || posteriors[r].cols() != p)
            throw std::invalid_argument("roc: posterior/truth dimension mismatch");
        n_pos += truths[r].n_edges();
        n_neg += static_cast<long>(p) * (p - 1) / 2 - truths[r].n_edges();
    }
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc: truths need both present and absent pairs");

    RocTable table;
    table.points.reserve(grid.size());
    for (double eps : grid) {
        RocPoint pt;
        pt.epsilon = eps;
        for (std::size_t r = 0; r < truths.size(); ++r) {
            int p = truths[r].dim();
            for (int j = 0; j < p; ++j)
                for (int k = j + 1; k < p; ++k) {
                    if (posteriors[r](j, k) < eps) continue;
                    if (truths[r].has_edge(j, k))
                        ++pt.tp;
                    else
                        ++pt.fp;
                }
        }
        pt.tpr = static_cast<double>(pt.tp) / n_pos;
        pt.fpr = static_cast<double>(pt.fp) / n_neg;
        table.points.push_back(pt);
    }
    return table;
}

Eigen::MatrixXd tau_outlier_map(const std::vector<Eigen::MatrixXd>& tau_snapshots, double nu,
                                double q) {
    if (tau_snapshots.empty()) throw std::invalid_argument("tau_outlier_map: no snapshots");
    const auto rows = tau_snapshots.front().rows();
    const auto cols = tau_snapshots.front().cols();

    double thresh;
    if (q <= 0.0)
        thresh = 0.0;
    else if (q >= 1.0)
        thresh = std::numeric_limits<double>::infinity();
    else
        thresh = gamma_quantile(q, nu / 2.0, nu / 2.0);

    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& snap : tau_snapshots) {
        if (snap.rows() != rows || snap.cols() != cols)
            throw std::invalid_argument("tau_outlier_map: snapshot shape mismatch");
        freq += (snap.array() < thresh).cast<double>().matrix();
    }
    return freq / static_cast<double>(tau_snapshots.size());
}

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(strip(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_missing(const std::string& tok) {
    if (tok.empty()) return true;
    if (tok.size() != 2) return false;
    return std::toupper(static_cast<unsigned char>(tok[0])) == 'N' &&
           std::toupper(static_cast<unsigned char>(tok[1])) == 'A';
}

bool parse_cell(const std::string& tok, double& out) {
    std::size_t used = 0;
    try {
        out = std::stod(tok, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == tok.size();
}

std::string unquote(const std::string& tok) {
    if (tok.size() >= 2 && ((tok.front() == '"' && tok.back() == '"') ||
                            (tok.front() == '\'' && tok.back() == '\'')))
        return tok.substr(1, tok.size() - 2);
    return tok;
}

}  // namespace

IngestResult ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::string line;
    std::vector<std::vector<std::string>> raw;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        raw.push_back(split_csv_line(line));
    }
    if (raw.empty()) throw DataError("empty csv: " + path);

    // A first line of nothing but numbers is data; anything else is a header.
    bool first_is_data = true;
    for (const auto& tok : raw.front()) {
        double v;
        if (!parse_cell(tok, v)) {
            first_is_data = false;
            break;
        }
    }

    IngestResult result;
    std::size_t ncol = raw.front().size();
    std::size_t start = 0;
    if (first_is_data) {
        for (std::size_t c = 0; c < ncol; ++c) result.names.push_back("v" + std::to_string(c + 1));
    } else {
        for (const auto& tok : raw.front()) result.names.push_back(unquote(tok));
        start = 1;
    }

    std::vector<Eigen::VectorXd> kept;
    for (std::size_t i = start; i < raw.size(); ++i) {
        const auto& row = raw[i];
        if (row.size() != ncol)
            throw DataError("csv row " + std::to_string(i + 1) + ": expected " +
                            std::to_string(ncol) + " cells, got " + std::to_string(row.size()));
        bool missing = false;
        Eigen::VectorXd vals(static_cast<Eigen::Index>(ncol));
        for (std::size_t c = 0; c < ncol; ++c) {
            if (is_missing(row[c])) {
                missing = true;
                break;
            }
            double v;
            if (!parse_cell(row[c], v))
                throw DataError("csv row " + std::to_string(i + 1) + ": bad number '" + row[c] +
                                "'");
            vals(static_cast<Eigen::Index>(c)) = v;
        }
        if (missing) {
            ++result.dropped_rows;
            continue;
        }
        kept.push_back(std::move(vals));
    }
    if (kept.empty()) throw DataError("no complete data rows in " + path);

    result.y.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(ncol));
    for (std::size_t i = 0; i < kept.size(); ++i) result.y.row(static_cast<Eigen::Index>(i)) = kept[i];
    return result;
}

}  // namespace tggm

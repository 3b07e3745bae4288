#include "tggm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "tggm/dist.hpp"
#include "tggm/errors.hpp"
#include "tggm/spd.hpp"

namespace tggm {

PrecisionTruth ar1_precision(int p) {
    if (p < 2) throw std::invalid_argument("ar1_precision: p must be >= 2");
    PrecisionTruth out{DecomposableGraph(p), Eigen::MatrixXd::Zero(p, p)};
    for (int j = 0; j < p; ++j) out.theta(j, j) = (j == 0 || j == p - 1) ? 2.0 : 3.0;
    for (int j = 0; j + 1 < p; ++j) {
        out.theta(j, j + 1) = -1.0;
        out.theta(j + 1, j) = -1.0;
        out.graph.add_edge(j, j + 1);
    }
    return out;
}

PrecisionTruth random_clique_graph(int p, int n_cliques, int min_size, int max_size,
                                   double min_eig, RngStream& rng) {
    if (p < 2 || n_cliques < 1 || min_size < 2 || max_size < min_size || max_size > p)
        throw std::invalid_argument("random_clique_graph: bad size parameters");
    if (!(min_eig > 0.0))
        throw std::invalid_argument("random_clique_graph: min_eig must be positive");

    PrecisionTruth out{DecomposableGraph(p), Eigen::MatrixXd::Zero(p, p)};
    std::vector<int> idx(p);
    for (int c = 0; c < n_cliques; ++c) {
        const int size =
            min_size + static_cast<int>(rng.uniform_below(
                           static_cast<std::uint64_t>(max_size - min_size + 1)));
        std::iota(idx.begin(), idx.end(), 0);
        for (int a = 0; a < size; ++a) {
            const int b = a + static_cast<int>(rng.uniform_below(
                                  static_cast<std::uint64_t>(p - a)));
            std::swap(idx[a], idx[b]);
        }
        for (int a = 0; a < size; ++a)
            for (int b = a + 1; b < size; ++b) out.graph.add_edge(idx[a], idx[b]);
    }

    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [j, k] : out.graph.edges()) {
        adj(j, k) = 1.0;
        adj(k, j) = 1.0;
        out.theta(j, k) = -1.0;
        out.theta(k, j) = -1.0;
    }
    // theta = c I - adjacency, so the smallest eigenvalue is c minus the
    // adjacency's largest; solve for c directly instead of iterating.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adj, Eigen::EigenvaluesOnly);
    out.theta.diagonal().setConstant(es.eigenvalues().maxCoeff() + min_eig);
    return out;
}

DataKind parse_data_kind(const std::string& s) {
    if (s == "normal") return DataKind::Normal;
    if (s == "classical-t") return DataKind::ClassicalT;
    if (s == "alternative-t") return DataKind::AlternativeT;
    if (s == "dirichlet-t") return DataKind::DirichletT;
    throw ConfigError("unknown data kind: " + s);
}

std::string to_string(DataKind k) {
    switch (k) {
        case DataKind::Normal: return "normal";
        case DataKind::ClassicalT: return "classical-t";
        case DataKind::AlternativeT: return "alternative-t";
        case DataKind::DirichletT: return "dirichlet-t";
    }
    throw ConfigError("unknown data kind");
}

Dataset sample_dataset(DataKind kind, int n, const PrecisionTruth& truth,
                       const Eigen::VectorXd& mu, double nu, double alpha, RngStream& rng) {
    const int p = static_cast<int>(truth.theta.rows());
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    if (mu.size() != p) throw std::invalid_argument("sample_dataset: mean length mismatch");
    if (kind != DataKind::Normal && !(nu > 0.0))
        throw std::invalid_argument("sample_dataset: nu must be positive");
    if (kind == DataKind::DirichletT && !(alpha > 0.0))
        throw std::invalid_argument("sample_dataset: alpha must be positive");

    Dataset ds;
    ds.graph = truth.graph;
    ds.theta = truth.theta;
    ds.mu = mu;
    ds.tau = Eigen::MatrixXd::Ones(n, p);
    ds.y.resize(n, p);

    const SpdMatrix prec(truth.theta);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = sample_mvn_precision(zero, prec, rng);
        switch (kind) {
            case DataKind::Normal: break;
            case DataKind::ClassicalT:
                ds.tau.row(i).setConstant(rng.gamma(0.5 * nu, 0.5 * nu));
                break;
            case DataKind::AlternativeT:
                for (int j = 0; j < p; ++j) ds.tau(i, j) = rng.gamma(0.5 * nu, 0.5 * nu);
                break;
            case DataKind::DirichletT:
                ds.tau.row(i) = sample_dirichlet_gamma_prior(p, alpha, nu, rng).tau.transpose();
                break;
        }
        ds.y.row(i) =
            mu.transpose().array() + x.transpose().array() / ds.tau.row(i).array().sqrt();
    }
    return ds;
}

Eigen::MatrixXd sample_latent_rows(int n, const Eigen::MatrixXd& theta, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("sample_latent_rows: n must be >= 1");
    const int p = static_cast<int>(theta.rows());
    const SpdMatrix prec(theta);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i) x.row(i) = sample_mvn_precision(zero, prec, rng).transpose();
    return x;
}

Dataset contaminate(const Eigen::MatrixXd& x, const PrecisionTruth& truth,
                    const Eigen::VectorXd& mu, const ContaminationDesign& design,
                    RngStream& rng) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 1 || p < 1) throw std::invalid_argument("contaminate: empty latent matrix");
    if (mu.size() != p) throw std::invalid_argument("contaminate: mean length mismatch");
    if (design.n_events < 0 || !(design.row_rate >= 0.0) || !(design.col_rate >= 0.0))
        throw std::invalid_argument("contaminate: bad event parameters");
    if (!(design.value_lo > 0.0 && design.value_hi >= design.value_lo))
        throw std::invalid_argument("contaminate: bad divisor range");

    Dataset ds;
    ds.graph = truth.graph;
    ds.theta = truth.theta;
    ds.mu = mu;
    ds.tau = Eigen::MatrixXd::Ones(n, p);

    std::vector<int> rows(n), cols(p);
    for (int e = 0; e < design.n_events; ++e) {
        const int nr = static_cast<int>(
            std::min<std::uint64_t>(static_cast<std::uint64_t>(n), rng.poisson(design.row_rate)));
        const int nc = static_cast<int>(
            std::min<std::uint64_t>(static_cast<std::uint64_t>(p), rng.poisson(design.col_rate)));
        const double v =
            design.value_lo + (design.value_hi - design.value_lo) * rng.uniform01();
        std::iota(rows.begin(), rows.end(), 0);
        for (int a = 0; a < nr; ++a) {
            const int b = a + static_cast<int>(rng.uniform_below(
                                  static_cast<std::uint64_t>(n - a)));
            std::swap(rows[a], rows[b]);
        }
        std::iota(cols.begin(), cols.end(), 0);
        for (int a = 0; a < nc; ++a) {
            const int b = a + static_cast<int>(rng.uniform_below(
                                  static_cast<std::uint64_t>(p - a)));
            std::swap(cols[a], cols[b]);
        }
        for (int a = 0; a < nr; ++a)
            for (int b = 0; b < nc; ++b) ds.tau(rows[a], cols[b]) = v;
    }

    const Eigen::ArrayXXd divisor = design.sqrt_division
                                        ? Eigen::ArrayXXd(ds.tau.array().sqrt())
                                        : Eigen::ArrayXXd(ds.tau.array());
    ds.y = (x.array() / divisor).matrix();
    ds.y.rowwise() += mu.transpose();
    return ds;
}

}  // namespace tggm

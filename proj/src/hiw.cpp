#include "tggm/hiw.hpp"

#include <cmath>
#include <numbers>

#include "tggm/errors.hpp"
#include "tggm/special.hpp"

namespace tggm {

namespace {

double log_h_term(const Eigen::MatrixXd& phi, const std::vector<int>& idx, double delta) {
    if (idx.empty()) return 0.0;
    const int a = static_cast<int>(idx.size());
    const double df = 0.5 * (delta + a - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(submatrix(phi, idx, idx));
    if (llt.info() != Eigen::Success)
        throw NumericalError("log_h: clique or separator block of Phi not SPD");
    const double logdet_half =
        2.0 * llt.matrixLLT().diagonal().array().log().sum() - a * std::numbers::ln2;
    return df * logdet_half - log_multivariate_gamma(a, df);
}

}  // namespace

double log_h(const PerfectSequence& seq, const HiwParams& par) {
    if (!(par.delta > 0.0)) throw std::invalid_argument("log_h: delta must be positive");
    double acc = 0.0;
    for (const auto& c : seq.cliques) acc += log_h_term(par.phi.mat(), c, par.delta);
    for (const auto& s : seq.separators) acc -= log_h_term(par.phi.mat(), s, par.delta);
    return acc;
}

HiwParams posterior_params(const HiwParams& prior, const Eigen::MatrixXd& mean_scatter, int n) {
    if (n < 0) throw std::invalid_argument("posterior_params: n must be nonnegative");
    return {prior.delta + n, SpdMatrix(prior.phi.mat() + n * mean_scatter)};
}

double log_marginal_likelihood(const PerfectSequence& seq, const HiwParams& prior,
                               const HiwParams& posterior, int n, int p) {
    return -0.5 * n * p * std::log(2.0 * std::numbers::pi) + log_h(seq, prior) -
           log_h(seq, posterior);
}

double log_ml_ratio_edge(const PerfectSequence& seq, int j, int k, const HiwParams& prior,
                         const HiwParams& posterior) {
    const auto q = single_clique_containing(seq, j, k);
    if (!q) throw std::invalid_argument("log_ml_ratio_edge: edge not in exactly one clique");
    std::vector<int> sep2;
    for (int v : seq.cliques[*q])
        if (v != j && v != k) sep2.push_back(v);

    const std::vector<int> ee{j, k};
    const Eigen::MatrixXd c0 = schur_conditional(prior.phi.mat(), ee, sep2);
    const Eigen::MatrixXd c1 = schur_conditional(posterior.phi.mat(), ee, sep2);
    const double d0 = prior.delta + sep2.size();
    const double d1 = posterior.delta + sep2.size();

    auto logdet2 = [](const Eigen::MatrixXd& m) {
        const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        if (!(det > 0.0) || !(m(0, 0) > 0.0) || !(m(1, 1) > 0.0))
            throw NumericalError("log_ml_ratio_edge: conditional block not positive definite");
        return std::log(det);
    };

    return 0.5 * (d0 + 1.0) * logdet2(c0) - 0.5 * (d1 + 1.0) * logdet2(c1) +
           0.5 * d1 * (std::log(c1(0, 0)) + std::log(c1(1, 1))) -
           0.5 * d0 * (std::log(c0(0, 0)) + std::log(c0(1, 1))) + std::lgamma(0.5 * d0) +
           std::lgamma(0.5 * (d1 + 1.0)) - std::lgamma(0.5 * (d0 + 1.0)) -
           std::lgamma(0.5 * d1);
}

Eigen::MatrixXd weighted_scatter(const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& tau_rows) {
    const Eigen::Index n = y.rows();
    if (n < 1 || mu.size() != y.cols() || tau_rows.size() != n)
        throw std::invalid_argument("weighted_scatter: dimension mismatch");
    if ((tau_rows.array() <= 0.0).any())
        throw std::invalid_argument("weighted_scatter: weights must be positive");
    const Eigen::MatrixXd centered = y.rowwise() - mu.transpose();
    return centered.transpose() * tau_rows.asDiagonal() * centered / static_cast<double>(n);
}

Eigen::MatrixXd weighted_scatter_cells(const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& tau_cells) {
    const Eigen::Index n = y.rows();
    if (n < 1 || mu.size() != y.cols() || tau_cells.rows() != n || tau_cells.cols() != y.cols())
        throw std::invalid_argument("weighted_scatter_cells: dimension mismatch");
    if ((tau_cells.array() <= 0.0).any())
        throw std::invalid_argument("weighted_scatter_cells: weights must be positive");
    const Eigen::MatrixXd x =
        tau_cells.array().sqrt() * (y.rowwise() - mu.transpose()).array();
    return x.transpose() * x / static_cast<double>(n);
}

double log_graph_prior(const GraphPrior& prior, int n_edges, int p) {
    const double d = prior.edge_prob;
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("graph prior: edge_prob not in (0,1)");
    const int total = p * (p - 1) / 2;
    if (n_edges < 0 || n_edges > total) throw std::invalid_argument("graph prior: bad edge count");
    return n_edges * std::log(d) + (total - n_edges) * std::log1p(-d);
}

double log_graph_prior_ratio(const GraphPrior& prior, bool add) {
    const double d = prior.edge_prob;
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("graph prior: edge_prob not in (0,1)");
    const double r = std::log(d) - std::log1p(-d);
    return add ? r : -r;
}

}  // namespace tggm

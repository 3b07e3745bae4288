#pragma once

#include <Eigen/Dense>

#include "tggm/graph.hpp"
#include "tggm/spd.hpp"

namespace tggm {

// Degrees of freedom and scale of a hyper inverse Wishart law; delta > 0.
struct HiwParams {
    double delta;
    SpdMatrix phi;
};

// Independent-edge graph prior, inclusion probability in (0,1).
struct GraphPrior {
    double edge_prob = 0.05;
};

// log normalizing constant of the hyper inverse Wishart over the graph:
// clique terms |Phi_CC/2|^{(delta+|C|-1)/2} / Gamma_{|C|}((delta+|C|-1)/2)
// divided by the same product over separators. Computed entirely in logs.
double log_h(const PerfectSequence& seq, const HiwParams& par);

// Conjugate update: delta* = delta + n, Phi* = Phi + n * mean_scatter.
HiwParams posterior_params(const HiwParams& prior, const Eigen::MatrixXd& mean_scatter, int n);

// log P(Y | delta, Phi, G) = -(np/2) log(2 pi) + log h(prior) - log h(posterior).
double log_marginal_likelihood(const PerfectSequence& seq, const HiwParams& prior,
                               const HiwParams& posterior, int n, int p);

// log of the marginal likelihood ratio P(Y|G) / P(Y|G minus {j,k}) in closed
// form, valid when the edge lies in exactly one clique of G. Addition moves
// evaluate this on the larger graph and negate nothing; removal moves negate.
double log_ml_ratio_edge(const PerfectSequence& seq, int j, int k, const HiwParams& prior,
                         const HiwParams& posterior);

// (1/n) sum_i tau_i (y_i - mu)(y_i - mu)' for per-row weights, and the
// per-cell variant (1/n) sum_i x_i x_i' with x_ij = sqrt(tau_ij)(y_ij - mu_j).
Eigen::MatrixXd weighted_scatter(const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& tau_rows);
Eigen::MatrixXd weighted_scatter_cells(const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& tau_cells);

double log_graph_prior(const GraphPrior& prior, int n_edges, int p);
double log_graph_prior_ratio(const GraphPrior& prior, bool add);

}  // namespace tggm

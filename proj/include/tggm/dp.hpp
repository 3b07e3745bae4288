#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tggm/rng.hpp"

namespace tggm {

// Clustered divisors for one observation: labels[j] in 0..K-1 picks the
// cluster of coordinate j, values[k] is that cluster's divisor. Labels stay
// contiguous at all times (empty clusters are removed on the spot).
struct DpRow {
    std::vector<int> labels;
    std::vector<double> values;

    int n_clusters() const { return static_cast<int>(values.size()); }
    double tau(int j) const { return values[labels[j]]; }
    std::vector<int> counts() const;
};

struct DpState {
    std::vector<DpRow> rows;
    double alpha = 1.0;
    std::vector<double> w;  // auxiliary Beta(alpha+1, p) variables, one per row

    int n_rows() const { return static_cast<int>(rows.size()); }
};

DpRow single_cluster_row(int p, double value);

// Reassignment weights for coordinate j of one observation: q_new against each
// existing cluster, own cluster counted without j. Probabilities, normalized.
struct AssignmentWeights {
    double q_new = 0.0;
    std::vector<double> q;
};

// ytilde is the centered observation y_i - mu; theta the current precision.
AssignmentWeights assignment_weights(const DpRow& row, int j, const Eigen::VectorXd& ytilde,
                                     const Eigen::MatrixXd& theta, double alpha, double nu);

// -1 means "open a new cluster", otherwise an existing cluster index.
int draw_assignment(const AssignmentWeights& weights, RngStream& rng);

// Divisor update for cluster k of one observation: a sqrt-tilted gamma whose
// rate and tilt couple the cluster's coordinates to the rest through theta.
// On a singleton cluster this is exactly the single-site conditional.
double draw_cluster_value(const DpRow& row, int k, const Eigen::VectorXd& ytilde,
                          const Eigen::MatrixXd& theta, double nu, RngStream& rng);

// One Gibbs pass over the coordinates of a row. The weight and new-value
// callbacks let tests run the bare urn (all density factors 1); production
// binds assignment_weights and the singleton conditional. Departing
// singletons keep their label on a "new" draw; emptied clusters are removed
// immediately (swap with the last label).
void gibbs_sweep_row(DpRow& row, const std::function<AssignmentWeights(int j)>& weights_for,
                     const std::function<double(int j)>& new_value_for, RngStream& rng);

// Full conditional sweeps used by the sampler.
void dirichlet_assignment_sweep(DpRow& row, const Eigen::VectorXd& ytilde,
                                const Eigen::MatrixXd& theta, double alpha, double nu,
                                RngStream& rng);
void dirichlet_value_sweep(DpRow& row, const Eigen::VectorXd& ytilde,
                           const Eigen::MatrixXd& theta, double nu, RngStream& rng);

// Auxiliary-variable update of the concentration parameter under a
// Gamma(a, b) prior: w_i ~ Beta(alpha+1, p), then alpha from a mixture of
// gammas whose weights involve the per-row cluster counts.
void sample_w(DpState& state, int p, RngStream& rng);
double sample_alpha(double a, double b, int n_rows, int p, double sum_k, double sum_log_w,
                    RngStream& rng);

// log P(K = k) for the number of clusters among n draws of a DP(alpha, .).
double log_pmf_num_clusters(int k, double alpha, int n);

// Marginal moments of the Dirichlet-t law: cov for distinct coordinates,
// var on the diagonal. Require nu > 2.
double dirichlet_t_marginal_cov(double psi_jk, double alpha, double nu);
double dirichlet_t_marginal_var(double psi_jj, double nu);

}  // namespace tggm

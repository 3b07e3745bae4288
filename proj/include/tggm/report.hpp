#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tggm/graph.hpp"

namespace tggm {

// Running pairwise inclusion counts over graph snapshots.
struct EdgePosterior {
    int p = 0;
    Eigen::MatrixXd counts;  // upper triangle holds the counts
    long total = 0;

    explicit EdgePosterior(int p_dim);
    void add_graph(const DecomposableGraph& g);
    void add_counts(const Eigen::MatrixXd& upper_counts, long n_snapshots);
    Eigen::MatrixXd probabilities() const;  // symmetric, zero diagonal
};

struct RocPoint {
    double epsilon = 0.0;
    long tp = 0;
    long fp = 0;
    double tpr = 0.0;
    double fpr = 0.0;
};

struct RocTable {
    std::vector<RocPoint> points;
    double auc() const;  // trapezoid over (fpr, tpr), anchored at (0,0) and (1,1)
};

// steps evenly spaced thresholds covering [0, 1].
std::vector<double> roc_grid(int steps);

// Pooled true/false positive counts over replicates: pair (j,k) is called a
// positive at threshold eps when its posterior probability is >= eps.
RocTable roc(const std::vector<Eigen::MatrixXd>& posteriors,
             const std::vector<DecomposableGraph>& truths, const std::vector<double>& grid);

// Fraction of snapshots with tau_ij strictly below the q-quantile of the
// Gamma(nu/2, nu/2) prior.
Eigen::MatrixXd tau_outlier_map(const std::vector<Eigen::MatrixXd>& tau_snapshots, double nu,
                                double q);

struct IngestResult {
    Eigen::MatrixXd y;
    std::vector<std::string> names;
    int dropped_rows = 0;
};

// Numeric CSV with an optional header row. Rows containing missing cells
// (empty or NA) are dropped and counted; ragged rows and non-numeric cells
// are errors, as is ending up with no data rows at all.
IngestResult ingest_csv(const std::string& path);

}  // namespace tggm

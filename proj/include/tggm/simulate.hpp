#pragma once

#include <string>

#include <Eigen/Dense>

#include "tggm/graph.hpp"
#include "tggm/rng.hpp"

namespace tggm {

// Ground-truth precision and its graph (which need not be decomposable).
struct PrecisionTruth {
    DecomposableGraph graph{2};
    Eigen::MatrixXd theta;
};

// Chain graph: tridiagonal precision with -1 off the diagonal, 3 on the
// diagonal except 2 at both ends.
PrecisionTruth ar1_precision(int p);

// Union of random cliques, -1 off the diagonal on edges; the constant
// diagonal is set so the smallest eigenvalue equals min_eig.
PrecisionTruth random_clique_graph(int p, int n_cliques, int min_size, int max_size,
                                   double min_eig, RngStream& rng);

enum class DataKind { Normal, ClassicalT, AlternativeT, DirichletT };

DataKind parse_data_kind(const std::string& s);
std::string to_string(DataKind k);

struct Dataset {
    Eigen::MatrixXd y;
    DecomposableGraph graph{2};
    Eigen::MatrixXd theta;
    Eigen::VectorXd mu;
    Eigen::MatrixXd tau;  // truth divisors, all ones for normal data
};

// Y_i = mu + X_i / sqrt(tau_i) elementwise, X_i ~ N(0, theta^{-1}); the
// divisors are all one, one Gamma(nu/2, nu/2) value per row, one per cell,
// or clustered within each row by the urn with concentration alpha.
Dataset sample_dataset(DataKind kind, int n, const PrecisionTruth& truth,
                       const Eigen::VectorXd& mu, double nu, double alpha, RngStream& rng);

struct ContaminationDesign {
    int n_events = 10;
    double row_rate = 10.0;
    double col_rate = 10.0;
    double value_lo = 0.01;
    double value_hi = 0.2;
    bool sqrt_division = false;  // divide by sqrt(tau) instead of tau itself
};

// Latent rows for contaminate: n draws of N(0, theta^{-1}).
Eigen::MatrixXd sample_latent_rows(int n, const Eigen::MatrixXd& theta, RngStream& rng);

// Block contamination: each event draws Poisson row and column counts, picks
// a uniform submatrix of that size and assigns it one shared divisor from
// U[value_lo, value_hi]; remaining divisors stay 1. Y = mu + X / tau, with
// division by tau itself (not its square root) unless configured otherwise.
Dataset contaminate(const Eigen::MatrixXd& x, const PrecisionTruth& truth,
                    const Eigen::VectorXd& mu, const ContaminationDesign& design, RngStream& rng);

}  // namespace tggm

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tggm/graph.hpp"
#include "tggm/rng.hpp"
#include "tggm/spd.hpp"

namespace tggm {

// Multivariate normal draws, either from a covariance or a precision matrix.
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, RngStream& rng);
Eigen::VectorXd sample_mvn_precision(const Eigen::VectorXd& mean, const SpdMatrix& prec,
                                     RngStream& rng);

// Inverse Wishart with density |Phi/2|^{m/2}/Gamma_p(m/2) |S|^{-(m+p+1)/2}
// exp(-tr(Phi S^{-1})/2); requires m > p-1. Mean is Phi/(m-p-1) when m > p+1.
Eigen::MatrixXd sample_iw(double m, const SpdMatrix& phi, RngStream& rng);

// Hyper inverse Wishart over a decomposable graph: clique marginals are
// IW(delta + |C| - 1, Phi_CC), drawn clique by clique conditional on the
// separators. Returns per-clique covariance blocks aligned with seq.cliques;
// `completed` (optional) additionally receives the unique full covariance
// whose inverse respects the graph's zero pattern.
std::vector<Eigen::MatrixXd> sample_hiw(const PerfectSequence& seq, double delta,
                                        const SpdMatrix& phi, RngStream& rng,
                                        Eigen::MatrixXd* completed = nullptr);

// Density proportional to tau^{shape-1} exp(-rate*tau - tilt*sqrt(tau)).
// Requires shape > 1/2 and rate > 0; tilt may take either sign.
struct SqrtGammaParams {
    double shape = 0.0;
    double rate = 0.0;
    double tilt = 0.0;
};

// Exact rejection draw: in s = sqrt(tau) the log-density is strictly concave,
// and a Gaussian envelope centered at the mode dominates once its variance is
// floored at 1/(2*rate); a slice sampler takes over in the (unreached in
// practice) event of 1000 straight rejections.
double sample_sqrt_gamma(const SqrtGammaParams& par, RngStream& rng);

// log of the normalizing integral: int_0^inf t^{shape-1} exp(-rate*t -
// tilt*sqrt(t)) dt, by Gauss-Legendre panels around the integrand's mode.
double log_sqrt_gamma_norm(const SqrtGammaParams& par);

// log-density at x of (ncp + Z)/sqrt(tau) with Z standard normal and
// tau ~ Gamma(nu/2, nu/2), i.e. the noncentral t with nu degrees of freedom.
double noncentral_t_logpdf(double x, double ncp, double nu);

// One draw from the Dirichlet-gamma prior on a p-vector of divisors: a
// Dirichlet process with concentration alpha around Gamma(nu/2, nu/2),
// realized by the Polya urn. Returns the divisors and the partition labels
// (0-based, contiguous).
struct DirichletGammaDraw {
    Eigen::VectorXd tau;
    std::vector<int> labels;
    int n_clusters = 0;
};

DirichletGammaDraw sample_dirichlet_gamma_prior(int p, double alpha, double nu, RngStream& rng);

}  // namespace tggm

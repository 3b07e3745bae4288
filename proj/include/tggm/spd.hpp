#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tggm/graph.hpp"

namespace tggm {

// Symmetric positive definite matrix with a cached Cholesky factor. Input is
// symmetrized on ingestion; asymmetry beyond 1e-9 (relative) is rejected, and
// factorization failures or tiny pivots surface as NumericalError rather than
// silent NaNs.
class SpdMatrix {
  public:
    explicit SpdMatrix(Eigen::MatrixXd m);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& mat() const { return m_; }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const;
    double log_det() const;
    Eigen::MatrixXd inverse() const;

  private:
    Eigen::MatrixXd m_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
    mutable bool factored_ = false;
};

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                          const std::vector<int>& cols);
Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<int>& idx);
std::vector<int> complement_of(const std::vector<int>& idx, int p);

// M_tt - M_tg M_gg^{-1} M_gt. Empty `given` returns M_tt. Target and given
// must be disjoint.
Eigen::MatrixXd schur_conditional(const Eigen::MatrixXd& m, const std::vector<int>& target,
                                  const std::vector<int>& given);
Eigen::MatrixXd schur_conditional(const SpdMatrix& m, const std::vector<int>& target,
                                  const std::vector<int>& given);

// Precision matrix of a decomposable model from per-clique covariance blocks:
// sum of padded clique-block inverses minus the padded separator-block
// inverses. Blocks are indexed like seq.cliques; separator entries shared
// between blocks must agree to 1e-8 relative.
Eigen::MatrixXd clique_inverse_assemble(int p, const PerfectSequence& seq,
                                        const std::vector<Eigen::MatrixXd>& clique_blocks);

struct ConditionalGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // (Theta_tt)^{-1}
};

// Conditional law of x_target given the remaining coordinates under a mean
// zero Gaussian with precision theta; x_given is ordered like the complement
// of target.
ConditionalGaussian conditional_gaussian_params(const Eigen::MatrixXd& theta,
                                                const std::vector<int>& target,
                                                const Eigen::VectorXd& x_given);

// (y-mu)' scale^{-1} (y-mu), and the same quadratic form written directly in
// the precision matrix (no solve).
double mahalanobis(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, const SpdMatrix& scale);
double mahalanobis_precision(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& theta);

}  // namespace tggm

#include "tggm/spd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tggm/errors.hpp"

namespace tggm {

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw std::invalid_argument("SpdMatrix: matrix must be square and nonempty");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * scale) throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose().eval());
}

const Eigen::LLT<Eigen::MatrixXd>& SpdMatrix::llt() const {
    if (!factored_) {
        llt_.compute(m_);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("SpdMatrix: Cholesky factorization failed");
        const auto d = llt_.matrixLLT().diagonal();
        const double min_pivot = d.minCoeff();
        const double max_diag = m_.diagonal().maxCoeff();
        if (!(min_pivot * min_pivot > 1e-12 * max_diag))
            throw NumericalError("SpdMatrix: matrix is numerically singular");
        factored_ = true;
    }
    return llt_;
}

double SpdMatrix::log_det() const {
    return 2.0 * llt().matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd SpdMatrix::inverse() const {
    return llt().solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

std::vector<int> complement_of(const std::vector<int>& idx, int p) {
    std::vector<char> in(p, 0);
    for (int i : idx) {
        if (i < 0 || i >= p) throw std::invalid_argument("complement_of: index out of range");
        in[i] = 1;
    }
    std::vector<int> out;
    out.reserve(p - idx.size());
    for (int i = 0; i < p; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

Eigen::MatrixXd schur_conditional(const Eigen::MatrixXd& m, const std::vector<int>& target,
                                  const std::vector<int>& given) {
    for (int t : target)
        if (std::find(given.begin(), given.end(), t) != given.end())
            throw std::invalid_argument("schur_conditional: target and given overlap");
    Eigen::MatrixXd mtt = submatrix(m, target, target);
    if (given.empty()) return mtt;
    const Eigen::MatrixXd mgg = submatrix(m, given, given);
    const Eigen::MatrixXd mgt = submatrix(m, given, target);
    Eigen::LLT<Eigen::MatrixXd> llt(mgg);
    if (llt.info() != Eigen::Success)
        throw NumericalError("schur_conditional: conditioning block is not positive definite");
    mtt.noalias() -= mgt.transpose() * llt.solve(mgt);
    return mtt;
}

Eigen::MatrixXd schur_conditional(const SpdMatrix& m, const std::vector<int>& target,
                                  const std::vector<int>& given) {
    return schur_conditional(m.mat(), target, given);
}

Eigen::MatrixXd clique_inverse_assemble(int p, const PerfectSequence& seq,
                                        const std::vector<Eigen::MatrixXd>& clique_blocks) {
    const int m = seq.n_cliques();
    if (static_cast<int>(clique_blocks.size()) != m)
        throw std::invalid_argument("clique_inverse_assemble: one block per clique required");

    // Shared entries must agree across the blocks that carry them.
    Eigen::MatrixXd seen = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < m; ++i) {
        const auto& c = seq.cliques[i];
        const auto& b = clique_blocks[i];
        if (b.rows() != static_cast<Eigen::Index>(c.size()) || b.cols() != b.rows())
            throw std::invalid_argument("clique_inverse_assemble: block shape mismatch");
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t d = 0; d < c.size(); ++d) {
                const double v = b(a, d);
                double& s = seen(c[a], c[d]);
                if (std::isnan(s)) {
                    s = v;
                } else if (std::fabs(s - v) > 1e-8 * std::max(1.0, std::fabs(s))) {
                    throw std::invalid_argument(
                        "clique_inverse_assemble: overlapping blocks disagree");
                }
            }
    }

    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
    auto add_inverse = [&](const std::vector<int>& idx, const Eigen::MatrixXd& block,
                           double sign) {
        if (idx.empty()) return;
        Eigen::LLT<Eigen::MatrixXd> llt(block);
        if (llt.info() != Eigen::Success)
            throw NumericalError("clique_inverse_assemble: block is not positive definite");
        const Eigen::MatrixXd inv =
            llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t d = 0; d < idx.size(); ++d) theta(idx[a], idx[d]) += sign * inv(a, d);
    };

    for (int i = 0; i < m; ++i) add_inverse(seq.cliques[i], clique_blocks[i], +1.0);
    for (int i = 1; i < m; ++i) {
        const auto& s = seq.separators[i - 1];
        if (s.empty()) continue;
        // The separator block lives inside this clique's own block.
        const auto& c = seq.cliques[i];
        std::vector<int> local;
        local.reserve(s.size());
        for (int v : s) {
            const auto it = std::lower_bound(c.begin(), c.end(), v);
            local.push_back(static_cast<int>(it - c.begin()));
        }
        Eigen::MatrixXd bs(s.size(), s.size());
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t d = 0; d < s.size(); ++d)
                bs(a, d) = clique_blocks[i](local[a], local[d]);
        add_inverse(s, bs, -1.0);
    }
    return theta;
}

ConditionalGaussian conditional_gaussian_params(const Eigen::MatrixXd& theta,
                                                const std::vector<int>& target,
                                                const Eigen::VectorXd& x_given) {
    const int p = static_cast<int>(theta.rows());
    const std::vector<int> given = complement_of(target, p);
    if (x_given.size() != static_cast<Eigen::Index>(given.size()))
        throw std::invalid_argument("conditional_gaussian_params: x_given has wrong length");
    const Eigen::MatrixXd ttt = submatrix(theta, target, target);
    Eigen::LLT<Eigen::MatrixXd> llt(ttt);
    if (llt.info() != Eigen::Success)
        throw NumericalError("conditional_gaussian_params: target precision block not SPD");
    ConditionalGaussian out;
    out.cov = llt.solve(Eigen::MatrixXd::Identity(target.size(), target.size()));
    if (given.empty()) {
        out.mean = Eigen::VectorXd::Zero(target.size());
    } else {
        const Eigen::MatrixXd ttg = submatrix(theta, target, given);
        out.mean = -llt.solve(ttg * x_given);
    }
    return out;
}

double mahalanobis(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, const SpdMatrix& scale) {
    if (y.size() != mu.size() || y.size() != scale.dim())
        throw std::invalid_argument("mahalanobis: dimension mismatch");
    const Eigen::VectorXd d = y - mu;
    return d.dot(scale.llt().solve(d));
}

double mahalanobis_precision(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& theta) {
    if (y.size() != mu.size() || y.size() != theta.rows())
        throw std::invalid_argument("mahalanobis_precision: dimension mismatch");
    const Eigen::VectorXd d = y - mu;
    return d.dot(theta * d);
}

}  // namespace tggm

#include "tggm/dp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "tggm/dist.hpp"
#include "tggm/errors.hpp"
#include "tggm/special.hpp"

namespace tggm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<int> DpRow::counts() const {
    std::vector<int> c(values.size(), 0);
    for (int l : labels) ++c[l];
    return c;
}

DpRow single_cluster_row(int p, double value) {
    DpRow r;
    r.labels.assign(p, 0);
    r.values.assign(1, value);
    return r;
}

AssignmentWeights assignment_weights(const DpRow& row, int j, const Eigen::VectorXd& ytilde,
                                     const Eigen::MatrixXd& theta, double alpha, double nu) {
    const int p = static_cast<int>(ytilde.size());
    if (static_cast<int>(row.labels.size()) != p || theta.rows() != p)
        throw std::invalid_argument("assignment_weights: dimension mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("assignment_weights: alpha must be positive");

    // Conditional of the latent x_j given the other coordinates' current
    // latents under precision theta.
    const double theta_jj = theta(j, j);
    if (!(theta_jj > 0.0)) throw NumericalError("assignment_weights: theta diagonal not positive");
    double cross = 0.0;
    for (int l = 0; l < p; ++l) {
        if (l == j) continue;
        cross += theta(j, l) * std::sqrt(row.tau(l)) * ytilde(l);
    }
    const double mu_c = -cross / theta_jj;
    const double var_c = 1.0 / theta_jj;
    const double sd_c = std::sqrt(var_c);
    const double x = ytilde(j);

    const int kk = row.n_clusters();
    const std::vector<int> cnt = row.counts();
    std::vector<double> lw(kk + 1, kNegInf);
    lw[0] = std::log(alpha) + noncentral_t_logpdf(x / sd_c, mu_c / sd_c, nu) - std::log(sd_c);
    // The t density above is for x/sd_c; dividing by sd_c maps it to x itself.
    for (int k = 0; k < kk; ++k) {
        const int nkj = cnt[k] - (row.labels[j] == k ? 1 : 0);
        if (nkj == 0) continue;
        const double eta = row.values[k];
        const double v = var_c / eta;
        const double d = x - mu_c / std::sqrt(eta);
        lw[k + 1] = std::log(static_cast<double>(nkj)) - 0.5 * std::log(2.0 * std::numbers::pi * v) -
                    0.5 * d * d / v;
    }

    double m = kNegInf;
    for (double v : lw) m = std::max(m, v);
    double total = 0.0;
    for (double& v : lw) {
        v = std::exp(v - m);
        total += v;
    }
    AssignmentWeights out;
    out.q_new = lw[0] / total;
    out.q.assign(lw.begin() + 1, lw.end());
    for (double& v : out.q) v /= total;
    return out;
}

int draw_assignment(const AssignmentWeights& weights, RngStream& rng) {
    double u = rng.uniform01();
    u -= weights.q_new;
    if (u < 0.0) return -1;
    for (std::size_t k = 0; k < weights.q.size(); ++k) {
        u -= weights.q[k];
        if (u < 0.0) return static_cast<int>(k);
    }
    return weights.q.empty() ? -1 : static_cast<int>(weights.q.size()) - 1;
}

double draw_cluster_value(const DpRow& row, int k, const Eigen::VectorXd& ytilde,
                          const Eigen::MatrixXd& theta, double nu, RngStream& rng) {
    const int p = static_cast<int>(ytilde.size());
    if (k < 0 || k >= row.n_clusters()) throw std::invalid_argument("draw_cluster_value: bad k");
    double nk = 0.0;
    double quad = 0.0;
    double tilt = 0.0;
    for (int a = 0; a < p; ++a) {
        if (row.labels[a] != k) continue;
        nk += 1.0;
        for (int b = 0; b < p; ++b) {
            if (row.labels[b] == k) {
                quad += ytilde(a) * theta(a, b) * ytilde(b);
            } else {
                tilt += ytilde(a) * theta(a, b) * std::sqrt(row.values[row.labels[b]]) * ytilde(b);
            }
        }
    }
    if (nk == 0.0) throw std::invalid_argument("draw_cluster_value: cluster is empty");
    return sample_sqrt_gamma({0.5 * (nu + nk), 0.5 * (nu + quad), tilt}, rng);
}

void gibbs_sweep_row(DpRow& row, const std::function<AssignmentWeights(int j)>& weights_for,
                     const std::function<double(int j)>& new_value_for, RngStream& rng) {
    const int p = static_cast<int>(row.labels.size());
    for (int j = 0; j < p; ++j) {
        const AssignmentWeights wts = weights_for(j);
        const int pick = draw_assignment(wts, rng);
        const int cur = row.labels[j];
        int cur_count = 0;
        for (int l : row.labels)
            if (l == cur) ++cur_count;
        const bool singleton = cur_count == 1;

        if (pick < 0) {
            if (singleton) {
                row.values[cur] = new_value_for(j);  // departing a singleton reuses its label
            } else {
                row.labels[j] = row.n_clusters();
                row.values.push_back(new_value_for(j));
            }
        } else if (pick != cur) {
            row.labels[j] = pick;
            if (singleton) {
                const int last = row.n_clusters() - 1;
                if (cur != last) {
                    row.values[cur] = row.values[last];
                    for (int& l : row.labels)
                        if (l == last) l = cur;
                }
                row.values.pop_back();
            }
        }
    }
}

void dirichlet_assignment_sweep(DpRow& row, const Eigen::VectorXd& ytilde,
                                const Eigen::MatrixXd& theta, double alpha, double nu,
                                RngStream& rng) {
    gibbs_sweep_row(
        row, [&](int j) { return assignment_weights(row, j, ytilde, theta, alpha, nu); },
        [&](int j) {
            // Singleton conditional of the new cluster's divisor.
            const double theta_jj = theta(j, j);
            double cross = 0.0;
            for (int l = 0; l < static_cast<int>(row.labels.size()); ++l) {
                if (l == j) continue;
                cross += theta(j, l) * std::sqrt(row.tau(l)) * ytilde(l);
            }
            return sample_sqrt_gamma(
                {0.5 * (nu + 1.0), 0.5 * (nu + theta_jj * ytilde(j) * ytilde(j)),
                 ytilde(j) * cross},
                rng);
        },
        rng);
}

void dirichlet_value_sweep(DpRow& row, const Eigen::VectorXd& ytilde,
                           const Eigen::MatrixXd& theta, double nu, RngStream& rng) {
    for (int k = 0; k < row.n_clusters(); ++k)
        row.values[k] = draw_cluster_value(row, k, ytilde, theta, nu, rng);
}

void sample_w(DpState& state, int p, RngStream& rng) {
    state.w.resize(state.rows.size());
    for (std::size_t i = 0; i < state.rows.size(); ++i)
        state.w[i] = rng.beta(state.alpha + 1.0, static_cast<double>(p));
}

double sample_alpha(double a, double b, int n_rows, int p, double sum_k, double sum_log_w,
                    RngStream& rng) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("sample_alpha: bad prior");
    const double big_b = b - sum_log_w;
    if (!(big_b > 0.0)) throw NumericalError("sample_alpha: nonpositive rate");
    // Mixture over the binomial expansion of (alpha + p)^n.
    std::vector<double> lw(n_rows + 1);
    for (int j = 0; j <= n_rows; ++j)
        lw[j] = log_choose(n_rows, j) + j * std::log(static_cast<double>(p)) +
                j * std::log(big_b) + std::lgamma(a + sum_k - j);
    double m = kNegInf;
    for (double v : lw) m = std::max(m, v);
    double total = 0.0;
    for (double& v : lw) {
        v = std::exp(v - m);
        total += v;
    }
    double u = rng.uniform01() * total;
    int pick = n_rows;
    for (int j = 0; j <= n_rows; ++j) {
        u -= lw[j];
        if (u < 0.0) {
            pick = j;
            break;
        }
    }
    return rng.gamma(a + sum_k - pick, big_b);
}

double log_pmf_num_clusters(int k, double alpha, int n) {
    if (!(alpha > 0.0)) throw std::invalid_argument("log_pmf_num_clusters: alpha must be positive");
    if (n < 1 || k < 1 || k > n) return kNegInf;
    return log_stirling1(n, k) + k * std::log(alpha) + std::lgamma(alpha) -
           std::lgamma(alpha + n);
}

double dirichlet_t_marginal_cov(double psi_jk, double alpha, double nu) {
    if (!(nu > 2.0)) throw std::invalid_argument("dirichlet_t_marginal_cov: need nu > 2");
    if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet_t_marginal_cov: alpha > 0");
    const double same = nu / (nu - 2.0);
    const double g = std::lgamma(0.5 * (nu - 1.0)) - std::lgamma(0.5 * nu);
    const double split = 0.5 * nu * std::exp(2.0 * g);
    return psi_jk * ((same + alpha * split) / (alpha + 1.0));
}

double dirichlet_t_marginal_var(double psi_jj, double nu) {
    if (!(nu > 2.0)) throw std::invalid_argument("dirichlet_t_marginal_var: need nu > 2");
    return psi_jj * nu / (nu - 2.0);
}

}  // namespace tggm

#include "tggm/mcmc.hpp"

#include <algorithm>
#include <iomanip>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tggm/dist.hpp"
#include "tggm/errors.hpp"
#include "tggm/special.hpp"
#include "tggm/spd.hpp"

namespace tggm {

ModelKind parse_model_kind(const std::string& s) {
    if (s == "gaussian") return ModelKind::Gaussian;
    if (s == "gaussian-robust-scatter") return ModelKind::GaussianRobustScatter;
    if (s == "classical-t") return ModelKind::ClassicalT;
    if (s == "alternative-t") return ModelKind::AlternativeT;
    if (s == "dirichlet-t") return ModelKind::DirichletT;
    throw ConfigError("unknown model: " + s);
}

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::Gaussian: return "gaussian";
        case ModelKind::GaussianRobustScatter: return "gaussian-robust-scatter";
        case ModelKind::ClassicalT: return "classical-t";
        case ModelKind::AlternativeT: return "alternative-t";
        case ModelKind::DirichletT: return "dirichlet-t";
    }
    throw ConfigError("unknown model kind");
}

MuMode parse_mu_mode(const std::string& s) {
    if (s == "naive") return MuMode::Naive;
    if (s == "robust") return MuMode::Robust;
    if (s == "approx-draw") return MuMode::ApproxDraw;
    if (s == "exact-draw") return MuMode::ExactDraw;
    throw ConfigError("unknown mu_mode: " + s);
}

std::string to_string(MuMode m) {
    switch (m) {
        case MuMode::Naive: return "naive";
        case MuMode::Robust: return "robust";
        case MuMode::ApproxDraw: return "approx-draw";
        case MuMode::ExactDraw: return "exact-draw";
    }
    throw ConfigError("unknown mu mode");
}

ProposalWeighting parse_proposal_weighting(const std::string& s) {
    if (s == "uniform") return ProposalWeighting::Uniform;
    if (s == "abs-correlation") return ProposalWeighting::AbsCorrelation;
    throw ConfigError("unknown proposal_weighting: " + s);
}

std::string to_string(ProposalWeighting w) {
    switch (w) {
        case ProposalWeighting::Uniform: return "uniform";
        case ProposalWeighting::AbsCorrelation: return "abs-correlation";
    }
    throw ConfigError("unknown proposal weighting");
}

double default_phi_scale(ModelKind model, int p) {
    if (model == ModelKind::Gaussian) return 1.0 / 5.0;
    return p >= 100 ? 1.0 / 20.0 : 1.0 / 10.0;
}

Eigen::MatrixXd ChainResult::edge_probabilities() const {
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(p, p);
    if (edge_total == 0) return probs;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            const double v = edge_counts(j, k) / static_cast<double>(edge_total);
            probs(j, k) = v;
            probs(k, j) = v;
        }
    return probs;
}

Eigen::MatrixXd ChainResult::tau_outlier_probabilities() const {
    if (tau_snapshots == 0) return Eigen::MatrixXd::Zero(n, p);
    return tau_low_counts / static_cast<double>(tau_snapshots);
}

Eigen::VectorXd ChainResult::mu_mean() const {
    if (mu_samples == 0) return mu_sum;
    return mu_sum / static_cast<double>(mu_samples);
}

double ChainResult::mean_clusters_per_row() const {
    double total = 0.0;
    long m = 0;
    for (const auto& [it, v] : clusters_trace)
        if (it > burn_in) {
            total += v;
            ++m;
        }
    return m > 0 ? total / static_cast<double>(m) : 0.0;
}

double ChainResult::acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
}

bool step_edge_mh(DecomposableGraph& g, PerfectSequence& seq, const HiwParams& prior,
                  const HiwParams& posterior, const GraphPrior* gp, const PairSampler& pairs,
                  RngStream& rng) {
    const EdgeProposal prop = propose_edge_move(g, rng, pairs);
    if (prop.add) {
        g.add_edge(prop.j, prop.k);
        auto seq2 = try_perfect_sequence(g);
        if (!seq2) {
            g.remove_edge(prop.j, prop.k);
            return false;
        }
        // The new edge lies in exactly one clique of the enlarged graph, so
        // the closed-form ratio applies there.
        double log_a = log_ml_ratio_edge(*seq2, prop.j, prop.k, prior, posterior);
        if (gp) log_a += log_graph_prior_ratio(*gp, true);
        if (std::log(rng.uniform01()) < log_a) {
            seq = *std::move(seq2);
            return true;
        }
        g.remove_edge(prop.j, prop.k);
        return false;
    }
    auto split = removal_decomposition(g, seq, prop.j, prop.k);
    if (!split) return false;
    double log_a = -log_ml_ratio_edge(seq, prop.j, prop.k, prior, posterior);
    if (gp) log_a += log_graph_prior_ratio(*gp, false);
    if (std::log(rng.uniform01()) < log_a) {
        g.remove_edge(prop.j, prop.k);
        seq = std::move(split->spliced);
        return true;
    }
    return false;
}

Eigen::MatrixXd draw_theta(const PerfectSequence& seq, const HiwParams& posterior, int p,
                           RngStream& rng) {
    const auto blocks = sample_hiw(seq, posterior.delta, posterior.phi, rng);
    return clique_inverse_assemble(p, seq, blocks);
}

void step_classical_tau(Eigen::VectorXd& tau, const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& theta, double nu, RngStream& rng) {
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    tau.resize(n);
    for (int i = 0; i < n; ++i) {
        const double d = mahalanobis_precision(y.row(i).transpose(), mu, theta);
        tau(i) = rng.gamma(0.5 * (nu + p), 0.5 * (nu + d));
    }
}

void step_alternative_tau(Eigen::MatrixXd& tau, const Eigen::MatrixXd& y,
                          const Eigen::VectorXd& mu, const Eigen::MatrixXd& theta, double nu,
                          RngStream& rng) {
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    if (tau.rows() != n || tau.cols() != p)
        throw std::invalid_argument("step_alternative_tau: tau shape mismatch");
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd ytil = y.row(i).transpose() - mu;
        Eigen::VectorXd x = tau.row(i).transpose().array().sqrt() * ytil.array();
        for (int j = 0; j < p; ++j) {
            const double tjj = theta(j, j);
            const double cross = theta.col(j).dot(x) - tjj * x(j);
            const double t = sample_sqrt_gamma(
                {0.5 * (nu + 1.0), 0.5 * (nu + ytil(j) * ytil(j) * tjj), ytil(j) * cross}, rng);
            tau(i, j) = t;
            x(j) = std::sqrt(t) * ytil(j);
        }
    }
}

void step_dirichlet(DpState& dp, const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                    const Eigen::MatrixXd& theta, const DirichletStepOptions& opt,
                    RngStream& rng) {
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    if (dp.n_rows() != n) throw std::invalid_argument("step_dirichlet: row count mismatch");
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd ytil = y.row(i).transpose() - mu;
        if (opt.recluster)
            dirichlet_assignment_sweep(dp.rows[i], ytil, theta, dp.alpha, opt.nu, rng);
        dirichlet_value_sweep(dp.rows[i], ytil, theta, opt.nu, rng);
    }
    if (opt.update_alpha) {
        sample_w(dp, p, rng);
        double sum_k = 0.0;
        for (const auto& r : dp.rows) sum_k += r.n_clusters();
        double sum_log_w = 0.0;
        for (double w : dp.w) sum_log_w += std::log(w);
        dp.alpha = sample_alpha(opt.prior_a, opt.prior_b, n, p, sum_k, sum_log_w, rng);
    }
}

Eigen::VectorXd update_mu(MuMode mode, const Eigen::MatrixXd& y, const Eigen::MatrixXd& tau_cells,
                          const Eigen::MatrixXd& theta, double sigma_mu, RngStream& rng) {
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(y.cols());
    if (n == 0) return Eigen::VectorXd::Zero(p);
    if (mode == MuMode::Naive) return y.colwise().mean().transpose();
    if (tau_cells.rows() != n || tau_cells.cols() != p)
        throw std::invalid_argument("update_mu: tau shape mismatch");
    if (mode == MuMode::Robust) {
        const Eigen::VectorXd num =
            (tau_cells.array() * y.array()).matrix().colwise().sum().transpose();
        const Eigen::VectorXd den = tau_cells.colwise().sum().transpose();
        return num.array() / den.array();
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd s = tau_cells.row(i).transpose().array().sqrt();
        const Eigen::MatrixXd prec_i = s.asDiagonal() * theta * s.asDiagonal();
        m += prec_i;
        b += prec_i * y.row(i).transpose();
    }
    if (mode == MuMode::ExactDraw) {
        if (!(sigma_mu > 0.0)) throw ConfigError("update_mu: sigma_mu must be positive");
        m.diagonal().array() += 1.0 / sigma_mu;
    }
    const SpdMatrix prec(std::move(m));
    const Eigen::VectorXd mean = prec.llt().solve(b);
    return sample_mvn_precision(mean, prec, rng);
}

namespace {

SpdMatrix prior_scale_matrix(const ChainConfig& cfg, int p) {
    if (p < 2) throw DataError("chain: need at least two variables");
    const double s = cfg.phi_scale > 0.0 ? cfg.phi_scale : default_phi_scale(cfg.model, p);
    return SpdMatrix(Eigen::MatrixXd::Identity(p, p) * s);
}

PairSampler make_pair_sampler(const ChainConfig& cfg, const Eigen::MatrixXd& y) {
    const int p = static_cast<int>(y.cols());
    if (cfg.proposal_weighting == ProposalWeighting::Uniform || y.rows() < 2)
        return PairSampler(p);
    const Eigen::VectorXd mu = y.colwise().mean().transpose();
    const Eigen::MatrixXd c = y.rowwise() - mu.transpose();
    const Eigen::MatrixXd s = c.transpose() * c / static_cast<double>(y.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            const double den = std::sqrt(s(j, j) * s(k, k));
            // Floor keeps every pair proposable; the weighting only biases.
            w(j, k) = std::max(den > 0.0 ? std::abs(s(j, k)) / den : 0.0, 1e-3);
        }
    return PairSampler(p, w);
}

void validate_config(const ChainConfig& cfg, const Eigen::MatrixXd& y) {
    if (y.cols() < 2) throw DataError("chain: need at least two variables");
    if (!y.allFinite()) throw DataError("chain: data contains non-finite entries");
    if (cfg.edge_proposals < 0) throw ConfigError("edge_proposals must be >= 0");
    if (cfg.tau_every < 1) throw ConfigError("tau_every must be >= 1");
    if (cfg.recluster_every < 1) throw ConfigError("recluster_every must be >= 1");
    if (!(cfg.burn_in_frac >= 0.0 && cfg.burn_in_frac < 1.0))
        throw ConfigError("burn_in_frac must be in [0, 1)");
    if (!(cfg.nu > 0.0)) throw ConfigError("nu must be positive");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(cfg.d > 0.0 && cfg.d < 1.0)) throw ConfigError("d must be in (0, 1)");
    if (!(cfg.sigma_mu > 0.0)) throw ConfigError("sigma_mu must be positive");
    if (cfg.trace_every < 1) throw ConfigError("trace_every must be >= 1");
    if (cfg.checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if (cfg.checkpoint_every > 0 && cfg.checkpoint_path.empty())
        throw ConfigError("checkpoint_every set but checkpoint_path empty");
    if (!(cfg.tau_quantile >= 0.0 && cfg.tau_quantile <= 1.0))
        throw ConfigError("tau_quantile must be in [0, 1]");
    if (cfg.model == ModelKind::DirichletT && !(cfg.alpha > 0.0))
        throw ConfigError("alpha must be positive");
    if (cfg.model == ModelKind::Gaussian && cfg.tau_init == TauInitKind::File)
        throw ConfigError("gaussian model takes no divisor weights");
}

// Rows of a supplied divisor matrix become clusters by grouping exactly
// equal values, preserving first-appearance order.
DpRow row_from_values(const Eigen::VectorXd& v) {
    DpRow r;
    r.labels.resize(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        int lab = -1;
        for (std::size_t k = 0; k < r.values.size(); ++k)
            if (r.values[k] == v(j)) {
                lab = static_cast<int>(k);
                break;
            }
        if (lab < 0) {
            lab = static_cast<int>(r.values.size());
            r.values.push_back(v(j));
        }
        r.labels[static_cast<std::size_t>(j)] = lab;
    }
    return r;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
    Eigen::Index r = 0, c = 0;
    if (!(is >> r >> c) || r < 0 || c < 0) throw DataError("checkpoint: bad matrix header");
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            if (!(is >> m(i, j))) throw DataError("checkpoint: truncated matrix");
    return m;
}

}  // namespace

ChainRunner::ChainRunner(ChainConfig cfg, Eigen::MatrixXd y)
    : cfg_(std::move(cfg)),
      y_(std::move(y)),
      p_(static_cast<int>(y_.cols())),
      n_(static_cast<int>(y_.rows())),
      prior_{cfg_.delta, prior_scale_matrix(cfg_, static_cast<int>(y_.cols()))},
      posterior_(prior_),
      pairs_(make_pair_sampler(cfg_, y_)),
      state_{} {
    validate_config(cfg_, y_);
    has_latents_ = cfg_.model == ModelKind::ClassicalT || cfg_.model == ModelKind::AlternativeT ||
                   cfg_.model == ModelKind::DirichletT;
    init_state();
}

void ChainRunner::init_state() {
    state_.graph = DecomposableGraph(p_);
    state_.seq = perfect_sequence(state_.graph);
    state_.theta = Eigen::MatrixXd::Identity(p_, p_);
    state_.rng = RngStream(cfg_.seed);
    state_.iter = 0;
    state_.tau_steps = 0;
    state_.mu = n_ > 0 ? Eigen::VectorXd(y_.colwise().mean().transpose())
                       : Eigen::VectorXd::Zero(p_);

    if (cfg_.tau_quantile <= 0.0) {
        tau_thresh_ = 0.0;
    } else if (cfg_.tau_quantile >= 1.0) {
        tau_thresh_ = std::numeric_limits<double>::infinity();
    } else {
        tau_thresh_ = gamma_quantile(cfg_.tau_quantile, 0.5 * cfg_.nu, 0.5 * cfg_.nu);
    }

    state_.tau_cells = Eigen::MatrixXd::Ones(n_, p_);
    state_.tau_rows = Eigen::VectorXd::Ones(n_);
    state_.dp.rows.clear();
    state_.dp.alpha = cfg_.alpha;
    if (cfg_.model == ModelKind::DirichletT)
        for (int i = 0; i < n_; ++i) state_.dp.rows.push_back(single_cluster_row(p_, 1.0));

    const bool weighted = cfg_.model != ModelKind::Gaussian;
    if (weighted && n_ > 0) {
        if (cfg_.tau_init == TauInitKind::File) {
            const Eigen::MatrixXd& v = cfg_.tau_init_values;
            const bool vec = (v.rows() == n_ && v.cols() == 1) || (v.rows() == 1 && v.cols() == n_);
            const bool full = v.rows() == n_ && v.cols() == p_;
            if (!((v.array() > 0.0).all()) || !v.allFinite())
                throw DataError("tau init file: weights must be positive and finite");
            if (cfg_.model == ModelKind::ClassicalT) {
                if (!vec) throw DataError("tau init file: expected one weight per observation");
                state_.tau_rows =
                    v.rows() == 1 ? Eigen::VectorXd(v.row(0).transpose()) : Eigen::VectorXd(v.col(0));
                for (int i = 0; i < n_; ++i) state_.tau_cells.row(i).setConstant(state_.tau_rows(i));
            } else if (cfg_.model == ModelKind::GaussianRobustScatter) {
                if (vec) {
                    const Eigen::VectorXd t =
                        v.rows() == 1 ? Eigen::VectorXd(v.row(0).transpose()) : Eigen::VectorXd(v.col(0));
                    for (int i = 0; i < n_; ++i) state_.tau_cells.row(i).setConstant(t(i));
                } else if (full) {
                    state_.tau_cells = v;
                } else {
                    throw DataError("tau init file: shape matches neither n x 1 nor n x p");
                }
            } else {
                if (!full) throw DataError("tau init file: expected an n x p matrix");
                state_.tau_cells = v;
                if (cfg_.model == ModelKind::DirichletT)
                    for (int i = 0; i < n_; ++i)
                        state_.dp.rows[i] = row_from_values(v.row(i).transpose());
            }
        } else if (cfg_.tau_init == TauInitKind::Warmup) {
            warmup_tau();
        }
        if (cfg_.mu_mode != MuMode::Naive)
            state_.mu = update_mu(MuMode::Robust, y_, state_.tau_cells, state_.theta, cfg_.sigma_mu,
                                  state_.rng);
    }

    refresh_scatter();

    result_ = ChainResult{};
    result_.p = p_;
    result_.n = n_;
    result_.burn_in = static_cast<long>(cfg_.burn_in_frac * static_cast<double>(cfg_.edge_proposals));
    result_.edge_counts = Eigen::MatrixXd::Zero(p_, p_);
    result_.mu_sum = Eigen::VectorXd::Zero(p_);
    result_.tau_low_counts = Eigen::MatrixXd::Zero(n_, p_);
    result_.edge_trace.emplace_back(0, 0);

    run_edges_.clear();
    pending_ = 0;
}

void ChainRunner::warmup_tau() {
    // A few sweeps of the model's own conditionals under a diagonal precision
    // built from inverse sample variances stand in for an external estimate.
    Eigen::VectorXd var(p_);
    for (int j = 0; j < p_; ++j) {
        const double m = y_.col(j).mean();
        var(j) = std::max((y_.col(j).array() - m).square().mean(), 1e-12);
    }
    const Eigen::MatrixXd theta0 = var.cwiseInverse().asDiagonal();

    for (int sweep = 0; sweep < 5; ++sweep) {
        switch (cfg_.model) {
            case ModelKind::ClassicalT:
            case ModelKind::GaussianRobustScatter: {
                step_classical_tau(state_.tau_rows, y_, state_.mu, theta0, cfg_.nu, state_.rng);
                for (int i = 0; i < n_; ++i)
                    state_.tau_cells.row(i).setConstant(state_.tau_rows(i));
                break;
            }
            case ModelKind::AlternativeT:
                step_alternative_tau(state_.tau_cells, y_, state_.mu, theta0, cfg_.nu, state_.rng);
                break;
            case ModelKind::DirichletT: {
                DirichletStepOptions opt;
                opt.recluster = true;
                opt.update_alpha = false;
                opt.nu = cfg_.nu;
                step_dirichlet(state_.dp, y_, state_.mu, theta0, opt, state_.rng);
                tau_cells_from_dp();
                break;
            }
            default: return;
        }
        if (cfg_.mu_mode != MuMode::Naive)
            state_.mu = update_mu(MuMode::Robust, y_, state_.tau_cells, theta0, cfg_.sigma_mu,
                                  state_.rng);
    }
}

void ChainRunner::tau_cells_from_dp() {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < p_; ++j) state_.tau_cells(i, j) = state_.dp.rows[i].tau(j);
}

void ChainRunner::refresh_scatter() {
    const Eigen::MatrixXd s = n_ > 0 ? weighted_scatter_cells(y_, state_.mu, state_.tau_cells)
                                     : Eigen::MatrixXd::Zero(p_, p_);
    posterior_ = posterior_params(prior_, s, n_);
}

void ChainRunner::tau_refresh() {
    state_.theta = draw_theta(state_.seq, posterior_, p_, state_.rng);
    switch (cfg_.model) {
        case ModelKind::ClassicalT:
            step_classical_tau(state_.tau_rows, y_, state_.mu, state_.theta, cfg_.nu, state_.rng);
            for (int i = 0; i < n_; ++i) state_.tau_cells.row(i).setConstant(state_.tau_rows(i));
            break;
        case ModelKind::AlternativeT:
            step_alternative_tau(state_.tau_cells, y_, state_.mu, state_.theta, cfg_.nu,
                                 state_.rng);
            break;
        case ModelKind::DirichletT: {
            DirichletStepOptions opt;
            opt.recluster = state_.tau_steps % cfg_.recluster_every == 0;
            opt.update_alpha = cfg_.alpha_prior_a > 0.0 && cfg_.alpha_prior_b > 0.0;
            opt.prior_a = cfg_.alpha_prior_a;
            opt.prior_b = cfg_.alpha_prior_b;
            opt.nu = cfg_.nu;
            step_dirichlet(state_.dp, y_, state_.mu, state_.theta, opt, state_.rng);
            tau_cells_from_dp();
            break;
        }
        default: break;
    }
    if (cfg_.mu_mode != MuMode::Naive)
        state_.mu = update_mu(cfg_.mu_mode, y_, state_.tau_cells, state_.theta, cfg_.sigma_mu,
                              state_.rng);
    ++state_.tau_steps;
    refresh_scatter();
    record_tau_step();
}

void ChainRunner::record_tau_step() {
    if (cfg_.model == ModelKind::DirichletT) {
        result_.alpha_trace.emplace_back(state_.iter, state_.dp.alpha);
        double k = 0.0;
        for (const auto& r : state_.dp.rows) k += r.n_clusters();
        result_.clusters_trace.emplace_back(state_.iter, n_ > 0 ? k / n_ : 0.0);
    }
    if (state_.iter <= result_.burn_in) return;
    result_.mu_sum += state_.mu;
    ++result_.mu_samples;
    if (cfg_.record_mu_trace) result_.mu_trace.push_back(state_.mu);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < p_; ++j)
            if (state_.tau_cells(i, j) < tau_thresh_) result_.tau_low_counts(i, j) += 1.0;
    ++result_.tau_snapshots;
}

void ChainRunner::flush_edge_run() {
    if (pending_ == 0) return;
    for (const auto& [j, k] : run_edges_)
        result_.edge_counts(j, k) += static_cast<double>(pending_);
    pending_ = 0;
}

void ChainRunner::run_proposals(long count) {
    const long target = std::min<long>(cfg_.edge_proposals, state_.iter + std::max<long>(0, count));
    const GraphPrior gp{cfg_.d};
    const GraphPrior* gpp = cfg_.include_graph_prior ? &gp : nullptr;

    while (state_.iter < target) {
        const bool accepted =
            step_edge_mh(state_.graph, state_.seq, prior_, posterior_, gpp, pairs_, state_.rng);
        ++state_.iter;
        ++result_.proposals;
        if (accepted) {
            ++result_.accepted;
            flush_edge_run();
            run_edges_ = state_.graph.edges();
        }
        if (state_.iter > result_.burn_in) {
            ++pending_;
            ++result_.edge_total;
        }
        if (state_.iter % cfg_.trace_every == 0)
            result_.edge_trace.emplace_back(state_.iter, state_.graph.n_edges());
        if (has_latents_ && state_.iter % cfg_.tau_every == 0) tau_refresh();
        if (cfg_.checkpoint_every > 0 && state_.iter % cfg_.checkpoint_every == 0) {
            std::ofstream os(cfg_.checkpoint_path);
            if (!os) throw DataError("cannot write checkpoint: " + cfg_.checkpoint_path);
            save_checkpoint(os);
        }
    }
    flush_edge_run();
    if (state_.iter == cfg_.edge_proposals && result_.mu_samples == 0) {
        result_.mu_sum = state_.mu;
        result_.mu_samples = 1;
    }
}

void ChainRunner::run() { run_proposals(cfg_.edge_proposals - state_.iter); }

void ChainRunner::save_checkpoint(std::ostream& os) const {
    // 17 significant digits round-trip IEEE doubles exactly through the
    // stream extractor (hex floats would not parse back).
    os << std::setprecision(17);
    os << "tggm-checkpoint 1\n";
    os << to_string(cfg_.model) << ' ' << p_ << ' ' << n_ << ' ' << cfg_.seed << ' '
       << cfg_.edge_proposals << '\n';
    os << state_.iter << ' ' << state_.tau_steps << ' ' << result_.proposals << ' '
       << result_.accepted << ' ' << pending_ << '\n';
    const auto rs = state_.rng.serialize();
    for (std::size_t i = 0; i < rs.size(); ++i) os << (i ? " " : "") << rs[i];
    os << '\n';
    os << state_.graph.n_edges();
    for (const auto& [j, k] : state_.graph.edges()) os << ' ' << j << ' ' << k;
    os << '\n';
    os << state_.mu.size();
    for (Eigen::Index i = 0; i < state_.mu.size(); ++i) os << ' ' << state_.mu(i);
    os << '\n';
    os << state_.tau_rows.size();
    for (Eigen::Index i = 0; i < state_.tau_rows.size(); ++i) os << ' ' << state_.tau_rows(i);
    os << '\n';
    write_matrix(os, state_.tau_cells);
    write_matrix(os, state_.theta);
    os << state_.dp.rows.size() << ' ' << state_.dp.alpha << '\n';
    for (const auto& r : state_.dp.rows) {
        os << r.n_clusters();
        for (int l : r.labels) os << ' ' << l;
        for (double v : r.values) os << ' ' << v;
        os << '\n';
    }
    os << state_.dp.w.size();
    for (double w : state_.dp.w) os << ' ' << w;
    os << '\n';

    os << result_.burn_in << ' ' << result_.edge_total << ' ' << result_.mu_samples << ' '
       << result_.tau_snapshots << '\n';
    write_matrix(os, result_.edge_counts);
    write_matrix(os, result_.tau_low_counts);
    os << result_.mu_sum.size();
    for (Eigen::Index i = 0; i < result_.mu_sum.size(); ++i) os << ' ' << result_.mu_sum(i);
    os << '\n';
    os << result_.edge_trace.size() << '\n';
    for (const auto& [it, e] : result_.edge_trace) os << it << ' ' << e << '\n';
    os << result_.alpha_trace.size() << '\n';
    for (const auto& [it, a] : result_.alpha_trace) os << it << ' ' << a << '\n';
    os << result_.clusters_trace.size() << '\n';
    for (const auto& [it, c] : result_.clusters_trace) os << it << ' ' << c << '\n';
    os << result_.mu_trace.size() << '\n';
    for (const auto& m : result_.mu_trace) {
        for (Eigen::Index i = 0; i < m.size(); ++i) os << (i ? " " : "") << m(i);
        os << '\n';
    }
}

ChainRunner ChainRunner::load_checkpoint(std::istream& is, ChainConfig cfg, Eigen::MatrixXd y) {
    ChainRunner r(std::move(cfg), std::move(y));

    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "tggm-checkpoint" || version != 1)
        throw DataError("checkpoint: unrecognized header");
    std::string model;
    int p = 0, n = 0;
    std::uint64_t seed = 0;
    long proposals_total = 0;
    if (!(is >> model >> p >> n >> seed >> proposals_total))
        throw DataError("checkpoint: truncated identity line");
    if (model != to_string(r.cfg_.model) || p != r.p_ || n != r.n_ || seed != r.cfg_.seed ||
        proposals_total != r.cfg_.edge_proposals)
        throw DataError("checkpoint: does not match the supplied config/data");

    if (!(is >> r.state_.iter >> r.state_.tau_steps >> r.result_.proposals >> r.result_.accepted >>
          r.pending_))
        throw DataError("checkpoint: truncated counters");
    std::array<std::uint64_t, 5> rs{};
    for (auto& v : rs)
        if (!(is >> v)) throw DataError("checkpoint: truncated rng state");
    r.state_.rng = RngStream::deserialize(rs);

    int n_edges = 0;
    if (!(is >> n_edges) || n_edges < 0) throw DataError("checkpoint: bad edge count");
    r.state_.graph = DecomposableGraph(r.p_);
    for (int e = 0; e < n_edges; ++e) {
        int j = 0, k = 0;
        if (!(is >> j >> k)) throw DataError("checkpoint: truncated edge list");
        r.state_.graph.add_edge(j, k);
    }
    r.state_.seq = perfect_sequence(r.state_.graph);

    Eigen::Index sz = 0;
    if (!(is >> sz) || sz != r.p_) throw DataError("checkpoint: bad mean vector");
    for (Eigen::Index i = 0; i < sz; ++i)
        if (!(is >> r.state_.mu(i))) throw DataError("checkpoint: truncated mean");
    if (!(is >> sz)) throw DataError("checkpoint: bad tau vector");
    r.state_.tau_rows.resize(sz);
    for (Eigen::Index i = 0; i < sz; ++i)
        if (!(is >> r.state_.tau_rows(i))) throw DataError("checkpoint: truncated tau");
    r.state_.tau_cells = read_matrix(is);
    r.state_.theta = read_matrix(is);
    std::size_t n_rows = 0;
    if (!(is >> n_rows >> r.state_.dp.alpha)) throw DataError("checkpoint: bad dp header");
    r.state_.dp.rows.assign(n_rows, DpRow{});
    for (auto& row : r.state_.dp.rows) {
        int kk = 0;
        if (!(is >> kk) || kk < 0) throw DataError("checkpoint: bad dp row");
        row.labels.resize(static_cast<std::size_t>(r.p_));
        for (int& l : row.labels)
            if (!(is >> l) || l < 0 || l >= kk)
                throw DataError("checkpoint: dp label out of range");
        row.values.resize(static_cast<std::size_t>(kk));
        for (double& v : row.values)
            if (!(is >> v)) throw DataError("checkpoint: truncated dp values");
    }
    std::size_t nw = 0;
    if (!(is >> nw)) throw DataError("checkpoint: bad dp weights");
    r.state_.dp.w.resize(nw);
    for (double& w : r.state_.dp.w)
        if (!(is >> w)) throw DataError("checkpoint: truncated dp weights");

    if (!(is >> r.result_.burn_in >> r.result_.edge_total >> r.result_.mu_samples >>
          r.result_.tau_snapshots))
        throw DataError("checkpoint: truncated accumulators");
    r.result_.edge_counts = read_matrix(is);
    r.result_.tau_low_counts = read_matrix(is);
    if (!(is >> sz) || sz != r.p_) throw DataError("checkpoint: bad mean accumulator");
    for (Eigen::Index i = 0; i < sz; ++i)
        if (!(is >> r.result_.mu_sum(i))) throw DataError("checkpoint: truncated mean accumulator");
    std::size_t m = 0;
    if (!(is >> m)) throw DataError("checkpoint: bad trace header");
    r.result_.edge_trace.assign(m, {0, 0});
    for (auto& [it, e] : r.result_.edge_trace)
        if (!(is >> it >> e)) throw DataError("checkpoint: truncated trace");
    if (!(is >> m)) throw DataError("checkpoint: bad alpha trace header");
    r.result_.alpha_trace.assign(m, {0, 0.0});
    for (auto& [it, a] : r.result_.alpha_trace)
        if (!(is >> it >> a)) throw DataError("checkpoint: truncated alpha trace");
    if (!(is >> m)) throw DataError("checkpoint: bad cluster trace header");
    r.result_.clusters_trace.assign(m, {0, 0.0});
    for (auto& [it, c] : r.result_.clusters_trace)
        if (!(is >> it >> c)) throw DataError("checkpoint: truncated cluster trace");
    if (!(is >> m)) throw DataError("checkpoint: bad mu trace header");
    r.result_.mu_trace.assign(m, Eigen::VectorXd(r.p_));
    for (auto& v : r.result_.mu_trace)
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!(is >> v(i))) throw DataError("checkpoint: truncated mu trace");

    r.run_edges_ = r.state_.graph.edges();
    r.refresh_scatter();
    return r;
}

ChainResult run_chain(const ChainConfig& cfg, const Eigen::MatrixXd& y) {
    ChainRunner runner(cfg, y);
    runner.run();
    return runner.result();
}

}  // namespace tggm

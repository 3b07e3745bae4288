#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tggm/dp.hpp"
#include "tggm/graph.hpp"
#include "tggm/hiw.hpp"
#include "tggm/rng.hpp"

namespace tggm {

enum class ModelKind { Gaussian, GaussianRobustScatter, ClassicalT, AlternativeT, DirichletT };
enum class MuMode { Naive, Robust, ApproxDraw, ExactDraw };
enum class ProposalWeighting { Uniform, AbsCorrelation };
enum class TauInitKind { Ones, Warmup, File };

ModelKind parse_model_kind(const std::string& s);  // ConfigError on unknown names
std::string to_string(ModelKind m);
MuMode parse_mu_mode(const std::string& s);
std::string to_string(MuMode m);
ProposalWeighting parse_proposal_weighting(const std::string& s);
std::string to_string(ProposalWeighting w);

// I_p multiplier of the prior scale when the config leaves it unset: 1/5 for
// the normal model, 1/10 for the t models, 1/20 for t models at p >= 100.
double default_phi_scale(ModelKind model, int p);

struct ChainConfig {
    ModelKind model = ModelKind::Gaussian;
    double nu = 3.0;
    double alpha = 1.0;          // initial concentration (Dirichlet model)
    double alpha_prior_a = 1.0;  // Gamma(a, b) prior on alpha; a <= 0 keeps alpha fixed
    double alpha_prior_b = 1.0;
    double delta = 1.0;
    double phi_scale = 0.0;  // <= 0 selects default_phi_scale(model, p)
    double d = 0.05;         // prior edge inclusion probability
    double sigma_mu = 1e5;   // prior variance of each mean coordinate (exact draw)
    std::uint64_t seed = 1;
    long edge_proposals = 0;
    int tau_every = 10;        // edge proposals between divisor refreshes
    int recluster_every = 20;  // divisor refreshes between label sweeps
    double burn_in_frac = 0.2;
    MuMode mu_mode = MuMode::Robust;
    bool include_graph_prior = true;
    ProposalWeighting proposal_weighting = ProposalWeighting::Uniform;
    TauInitKind tau_init = TauInitKind::Warmup;
    Eigen::MatrixXd tau_init_values;  // TauInitKind::File payload
    double tau_quantile = 0.05;       // outlier-map reference quantile
    long trace_every = 100;
    long checkpoint_every = 0;  // proposals between snapshots, 0 disables
    std::string checkpoint_path;
    bool record_mu_trace = false;
};

struct ChainState {
    DecomposableGraph graph{1};
    PerfectSequence seq;
    Eigen::MatrixXd theta;      // exact zeros off the graph
    Eigen::VectorXd mu;
    Eigen::VectorXd tau_rows;   // classical: one divisor per observation
    Eigen::MatrixXd tau_cells;  // alternative / fixed-weight models
    DpState dp;                 // Dirichlet model
    long iter = 0;              // edge proposals completed
    long tau_steps = 0;         // divisor refreshes completed
    RngStream rng{0};
};

struct ChainResult {
    int p = 0;
    int n = 0;
    long proposals = 0;
    long accepted = 0;
    long burn_in = 0;

    Eigen::MatrixXd edge_counts;  // upper triangle, post burn-in inclusion counts
    long edge_total = 0;

    std::vector<std::pair<long, int>> edge_trace;  // (proposal index, edge count)

    Eigen::VectorXd mu_sum;  // post burn-in accumulation
    long mu_samples = 0;
    std::vector<Eigen::VectorXd> mu_trace;

    std::vector<std::pair<long, double>> alpha_trace;     // (proposal index, alpha)
    std::vector<std::pair<long, double>> clusters_trace;  // mean clusters per row

    Eigen::MatrixXd tau_low_counts;  // n x p counts under the prior quantile
    long tau_snapshots = 0;

    Eigen::MatrixXd edge_probabilities() const;        // p x p symmetric, zero diagonal
    Eigen::MatrixXd tau_outlier_probabilities() const; // n x p fractions
    Eigen::VectorXd mu_mean() const;
    double mean_clusters_per_row() const;  // post burn-in average
    double acceptance_rate() const;
};

// One Metropolis update of (graph, seq) under fixed prior/posterior scales.
// Non-decomposable proposals are rejected outright; valid ones accept with
// the closed-form marginal-likelihood ratio (times the prior odds when gp is
// non-null). Returns true when the graph changed.
bool step_edge_mh(DecomposableGraph& g, PerfectSequence& seq, const HiwParams& prior,
                  const HiwParams& posterior, const GraphPrior* gp, const PairSampler& pairs,
                  RngStream& rng);

// Precision draw: per-clique covariance blocks from the posterior law,
// assembled into the full matrix with exact zeros on non-edges.
Eigen::MatrixXd draw_theta(const PerfectSequence& seq, const HiwParams& posterior, int p,
                           RngStream& rng);

// Divisor refreshes. Classical: one Gamma((nu+p)/2, (nu+delta_i)/2) draw per
// observation, delta_i the precision-weighted squared distance from mu.
// Alternative: a full single-site sweep of sqrt-tilted gamma conditionals.
void step_classical_tau(Eigen::VectorXd& tau, const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                        const Eigen::MatrixXd& theta, double nu, RngStream& rng);
void step_alternative_tau(Eigen::MatrixXd& tau, const Eigen::MatrixXd& y,
                          const Eigen::VectorXd& mu, const Eigen::MatrixXd& theta, double nu,
                          RngStream& rng);

struct DirichletStepOptions {
    bool recluster = false;     // run the label sweep this refresh
    bool update_alpha = true;   // resample concentration (Gamma(a, b) prior)
    double prior_a = 1.0;
    double prior_b = 1.0;
    double nu = 3.0;
};

void step_dirichlet(DpState& dp, const Eigen::MatrixXd& y, const Eigen::VectorXd& mu,
                    const Eigen::MatrixXd& theta, const DirichletStepOptions& opt,
                    RngStream& rng);

// Mean update given the current divisors (always passed as an n x p matrix;
// classical rows are constant). Naive ignores the weights entirely, robust
// takes componentwise weighted averages, the draw modes sample a Gaussian
// whose precision sums the per-observation D^{1/2} Theta D^{1/2} terms
// (exact additionally adds the prior precision I/sigma_mu).
Eigen::VectorXd update_mu(MuMode mode, const Eigen::MatrixXd& y, const Eigen::MatrixXd& tau_cells,
                          const Eigen::MatrixXd& theta, double sigma_mu, RngStream& rng);

// Full run. The chain starts from the empty graph, initializes divisors per
// config (all ones, a short warmup under a diagonal precision, or a supplied
// matrix) and executes the configured schedule. Deterministic given (config,
// data).
class ChainRunner {
  public:
    ChainRunner(ChainConfig cfg, Eigen::MatrixXd y);

    void run();                      // remaining proposals to completion
    void run_proposals(long count);  // at most count further proposals

    const ChainConfig& config() const { return cfg_; }
    const ChainState& state() const { return state_; }
    const ChainResult& result() const { return result_; }

    void save_checkpoint(std::ostream& os) const;
    // Rebuilds a runner mid-stream; cfg and y must match the original run.
    static ChainRunner load_checkpoint(std::istream& is, ChainConfig cfg, Eigen::MatrixXd y);

  private:
    void init_state();
    void warmup_tau();
    void tau_cells_from_dp();
    void refresh_scatter();
    void tau_refresh();
    void record_tau_step();
    void flush_edge_run();

    ChainConfig cfg_;
    Eigen::MatrixXd y_;
    int p_ = 0;
    int n_ = 0;
    HiwParams prior_;
    HiwParams posterior_;
    PairSampler pairs_;
    ChainState state_;
    ChainResult result_;
    std::vector<std::pair<int, int>> run_edges_;  // post-state edges of the pending proposals
    long pending_ = 0;                            // recorded proposals not yet flushed
    double tau_thresh_ = 0.0;                     // prior quantile for the outlier map
    bool has_latents_ = false;
};

ChainResult run_chain(const ChainConfig& cfg, const Eigen::MatrixXd& y);

}  // namespace tggm

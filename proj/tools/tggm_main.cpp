#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tggm/config.hpp"
#include "tggm/errors.hpp"
#include "tggm/io.hpp"
#include "tggm/mcmc.hpp"
#include "tggm/report.hpp"
#include "tggm/simulate.hpp"

namespace {

using namespace tggm;

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "model",          "nu",
        "alpha",          "alpha_prior_a",
        "alpha_prior_b",  "delta",
        "phi_scale",      "d",
        "sigma_mu",       "seed",
        "edge_proposals", "proposals_per_edge",
        "tau_every",      "recluster_every",
        "burn_in_frac",   "mu_mode",
        "include_graph_prior", "proposal_weighting",
        "tau_init",       "tau_quantile",
        "trace_every",    "checkpoint_every",
        "checkpoint_path", "record_mu_trace",
    };
    return keys;
}

struct ConfigFlags {
    std::string file;
    std::map<std::string, std::string> values;
    CLI::App* sub = nullptr;

    void attach(CLI::App* s) {
        sub = s;
        s->add_option("--config", file, "key=value config file");
        for (const auto& key : config_keys())
            s->add_option("--" + key, values[key], "override config key " + key);
    }

    ChainConfig build(int p) const {
        KeyValues kv;
        if (!file.empty()) kv = read_config_file(file);
        for (const auto& key : config_keys())
            if (sub->count("--" + key) > 0) apply_override(kv, key, values.at(key));
        return chain_config_from(kv, p);
    }
};

struct SimulateOpts {
    std::string design = "ar1";
    std::string kind = "normal";
    int p = 25;
    int n = 100;
    double nu = 3.0;
    double alpha = 1.0;
    std::uint64_t seed = 1;
    std::string mu_mode = "auto";
    int cliques = 20;
    int clique_min = 2;
    int clique_max = 5;
    double min_eig = 0.6;
    ContaminationDesign contamination;
    std::string out;
};

int cmd_simulate(const SimulateOpts& o) {
    RngStream rng(o.seed);

    PrecisionTruth truth;
    if (o.design == "ar1") {
        truth = ar1_precision(o.p);
    } else if (o.design == "random-clique") {
        truth = random_clique_graph(o.p, o.cliques, o.clique_min, o.clique_max, o.min_eig, rng);
    } else {
        throw ConfigError("unknown design: " + o.design);
    }

    Eigen::VectorXd mu(o.p);
    std::string mu_choice = o.mu_mode;
    if (mu_choice == "auto") mu_choice = o.design == "ar1" ? "zero" : "normal";
    if (mu_choice == "zero") {
        mu.setZero();
    } else if (mu_choice == "normal") {
        for (int j = 0; j < o.p; ++j) mu(j) = rng.normal();
    } else {
        throw ConfigError("unknown mu choice: " + o.mu_mode);
    }

    Dataset ds;
    if (o.kind == "contaminated") {
        Eigen::MatrixXd x = sample_latent_rows(o.n, truth.theta, rng);
        ds = contaminate(x, truth, mu, o.contamination, rng);
    } else {
        ds = sample_dataset(parse_data_kind(o.kind), o.n, truth, mu, o.nu, o.alpha, rng);
    }

    write_csv(o.out + ".csv", ds.y);
    write_graph(o.out + ".edges.txt", ds.graph);
    write_dense_matrix(o.out + ".theta.txt", ds.theta);
    write_dense_matrix(o.out + ".mu.txt", ds.mu);
    write_dense_matrix(o.out + ".tau.txt", ds.tau);
    std::cout << "wrote " << o.out << ".csv (" << ds.y.rows() << " x " << ds.y.cols()
              << ") with truth sidecars\n";
    return 0;
}

struct FitOpts {
    std::string data;
    std::string out;
    bool resume = false;
    ConfigFlags cfg;
};

void write_pair_trace(const std::string& path, const char* value_name,
                      const std::vector<std::pair<long, double>>& series) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path);
    os << "iter," << value_name << "\n";
    os.precision(17);
    for (const auto& [iter, value] : series) os << iter << "," << value << "\n";
}

int cmd_fit(const FitOpts& o) {
    IngestResult ingested = ingest_csv(o.data);
    if (ingested.dropped_rows > 0)
        std::cout << "dropped " << ingested.dropped_rows << " rows with missing cells\n";

    ChainConfig cfg = o.cfg.build(static_cast<int>(ingested.y.cols()));

    std::unique_ptr<ChainRunner> runner;
    if (o.resume) {
        if (cfg.checkpoint_path.empty()) throw ConfigError("resume needs checkpoint_path");
        std::ifstream is(cfg.checkpoint_path);
        if (!is) throw DataError("cannot open checkpoint " + cfg.checkpoint_path);
        runner = std::make_unique<ChainRunner>(ChainRunner::load_checkpoint(is, cfg, ingested.y));
    } else {
        runner = std::make_unique<ChainRunner>(cfg, ingested.y);
    }
    runner->run();

    const ChainResult& res = runner->result();
    write_edge_probabilities(o.out + ".edges.csv", res.edge_probabilities());

    {
        std::ofstream os(o.out + ".trace.csv");
        if (!os) throw DataError("cannot write " + o.out + ".trace.csv");
        os << "iter,edges\n";
        for (const auto& [iter, edges] : res.edge_trace) os << iter << "," << edges << "\n";
    }

    if (cfg.model != ModelKind::Gaussian) {
        write_csv(o.out + ".taumap.csv", res.tau_outlier_probabilities());
        write_dense_matrix(o.out + ".mu.txt", res.mu_mean());
    }
    if (cfg.model == ModelKind::DirichletT) {
        write_pair_trace(o.out + ".alpha.csv", "alpha", res.alpha_trace);
        write_pair_trace(o.out + ".clusters.csv", "clusters", res.clusters_trace);
    }

    {
        std::ofstream os(o.out + ".summary.txt");
        if (!os) throw DataError("cannot write " + o.out + ".summary.txt");
        os.precision(6);
        os << "model " << to_string(cfg.model) << "\n"
           << "variables " << res.p << "\n"
           << "observations " << res.n << "\n"
           << "proposals " << res.proposals << "\n"
           << "accepted " << res.accepted << "\n"
           << "acceptance_rate " << res.acceptance_rate() << "\n"
           << "burn_in " << res.burn_in << "\n"
           << "recorded_graphs " << res.edge_total << "\n";
        if (cfg.model == ModelKind::DirichletT)
            os << "mean_clusters_per_row " << res.mean_clusters_per_row() << "\n";
    }

    std::cout << "accepted " << res.accepted << " of " << res.proposals
              << " proposals (rate " << res.acceptance_rate() << ")\n"
              << "wrote " << o.out << ".edges.csv and companions\n";
    return 0;
}

struct RocOpts {
    std::vector<std::string> truth_paths;
    std::vector<std::string> posterior_paths;
    int grid_steps = 101;
    std::string out;
};

int cmd_roc(const RocOpts& o) {
    if (o.truth_paths.size() != o.posterior_paths.size())
        throw ConfigError("need one --posterior per --truth");
    if (o.truth_paths.empty()) throw ConfigError("no replicates given");

    std::vector<DecomposableGraph> truths;
    std::vector<Eigen::MatrixXd> posteriors;
    for (std::size_t i = 0; i < o.truth_paths.size(); ++i) {
        truths.push_back(read_graph(o.truth_paths[i]));
        posteriors.push_back(
            read_edge_probabilities(o.posterior_paths[i], truths.back().dim()));
    }

    RocTable table = roc(posteriors, truths, roc_grid(o.grid_steps));
    if (!o.out.empty()) {
        std::ofstream os(o.out);
        if (!os) throw DataError("cannot write " + o.out);
        os << "epsilon,tp,fp,tpr,fpr\n";
        os.precision(17);
        for (const auto& pt : table.points)
            os << pt.epsilon << "," << pt.tp << "," << pt.fp << "," << pt.tpr << "," << pt.fpr
               << "\n";
    }
    std::cout << "auc " << table.auc() << "\n";
    return 0;
}

struct SnapshotOpts {
    std::string checkpoint;
    std::string data;
    std::string out;
    ConfigFlags cfg;
};

ChainRunner load_snapshot(const SnapshotOpts& o) {
    IngestResult ingested = ingest_csv(o.data);
    ChainConfig cfg = o.cfg.build(static_cast<int>(ingested.y.cols()));
    std::ifstream is(o.checkpoint);
    if (!is) throw DataError("cannot open checkpoint " + o.checkpoint);
    return ChainRunner::load_checkpoint(is, cfg, ingested.y);
}

int cmd_trace(const SnapshotOpts& o) {
    ChainRunner runner = load_snapshot(o);
    std::ofstream os(o.out);
    if (!os) throw DataError("cannot write " + o.out);
    os << "iter,edges\n";
    for (const auto& [iter, edges] : runner.result().edge_trace) os << iter << "," << edges << "\n";
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

int cmd_taumap(const SnapshotOpts& o) {
    ChainRunner runner = load_snapshot(o);
    if (runner.result().tau_snapshots == 0)
        throw DataError("checkpoint holds no post burn-in divisor snapshots");
    write_csv(o.out, runner.result().tau_outlier_probabilities());
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

int cmd_ingest_check(const std::string& path) {
    IngestResult r = ingest_csv(path);
    std::cout << "rows " << r.y.rows() << "\ncols " << r.y.cols() << "\ndropped "
              << r.dropped_rows << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure learning for decomposable Gaussian graphical models with "
                 "heavy-tailed divisor weights"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "write a synthetic dataset with truth sidecars");
    sim_cmd->add_option("--design", sim.design, "ar1 or random-clique")->capture_default_str();
    sim_cmd->add_option("--kind", sim.kind,
                        "normal, classical-t, alternative-t, dirichlet-t, or contaminated")
        ->capture_default_str();
    sim_cmd->add_option("--p", sim.p, "variables")->capture_default_str();
    sim_cmd->add_option("--n", sim.n, "observations")->capture_default_str();
    sim_cmd->add_option("--nu", sim.nu, "divisor degrees of freedom")->capture_default_str();
    sim_cmd->add_option("--alpha", sim.alpha, "urn concentration (dirichlet-t)")
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "stream seed")->capture_default_str();
    sim_cmd->add_option("--mu", sim.mu_mode, "zero, normal, or auto (zero for ar1, normal otherwise)")
        ->capture_default_str();
    sim_cmd->add_option("--cliques", sim.cliques, "clique count (random-clique)")
        ->capture_default_str();
    sim_cmd->add_option("--clique-min", sim.clique_min, "smallest clique")->capture_default_str();
    sim_cmd->add_option("--clique-max", sim.clique_max, "largest clique")->capture_default_str();
    sim_cmd->add_option("--min-eig", sim.min_eig, "smallest precision eigenvalue")
        ->capture_default_str();
    sim_cmd->add_option("--events", sim.contamination.n_events, "contamination events")
        ->capture_default_str();
    sim_cmd->add_option("--row-rate", sim.contamination.row_rate, "mean rows per event")
        ->capture_default_str();
    sim_cmd->add_option("--col-rate", sim.contamination.col_rate, "mean columns per event")
        ->capture_default_str();
    sim_cmd->add_option("--value-lo", sim.contamination.value_lo, "divisor lower bound")
        ->capture_default_str();
    sim_cmd->add_option("--value-hi", sim.contamination.value_hi, "divisor upper bound")
        ->capture_default_str();
    sim_cmd->add_flag("--sqrt-division", sim.contamination.sqrt_division,
                      "contaminate through sqrt(tau) instead of tau");
    sim_cmd->add_option("--out", sim.out, "output path prefix")->required();

    FitOpts fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "run one chain and write posterior summaries");
    fit_cmd->add_option("--data", fit.data, "csv with one observation per row")->required();
    fit_cmd->add_option("--out", fit.out, "output path prefix")->required();
    fit_cmd->add_flag("--resume", fit.resume, "continue from the configured checkpoint");
    fit.cfg.attach(fit_cmd);

    RocOpts roc_opts;
    CLI::App* roc_cmd = app.add_subcommand("roc", "pool replicates against truth graphs");
    roc_cmd->add_option("--truth", roc_opts.truth_paths, "truth edge list (repeatable)")
        ->required();
    roc_cmd->add_option("--posterior", roc_opts.posterior_paths,
                        "edge probability csv (repeatable, paired with --truth)")
        ->required();
    roc_cmd->add_option("--grid-steps", roc_opts.grid_steps, "threshold count over [0,1]")
        ->capture_default_str();
    roc_cmd->add_option("--out", roc_opts.out, "roc csv path");

    SnapshotOpts trace_opts;
    CLI::App* trace_cmd = app.add_subcommand("trace", "dump the edge-count trace of a checkpoint");
    trace_cmd->add_option("--checkpoint", trace_opts.checkpoint, "checkpoint file")->required();
    trace_cmd->add_option("--data", trace_opts.data, "csv the chain was fit to")->required();
    trace_cmd->add_option("--out", trace_opts.out, "trace csv path")->required();
    trace_opts.cfg.attach(trace_cmd);

    SnapshotOpts taumap_opts;
    CLI::App* taumap_cmd =
        app.add_subcommand("taumap", "dump the divisor outlier map of a checkpoint");
    taumap_cmd->add_option("--checkpoint", taumap_opts.checkpoint, "checkpoint file")->required();
    taumap_cmd->add_option("--data", taumap_opts.data, "csv the chain was fit to")->required();
    taumap_cmd->add_option("--out", taumap_opts.out, "outlier map csv path")->required();
    taumap_opts.cfg.attach(taumap_cmd);

    std::string ingest_path;
    CLI::App* ingest_cmd = app.add_subcommand("ingest-check", "report csv shape and dropped rows");
    ingest_cmd->add_option("--data", ingest_path, "csv to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim_cmd) return cmd_simulate(sim);
        if (*fit_cmd) return cmd_fit(fit);
        if (*roc_cmd) return cmd_roc(roc_opts);
        if (*trace_cmd) return cmd_trace(trace_opts);
        if (*taumap_cmd) return cmd_taumap(taumap_opts);
        if (*ingest_cmd) return cmd_ingest_check(ingest_path);
    } catch (const tggm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const tggm::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const tggm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "tggm/errors.hpp"
#include "tggm/hiw.hpp"
#include "tggm/mcmc.hpp"
#include "tggm/special.hpp"
#include "tggm/spd.hpp"

using namespace tggm;

namespace {

Eigen::MatrixXd correlated_data(int n, int p, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd z(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) z(i, j) = nd(gen);
    Eigen::MatrixXd y = z;
    for (int j = 1; j < p; ++j) y.col(j) = 0.7 * y.col(j - 1) + 0.8 * z.col(j);
    return y;
}

// exact graph posterior over the 8 three-vertex graphs, matching the chain's
// construction of prior and posterior scale
struct Enum3 {
    std::array<double, 8> prob{};
    std::array<double, 3> marginal{};
};

Enum3 enumerate_p3(const Eigen::MatrixXd& y, double delta, double phi_scale, double d) {
    const int p = 3;
    const int n = static_cast<int>(y.rows());
    HiwParams prior{delta, SpdMatrix(Eigen::MatrixXd::Identity(p, p) * phi_scale)};
    const Eigen::VectorXd mu = n > 0 ? Eigen::VectorXd(y.colwise().mean().transpose())
                                     : Eigen::VectorXd::Zero(p);
    const Eigen::MatrixXd s = n > 0
        ? weighted_scatter_cells(y, mu, Eigen::MatrixXd::Ones(n, p))
        : Eigen::MatrixXd::Zero(p, p);
    const HiwParams post = posterior_params(prior, s, n);
    const GraphPrior gp{d};
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};

    std::vector<double> lw(8);
    for (int code = 0; code < 8; ++code) {
        DecomposableGraph g(p);
        for (int b = 0; b < 3; ++b)
            if (code >> b & 1) g.add_edge(pairs[b].first, pairs[b].second);
        const auto seq = perfect_sequence(g);
        lw[code] = log_marginal_likelihood(seq, prior, post, n, p) +
                   log_graph_prior(gp, g.n_edges(), p);
    }
    double z = lw[0];
    for (int code = 1; code < 8; ++code) z = log_sum_exp(z, lw[code]);
    Enum3 out;
    for (int code = 0; code < 8; ++code) {
        out.prob[code] = std::exp(lw[code] - z);
        for (int b = 0; b < 3; ++b)
            if (code >> b & 1) out.marginal[b] += out.prob[code];
    }
    return out;
}

int code_of(const DecomposableGraph& g) {
    return int(g.has_edge(0, 1)) | int(g.has_edge(0, 2)) << 1 | int(g.has_edge(1, 2)) << 2;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.rows() == 0 || (a - b).cwiseAbs().maxCoeff() == 0.0);
}

}  // namespace

TEST_CASE("name round trips and default prior scales") {
    for (auto m : {ModelKind::Gaussian, ModelKind::GaussianRobustScatter, ModelKind::ClassicalT,
                   ModelKind::AlternativeT, ModelKind::DirichletT})
        CHECK(parse_model_kind(to_string(m)) == m);
    for (auto m : {MuMode::Naive, MuMode::Robust, MuMode::ApproxDraw, MuMode::ExactDraw})
        CHECK(parse_mu_mode(to_string(m)) == m);
    for (auto w : {ProposalWeighting::Uniform, ProposalWeighting::AbsCorrelation})
        CHECK(parse_proposal_weighting(to_string(w)) == w);
    CHECK_THROWS_AS(parse_model_kind("student"), ConfigError);
    CHECK_THROWS_AS(parse_mu_mode("mean"), ConfigError);
    CHECK_THROWS_AS(parse_proposal_weighting("corr"), ConfigError);

    CHECK(default_phi_scale(ModelKind::Gaussian, 10) == 0.2);
    CHECK(default_phi_scale(ModelKind::Gaussian, 500) == 0.2);
    CHECK(default_phi_scale(ModelKind::ClassicalT, 99) == 0.1);
    CHECK(default_phi_scale(ModelKind::DirichletT, 100) == 0.05);
}

TEST_CASE("config validation failures surface as typed errors") {
    const Eigen::MatrixXd y = correlated_data(10, 3, 1);
    ChainConfig base;
    base.edge_proposals = 10;

    auto expect_config_error = [&](auto&& tweak) {
        ChainConfig cfg = base;
        tweak(cfg);
        CHECK_THROWS_AS(ChainRunner(cfg, y), ConfigError);
    };
    expect_config_error([](ChainConfig& c) { c.edge_proposals = -1; });
    expect_config_error([](ChainConfig& c) { c.tau_every = 0; });
    expect_config_error([](ChainConfig& c) { c.recluster_every = 0; });
    expect_config_error([](ChainConfig& c) { c.burn_in_frac = 1.0; });
    expect_config_error([](ChainConfig& c) { c.burn_in_frac = -0.1; });
    expect_config_error([](ChainConfig& c) { c.nu = 0.0; });
    expect_config_error([](ChainConfig& c) { c.delta = -2.0; });
    expect_config_error([](ChainConfig& c) { c.d = 0.0; });
    expect_config_error([](ChainConfig& c) { c.d = 1.0; });
    expect_config_error([](ChainConfig& c) { c.sigma_mu = 0.0; });
    expect_config_error([](ChainConfig& c) { c.trace_every = 0; });
    expect_config_error([](ChainConfig& c) { c.checkpoint_every = -5; });
    expect_config_error([](ChainConfig& c) { c.checkpoint_every = 5; });  // path empty
    expect_config_error([](ChainConfig& c) { c.tau_quantile = 1.5; });
    expect_config_error([](ChainConfig& c) {
        c.model = ModelKind::DirichletT;
        c.alpha = 0.0;
    });
    expect_config_error([](ChainConfig& c) {
        c.tau_init = TauInitKind::File;
        c.tau_init_values = Eigen::MatrixXd::Ones(10, 1);
    });  // gaussian takes no weights

    CHECK_THROWS_AS(ChainRunner(base, Eigen::MatrixXd::Zero(5, 1)), DataError);
    Eigen::MatrixXd bad = y;
    bad(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ChainRunner(base, bad), DataError);

    ChainConfig ct = base;
    ct.model = ModelKind::ClassicalT;
    ct.tau_init = TauInitKind::File;
    ct.tau_init_values = Eigen::MatrixXd::Ones(10, 3);  // wants a vector
    CHECK_THROWS_AS(ChainRunner(ct, y), DataError);
    ct.tau_init_values = -Eigen::MatrixXd::Ones(10, 1);
    CHECK_THROWS_AS(ChainRunner(ct, y), DataError);
    ct.model = ModelKind::AlternativeT;
    ct.tau_init_values = Eigen::MatrixXd::Ones(10, 1);  // wants a matrix
    CHECK_THROWS_AS(ChainRunner(ct, y), DataError);
}

TEST_CASE("edge moves preserve decomposability and report changes") {
    std::mt19937_64 gen(11);
    RngStream rng(12);
    const int p = 6;
    const Eigen::MatrixXd y = correlated_data(30, p, 13);
    HiwParams prior{1.0, SpdMatrix(Eigen::MatrixXd::Identity(p, p) * 0.2)};
    const Eigen::VectorXd mu = y.colwise().mean().transpose();
    const Eigen::MatrixXd s = weighted_scatter_cells(y, mu, Eigen::MatrixXd::Ones(30, p));
    HiwParams post = posterior_params(prior, s, 30);
    GraphPrior gp{0.2};
    PairSampler pairs(p);

    DecomposableGraph g(p);
    PerfectSequence seq = perfect_sequence(g);
    for (int t = 0; t < 3000; ++t) {
        const auto before = g.edges();
        const bool changed = step_edge_mh(g, seq, prior, post, &gp, pairs, rng);
        CHECK(changed == (g.edges() != before));
        REQUIRE(is_decomposable(g));
        REQUIRE(check_running_intersection(g, seq));
    }
}

TEST_CASE("identical scales and even prior accept every decomposable proposal") {
    // At p=3 every single-edge flip stays decomposable, so acceptance is total.
    RngStream rng(14);
    HiwParams prior{1.5, SpdMatrix(Eigen::MatrixXd::Identity(3, 3) * 0.3)};
    GraphPrior gp{0.5};
    PairSampler pairs(3);
    DecomposableGraph g(3);
    PerfectSequence seq = perfect_sequence(g);
    for (int t = 0; t < 500; ++t) CHECK(step_edge_mh(g, seq, prior, prior, &gp, pairs, rng));
}

TEST_CASE("empirical graph distribution matches enumeration after 1e6 steps") {
    const Eigen::MatrixXd y = correlated_data(20, 3, 15);
    const double delta = 1.0, phi_scale = 0.2, d = 0.3;
    const Enum3 exact = enumerate_p3(y, delta, phi_scale, d);

    HiwParams prior{delta, SpdMatrix(Eigen::MatrixXd::Identity(3, 3) * phi_scale)};
    const Eigen::VectorXd mu = y.colwise().mean().transpose();
    const Eigen::MatrixXd s = weighted_scatter_cells(y, mu, Eigen::MatrixXd::Ones(20, 3));
    HiwParams post = posterior_params(prior, s, 20);
    GraphPrior gp{d};
    PairSampler pairs(3);
    RngStream rng(16);

    DecomposableGraph g(3);
    PerfectSequence seq = perfect_sequence(g);
    const long steps = 1000000, burn = 10000;
    std::array<long, 8> counts{};
    for (long t = 0; t < steps; ++t) {
        step_edge_mh(g, seq, prior, post, &gp, pairs, rng);
        if (t >= burn) ++counts[code_of(g)];
    }
    for (int code = 0; code < 8; ++code) {
        const double freq = double(counts[code]) / double(steps - burn);
        CHECK(std::abs(freq - exact.prob[code]) < 0.01);
    }
}

TEST_CASE("prior-only chain at p=4 hits the decomposable-restricted edge prior") {
    // posterior scale equal to the prior scale wipes the likelihood term, so
    // the walk targets d^e (1-d)^(m-e) over decomposable graphs only
    const int p = 4;
    const double d = 0.35;
    HiwParams prior{1.0, SpdMatrix(Eigen::MatrixXd::Identity(p, p) * 0.25)};
    GraphPrior gp{d};
    PairSampler pairs(p);
    RngStream rng(17);

    std::array<double, 64> exact{};
    double z = 0.0;
    for (int code = 0; code < 64; ++code) {
        DecomposableGraph g(p);
        int e = 0, bit = 0;
        for (int j = 0; j < p; ++j)
            for (int k = j + 1; k < p; ++k, ++bit)
                if (code >> bit & 1) {
                    g.add_edge(j, k);
                    ++e;
                }
        if (!is_decomposable(g)) continue;
        exact[code] = std::pow(d, e) * std::pow(1.0 - d, 6 - e);
        z += exact[code];
    }
    int n_ok = 0;
    for (double w : exact) n_ok += w > 0.0;
    CHECK(n_ok == 61);  // 64 graphs minus the three chordless 4-cycles

    DecomposableGraph g(p);
    PerfectSequence seq = perfect_sequence(g);
    const long steps = 400000, burn = 5000;
    std::array<long, 64> counts{};
    for (long t = 0; t < steps; ++t) {
        step_edge_mh(g, seq, prior, prior, &gp, pairs, rng);
        if (t >= burn) {
            int code = 0, bit = 0;
            for (int j = 0; j < p; ++j)
                for (int k = j + 1; k < p; ++k, ++bit) code |= int(g.has_edge(j, k)) << bit;
            ++counts[code];
        }
    }
    double tv = 0.0;
    for (int code = 0; code < 64; ++code)
        tv += 0.5 * std::abs(double(counts[code]) / double(steps - burn) - exact[code] / z);
    CHECK(tv < 0.03);
}

TEST_CASE("empty-data chain samples the graph prior") {
    ChainConfig cfg;
    cfg.model = ModelKind::Gaussian;
    cfg.d = 0.3;
    cfg.seed = 18;
    cfg.edge_proposals = 100000;
    const Eigen::MatrixXd y(0, 3);
    const ChainResult res = run_chain(cfg, y);

    // all 8 graphs on three vertices are decomposable, so each edge marginal
    // under the restricted prior is exactly d
    const Enum3 exact = enumerate_p3(y, cfg.delta, 0.2, cfg.d);
    for (int b = 0; b < 3; ++b) CHECK(exact.marginal[b] == doctest::Approx(cfg.d).epsilon(1e-12));

    const Eigen::MatrixXd probs = res.edge_probabilities();
    CHECK(std::abs(probs(0, 1) - cfg.d) < 0.015);
    CHECK(std::abs(probs(0, 2) - cfg.d) < 0.015);
    CHECK(std::abs(probs(1, 2) - cfg.d) < 0.015);
    CHECK(res.mu_samples >= 1);
    CHECK(res.mu_mean().isZero());
}

TEST_CASE("theta draws carry exact zeros off the graph and stay positive definite") {
    std::mt19937_64 gen(19);
    RngStream rng(20);
    for (int trial = 0; trial < 30; ++trial) {
        const int p = 3 + int(gen() % 5);
        DecomposableGraph g = tst::random_decomposable(p, 40, gen);
        const auto seq = perfect_sequence(g);
        HiwParams post{3.0 + double(gen() % 3), SpdMatrix(tst::random_spd(p, gen))};
        const Eigen::MatrixXd theta = draw_theta(seq, post, p, rng);
        // zeros are exact by construction; symmetry only up to assembly rounding
        CHECK((theta - theta.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * theta.cwiseAbs().maxCoeff());
        for (int j = 0; j < p; ++j)
            for (int k = j + 1; k < p; ++k)
                if (!g.has_edge(j, k)) {
                    CHECK(theta(j, k) == 0.0);
                    CHECK(theta(k, j) == 0.0);
                }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("classical divisor conditional has the stated gamma law") {
    RngStream rng(21);
    const double nu = 3.0;

    // centered observation at p=25: shape 14, rate 3/2
    {
        const int p = 25;
        Eigen::MatrixXd y = Eigen::MatrixXd::Constant(1, p, 0.7);
        Eigen::VectorXd mu = Eigen::VectorXd::Constant(p, 0.7);
        Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(p, p) * 0.8;
        Eigen::VectorXd tau;
        const int reps = 200000;
        std::vector<double> xs(reps);
        for (int r = 0; r < reps; ++r) {
            step_classical_tau(tau, y, mu, theta, nu, rng);
            xs[r] = tau(0);
        }
        auto mv = tst::mean_var(xs);
        CHECK(mv.mean == doctest::Approx(14.0 / 1.5).epsilon(0.005));
        CHECK(mv.var == doctest::Approx(14.0 / 2.25).epsilon(0.03));
    }

    // generic observation: mean (nu+p)/(nu+delta) within 1 percent
    {
        const int p = 4;
        std::mt19937_64 gen(22);
        Eigen::MatrixXd theta = tst::random_spd(p, gen);
        Eigen::MatrixXd y(1, p);
        y << 1.3, -0.4, 0.8, 2.1;
        Eigen::VectorXd mu(p);
        mu << 0.2, 0.1, -0.5, 1.0;
        const Eigen::VectorXd r = y.row(0).transpose() - mu;
        const double delta_y = r.dot(theta * r);
        Eigen::VectorXd tau;
        const int reps = 100000;
        double sum = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            step_classical_tau(tau, y, mu, theta, nu, rng);
            sum += tau(0);
        }
        CHECK(sum / reps == doctest::Approx((nu + p) / (nu + delta_y)).epsilon(0.01));
    }
}

TEST_CASE("alternative divisor sweep: decoupled gamma law under diagonal precision") {
    RngStream rng(23);
    const double nu = 3.0;
    Eigen::MatrixXd y(2, 2);
    y << 1.1, 0.4, 0.4, -0.9;
    Eigen::VectorXd mu(2);
    mu << 0.4, 0.4;  // cell (0,1) and (1,0) sit exactly at the mean
    Eigen::MatrixXd theta = Eigen::VectorXd::Constant(2, 1.6).asDiagonal();

    Eigen::MatrixXd tau = Eigen::MatrixXd::Ones(2, 2);
    const int reps = 120000;
    std::vector<double> informative(reps), centered(reps);
    for (int r = 0; r < reps; ++r) {
        step_alternative_tau(tau, y, mu, theta, nu, rng);
        informative[r] = tau(0, 0);
        centered[r] = tau(0, 1);
    }
    const double ytil = 1.1 - 0.4;
    const double shape = 0.5 * (nu + 1.0);
    const double rate_inf = 0.5 * (nu + ytil * ytil * 1.6);
    auto mv_inf = tst::mean_var(informative);
    CHECK(mv_inf.mean == doctest::Approx(shape / rate_inf).epsilon(0.01));
    CHECK(mv_inf.var == doctest::Approx(shape / (rate_inf * rate_inf)).epsilon(0.04));
    auto mv_cen = tst::mean_var(centered);
    CHECK(mv_cen.mean == doctest::Approx(shape / (0.5 * nu)).epsilon(0.01));
    CHECK(mv_cen.var == doctest::Approx(shape / (0.25 * nu * nu)).epsilon(0.04));

    CHECK_THROWS_AS(
        step_alternative_tau(tau, Eigen::MatrixXd::Zero(3, 2), mu, theta, nu, rng),
        std::invalid_argument);
}

TEST_CASE("alternative divisor sweep: coupled stationary moments match 2d quadrature") {
    const double nu = 3.0;
    Eigen::MatrixXd theta(2, 2);
    theta << 1.4, -0.5, -0.5, 1.1;
    Eigen::MatrixXd y(1, 2);
    y << 0.8, -0.6;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);

    // target density of (tau_1, tau_2) up to a constant
    auto target = [&](double t1, double t2) {
        const double x1 = std::sqrt(t1) * y(0, 0), x2 = std::sqrt(t2) * y(0, 1);
        const double quad =
            theta(0, 0) * x1 * x1 + 2.0 * theta(0, 1) * x1 * x2 + theta(1, 1) * x2 * x2;
        const double prior = (0.5 * nu - 1.0) * (std::log(t1) + std::log(t2)) -
                             0.5 * nu * (t1 + t2);
        return std::sqrt(t1 * t2) * std::exp(-0.5 * quad + prior);
    };
    const int grid = 500;
    const double lo = 1e-9, hi = 25.0, h = (hi - lo) / grid;
    double z = 0.0, m1 = 0.0, m2 = 0.0, m1b = 0.0;
    for (int a = 0; a <= grid; ++a) {
        const double t1 = lo + a * h;
        const double wa = (a == 0 || a == grid) ? 1.0 : (a % 2 ? 4.0 : 2.0);
        for (int b = 0; b <= grid; ++b) {
            const double t2 = lo + b * h;
            const double wb = (b == 0 || b == grid) ? 1.0 : (b % 2 ? 4.0 : 2.0);
            const double f = wa * wb * target(t1, t2);
            z += f;
            m1 += f * t1;
            m2 += f * t1 * t1;
            m1b += f * t2;
        }
    }
    m1 /= z;
    m2 /= z;
    m1b /= z;

    RngStream rng(24);
    Eigen::MatrixXd tau = Eigen::MatrixXd::Ones(1, 2);
    const int sweeps = 400000, burn = 2000;
    double s1 = 0.0, s2 = 0.0, s1b = 0.0;
    for (int t = 0; t < sweeps; ++t) {
        step_alternative_tau(tau, y, mu, theta, nu, rng);
        if (t >= burn) {
            s1 += tau(0, 0);
            s2 += tau(0, 0) * tau(0, 0);
            s1b += tau(0, 1);
        }
    }
    const double n = sweeps - burn;
    CHECK(s1 / n == doctest::Approx(m1).epsilon(0.01));
    CHECK(s1b / n == doctest::Approx(m1b).epsilon(0.01));
    CHECK(s2 / n - (s1 / n) * (s1 / n) ==
          doctest::Approx(m2 - m1 * m1).epsilon(0.05));
}

TEST_CASE("dirichlet step: concentration limits and schedule plumbing") {
    std::mt19937_64 gen(25);
    const int n = 2, p = 4;
    Eigen::MatrixXd y(n, p);
    y << 0.6, -1.2, 2.0, 0.3, -0.8, 1.5, 0.1, -2.2;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd theta = tst::random_spd(p, gen, 1.0);

    auto run_limit = [&](double alpha, bool want_single) {
        RngStream rng(want_single ? 26 : 27);
        DpState dp;
        dp.alpha = alpha;
        for (int i = 0; i < n; ++i) dp.rows.push_back(single_cluster_row(p, 1.0));
        DirichletStepOptions opt;
        opt.recluster = true;
        opt.update_alpha = false;
        int hits = 0, total = 0;
        for (int t = 0; t < 300; ++t) {
            step_dirichlet(dp, y, mu, theta, opt, rng);
            if (t < 50) continue;
            for (const auto& r : dp.rows) {
                hits += want_single ? r.n_clusters() == 1 : r.n_clusters() == p;
                ++total;
            }
        }
        CHECK(dp.alpha == alpha);  // fixed when update_alpha is off
        CHECK(double(hits) / total > 0.95);
    };
    run_limit(1e-8, true);
    run_limit(1e8, false);

    // recluster off: labels frozen, values still move
    {
        RngStream rng(28);
        DpState dp;
        dp.alpha = 1.0;
        for (int i = 0; i < n; ++i) dp.rows.push_back(single_cluster_row(p, 2.0));
        DirichletStepOptions opt;
        opt.recluster = false;
        opt.update_alpha = true;
        opt.prior_a = 2.0;
        opt.prior_b = 1.0;
        const double alpha0 = dp.alpha;
        step_dirichlet(dp, y, mu, theta, opt, rng);
        for (const auto& r : dp.rows) {
            CHECK(r.labels == std::vector<int>(p, 0));
            CHECK(r.values[0] != 2.0);
        }
        CHECK(dp.alpha > 0.0);
        CHECK(dp.alpha != alpha0);
        CHECK(int(dp.w.size()) == n);
    }
}

TEST_CASE("mean update modes") {
    std::mt19937_64 gen(29);
    RngStream rng(30);
    const int n = 15, p = 4;
    const Eigen::MatrixXd y = correlated_data(n, p, 31);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, p);
    const Eigen::MatrixXd theta = tst::random_spd(p, gen, 1.0);

    // unit weights: robust equals the plain column means up to summation order
    const Eigen::VectorXd naive = update_mu(MuMode::Naive, y, ones, theta, 1.0, rng);
    const Eigen::VectorXd robust = update_mu(MuMode::Robust, y, ones, theta, 1.0, rng);
    CHECK((naive - Eigen::VectorXd(y.colwise().mean().transpose())).cwiseAbs().maxCoeff() == 0.0);
    CHECK((robust - naive).cwiseAbs().maxCoeff() <= 1e-14);

    // weight mass concentrated on one row pulls the mean onto it
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(2, p, 1e-12);
    w.row(0).setConstant(2.0);
    const Eigen::VectorXd pulled = update_mu(MuMode::Robust, y.topRows(2), w, theta, 1.0, rng);
    CHECK((pulled - y.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-9);

    // no data: zero vector for every mode
    CHECK(update_mu(MuMode::Robust, Eigen::MatrixXd(0, p), Eigen::MatrixXd(0, p), theta, 1.0, rng)
              .isZero());

    // draw modes: Monte Carlo mean matches the weighted least squares center
    Eigen::MatrixXd tau(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) tau(i, j) = 0.3 + 0.1 * ((i + j) % 5);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd s = tau.row(i).transpose().array().sqrt();
        const Eigen::MatrixXd prec_i = s.asDiagonal() * theta * s.asDiagonal();
        m += prec_i;
        b += prec_i * y.row(i).transpose();
    }
    const Eigen::VectorXd center = m.llt().solve(b);
    const int reps = 20000;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    for (int r = 0; r < reps; ++r) acc += update_mu(MuMode::ApproxDraw, y, tau, theta, 1.0, rng);
    acc /= double(reps);
    const double sd_bound = 5.0 * std::sqrt(m.inverse().diagonal().maxCoeff() / reps);
    CHECK((acc - center).cwiseAbs().maxCoeff() < sd_bound);

    // tight prior shrinks the exact draw toward zero
    Eigen::VectorXd acc_exact = Eigen::VectorXd::Zero(p);
    for (int r = 0; r < reps; ++r)
        acc_exact += update_mu(MuMode::ExactDraw, y, tau, theta, 1e-4, rng);
    acc_exact /= double(reps);
    CHECK(acc_exact.norm() < 0.05 * center.norm());

    CHECK_THROWS_AS(update_mu(MuMode::ExactDraw, y, tau, theta, 0.0, rng), ConfigError);
    CHECK_THROWS_AS(update_mu(MuMode::Robust, y, Eigen::MatrixXd::Ones(n, p + 1), theta, 1.0, rng),
                    std::invalid_argument);
}

TEST_CASE("unit divisors reduce every model to the gaussian chain") {
    const int n = 20, p = 3;
    const Eigen::MatrixXd y = correlated_data(n, p, 32);
    const double phi_scale = 0.2;

    ChainConfig base;
    base.edge_proposals = 200000;
    base.phi_scale = phi_scale;
    base.d = 0.2;
    base.seed = 33;
    base.tau_every = base.edge_proposals + 1;  // divisors never refresh

    auto with_model = [&](ModelKind m, int tau_cols) {
        ChainConfig cfg = base;
        cfg.model = m;
        if (m != ModelKind::Gaussian) {
            cfg.tau_init = TauInitKind::File;
            cfg.tau_init_values = Eigen::MatrixXd::Ones(n, tau_cols);
        }
        return cfg;
    };

    const ChainResult gauss = run_chain(with_model(ModelKind::Gaussian, 0), y);

    // marginals against exact enumeration, within one percent
    const Enum3 exact = enumerate_p3(y, base.delta, phi_scale, base.d);
    const Eigen::MatrixXd probs = gauss.edge_probabilities();
    CHECK(std::abs(probs(0, 1) - exact.marginal[0]) < 0.01);
    CHECK(std::abs(probs(0, 2) - exact.marginal[1]) < 0.01);
    CHECK(std::abs(probs(1, 2) - exact.marginal[2]) < 0.01);

    // frozen unit divisors make the other four models reproduce the same
    // stream bit for bit
    for (auto [m, cols] : {std::pair{ModelKind::GaussianRobustScatter, 1},
                           std::pair{ModelKind::ClassicalT, 1},
                           std::pair{ModelKind::AlternativeT, p},
                           std::pair{ModelKind::DirichletT, p}}) {
        const ChainResult r = run_chain(with_model(m, cols), y);
        CHECK(r.accepted == gauss.accepted);
        CHECK(r.edge_total == gauss.edge_total);
        CHECK(same_matrix(r.edge_counts, gauss.edge_counts));
        CHECK(r.edge_trace == gauss.edge_trace);
    }
}

TEST_CASE("same seed and config give bit-identical runs") {
    const Eigen::MatrixXd y = correlated_data(18, 4, 34);
    ChainConfig cfg;
    cfg.model = ModelKind::DirichletT;
    cfg.edge_proposals = 3000;
    cfg.tau_every = 5;
    cfg.recluster_every = 3;
    cfg.seed = 35;
    cfg.record_mu_trace = true;

    ChainRunner a(cfg, y), b(cfg, y);
    a.run();
    b.run();
    CHECK(a.result().accepted == b.result().accepted);
    CHECK(same_matrix(a.result().edge_counts, b.result().edge_counts));
    CHECK(same_matrix(a.result().tau_low_counts, b.result().tau_low_counts));
    CHECK((a.result().mu_sum - b.result().mu_sum).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.result().alpha_trace == b.result().alpha_trace);
    CHECK(a.result().clusters_trace == b.result().clusters_trace);
    CHECK(a.state().rng == b.state().rng);
    CHECK(same_matrix(a.state().theta, b.state().theta));
}

TEST_CASE("checkpoint round trip resumes bit-identically mid-run") {
    const Eigen::MatrixXd y = correlated_data(12, 4, 36);
    ChainConfig cfg;
    cfg.model = ModelKind::DirichletT;
    cfg.edge_proposals = 400;
    cfg.tau_every = 5;
    cfg.recluster_every = 2;
    cfg.alpha_prior_a = 2.0;
    cfg.alpha_prior_b = 1.0;
    cfg.mu_mode = MuMode::ExactDraw;
    cfg.trace_every = 7;
    cfg.seed = 37;
    cfg.record_mu_trace = true;

    ChainRunner interrupted(cfg, y);
    interrupted.run_proposals(137);
    CHECK(interrupted.state().iter == 137);
    std::stringstream snap;
    interrupted.save_checkpoint(snap);

    ChainRunner resumed = ChainRunner::load_checkpoint(snap, cfg, y);
    resumed.run();
    ChainRunner straight(cfg, y);
    straight.run();

    const ChainResult& r1 = resumed.result();
    const ChainResult& r2 = straight.result();
    CHECK(r1.proposals == r2.proposals);
    CHECK(r1.accepted == r2.accepted);
    CHECK(r1.edge_total == r2.edge_total);
    CHECK(r1.mu_samples == r2.mu_samples);
    CHECK(r1.tau_snapshots == r2.tau_snapshots);
    CHECK(same_matrix(r1.edge_counts, r2.edge_counts));
    CHECK(same_matrix(r1.tau_low_counts, r2.tau_low_counts));
    CHECK((r1.mu_sum - r2.mu_sum).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r1.edge_trace == r2.edge_trace);
    CHECK(r1.alpha_trace == r2.alpha_trace);
    CHECK(r1.clusters_trace == r2.clusters_trace);
    REQUIRE(r1.mu_trace.size() == r2.mu_trace.size());
    for (std::size_t i = 0; i < r1.mu_trace.size(); ++i)
        CHECK((r1.mu_trace[i] - r2.mu_trace[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(resumed.state().rng == straight.state().rng);
    CHECK(same_matrix(resumed.state().theta, straight.state().theta));
    CHECK(same_matrix(resumed.state().tau_cells, straight.state().tau_cells));
    CHECK(resumed.state().graph.edges() == straight.state().graph.edges());

    // a checkpoint refuses to resume under a different configuration
    std::stringstream snap2;
    interrupted.save_checkpoint(snap2);
    ChainConfig other = cfg;
    other.seed = 38;
    CHECK_THROWS_AS(ChainRunner::load_checkpoint(snap2, other, y), DataError);
}

TEST_CASE("result accessors stay within range on a live chain") {
    const Eigen::MatrixXd y = correlated_data(15, 4, 39);
    ChainConfig cfg;
    cfg.model = ModelKind::DirichletT;
    cfg.edge_proposals = 4000;
    cfg.tau_every = 10;
    cfg.seed = 40;
    const ChainResult res = run_chain(cfg, y);

    CHECK(res.acceptance_rate() > 0.0);
    CHECK(res.acceptance_rate() <= 1.0);
    const Eigen::MatrixXd probs = res.edge_probabilities();
    CHECK(probs.diagonal().isZero());
    CHECK((probs - probs.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(probs.minCoeff() >= 0.0);
    CHECK(probs.maxCoeff() <= 1.0);
    const Eigen::MatrixXd om = res.tau_outlier_probabilities();
    CHECK(om.rows() == 15);
    CHECK(om.minCoeff() >= 0.0);
    CHECK(om.maxCoeff() <= 1.0);
    CHECK(res.mean_clusters_per_row() >= 1.0);
    CHECK(res.mean_clusters_per_row() <= 4.0);
    CHECK(res.edge_trace.front() == std::pair<long, int>{0, 0});
    CHECK(res.edge_trace.back().first <= cfg.edge_proposals);
}

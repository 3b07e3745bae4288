#include "tggm/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tggm/errors.hpp"

namespace tggm {

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, RngStream& rng) {
    if (mean.size() != cov.dim()) throw std::invalid_argument("sample_mvn: dimension mismatch");
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + cov.llt().matrixL() * z;
}

Eigen::VectorXd sample_mvn_precision(const Eigen::VectorXd& mean, const SpdMatrix& prec,
                                     RngStream& rng) {
    if (mean.size() != prec.dim())
        throw std::invalid_argument("sample_mvn_precision: dimension mismatch");
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    // prec = L L', so L^{-T} z has the target covariance prec^{-1}.
    return mean + prec.llt().matrixU().solve(z);
}

namespace {

// Factor A of the Wishart(df, I) Bartlett decomposition, lower triangular.
Eigen::MatrixXd bartlett_factor(int p, double df, RngStream& rng) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        a(i, i) = std::sqrt(rng.chisq(df - i));
        for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
    }
    return a;
}

}  // namespace

Eigen::MatrixXd sample_iw(double m, const SpdMatrix& phi, RngStream& rng) {
    const int p = phi.dim();
    if (!(m > p - 1)) throw std::invalid_argument("sample_iw: need m > p - 1");
    // S^{-1} ~ Wishart(m, Phi^{-1}); with Phi = L L' the draw is
    // S = L A^{-T} A^{-1} L' for a Bartlett factor A.
    const Eigen::MatrixXd a = bartlett_factor(p, m, rng);
    const Eigen::MatrixXd l = phi.llt().matrixL();
    const Eigen::MatrixXd r =
        a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(l.transpose()));
    Eigen::MatrixXd s = r.transpose() * r;
    return 0.5 * (s + s.transpose().eval());
}

std::vector<Eigen::MatrixXd> sample_hiw(const PerfectSequence& seq, double delta,
                                        const SpdMatrix& phi, RngStream& rng,
                                        Eigen::MatrixXd* completed) {
    if (!(delta > 0.0)) throw std::invalid_argument("sample_hiw: delta must be positive");
    const int p = phi.dim();
    const int m = seq.n_cliques();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(p, p, nan);
    std::vector<Eigen::MatrixXd> blocks(m);

    for (int i = 0; i < m; ++i) {
        const auto& c = seq.cliques[i];
        const int nc = static_cast<int>(c.size());
        const double df = delta + nc - 1;
        const std::vector<int> sep = (i == 0) ? std::vector<int>{} : seq.separators[i - 1];

        if (sep.empty()) {
            const Eigen::MatrixXd block = sample_iw(df, SpdMatrix(submatrix(phi.mat(), c, c)), rng);
            for (int a = 0; a < nc; ++a)
                for (int b = 0; b < nc; ++b) sigma(c[a], c[b]) = block(a, b);
        } else {
            std::vector<int> res;  // vertices new to this clique
            for (int v : c)
                if (!std::binary_search(sep.begin(), sep.end(), v)) res.push_back(v);

            const Eigen::MatrixXd phi_ss = submatrix(phi.mat(), sep, sep);
            const Eigen::MatrixXd phi_sr = submatrix(phi.mat(), sep, res);
            const Eigen::MatrixXd phi_rr = submatrix(phi.mat(), res, res);
            Eigen::LLT<Eigen::MatrixXd> llt_ss(phi_ss);
            if (llt_ss.info() != Eigen::Success)
                throw NumericalError("sample_hiw: separator block of Phi not SPD");
            const Eigen::MatrixXd phi_rr_s = phi_rr - phi_sr.transpose() * llt_ss.solve(phi_sr);

            // Residual conditional block keeps the clique's full degrees of freedom.
            const Eigen::MatrixXd sig_rr_s =
                sample_iw(df, SpdMatrix(0.5 * (phi_rr_s + phi_rr_s.transpose().eval())), rng);

            // Regression coefficients: matrix normal around Phi_SS^{-1} Phi_SR
            // with row covariance Phi_SS^{-1} and column covariance sig_rr_s.
            Eigen::MatrixXd z(sep.size(), res.size());
            for (Eigen::Index r = 0; r < z.rows(); ++r)
                for (Eigen::Index cc = 0; cc < z.cols(); ++cc) z(r, cc) = rng.normal();
            Eigen::LLT<Eigen::MatrixXd> llt_v(sig_rr_s);
            if (llt_v.info() != Eigen::Success)
                throw NumericalError("sample_hiw: drawn residual block not SPD");
            const Eigen::MatrixXd gamma =
                llt_ss.solve(phi_sr) +
                llt_ss.matrixU().solve(z) * Eigen::MatrixXd(llt_v.matrixU());

            const Eigen::MatrixXd sig_ss = submatrix(sigma, sep, sep);
            if (sig_ss.hasNaN()) throw std::logic_error("sample_hiw: separator not yet drawn");
            const Eigen::MatrixXd sig_sr = sig_ss * gamma;
            const Eigen::MatrixXd sig_rr = sig_rr_s + gamma.transpose() * sig_ss * gamma;

            for (std::size_t a = 0; a < sep.size(); ++a)
                for (std::size_t b = 0; b < res.size(); ++b) {
                    sigma(sep[a], res[b]) = sig_sr(a, b);
                    sigma(res[b], sep[a]) = sig_sr(a, b);
                }
            for (std::size_t a = 0; a < res.size(); ++a)
                for (std::size_t b = 0; b < res.size(); ++b)
                    sigma(res[a], res[b]) = 0.5 * (sig_rr(a, b) + sig_rr(b, a));
        }
        blocks[i] = submatrix(sigma, c, c);
    }

    if (completed != nullptr) {
        // Fill the cross blocks by conditional independence given separators,
        // walking the sequence so each step only needs already-known entries.
        std::vector<char> known(p, 0);
        for (int v : seq.cliques[0]) known[v] = 1;
        for (int i = 1; i < m; ++i) {
            const auto& c = seq.cliques[i];
            const auto& sep = seq.separators[i - 1];
            std::vector<int> aa;  // new vertices
            for (int v : c)
                if (!known[v]) aa.push_back(v);
            std::vector<int> bb;  // previously known, outside the separator
            for (int v = 0; v < p; ++v)
                if (known[v] && !std::binary_search(sep.begin(), sep.end(), v)) bb.push_back(v);
            if (!aa.empty() && !bb.empty()) {
                Eigen::MatrixXd cross;
                if (sep.empty()) {
                    cross = Eigen::MatrixXd::Zero(aa.size(), bb.size());
                } else {
                    const Eigen::MatrixXd sig_as = submatrix(sigma, aa, sep);
                    const Eigen::MatrixXd sig_ss = submatrix(sigma, sep, sep);
                    const Eigen::MatrixXd sig_sb = submatrix(sigma, sep, bb);
                    Eigen::LLT<Eigen::MatrixXd> llt(sig_ss);
                    if (llt.info() != Eigen::Success)
                        throw NumericalError("sample_hiw: completion separator block not SPD");
                    cross = sig_as * llt.solve(sig_sb);
                }
                for (std::size_t a = 0; a < aa.size(); ++a)
                    for (std::size_t b = 0; b < bb.size(); ++b) {
                        sigma(aa[a], bb[b]) = cross(a, b);
                        sigma(bb[b], aa[a]) = cross(a, b);
                    }
            }
            for (int v : c) known[v] = 1;
        }
        if (sigma.hasNaN()) throw std::logic_error("sample_hiw: completion left gaps");
        *completed = sigma;
    }
    return blocks;
}

namespace {

struct SqrtSpace {
    double m = 0.0;      // 2*shape - 1, the power of s
    double mode = 0.0;   // argmax of m*log(s) - rate*s^2 - tilt*s
    double curv = 0.0;   // negative second derivative at the mode
    double logpeak = 0.0;
};

double sqrt_space_logdensity(double s, double m, double rate, double tilt) {
    return m * std::log(s) - rate * s * s - tilt * s;
}

SqrtSpace sqrt_space_setup(const SqrtGammaParams& par) {
    if (!(par.shape > 0.5)) throw std::invalid_argument("sqrt gamma: shape must exceed 1/2");
    if (!(par.rate > 0.0)) throw std::invalid_argument("sqrt gamma: rate must be positive");
    if (!std::isfinite(par.tilt)) throw std::invalid_argument("sqrt gamma: tilt must be finite");
    SqrtSpace w;
    w.m = 2.0 * par.shape - 1.0;
    const double disc = std::sqrt(par.tilt * par.tilt + 8.0 * par.rate * w.m);
    // Positive root of 2*rate*s^2 + tilt*s - m = 0, written to avoid
    // cancellation for either sign of the tilt.
    w.mode = (par.tilt >= 0.0) ? 2.0 * w.m / (par.tilt + disc)
                               : (disc - par.tilt) / (4.0 * par.rate);
    w.curv = w.m / (w.mode * w.mode) + 2.0 * par.rate;
    w.logpeak = sqrt_space_logdensity(w.mode, w.m, par.rate, par.tilt);
    return w;
}

}  // namespace

double sample_sqrt_gamma(const SqrtGammaParams& par, RngStream& rng) {
    const SqrtSpace w = sqrt_space_setup(par);
    // Envelope: Gaussian at the mode, sd inflated by 1.2, variance floored at
    // 1/(2*rate). With the floor the log target minus the log envelope is
    // concave and stationary at the mode, so the envelope truly dominates.
    const double var = std::max(1.44 / w.curv, 0.5 / par.rate);
    const double sd = std::sqrt(var);
    const double q = 0.5 / var;
    for (int tries = 0; tries < 1000; ++tries) {
        const double s = w.mode + sd * rng.normal();
        if (s <= 0.0) continue;
        const double log_accept = sqrt_space_logdensity(s, w.m, par.rate, par.tilt) - w.logpeak +
                                  q * (s - w.mode) * (s - w.mode);
        if (std::log(rng.uniform01()) <= log_accept) return s * s;
    }
    // Slice fallback with stepping out; bounds worst-case latency.
    double s = w.mode;
    double width = sd;
    for (int it = 0; it < 100; ++it) {
        const double ly = sqrt_space_logdensity(s, w.m, par.rate, par.tilt) +
                          std::log(rng.uniform01());
        double lo = s - width * rng.uniform01();
        double hi = lo + width;
        while (lo > 0.0 && sqrt_space_logdensity(lo, w.m, par.rate, par.tilt) > ly) lo -= width;
        lo = std::max(lo, 0.0);
        while (sqrt_space_logdensity(hi, w.m, par.rate, par.tilt) > ly) hi += width;
        for (;;) {
            const double cand = lo + (hi - lo) * rng.uniform01();
            if (cand > 0.0 && sqrt_space_logdensity(cand, w.m, par.rate, par.tilt) > ly) {
                s = cand;
                break;
            }
            if (cand < s)
                lo = cand;
            else
                hi = cand;
        }
    }
    return s * s;
}

double log_sqrt_gamma_norm(const SqrtGammaParams& par) {
    const SqrtSpace w = sqrt_space_setup(par);
    // After tau = s^2 the integrand is 2 s^{2a-1} exp(-rate s^2 - tilt s):
    // smooth, log-concave, essentially Gaussian of width 1/sqrt(curv) near the
    // mode with a right tail no wider than 1/sqrt(2*rate).
    static constexpr int kNodes = 32;
    static constexpr double kX[kNodes / 2] = {
        0.048307665687738316, 0.144471961582796493, 0.239287362252137075,
        0.331868602282127650, 0.421351276130635345, 0.506899908932229390,
        0.587715757240762329, 0.663044266930215201, 0.732182118740289680,
        0.794483795967942407, 0.849367613732569970, 0.896321155766052124,
        0.934906075937739689, 0.964762255587506430, 0.985611511545268335,
        0.997263861849481564};
    static constexpr double kW[kNodes / 2] = {
        0.096540088514727801, 0.095638720079274859, 0.093844399080804566,
        0.091173878695763885, 0.087652093004403811, 0.083311924226946755,
        0.078193895787070306, 0.072345794108848506, 0.065822222776361847,
        0.058684093478535547, 0.050998059262376176, 0.042835898022226681,
        0.034273862913021433, 0.025392065309262059, 0.016274394730905671,
        0.007018610009470097};

    const double sd_left = 1.0 / std::sqrt(w.curv);
    const double sd_right = 1.0 / std::sqrt(2.0 * par.rate);
    const double lo = std::max(0.0, w.mode - 14.0 * sd_left);
    const double hi = w.mode + 14.0 * sd_right;

    // Panels narrow toward the mode (each a few sd wide, well inside what the
    // Gauss rule resolves) with extra subdivisions near zero so the weak
    // s^{2a-1} endpoint behavior stays harmless.
    std::vector<double> knots{lo, w.mode, hi};
    for (double off : {0.5, 1.0, 2.0, 3.5, 5.5, 8.0, 11.0}) {
        knots.push_back(w.mode - off * sd_left);
        knots.push_back(w.mode + off * sd_right);
    }
    if (lo == 0.0)
        for (double f : {1.0 / 64, 1.0 / 16, 1.0 / 4, 1.0 / 2}) knots.push_back(w.mode * f);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::remove_if(knots.begin(), knots.end(),
                               [&](double t) { return t < lo || t > hi; }),
                knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [&](double a, double b) { return b - a < 1e-14 * (hi - lo); }),
                knots.end());

    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k], b = knots[k + 1];
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double panel = 0.0;
        for (int i = 0; i < kNodes / 2; ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double s = c + sgn * h * kX[i];
                if (s <= 0.0) continue;
                panel += kW[i] *
                         std::exp(sqrt_space_logdensity(s, w.m, par.rate, par.tilt) - w.logpeak);
            }
        }
        acc += panel * h;
    }
    return std::log(2.0 * acc) + w.logpeak;
}

double noncentral_t_logpdf(double x, double ncp, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("noncentral_t_logpdf: nu must be positive");
    // Mixture representation: x | tau ~ N(ncp/sqrt(tau), 1/tau) with
    // tau ~ Gamma(nu/2, nu/2); the tau integral is the sqrt-gamma normalizer.
    const SqrtGammaParams par{0.5 * (nu + 1.0), 0.5 * (nu + x * x), -x * ncp};
    return -0.5 * ncp * ncp + 0.5 * nu * std::log(0.5 * nu) -
           0.5 * std::log(2.0 * std::numbers::pi) - std::lgamma(0.5 * nu) +
           log_sqrt_gamma_norm(par);
}

DirichletGammaDraw sample_dirichlet_gamma_prior(int p, double alpha, double nu, RngStream& rng) {
    if (p < 1) throw std::invalid_argument("sample_dirichlet_gamma_prior: p must be >= 1");
    if (!(alpha > 0.0) || !(nu > 0.0))
        throw std::invalid_argument("sample_dirichlet_gamma_prior: alpha and nu must be positive");
    DirichletGammaDraw out;
    out.labels.assign(p, 0);
    std::vector<double> values{rng.gamma(0.5 * nu, 0.5 * nu)};
    for (int j = 1; j < p; ++j) {
        if (rng.uniform01() < alpha / (alpha + j)) {
            out.labels[j] = static_cast<int>(values.size());
            values.push_back(rng.gamma(0.5 * nu, 0.5 * nu));
        } else {
            out.labels[j] = out.labels[rng.uniform_below(j)];
        }
    }
    out.n_clusters = static_cast<int>(values.size());
    out.tau.resize(p);
    for (int j = 0; j < p; ++j) out.tau(j) = values[out.labels[j]];
    return out;
}

}  // namespace tggm

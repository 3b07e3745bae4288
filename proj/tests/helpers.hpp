#pragma once

// Shared oracles for the test suite. Everything here is deliberately naive:
// brute force over subsets, plain Simpson panels, textbook formulas. Keep it
// independent of the library internals under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tggm/graph.hpp"

namespace tst {

inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Recursive refinement until the Richardson error estimate drops below tol.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 24) {
    const double whole = simpson(f, a, b, 2);
    const double m = 0.5 * (a + b);
    const double halves = simpson(f, a, m, 2) + simpson(f, m, b, 2);
    if (depth <= 0 || std::abs(halves - whole) < 15.0 * tol) return halves + (halves - whole) / 15.0;
    return adaptive_simpson(f, a, m, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, 0.5 * tol, depth - 1);
}

inline Eigen::MatrixXd random_spd(int p, std::mt19937_64& gen, double ridge = 0.5) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = nd(gen);
    return a * a.transpose() + ridge * static_cast<double>(p) * Eigen::MatrixXd::Identity(p, p);
}

// Chordality by definition: no vertex subset of size >= 4 induces a chordless
// cycle. A subset induces a chordless cycle iff its induced subgraph is
// connected with every degree exactly 2.
inline bool chordal_by_bruteforce(const tggm::DecomposableGraph& g) {
    const int p = g.dim();
    for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
        std::vector<int> vs;
        for (int v = 0; v < p; ++v)
            if (mask & (1u << v)) vs.push_back(v);
        const int k = static_cast<int>(vs.size());
        if (k < 4) continue;

        bool all_degree_two = true;
        for (int a = 0; a < k && all_degree_two; ++a) {
            int deg = 0;
            for (int b = 0; b < k; ++b)
                if (a != b && g.has_edge(vs[a], vs[b])) ++deg;
            all_degree_two = deg == 2;
        }
        if (!all_degree_two) continue;

        std::vector<char> seen(k, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (int b = 0; b < k; ++b)
                if (!seen[b] && g.has_edge(vs[a], vs[b])) {
                    seen[b] = 1;
                    ++reached;
                    stack.push_back(b);
                }
        }
        if (reached == k) return false;  // induced chordless cycle
    }
    return true;
}

// All maximal cliques by subset enumeration; fine for p <= 12 in tests.
inline std::vector<std::vector<int>> maximal_cliques_bruteforce(const tggm::DecomposableGraph& g) {
    const int p = g.dim();
    std::vector<std::uint32_t> complete;
    for (std::uint32_t mask = 1; mask < (1u << p); ++mask) {
        std::vector<int> vs;
        for (int v = 0; v < p; ++v)
            if (mask & (1u << v)) vs.push_back(v);
        bool ok = true;
        for (std::size_t a = 0; a < vs.size() && ok; ++a)
            for (std::size_t b = a + 1; b < vs.size() && ok; ++b) ok = g.has_edge(vs[a], vs[b]);
        if (ok) complete.push_back(mask);
    }
    std::vector<std::vector<int>> out;
    for (auto mask : complete) {
        bool maximal = true;
        for (auto other : complete)
            if (other != mask && (other & mask) == mask) {
                maximal = false;
                break;
            }
        if (!maximal) continue;
        std::vector<int> vs;
        for (int v = 0; v < p; ++v)
            if (mask & (1u << v)) vs.push_back(v);
        out.push_back(vs);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Random decomposable graph by screened edge flips.
inline tggm::DecomposableGraph random_decomposable(int p, int flips, std::mt19937_64& gen) {
    tggm::DecomposableGraph g(p);
    std::uniform_int_distribution<int> pick(0, p - 1);
    for (int t = 0; t < flips; ++t) {
        int j = pick(gen), k = pick(gen);
        if (j == k) continue;
        if (g.has_edge(j, k))
            g.remove_edge(j, k);
        else
            g.add_edge(j, k);
        if (!tggm::is_decomposable(g)) {
            if (g.has_edge(j, k))
                g.remove_edge(j, k);
            else
                g.add_edge(j, k);
        }
    }
    return g;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
    long n = 0;
};

inline MeanVar mean_var(const std::vector<double>& xs) {
    MeanVar mv;
    mv.n = static_cast<long>(xs.size());
    for (double x : xs) mv.mean += x;
    mv.mean /= static_cast<double>(mv.n);
    for (double x : xs) mv.var += (x - mv.mean) * (x - mv.mean);
    mv.var /= static_cast<double>(mv.n - 1);
    return mv;
}

// Pearson statistic with low-expectation bins merged into their neighbor.
// Returns (statistic, degrees of freedom).
inline std::pair<double, int> chi2_gof(std::vector<double> observed, std::vector<double> expected,
                                       double min_expected = 5.0) {
    std::vector<double> obs, exp;
    double co = 0.0, ce = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        co += observed[i];
        ce += expected[i];
        if (ce >= min_expected) {
            obs.push_back(co);
            exp.push_back(ce);
            co = ce = 0.0;
        }
    }
    if (ce > 0.0 && !exp.empty()) {
        obs.back() += co;
        exp.back() += ce;
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    return {stat, static_cast<int>(obs.size()) - 1};
}

}  // namespace tst

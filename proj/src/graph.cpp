#include "tggm/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "tggm/errors.hpp"

namespace tggm {

DecomposableGraph::DecomposableGraph(int p) : p_(p) {
    if (p < 1) throw std::invalid_argument("graph: p must be >= 1");
    adj_.assign(static_cast<std::size_t>(p) * p, 0);
}

DecomposableGraph DecomposableGraph::complete(int p) {
    DecomposableGraph g(p);
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) g.add_edge(j, k);
    return g;
}

void DecomposableGraph::check_pair(int j, int k) const {
    if (j < 0 || k < 0 || j >= p_ || k >= p_ || j == k)
        throw std::invalid_argument("graph: bad vertex pair");
}

void DecomposableGraph::add_edge(int j, int k) {
    check_pair(j, k);
    if (has_edge(j, k)) return;
    adj_[j * p_ + k] = adj_[k * p_ + j] = 1;
    ++n_edges_;
}

void DecomposableGraph::remove_edge(int j, int k) {
    check_pair(j, k);
    if (!has_edge(j, k)) return;
    adj_[j * p_ + k] = adj_[k * p_ + j] = 0;
    --n_edges_;
}

std::vector<std::pair<int, int>> DecomposableGraph::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(n_edges_);
    for (int j = 0; j < p_; ++j)
        for (int k = j + 1; k < p_; ++k)
            if (has_edge(j, k)) out.emplace_back(j, k);
    return out;
}

McsResult mcs(const DecomposableGraph& g) {
    const int p = g.dim();
    McsResult r;
    r.order.reserve(p);
    r.lambda.reserve(p);
    std::vector<int> weight(p, 0);
    std::vector<int> visitpos(p, -1);

    for (int step = 0; step < p; ++step) {
        int best = -1;
        for (int v = 0; v < p; ++v)
            if (visitpos[v] < 0 && (best < 0 || weight[v] > weight[best])) best = v;
        visitpos[best] = step;
        r.order.push_back(best);
        r.lambda.push_back(weight[best]);
        for (int w = 0; w < p; ++w)
            if (visitpos[w] < 0 && g.has_edge(best, w)) ++weight[w];
    }

    // Chordality (zero fill-in) test: the earlier neighbors of each vertex,
    // minus the most recently visited one, must all be adjacent to it.
    r.chordal = true;
    for (int i = 0; i < p && r.chordal; ++i) {
        const int v = r.order[i];
        int u = -1;
        for (int w = 0; w < p; ++w)
            if (g.has_edge(v, w) && visitpos[w] < i && (u < 0 || visitpos[w] > visitpos[u])) u = w;
        if (u < 0) continue;
        for (int w = 0; w < p; ++w)
            if (w != u && g.has_edge(v, w) && visitpos[w] < i && !g.has_edge(u, w)) {
                r.chordal = false;
                break;
            }
    }
    return r;
}

bool is_decomposable(const DecomposableGraph& g) { return mcs(g).chordal; }

namespace {

std::vector<int> recompute_hosts(const PerfectSequence& seq) {
    std::vector<int> host;
    for (int i = 1; i < seq.n_cliques(); ++i) {
        const auto& s = seq.separators[i - 1];
        int h = -1;
        for (int j = i - 1; j >= 0; --j)
            if (std::includes(seq.cliques[j].begin(), seq.cliques[j].end(), s.begin(), s.end())) {
                h = j;
                break;
            }
        if (h < 0) throw std::logic_error("perfect sequence: running intersection violated");
        host.push_back(h);
    }
    return host;
}

}  // namespace

PerfectSequence perfect_sequence(const DecomposableGraph& g) {
    auto seq = try_perfect_sequence(g);
    if (!seq) throw std::invalid_argument("perfect_sequence: graph is not decomposable");
    return *std::move(seq);
}

std::optional<PerfectSequence> try_perfect_sequence(const DecomposableGraph& g) {
    const McsResult r = mcs(g);
    if (!r.chordal) return std::nullopt;
    const int p = g.dim();
    std::vector<int> visitpos(p, -1);
    for (int i = 0; i < p; ++i) visitpos[r.order[i]] = i;

    PerfectSequence seq;
    // A visited vertex closes a maximal clique (itself plus its earlier
    // neighbors) exactly when the next vertex fails to extend it.
    for (int i = 0; i < p; ++i) {
        if (i + 1 < p && r.lambda[i + 1] == r.lambda[i] + 1) continue;
        const int v = r.order[i];
        std::vector<int> clique{v};
        for (int w = 0; w < p; ++w)
            if (g.has_edge(v, w) && visitpos[w] < i) clique.push_back(w);
        std::sort(clique.begin(), clique.end());
        seq.cliques.push_back(std::move(clique));
    }

    std::vector<char> in_union(p, 0);
    for (int i = 0; i < seq.n_cliques(); ++i) {
        if (i > 0) {
            std::vector<int> s;
            for (int v : seq.cliques[i])
                if (in_union[v]) s.push_back(v);
            seq.separators.push_back(std::move(s));
        }
        for (int v : seq.cliques[i]) in_union[v] = 1;
    }
    seq.host = recompute_hosts(seq);
    return seq;
}

bool check_running_intersection(const DecomposableGraph& g, const PerfectSequence& seq) {
    const int p = g.dim();
    const int m = seq.n_cliques();
    if (m == 0 || static_cast<int>(seq.separators.size()) != m - 1 ||
        static_cast<int>(seq.host.size()) != m - 1)
        return false;

    std::vector<char> covered(p, 0);
    for (const auto& c : seq.cliques) {
        if (c.empty() || !std::is_sorted(c.begin(), c.end())) return false;
        for (std::size_t a = 0; a < c.size(); ++a) {
            if (c[a] < 0 || c[a] >= p) return false;
            covered[c[a]] = 1;
            for (std::size_t b = a + 1; b < c.size(); ++b)
                if (!g.has_edge(c[a], c[b])) return false;
        }
    }
    if (!std::all_of(covered.begin(), covered.end(), [](char x) { return x != 0; })) return false;

    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            if (!g.has_edge(j, k)) continue;
            bool covered_edge = false;
            for (const auto& c : seq.cliques)
                if (std::binary_search(c.begin(), c.end(), j) &&
                    std::binary_search(c.begin(), c.end(), k)) {
                    covered_edge = true;
                    break;
                }
            if (!covered_edge) return false;
        }

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j && std::includes(seq.cliques[j].begin(), seq.cliques[j].end(),
                                        seq.cliques[i].begin(), seq.cliques[i].end()))
                return false;

    std::vector<char> in_union(p, 0);
    for (int v : seq.cliques[0]) in_union[v] = 1;
    for (int i = 1; i < m; ++i) {
        std::vector<int> expect;
        for (int v : seq.cliques[i])
            if (in_union[v]) expect.push_back(v);
        if (expect != seq.separators[i - 1]) return false;
        const int h = seq.host[i - 1];
        if (h < 0 || h >= i) return false;
        if (!std::includes(seq.cliques[h].begin(), seq.cliques[h].end(),
                           seq.separators[i - 1].begin(), seq.separators[i - 1].end()))
            return false;
        for (int v : seq.cliques[i]) in_union[v] = 1;
    }
    return true;
}

std::optional<int> single_clique_containing(const PerfectSequence& seq, int j, int k) {
    int found = -1;
    for (int i = 0; i < seq.n_cliques(); ++i) {
        const auto& c = seq.cliques[i];
        if (std::binary_search(c.begin(), c.end(), j) &&
            std::binary_search(c.begin(), c.end(), k)) {
            if (found >= 0) return std::nullopt;
            found = i;
        }
    }
    if (found < 0) return std::nullopt;
    return found;
}

PairSampler::PairSampler(int p) : p_(p) {
    if (p < 2) throw std::invalid_argument("PairSampler: p must be >= 2");
}

PairSampler::PairSampler(int p, const Eigen::MatrixXd& weights) : p_(p) {
    if (p < 2) throw std::invalid_argument("PairSampler: p must be >= 2");
    if (weights.rows() != p || weights.cols() != p)
        throw std::invalid_argument("PairSampler: weight matrix must be p x p");
    cdf_.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
    double total = 0.0;
    for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) {
            const double w = weights(j, k);
            if (w < 0.0) throw std::invalid_argument("PairSampler: negative weight");
            total += w;
            cdf_.push_back(total);
        }
    if (!(total > 0.0)) throw std::invalid_argument("PairSampler: all weights are zero");
    for (double& c : cdf_) c /= total;
    cdf_.back() = 1.0;
}

std::pair<int, int> PairSampler::draw(RngStream& rng) const {
    std::size_t idx;
    if (cdf_.empty()) {
        idx = rng.uniform_below(static_cast<std::uint64_t>(p_) * (p_ - 1) / 2);
    } else {
        const double u = rng.uniform01();
        idx = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
        if (idx >= cdf_.size()) idx = cdf_.size() - 1;
    }
    // Invert the lexicographic pair index.
    std::size_t row_len = p_ - 1;
    int j = 0;
    while (idx >= row_len) {
        idx -= row_len;
        --row_len;
        ++j;
    }
    return {j, j + 1 + static_cast<int>(idx)};
}

EdgeProposal propose_edge_move(const DecomposableGraph& g, RngStream& rng,
                               const PairSampler& pairs) {
    if (pairs.dim() != g.dim()) throw std::invalid_argument("propose_edge_move: dim mismatch");
    auto [j, k] = pairs.draw(rng);
    return {j, k, !g.has_edge(j, k)};
}

std::optional<RemovalSplit> removal_decomposition(const DecomposableGraph& g,
                                                  const PerfectSequence& seq, int j, int k) {
    if (!g.has_edge(j, k)) throw std::invalid_argument("removal_decomposition: edge not present");
    const auto qi = single_clique_containing(seq, j, k);
    if (!qi) return std::nullopt;
    const int q = *qi;
    const auto& cq = seq.cliques[q];

    // Orient so that k is outside C_q's own separator; both endpoints inside
    // would contradict the edge being confined to this one clique.
    if (q > 0) {
        const auto& sq = seq.separators[q - 1];
        const bool j_in = std::binary_search(sq.begin(), sq.end(), j);
        const bool k_in = std::binary_search(sq.begin(), sq.end(), k);
        if (j_in && k_in) throw std::logic_error("removal_decomposition: edge inside separator");
        if (k_in) std::swap(j, k);
    }

    RemovalSplit out;
    out.clique_index = q;
    out.clique = cq;
    for (int v : cq) {
        if (v != j && v != k) out.sep2.push_back(v);
        if (v != k) out.left.push_back(v);
        if (v != j) out.right.push_back(v);
    }

    // Splice C_q1, S_q2, C_q2 into place; if either shrunk clique is swallowed
    // by a neighbor the bookkeeping gets murky, so recompute from scratch.
    bool maximal = true;
    for (int i = 0; i < seq.n_cliques() && maximal; ++i) {
        if (i == q) continue;
        const auto& c = seq.cliques[i];
        if (std::includes(c.begin(), c.end(), out.left.begin(), out.left.end()) ||
            std::includes(c.begin(), c.end(), out.right.begin(), out.right.end()))
            maximal = false;
    }

    if (!maximal) {
        DecomposableGraph g2 = g;
        g2.remove_edge(j, k);
        out.spliced = perfect_sequence(g2);
        return out;
    }

    PerfectSequence sp;
    for (int i = 0; i < seq.n_cliques(); ++i) {
        if (i == q) {
            sp.cliques.push_back(out.left);
            if (q > 0) sp.separators.push_back(seq.separators[q - 1]);
            sp.cliques.push_back(out.right);
            sp.separators.push_back(out.sep2);
        } else {
            sp.cliques.push_back(seq.cliques[i]);
            if (i > 0) sp.separators.push_back(seq.separators[i - 1]);
        }
    }
    sp.host = recompute_hosts(sp);
    out.spliced = std::move(sp);
    return out;
}

}  // namespace tggm

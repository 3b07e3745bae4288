#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tggm/rng.hpp"

namespace tggm {

// Undirected graph on vertices 0..p-1, dense adjacency. Decomposability is a
// property checked on demand, not an enforced class invariant: MCMC proposals
// mutate freely and test afterwards.
class DecomposableGraph {
  public:
    explicit DecomposableGraph(int p);
    static DecomposableGraph complete(int p);

    int dim() const { return p_; }
    int n_edges() const { return n_edges_; }
    bool has_edge(int j, int k) const { return adj_[j * p_ + k] != 0; }
    void add_edge(int j, int k);
    void remove_edge(int j, int k);

    // Edges as (j,k) with j<k, lexicographic.
    std::vector<std::pair<int, int>> edges() const;

    bool operator==(const DecomposableGraph& other) const = default;

  private:
    void check_pair(int j, int k) const;
    int p_ = 0;
    int n_edges_ = 0;
    std::vector<unsigned char> adj_;
};

struct McsResult {
    std::vector<int> order;   // visit order
    std::vector<int> lambda;  // earlier-neighbor count at visit time, by position
    bool chordal = false;
};

// Maximum cardinality search; ties broken toward the smallest vertex index so
// results are deterministic.
McsResult mcs(const DecomposableGraph& g);

bool is_decomposable(const DecomposableGraph& g);

// Cliques C_1..C_m in MCS discovery order with S_i = C_i cap (C_1 u .. u C_{i-1})
// for i >= 2, plus for each separator the index of an earlier clique containing
// it (the running-intersection certificate). Empty separators mark new
// connected components.
struct PerfectSequence {
    std::vector<std::vector<int>> cliques;     // sorted vertex lists
    std::vector<std::vector<int>> separators;  // size m-1, separators[i-1] belongs to cliques[i]
    std::vector<int> host;                     // size m-1, host[i-1] < i and S_i subset of C_host

    int n_cliques() const { return static_cast<int>(cliques.size()); }
};

// Throws std::invalid_argument if g is not decomposable.
PerfectSequence perfect_sequence(const DecomposableGraph& g);

// Same construction, nullopt instead of a throw on non-decomposable input;
// this is the proposal-screening path of the graph sampler.
std::optional<PerfectSequence> try_perfect_sequence(const DecomposableGraph& g);

// True iff every separator is contained in some earlier clique and the
// cliques cover all vertices and edges of g exactly.
bool check_running_intersection(const DecomposableGraph& g, const PerfectSequence& seq);

// Index of the unique clique containing both endpoints, or nullopt if the
// edge lies in zero or several cliques.
std::optional<int> single_clique_containing(const PerfectSequence& seq, int j, int k);

// Fixed proposal distribution over all p(p-1)/2 vertex pairs.
class PairSampler {
  public:
    explicit PairSampler(int p);  // uniform
    PairSampler(int p, const Eigen::MatrixXd& weights);

    int dim() const { return p_; }
    std::pair<int, int> draw(RngStream& rng) const;

  private:
    int p_;
    std::vector<double> cdf_;  // empty means uniform
};

struct EdgeProposal {
    int j = 0, k = 0;
    bool add = false;
};

EdgeProposal propose_edge_move(const DecomposableGraph& g, RngStream& rng,
                               const PairSampler& pairs);

// Removal context for an edge lying in a single clique C_q: S_q2 = C_q minus
// both endpoints, the two shrunk cliques, and a perfect sequence for g minus
// the edge (direct splice when both shrunk cliques stay maximal, otherwise a
// fresh MCS pass on the mutated graph). nullopt when the edge is shared by
// several cliques, i.e. when removal would break decomposability.
struct RemovalSplit {
    int clique_index = -1;
    std::vector<int> clique;  // C_q
    std::vector<int> sep2;    // C_q minus {j,k}
    std::vector<int> left;    // C_q minus k
    std::vector<int> right;   // C_q minus j
    PerfectSequence spliced;
};

std::optional<RemovalSplit> removal_decomposition(const DecomposableGraph& g,
                                                  const PerfectSequence& seq, int j, int k);

}  // namespace tggm

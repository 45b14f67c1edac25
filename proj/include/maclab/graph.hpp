#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace maclab {

// Which agents count as an agent's neighborhood. The cooperative-bandit
// algorithms treat an agent as part of its own neighborhood; the federated
// ones do not. Consumers name the convention they use.
enum class Neighborhood { closed, open };

// Undirected simple connected graph over n agents with a uniform per-edge
// message delay (in rounds).
class CommGraph {
public:
    CommGraph() = default;
    // Validates: indices in range, no self loops, no duplicates, connected.
    CommGraph(int n_agents, int edge_delay, std::vector<std::pair<int, int>> edges);

    int n_agents() const { return n_; }
    int edge_delay() const { return delay_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    bool has_edge(int u, int v) const;
    int degree(int v) const { return static_cast<int>(adj_[v].size()); }
    int max_degree() const;
    bool connected() const;

    std::vector<int> neighborhood(int v, Neighborhood convention) const;

    // All-pairs shortest hop counts from a source (plain BFS).
    std::vector<int> bfs_distances(int source) const;

private:
    int n_ = 0;
    int delay_ = 0;
    std::vector<std::pair<int, int>> edges_;   // u < v, lexicographic
    std::vector<std::vector<int>> adj_;        // sorted
};

enum class TopologyKind { complete, r_regular, star, grid, erdos_renyi, rgg };

CommGraph build_complete(int n, int edge_delay);
// Circulant construction: each node is linked to its r/2 ring successors and
// predecessors; odd r additionally links antipodal nodes (requires even n).
CommGraph build_r_regular(int n, int r, int edge_delay);
CommGraph build_star(int n, int edge_delay);
CommGraph build_grid(int rows, int cols, int edge_delay);
// Edge probability defaults to 2*log(n)/n. Resamples until connected
// (at most 1000 attempts).
CommGraph build_erdos_renyi(int n, int edge_delay, std::uint64_t seed, double edge_prob = -1.0);
// Uniform points in the unit square, radius in (0, sqrt(2)]. Resamples until
// connected (at most 1000 attempts).
CommGraph build_rgg(int n, double radius, int edge_delay, std::uint64_t seed);

// Eigenvalues of the graph Laplacian D - A, sorted descending.
std::vector<double> laplacian_spectrum(const CommGraph& g);

// Symmetric doubly stochastic mixing matrix supported on the graph's edges
// (plus the diagonal).
class GossipMatrix {
public:
    GossipMatrix() = default;
    GossipMatrix(int n, std::vector<double> entries);
    int n() const { return n_; }
    double at(int u, int v) const { return w_[static_cast<std::size_t>(u) * n_ + v]; }
    const std::vector<double>& entries() const { return w_; }
    // Invariant checks used by tests: row/col sums within tol of 1,
    // non-negativity, symmetry.
    bool doubly_stochastic(double tol = 1e-12) const;

private:
    int n_ = 0;
    std::vector<double> w_;
};

// W = I - (D - A) / (2 (1 + d_max)).
GossipMatrix max_degree_gossip(const CommGraph& g);

// Second largest singular value of a symmetric doubly stochastic matrix.
double sigma2(const GossipMatrix& w);

struct IndependenceResult {
    long long value = 0;
    bool exact = false;
};

// Exact branch and bound up to exact_limit nodes, greedy min-degree lower
// bound beyond that.
IndependenceResult independence_number(const CommGraph& g, int exact_limit = 24);

struct SpectralSummary {
    std::vector<double> laplacian_eigenvalues;  // descending
    double algebraic_connectivity = 0.0;        // second smallest eigenvalue
    double sigma2_gossip = -1.0;                // -1 when no gossip matrix attached
    long long independence_number = 0;
    bool independence_exact = false;
};

SpectralSummary spectral_summary(const CommGraph& g, const GossipMatrix* w = nullptr,
                                 int independence_exact_limit = 24);

// One center per connected component: the component's vertex of minimum
// eccentricity, ties broken by larger degree then lower id. Every agent maps
// to its nearest center by BFS hops. mass(c) = min{|N(c)|, K} over the closed
// neighborhood; mass(v) = exp(-hop(v)/6) * mass(center(v)) otherwise.
struct CenterAssignment {
    std::vector<int> centers;
    std::vector<int> center_of;
    std::vector<int> hop_distance;
    std::vector<double> mass;
};

CenterAssignment select_centers(const CommGraph& g, int n_arms);

// Edge-list text format: first line "n d", then one "u v" line per edge,
// 0-indexed, lexicographically ordered.
void write_edge_list(std::ostream& out, const CommGraph& g);
CommGraph read_edge_list(std::istream& in);
void write_edge_list_file(const std::string& path, const CommGraph& g);
CommGraph read_edge_list_file(const std::string& path);

}  // namespace maclab

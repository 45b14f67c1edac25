#include "maclab/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "maclab/errors.hpp"
#include "maclab/rng.hpp"

namespace maclab {

CommGraph::CommGraph(int n_agents, int edge_delay, std::vector<std::pair<int, int>> edges)
    : n_(n_agents), delay_(edge_delay) {
    if (n_agents <= 0) throw std::invalid_argument("graph: n_agents must be positive");
    if (edge_delay < 0) throw std::invalid_argument("graph: edge_delay must be non-negative");
    std::set<std::pair<int, int>> dedup;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n_agents || v >= n_agents)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("graph: self loops are not allowed");
        if (u > v) std::swap(u, v);
        if (!dedup.insert({u, v}).second)
            throw std::invalid_argument("graph: duplicate edge");
    }
    edges_.assign(dedup.begin(), dedup.end());
    adj_.assign(n_, {});
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
    if (!connected()) throw std::invalid_argument("graph: must be connected");
}

bool CommGraph::has_edge(int u, int v) const {
    if (u < 0 || v < 0 || u >= n_ || v >= n_ || u == v) return false;
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
}

int CommGraph::max_degree() const {
    int m = 0;
    for (int v = 0; v < n_; ++v) m = std::max(m, degree(v));
    return m;
}

bool CommGraph::connected() const {
    if (n_ == 0) return false;
    auto dist = bfs_distances(0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

std::vector<int> CommGraph::neighborhood(int v, Neighborhood convention) const {
    std::vector<int> out = adj_[v];
    if (convention == Neighborhood::closed) {
        out.insert(std::lower_bound(out.begin(), out.end(), v), v);
    }
    return out;
}

std::vector<int> CommGraph::bfs_distances(int source) const {
    std::vector<int> dist(n_, -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : adj_[v]) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return dist;
}

CommGraph build_complete(int n, int edge_delay) {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return CommGraph(n, edge_delay, std::move(edges));
}

CommGraph build_r_regular(int n, int r, int edge_delay) {
    if (n <= 0) throw std::invalid_argument("r_regular: n must be positive");
    if (r >= n || r < 0) throw std::invalid_argument("r_regular: need 0 <= r < n");
    if (r % 2 == 1 && n % 2 == 1)
        throw std::invalid_argument("r_regular: odd degree requires even n");
    std::set<std::pair<int, int>> edges;
    auto add = [&](int u, int v) {
        if (u > v) std::swap(u, v);
        if (u != v) edges.insert({u, v});
    };
    for (int i = 0; i < n; ++i) {
        for (int k = 1; k <= r / 2; ++k) add(i, (i + k) % n);
        if (r % 2 == 1) add(i, (i + n / 2) % n);
    }
    return CommGraph(n, edge_delay, {edges.begin(), edges.end()});
}

CommGraph build_star(int n, int edge_delay) {
    if (n < 2) throw std::invalid_argument("star: n must be at least 2");
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
    return CommGraph(n, edge_delay, std::move(edges));
}

CommGraph build_grid(int rows, int cols, int edge_delay) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid: sides must be positive");
    std::vector<std::pair<int, int>> edges;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
        }
    }
    return CommGraph(rows * cols, edge_delay, std::move(edges));
}

CommGraph build_erdos_renyi(int n, int edge_delay, std::uint64_t seed, double edge_prob) {
    if (n <= 0) throw std::invalid_argument("erdos_renyi: n must be positive");
    double p = edge_prob >= 0.0 ? edge_prob : 2.0 * std::log(static_cast<double>(n)) / n;
    p = std::min(p, 1.0);
    Rng rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.bernoulli(p)) edges.emplace_back(u, v);
        try {
            return CommGraph(n, edge_delay, std::move(edges));
        } catch (const std::invalid_argument&) {
            // disconnected draw, retry
        }
    }
    throw std::invalid_argument("erdos_renyi: no connected graph in 1000 resamples");
}

CommGraph build_rgg(int n, double radius, int edge_delay, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("rgg: n must be positive");
    if (!(radius > 0.0) || radius > std::sqrt(2.0) + 1e-12)
        throw std::invalid_argument("rgg: radius must lie in (0, sqrt(2)]");
    Rng rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.uniform01();
            y[i] = rng.uniform01();
        }
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                double dx = x[u] - x[v], dy = y[u] - y[v];
                if (std::sqrt(dx * dx + dy * dy) <= radius) edges.emplace_back(u, v);
            }
        try {
            return CommGraph(n, edge_delay, std::move(edges));
        } catch (const std::invalid_argument&) {
        }
    }
    throw std::invalid_argument("rgg: no connected graph in 1000 resamples");
}

namespace {

Eigen::MatrixXd laplacian_matrix(const CommGraph& g) {
    int n = g.n_agents();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int v = 0; v < n; ++v) m(v, v) = g.degree(v);
    for (auto [u, v] : g.edges()) {
        m(u, v) = -1.0;
        m(v, u) = -1.0;
    }
    return m;
}

std::vector<double> descending_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw numeric_error("eigensolver failed");
    std::vector<double> out(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + m.rows());
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

}  // namespace

std::vector<double> laplacian_spectrum(const CommGraph& g) {
    return descending_eigenvalues(laplacian_matrix(g));
}

GossipMatrix::GossipMatrix(int n, std::vector<double> entries) : n_(n), w_(std::move(entries)) {
    if (n <= 0 || w_.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("gossip: entries must be n*n");
}

bool GossipMatrix::doubly_stochastic(double tol) const {
    for (int u = 0; u < n_; ++u) {
        double row = 0.0, col = 0.0;
        for (int v = 0; v < n_; ++v) {
            double e = at(u, v);
            if (e < 0.0) return false;
            if (std::abs(e - at(v, u)) > tol) return false;
            row += e;
            col += at(v, u);
        }
        if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol) return false;
    }
    return true;
}

GossipMatrix max_degree_gossip(const CommGraph& g) {
    int n = g.n_agents();
    double denom = 2.0 * (1.0 + g.max_degree());
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int v = 0; v < n; ++v)
        w[static_cast<std::size_t>(v) * n + v] = 1.0 - g.degree(v) / denom;
    for (auto [u, v] : g.edges()) {
        w[static_cast<std::size_t>(u) * n + v] = 1.0 / denom;
        w[static_cast<std::size_t>(v) * n + u] = 1.0 / denom;
    }
    return GossipMatrix(n, std::move(w));
}

double sigma2(const GossipMatrix& w) {
    int n = w.n();
    if (n == 1) return 0.0;
    Eigen::MatrixXd m(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) m(u, v) = w.at(u, v);
    auto eig = descending_eigenvalues(m);
    // symmetric matrix: singular values are absolute eigenvalues
    std::vector<double> sv(eig.size());
    std::transform(eig.begin(), eig.end(), sv.begin(), [](double x) { return std::abs(x); });
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv[1];
}

namespace {

// Max independent set by branch and bound over a degree-ordered vertex list.
struct MisSolver {
    int n;
    std::vector<std::uint64_t> adj_mask;
    long long best = 0;

    void search(std::uint64_t candidates, int chosen) {
        if (chosen + __builtin_popcountll(candidates) <= best) return;
        if (candidates == 0) {
            best = std::max<long long>(best, chosen);
            return;
        }
        int v = __builtin_ctzll(candidates);
        // branch: exclude v
        search(candidates & ~(1ULL << v), chosen);
        // branch: include v, drop its neighbors
        search(candidates & ~(1ULL << v) & ~adj_mask[v], chosen + 1);
    }
};

}  // namespace

IndependenceResult independence_number(const CommGraph& g, int exact_limit) {
    int n = g.n_agents();
    if (n <= exact_limit && n <= 63) {
        MisSolver solver;
        solver.n = n;
        solver.adj_mask.assign(n, 0);
        for (auto [u, v] : g.edges()) {
            solver.adj_mask[u] |= 1ULL << v;
            solver.adj_mask[v] |= 1ULL << u;
        }
        std::uint64_t all = n == 63 ? ~0ULL >> 1 : (1ULL << n) - 1;
        solver.search(all, 0);
        return {std::max<long long>(solver.best, 1), true};
    }
    // greedy: repeatedly take a minimum-degree vertex, remove its neighborhood
    std::vector<char> alive(n, 1);
    std::vector<int> deg(n);
    for (int v = 0; v < n; ++v) deg[v] = g.degree(v);
    long long count = 0;
    int remaining = n;
    while (remaining > 0) {
        int pick = -1;
        for (int v = 0; v < n; ++v)
            if (alive[v] && (pick < 0 || deg[v] < deg[pick])) pick = v;
        ++count;
        alive[pick] = 0;
        --remaining;
        for (int u : g.neighbors(pick))
            if (alive[u]) {
                alive[u] = 0;
                --remaining;
                for (int w : g.neighbors(u))
                    if (alive[w]) --deg[w];
            }
    }
    return {std::max<long long>(count, 1), false};
}

SpectralSummary spectral_summary(const CommGraph& g, const GossipMatrix* w,
                                 int independence_exact_limit) {
    SpectralSummary s;
    s.laplacian_eigenvalues = laplacian_spectrum(g);
    int n = g.n_agents();
    s.algebraic_connectivity = n >= 2 ? s.laplacian_eigenvalues[n - 2] : 0.0;
    if (w != nullptr) s.sigma2_gossip = sigma2(*w);
    auto ind = independence_number(g, independence_exact_limit);
    s.independence_number = ind.value;
    s.independence_exact = ind.exact;
    return s;
}

CenterAssignment select_centers(const CommGraph& g, int n_arms) {
    int n = g.n_agents();
    CenterAssignment out;
    out.center_of.assign(n, -1);
    out.hop_distance.assign(n, -1);
    out.mass.assign(n, 0.0);

    std::vector<std::vector<int>> dist(n);
    std::vector<char> assigned(n, 0);
    for (int v = 0; v < n; ++v)
        if (!assigned[v]) {
            // component of v
            auto dv = g.bfs_distances(v);
            std::vector<int> component;
            for (int u = 0; u < n; ++u)
                if (dv[u] >= 0) component.push_back(u);
            // vertex of minimum eccentricity; ties by max degree, then lowest id
            int center = -1;
            int best_ecc = -1, best_deg = -1;
            for (int u : component) {
                auto du = g.bfs_distances(u);
                int ecc = 0;
                for (int x : component) ecc = std::max(ecc, du[x]);
                bool better = center < 0 || ecc < best_ecc ||
                              (ecc == best_ecc && g.degree(u) > best_deg);
                if (better) {
                    center = u;
                    best_ecc = ecc;
                    best_deg = g.degree(u);
                    dist[center] = du;
                }
            }
            out.centers.push_back(center);
            for (int u : component) {
                assigned[u] = 1;
                out.center_of[u] = center;
                out.hop_distance[u] = dist[center][u];
            }
        }
    std::sort(out.centers.begin(), out.centers.end());
    for (int c : out.centers)
        out.mass[c] = std::min<double>(g.degree(c) + 1, n_arms);
    for (int v = 0; v < n; ++v)
        if (out.center_of[v] != v)
            out.mass[v] = std::exp(-out.hop_distance[v] / 6.0) * out.mass[out.center_of[v]];
    return out;
}

void write_edge_list(std::ostream& out, const CommGraph& g) {
    out << g.n_agents() << ' ' << g.edge_delay() << '\n';
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

CommGraph read_edge_list(std::istream& in) {
    int n = 0, d = 0;
    if (!(in >> n >> d)) throw config_error("edge_list", "missing 'n d' header");
    std::vector<std::pair<int, int>> edges;
    int u, v;
    while (in >> u >> v) edges.emplace_back(u, v);
    return CommGraph(n, d, std::move(edges));
}

void write_edge_list_file(const std::string& path, const CommGraph& g) {
    std::ofstream out(path);
    if (!out) throw config_error(path, "cannot open for writing");
    write_edge_list(out, g);
}

CommGraph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open for reading");
    return read_edge_list(in);
}

}  // namespace maclab

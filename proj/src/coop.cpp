#include "maclab/coop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "maclab/errors.hpp"
#include "maclab/policy.hpp"

namespace maclab {

double neighborhood_weight(std::span<const std::vector<double>> member_distributions, int arm) {
    if (member_distributions.empty())
        throw std::invalid_argument("neighborhood_weight: needs at least one distribution");
    if (member_distributions.size() == 1) return member_distributions[0][arm];
    double miss = 1.0;
    for (const auto& p : member_distributions) miss *= 1.0 - p[arm];
    return 1.0 - miss;
}

std::vector<double> collaborative_estimator(std::span<const NeighborhoodObservation> observations,
                                            int n_arms, long long* floored) {
    constexpr double kQFloor = 1e-12;
    std::vector<std::vector<double>> dists;
    dists.reserve(observations.size());
    for (const auto& o : observations) dists.push_back(o.distribution);
    std::vector<double> inc(n_arms, 0.0);
    std::vector<char> seen(n_arms, 0);
    for (const auto& o : observations) {
        if (seen[o.arm]) continue;
        seen[o.arm] = 1;
        double q = neighborhood_weight(dists, o.arm);
        if (q < kQFloor) {
            q = kQFloor;
            if (floored != nullptr) ++(*floored);
        }
        inc[o.arm] = o.loss / q;
    }
    return inc;
}

double dftrl_zeta(int n_arms, int delay, long long t) {
    int d = std::max(delay, 1);
    return std::sqrt(std::log(static_cast<double>(n_arms)) /
                     (static_cast<double>(d) * static_cast<double>(t)));
}

namespace {

struct OwnRecord {
    int arm = -1;
    double loss = 0.0;
    std::vector<double> distribution;
};

struct RegretAccounting {
    // realized cumulative loss per agent and per-arm cumulative loss seen by
    // that agent's own loss column (the comparator never touches estimates)
    std::vector<double> realized;
    std::vector<std::vector<double>> arm_cum;

    void init(int n_agents, int n_arms) {
        realized.assign(n_agents, 0.0);
        arm_cum.assign(n_agents, std::vector<double>(n_arms, 0.0));
    }

    void absorb(const LossTensor& env, long long t0, const std::vector<int>& arms) {
        for (int v = 0; v < static_cast<int>(arms.size()); ++v) {
            realized[v] += env.loss(t0, v, arms[v]);
            for (int i = 0; i < env.n_arms(); ++i) arm_cum[v][i] += env.loss(t0, v, i);
        }
    }

    std::vector<double> regrets() const {
        std::vector<double> out(realized.size());
        for (std::size_t v = 0; v < realized.size(); ++v) {
            double best = *std::min_element(arm_cum[v].begin(), arm_cum[v].end());
            out[v] = realized[v] - best;
        }
        return out;
    }
};

// Exponential-weights core shared by the two baseline algorithms.
struct Exp3Core {
    double gamma = 0.0;
    std::vector<double> log_weights;

    void init(int n_arms, long long horizon) {
        double k = n_arms;
        gamma = std::min(1.0, std::sqrt(k * std::log(k) /
                                        ((std::exp(1.0) - 1.0) * static_cast<double>(horizon))));
        log_weights.assign(n_arms, 0.0);
    }

    std::vector<double> distribution() const {
        int k = static_cast<int>(log_weights.size());
        double m = *std::max_element(log_weights.begin(), log_weights.end());
        std::vector<double> p(k);
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            p[i] = std::exp(log_weights[i] - m);
            sum += p[i];
        }
        for (int i = 0; i < k; ++i) p[i] = (1.0 - gamma) * (p[i] / sum) + gamma / k;
        return p;
    }

    void update(std::span<const double> estimate) {
        int k = static_cast<int>(log_weights.size());
        for (int i = 0; i < k; ++i)
            if (estimate[i] != 0.0) log_weights[i] -= gamma * estimate[i] / k;
    }
};

struct Recorder {
    const CoopOptions* opt;
    CoopResult* result;

    void round_distributions(const std::vector<std::vector<double>>& dists) {
        if (opt->record_distributions) result->distributions.push_back(dists);
    }
    void center_state(int c, const std::vector<double>& dist) {
        if (opt->record_center_detail) result->center_distributions[c].push_back(dist);
    }
    void center_increment(int c, const std::vector<double>& inc) {
        if (opt->record_center_detail) result->center_increments[c].push_back(inc);
    }
};

void broadcast(const CommGraph& g, DelayedInbox& bus, long long t,
               const std::vector<int>& arms, const std::vector<double>& losses,
               const std::vector<std::vector<double>>& dists) {
    for (int v = 0; v < g.n_agents(); ++v)
        for (int u : g.neighbors(v))
            bus.send(v, u, t, AgentMessage{v, t, arms[v], losses[v], dists[v]});
}

}  // namespace

CoopResult run_cooperative(const CommGraph& graph, const LossTensor& env, CoopAlgorithm algo,
                           const CoopOptions& options) {
    const int n = graph.n_agents();
    const int k = env.n_arms();
    const long long horizon = options.horizon > 0 ? options.horizon : env.horizon();
    if (horizon > env.horizon()) throw std::invalid_argument("run_cooperative: horizon exceeds env");
    if (env.n_agents() < n) throw std::invalid_argument("run_cooperative: env has too few agents");
    const int d = graph.edge_delay();

    CoopResult result;
    Recorder rec{&options, &result};
    Rng rng(options.seed);
    DelayedInbox bus(graph);
    RegretAccounting regret;
    regret.init(n, k);

    const bool center_based = algo == CoopAlgorithm::cftrl || algo == CoopAlgorithm::center_exp3;
    const bool tsallis_update = algo == CoopAlgorithm::cftrl;
    const bool hybrid_update = algo == CoopAlgorithm::dftrl;

    CenterAssignment centers;
    std::vector<char> is_center(n, 0);
    if (center_based) {
        centers = select_centers(graph, k);
        for (int c : centers.centers) is_center[c] = 1;
        result.centers = centers;
    }

    // learning-rate setup
    std::vector<double> center_eta(n, 0.0);
    double dftrl_eta = 0.0;
    if (algo == CoopAlgorithm::cftrl) {
        for (int c : centers.centers)
            center_eta[c] = options.center_eta
                                ? *options.center_eta
                                : std::sqrt(centers.mass[c] / (3.0 * static_cast<double>(horizon)));
        result.eta_center = center_eta[centers.centers.front()];
    }
    if (algo == CoopAlgorithm::dftrl) {
        auto ind = independence_number(graph);
        result.independence_number = ind.value;
        result.independence_exact = ind.exact;
        double ratio = static_cast<double>(ind.value) / n + 1.0 / k;
        dftrl_eta = (1.0 / (1.0 - std::exp(-1.0))) * std::pow(ratio, -0.25) *
                    std::sqrt(2.0 / static_cast<double>(horizon));
        result.eta_dftrl = dftrl_eta;
    }
    // per-agent FTRL state
    std::vector<std::vector<double>> cum_loss(n, std::vector<double>(k, 0.0));
    std::vector<double> hybrid_lambda(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<Exp3Core> exp3(n);
    if (algo == CoopAlgorithm::exp3_coop || algo == CoopAlgorithm::center_exp3) {
        for (int v = 0; v < n; ++v) exp3[v].init(k, horizon);
        result.gamma = exp3[0].gamma;
    }

    // own aged records (ring buffers over the last d+1 rounds)
    std::vector<std::vector<OwnRecord>> own_ring(n, std::vector<OwnRecord>(d + 1));
    // center distribution history for non-center copies
    std::vector<std::vector<std::vector<double>>> center_history(n);

    std::vector<std::vector<double>> dists(n);
    std::vector<int> arms(n);
    std::vector<double> losses(n);
    std::vector<NeighborhoodObservation> observations;

    for (long long t = 1; t <= horizon; ++t) {
        // 1. action distributions
        for (int v = 0; v < n; ++v) {
            if (center_based) {
                if (is_center[v]) {
                    dists[v] = tsallis_update ? tsallis_ftrl_solve(cum_loss[v], center_eta[v])
                                              : exp3[v].distribution();
                    center_history[v].push_back(dists[v]);
                } else {
                    int c = centers.center_of[v];
                    long long lag = static_cast<long long>(centers.hop_distance[v]) * d;
                    dists[v] = t > lag ? center_history[c][static_cast<std::size_t>(t - lag - 1)]
                                       : uniform_distribution(k);
                }
            } else if (hybrid_update) {
                dists[v] = hybrid_ftrl_solve(cum_loss[v], dftrl_eta, dftrl_zeta(k, d, t),
                                             &hybrid_lambda[v]);
            } else {
                dists[v] = exp3[v].distribution();
            }
        }
        rec.round_distributions(dists);
        if (center_based && options.record_center_detail)
            for (int c : centers.centers) rec.center_state(c, dists[c]);

        // 2. sample and observe
        for (int v = 0; v < n; ++v) {
            arms[v] = rng.categorical(dists[v]);
            losses[v] = env.loss(t - 1, v, arms[v]);
        }
        result.arms.push_back(arms);
        regret.absorb(env, t - 1, arms);

        // 3. exchange messages
        broadcast(graph, bus, t, arms, losses, dists);
        for (int v = 0; v < n; ++v)
            own_ring[v][static_cast<std::size_t>(t % (d + 1))] = {arms[v], losses[v], dists[v]};

        // 4. delayed collaborative estimator updates
        for (int v = 0; v < n; ++v) {
            auto aged = bus.receive(v, t);
            bool updates_state = center_based ? static_cast<bool>(is_center[v]) : true;
            if (!updates_state) continue;
            std::vector<double> inc(k, 0.0);
            if (t - d >= 1) {
                observations.clear();
                const auto& own = own_ring[v][static_cast<std::size_t>((t - d) % (d + 1))];
                observations.push_back({own.arm, own.loss, own.distribution});
                std::size_t expected = graph.neighbors(v).size();
                if (aged.size() != expected)
                    throw numeric_error("run_cooperative: message for round t-d missing");
                for (auto& msg : aged) {
                    if (msg.round != t - d)
                        throw numeric_error("run_cooperative: message for round t-d missing");
                    observations.push_back({msg.arm, msg.loss, std::move(msg.distribution)});
                }
                inc = collaborative_estimator(observations, k, &result.floored_q_count);
            }
            if (center_based && options.record_center_detail) rec.center_increment(v, inc);
            if (tsallis_update || hybrid_update) {
                for (int i = 0; i < k; ++i) cum_loss[v][i] += inc[i];
            } else if (t - d >= 1) {
                exp3[v].update(inc);
            }
        }

        // 5. trace
        if (t % options.stride == 0 || t == horizon) {
            CoopTraceRow row;
            row.t = t;
            row.regret = regret.regrets();
            row.avg_regret = 0.0;
            for (double r : row.regret) row.avg_regret += r;
            row.avg_regret /= n;
            result.trace.push_back(std::move(row));
        }
    }

    result.final_regret = regret.regrets();
    result.final_avg_regret = 0.0;
    for (double r : result.final_regret) result.final_avg_regret += r;
    result.final_avg_regret /= n;
    return result;
}

}  // namespace maclab

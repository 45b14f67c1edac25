#include "maclab/fedexp3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maclab/errors.hpp"
#include "maclab/policy.hpp"

namespace maclab {

double FedSchedules::gamma_unclipped(long long t) const {
    double k = n_arms;
    return std::cbrt(exploration_scale * (c_w + 0.5) * k * k * std::log(k) /
                     static_cast<double>(t));
}

double FedSchedules::gamma(long long t) const { return std::min(1.0, gamma_unclipped(t)); }

FedSchedules fedexp3_schedules(int n_arms, long long horizon, int n_agents, double sigma2,
                               double exploration_scale) {
    if (n_arms < 2) throw std::invalid_argument("fedexp3_schedules: needs K >= 2");
    if (horizon < 1) throw std::invalid_argument("fedexp3_schedules: needs T >= 1");
    if (sigma2 < 0.0 || sigma2 >= 1.0)
        throw std::invalid_argument("fedexp3_schedules: sigma2 must lie in [0, 1)");
    FedSchedules s;
    s.n_arms = n_arms;
    s.horizon = horizon;
    s.sigma2 = sigma2;
    s.exploration_scale = exploration_scale;
    double t_f = static_cast<double>(horizon);
    double n_f = static_cast<double>(n_agents);
    s.c_w = std::min(2.0 * std::log(t_f) + std::log(n_f), std::sqrt(n_f)) / (1.0 - sigma2) + 3.0;
    s.eta = std::log(static_cast<double>(n_arms)) / (t_f * s.gamma(horizon));
    return s;
}

FedExp3State fedexp3_init(int n_agents, int n_arms) {
    FedExp3State state;
    state.z.assign(n_agents, std::vector<double>(n_arms, 0.0));
    state.x.assign(n_agents, uniform_distribution(n_arms));
    return state;
}

std::vector<int> fedexp3_round(FedExp3State& state, const LossTensor& env, const GossipMatrix& w,
                               const FedSchedules& schedules, long long t, Rng& rng,
                               std::vector<std::vector<double>>* g_out) {
    const int n = static_cast<int>(state.z.size());
    const int k = schedules.n_arms;
    const double gamma = schedules.gamma(t);
    std::vector<int> arms(n);
    std::vector<std::vector<double>> g(n);

    for (int v = 0; v < n; ++v) {
        std::vector<double> p(k);
        for (int i = 0; i < k; ++i) p[i] = (1.0 - gamma) * state.x[v][i] + gamma / k;
        int a = rng.categorical(p);
        arms[v] = a;
        double loss = env.loss(t - 1, v, a);
        g[v] = importance_weighted_estimate(a, loss, p[a], k);
    }

    // synchronous gossip from the round-start snapshot
    std::vector<std::vector<double>> next(n, std::vector<double>(k, 0.0));
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            double wu = w.at(u, v);
            if (wu == 0.0) continue;
            for (int i = 0; i < k; ++i) next[v][i] += wu * state.z[u][i];
        }
        for (int i = 0; i < k; ++i) next[v][i] += g[v][i];
    }
    state.z = std::move(next);
    for (int v = 0; v < n; ++v) state.x[v] = entropic_argmin(state.z[v], schedules.eta);
    if (g_out != nullptr) *g_out = std::move(g);
    return arms;
}

FedExp3Result run_fedexp3(const CommGraph& graph, const LossTensor& env,
                          const FedExp3Options& options) {
    const int n = graph.n_agents();
    const int k = env.n_arms();
    const long long horizon = options.horizon > 0 ? options.horizon : env.horizon();
    if (horizon > env.horizon()) throw std::invalid_argument("run_fedexp3: horizon exceeds env");
    if (env.n_agents() != n) throw std::invalid_argument("run_fedexp3: env/graph agent mismatch");

    GossipMatrix w = max_degree_gossip(graph);
    FedExp3Result result;
    result.schedules = fedexp3_schedules(k, horizon, n, sigma2(w), options.exploration_scale);

    FedExp3State state = fedexp3_init(n, k);
    Rng rng(options.seed);

    std::vector<double> realized(n, 0.0);       // cumulative averaged loss of pulls
    std::vector<double> arm_cum(k, 0.0);        // cumulative averaged loss per arm
    std::vector<std::vector<double>> g;
    std::vector<double> zbar_prev(k, 0.0);

    for (long long t = 1; t <= horizon; ++t) {
        if (options.record_distributions) {
            double gamma = result.schedules.gamma(t);
            std::vector<std::vector<double>> dists(n, std::vector<double>(k));
            for (int v = 0; v < n; ++v)
                for (int i = 0; i < k; ++i)
                    dists[v][i] = (1.0 - gamma) * state.x[v][i] + gamma / k;
            result.distributions.push_back(std::move(dists));
        }

        auto arms = fedexp3_round(state, env, w, result.schedules, t, rng, &g);

        std::vector<double> avg(k);
        for (int i = 0; i < k; ++i) {
            avg[i] = env.average_loss(t - 1, i);
            arm_cum[i] += avg[i];
        }
        for (int v = 0; v < n; ++v) realized[v] += avg[arms[v]];

        if (options.audit_invariants) {
            std::vector<double> zbar(k, 0.0), gbar(k, 0.0);
            for (int v = 0; v < n; ++v)
                for (int i = 0; i < k; ++i) {
                    zbar[i] += state.z[v][i] / n;
                    gbar[i] += g[v][i] / n;
                }
            for (int i = 0; i < k; ++i)
                result.max_conservation_error = std::max(
                    result.max_conservation_error, std::abs(zbar[i] - zbar_prev[i] - gbar[i]));
            double gamma = result.schedules.gamma(t);
            for (int v = 0; v < n; ++v) {
                double norm = 0.0;
                for (int i = 0; i < k; ++i) norm = std::max(norm, std::abs(g[v][i]));
                result.max_estimator_norm_ratio =
                    std::max(result.max_estimator_norm_ratio, norm * gamma / k);
                double dis = 0.0;
                for (int i = 0; i < k; ++i) dis = std::max(dis, std::abs(state.z[v][i] - zbar[i]));
                result.max_disagreement = std::max(result.max_disagreement, dis);
            }
            zbar_prev = std::move(zbar);
        }

        if (t % options.stride == 0 || t == horizon) {
            FedExp3TraceRow row;
            row.t = t;
            double best = *std::min_element(arm_cum.begin(), arm_cum.end());
            row.regret.resize(n);
            for (int v = 0; v < n; ++v) {
                row.regret[v] = realized[v] - best;
                row.avg_regret += row.regret[v];
            }
            row.avg_regret /= n;
            result.trace.push_back(std::move(row));
        }
    }

    result.final_regret = result.trace.back().regret;
    result.final_avg_regret = result.trace.back().avg_regret;
    return result;
}

}  // namespace maclab

#pragma once

#include <cstdint>
#include <vector>

#include "maclab/env.hpp"
#include "maclab/graph.hpp"
#include "maclab/rng.hpp"

namespace maclab {

// Exploration / learning-rate schedules:
//   gamma_t = min{1, cbrt((C_W + 1/2) K^2 log K / t)}
//   eta     = log K / (T gamma_T)                      (constant in t)
//   C_W     = min{2 log T + log N, sqrt(N)} / (1 - sigma2) + 3
struct FedSchedules {
    double c_w = 0.0;
    double sigma2 = 0.0;
    double eta = 0.0;
    long long horizon = 0;
    int n_arms = 0;
    // exploration_scale rescales the gamma numerator; 1.0 is the analysis
    // schedule, smaller values trade exploration for exploitation at short
    // horizons (recorded in run metadata when used)
    double exploration_scale = 1.0;

    double gamma(long long t) const;
    double gamma_unclipped(long long t) const;
};

FedSchedules fedexp3_schedules(int n_arms, long long horizon, int n_agents, double sigma2,
                               double exploration_scale = 1.0);

struct FedExp3State {
    std::vector<std::vector<double>> z;  // cumulative gossip loss estimates
    std::vector<std::vector<double>> x;  // exploitation distributions
};

FedExp3State fedexp3_init(int n_agents, int n_arms);

// One synchronous round: mix, sample, estimate, gossip-average the round-start
// z with W (self weight included), recompute x. Returns the arms pulled.
// g_out, when given, receives the per-agent instantaneous estimators.
std::vector<int> fedexp3_round(FedExp3State& state, const LossTensor& env, const GossipMatrix& w,
                               const FedSchedules& schedules, long long t, Rng& rng,
                               std::vector<std::vector<double>>* g_out = nullptr);

struct FedExp3Options {
    long long horizon = 0;
    std::uint64_t seed = 0;
    long long stride = 1;
    double exploration_scale = 1.0;
    bool record_distributions = false;
    bool audit_invariants = false;  // conservation + estimator norm, every round
};

struct FedExp3TraceRow {
    long long t = 0;
    std::vector<double> regret;  // vs the globally best arm on averaged losses
    double avg_regret = 0.0;
};

struct FedExp3Result {
    std::vector<FedExp3TraceRow> trace;
    std::vector<double> final_regret;
    double final_avg_regret = 0.0;
    FedSchedules schedules;
    std::vector<std::vector<std::vector<double>>> distributions;  // [t][agent][arm]
    // audit outputs (audit_invariants)
    double max_conservation_error = 0.0;  // |zbar_{t+1} - zbar_t - mean g_t|, inf norm
    double max_estimator_norm_ratio = 0.0;  // max_t ||g||_inf * gamma_t / K  (should be <= 1)
    double max_disagreement = 0.0;          // max_t,v ||z_t^v - zbar_t||_inf
};

FedExp3Result run_fedexp3(const CommGraph& graph, const LossTensor& env,
                          const FedExp3Options& options);

}  // namespace maclab

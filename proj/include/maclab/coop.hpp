#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "maclab/env.hpp"
#include "maclab/graph.hpp"
#include "maclab/inbox.hpp"

namespace maclab {

enum class CoopAlgorithm { cftrl, dftrl, exp3_coop, center_exp3 };

// Probability that at least one member of a neighborhood observed arm i:
// q = 1 - prod_v (1 - p_v(i)).
double neighborhood_weight(std::span<const std::vector<double>> member_distributions, int arm);

// One neighborhood member's contribution to the delayed estimator: the arm it
// pulled, the loss it observed, and the distribution it played.
struct NeighborhoodObservation {
    int arm = -1;
    double loss = 0.0;
    std::vector<double> distribution;
};

// Importance-weighted estimator over the arms observed in a neighborhood:
// loss(i) / q(i) on each observed arm, zero elsewhere. q values below 1e-12
// are floored, counting into *floored when given.
std::vector<double> collaborative_estimator(std::span<const NeighborhoodObservation> observations,
                                            int n_arms, long long* floored = nullptr);

// Entropy learning rate of the decentralized algorithm: sqrt(log K / (d t)).
double dftrl_zeta(int n_arms, int delay, long long t);

struct CoopOptions {
    long long horizon = 0;
    std::uint64_t seed = 0;
    long long stride = 1;
    // Overrides the CFTRL center learning rate sqrt(mass(c) / (3T)).
    std::optional<double> center_eta;
    bool record_distributions = false;  // p_t^v for every agent and round
    bool record_center_detail = false;  // center distributions + estimator increments
};

struct CoopTraceRow {
    long long t = 0;
    std::vector<double> regret;
    double avg_regret = 0.0;
};

struct CoopResult {
    std::vector<CoopTraceRow> trace;
    std::vector<double> final_regret;
    double final_avg_regret = 0.0;
    std::vector<std::vector<int>> arms;  // [t][agent]

    // populated when the matching option is set
    std::vector<std::vector<std::vector<double>>> distributions;        // [t][agent][arm]
    std::map<int, std::vector<std::vector<double>>> center_distributions;  // center -> [t][arm]
    std::map<int, std::vector<std::vector<double>>> center_increments;     // estimator at round t

    CenterAssignment centers;  // cftrl / center_exp3 only
    long long floored_q_count = 0;
    double eta_center = 0.0;   // cftrl
    double eta_dftrl = 0.0;    // dftrl
    double gamma = 0.0;        // exp3 baselines
    long long independence_number = 0;
    bool independence_exact = true;
};

// Synchronous simulation over the delayed message bus; agents are updated in
// id order each round, so a (graph, env, algorithm, options) tuple fully
// determines the result.
CoopResult run_cooperative(const CommGraph& graph, const LossTensor& env, CoopAlgorithm algo,
                           const CoopOptions& options);

}  // namespace maclab

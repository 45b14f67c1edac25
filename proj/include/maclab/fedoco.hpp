#pragma once

#include <cstdint>
#include <vector>

#include "maclab/env.hpp"
#include "maclab/graph.hpp"
#include "maclab/rng.hpp"

namespace maclab {

// Message counter: two messages per communicating round, zero otherwise.
struct CommMeter {
    long long q = 0;
    int last_m = 0;
    void record(bool communicated) {
        last_m = communicated ? 2 : 0;
        q += last_m;
    }
};

// Dual-averaging projection argmin_x { <z, x> + psi(x)/eta }:
// entropy over the simplex -> softmax; half squared norm over the ball ->
// -eta z rescaled onto the ball when it lands outside.
std::vector<double> oco_projection(const std::vector<double>& z, double eta, DecisionSet set,
                                   double radius);

struct FedOcoOptions {
    double alpha = 0.0;  // communication-skipping exponent, in [0, 1)
    std::uint64_t seed = 0;
    long long stride = 1;
};

struct FedOcoTraceRow {
    long long t = 0;
    std::vector<double> regret;  // vs best fixed point of the network loss
    long long q_running = 0;
};

struct FedOcoResult {
    std::vector<FedOcoTraceRow> trace;
    std::vector<double> final_regret;
    long long q_total = 0;
    long long communicating_rounds = 0;
    double lambda2 = 0.0;          // second largest eigenvalue of the expected gossip matrix
    bool schedule_fallback = false;  // eta fell back to R/(L sqrt(t))
    double eta_coefficient = 0.0;    // eta_t = eta_coefficient / sqrt(t)
    // audits
    bool m_values_valid = true;           // every m_t in {0, 2}
    double max_sum_conservation = 0.0;    // averaging-step conservation error
    double max_subgradient_norm = 0.0;
    bool iterates_feasible = true;
};

// lambda2 of W = I - (D - A)/(T^alpha |E|), the expected per-round mixing
// matrix of the single-edge protocol.
double fedoco_expected_lambda2(const CommGraph& graph, long long horizon, double alpha);

FedOcoResult run_fedoco(const CommGraph& graph, const OcoProblem& problem,
                        const FedOcoOptions& options);

}  // namespace maclab

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "maclab/rng.hpp"

namespace maclab {

// Population of n nodes with i.i.d. Bernoulli(p) binary types, fixed at
// construction.
struct NodePopulation {
    int n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> types;

    static NodePopulation sample(int n, double p, std::uint64_t seed);
    static NodePopulation from_types(std::vector<std::uint8_t> types, double p);
    long long high_count() const;
};

enum class ValueFn { AND, OR };

int pair_value(int type_u, int type_v, ValueFn fn);

// Value of a maximum-value perfect matching, exactly:
// OR: (N1 + min{N1, n - N1})/2; AND: floor(N1/2).
long long optimal_value(const NodePopulation& pop, ValueFn fn);

// Posterior probability that a matching set of a nodes, known to contain at
// most one high-type node, contains one: pa/(1 - p + pa).
double posterior_pi(long long a, double p);

// Collection of disjoint matching sets (each a list of node ids, each known
// to contain at most one high node) plus nodes identified with certainty.
struct MatchingSetState {
    std::vector<std::vector<int>> sets;
    std::vector<int> identified_high;
    std::vector<int> identified_low;
};

// Oracle: enumerate every type assignment consistent with the state
// (each set holds at most one high node), weight by the Bernoulli prior, and
// return the probability that the target set contains a high node.
// Total nodes across sets must not exceed 24.
double brute_force_posterior(const MatchingSetState& state, int target_set, double p);

enum class MatchEvent { init, swap, merge, remove, terminate };

struct MatchTraceRow {
    long long round = 0;
    long long reward = 0;
    double regret = 0.0;
    long long num_sets = 0;
    MatchEvent event = MatchEvent::swap;
};

struct MergeCallRecord {
    long long a_nodes = 0;
    long long b_nodes = 0;
    long long steps = 0;
    bool early_exit = false;
    long long first_round = 0;  // round of the call's first rematch
    // node lists, kept only when matchings are recorded
    std::vector<int> a_list;
    std::vector<int> b_list;
};

struct IncrementalTrace {
    std::vector<MatchTraceRow> rows;
    long long tau = 0;            // rounds simulated (termination round)
    double total_regret = 0.0;    // sum of instantaneous regret over rounds 1..tau
    double terminal_regret = 0.0; // instantaneous regret at tau
    long long optimal = 0;

    // incremental-constraint and reward audits
    long long max_pair_delta = 0;        // max |M_t delta M_{t-1}|
    long long delta_violations = 0;
    long long reward_audit_failures = 0;

    // OR-specific: round-1 state and the 1-1 count per round
    long long s1 = 0, u1 = 0, u11_1 = 0;
    std::vector<long long> u11_per_round;

    // AND-specific instrumentation
    std::vector<MergeCallRecord> merge_calls;
    std::vector<std::vector<long long>> boundary_set_sizes;  // multiset snapshots

    // recorded matchings (record_matchings), one partner array per round
    std::vector<std::vector<int>> matchings;
};

struct MatchOptions {
    std::uint64_t run_seed = 0;
    long long stride = 1;           // trace row stride for swap rounds
    long long audit_stride = 64;    // full reward/matching recomputation period
    bool record_matchings = false;  // keep every matching (small n only)
    // draws the initial matching from its own stream so runs can share it
    std::optional<std::uint64_t> matching_seed;
    // called with the current matching-set collection after every change
    std::function<void(const std::vector<std::vector<int>>&)> set_observer;
};

// 1-chain strategy: exploit a known low-low pair to classify one value-1 pair
// per round; stops when either pool empties.
IncrementalTrace greedy_bayes_or(const NodePopulation& pop, const MatchOptions& options);

// Least-size-merge strategy: pairwise examination of the two smallest
// matching sets via incremental rematchings, merging on failure and removing
// both sets when the two high nodes find each other.
IncrementalTrace greedy_bayes_and(const NodePopulation& pop, const MatchOptions& options);

// Idealized super-epoch process: X = number of regular matching sets,
// Y = size of the special set. First transition examines every initial pair
// individually; later ones pair up regular sets of 2^s nodes.
struct ChainState {
    long long x = 0;
    long long y = 0;
};

std::vector<ChainState> superepoch_chain(long long n, double p, std::uint64_t seed);

}  // namespace maclab

#include "maclab/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace maclab {

NodePopulation NodePopulation::sample(int n, double p, std::uint64_t seed) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("population: n must be even positive");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("population: p must lie in [0, 1]");
    NodePopulation pop;
    pop.n = n;
    pop.p = p;
    pop.seed = seed;
    pop.types.resize(n);
    Rng rng(seed);
    for (int v = 0; v < n; ++v) pop.types[v] = rng.bernoulli(p) ? 1 : 0;
    return pop;
}

NodePopulation NodePopulation::from_types(std::vector<std::uint8_t> types, double p) {
    if (types.empty() || types.size() % 2 != 0)
        throw std::invalid_argument("population: n must be even positive");
    NodePopulation pop;
    pop.n = static_cast<int>(types.size());
    pop.p = p;
    pop.types = std::move(types);
    return pop;
}

long long NodePopulation::high_count() const {
    long long c = 0;
    for (auto t : types) c += t;
    return c;
}

int pair_value(int type_u, int type_v, ValueFn fn) {
    if ((type_u != 0 && type_u != 1) || (type_v != 0 && type_v != 1))
        throw std::invalid_argument("pair_value: types must be binary");
    return fn == ValueFn::AND ? (type_u & type_v) : (type_u | type_v);
}

long long optimal_value(const NodePopulation& pop, ValueFn fn) {
    long long n1 = pop.high_count();
    long long n = pop.n;
    if (fn == ValueFn::AND) return n1 / 2;
    return (n1 + std::min(n1, n - n1)) / 2;
}

double posterior_pi(long long a, double p) {
    if (a < 0) throw std::invalid_argument("posterior_pi: a must be non-negative");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("posterior_pi: p must lie in [0, 1]");
    if (a == 0) return 0.0;
    double ap = static_cast<double>(a) * p;
    return ap / (1.0 - p + ap);
}

double brute_force_posterior(const MatchingSetState& state, int target_set, double p) {
    if (target_set < 0 || target_set >= static_cast<int>(state.sets.size()))
        throw std::invalid_argument("brute_force_posterior: bad target set");
    long long total = 0;
    for (const auto& s : state.sets) total += static_cast<long long>(s.size());
    if (total > 24) throw std::invalid_argument("brute_force_posterior: more than 24 nodes");
    // flatten: node slot -> (set index)
    std::vector<int> set_of;
    for (int s = 0; s < static_cast<int>(state.sets.size()); ++s)
        for (std::size_t j = 0; j < state.sets[s].size(); ++j) set_of.push_back(s);
    double consistent = 0.0, target_high = 0.0;
    int bits = static_cast<int>(total);
    for (std::uint64_t mask = 0; mask < (1ULL << bits); ++mask) {
        std::vector<int> highs(state.sets.size(), 0);
        int pop_count = 0;
        bool ok = true;
        for (int b = 0; b < bits && ok; ++b)
            if (mask >> b & 1) {
                ++pop_count;
                if (++highs[set_of[b]] > 1) ok = false;
            }
        if (!ok) continue;
        double w = std::pow(p, pop_count) * std::pow(1.0 - p, bits - pop_count);
        consistent += w;
        if (highs[target_set] > 0) target_high += w;
    }
    if (consistent == 0.0) return 0.0;
    return target_high / consistent;
}

namespace {

// Shared bookkeeping: current matching as a partner array plus incremental
// constraint and reward audits against a fully recomputed state.
struct MatchingEngine {
    const NodePopulation* pop;
    ValueFn fn;
    std::vector<int> partner;
    long long reward = 0;  // sum of pair values of the current matching
    IncrementalTrace* trace;
    const MatchOptions* opt;
    long long round = 1;
    long long last_delta = 0;

    void init_random_matching(Rng& run_rng) {
        int n = pop->n;
        std::vector<int> order(n);
        for (int v = 0; v < n; ++v) order[v] = v;
        Rng own_rng(opt->matching_seed.value_or(0));
        Rng& rng = opt->matching_seed ? own_rng : run_rng;
        for (int v = n - 1; v > 0; --v)
            std::swap(order[v], order[static_cast<int>(rng.uniform_int(v + 1))]);
        partner.assign(n, -1);
        for (int j = 0; j < n; j += 2) {
            partner[order[j]] = order[j + 1];
            partner[order[j + 1]] = order[j];
        }
        reward = recompute_reward();
    }

    int value(int u, int v) const { return pair_value(pop->types[u], pop->types[v], fn); }

    long long recompute_reward() const {
        long long r = 0;
        for (int v = 0; v < pop->n; ++v)
            if (partner[v] > v) r += value(v, partner[v]);
        return r;
    }

    // Replace pairs (a, pa) and (b, pb) with (a, b), (pa, pb). Exactly two
    // pairs leave and two enter, so the symmetric difference is 4.
    void rematch(int a, int b) {
        int pa = partner[a], pb = partner[b];
        reward -= value(a, pa);
        reward -= value(b, pb);
        partner[a] = b;
        partner[b] = a;
        partner[pa] = pb;
        partner[pb] = pa;
        reward += value(a, b);
        reward += value(pa, pb);
        last_delta = 4;
        ++round;
        trace->max_pair_delta = std::max(trace->max_pair_delta, last_delta);
        if (last_delta > 4) ++trace->delta_violations;
        if (opt->record_matchings) trace->matchings.push_back(partner);
        if (round % opt->audit_stride == 0 && recompute_reward() != reward)
            ++trace->reward_audit_failures;
    }

    void emit(MatchEvent event, long long num_sets, double regret_now) {
        bool keep = event != MatchEvent::swap || round % opt->stride == 0;
        if (keep) trace->rows.push_back({round, reward, regret_now, num_sets, event});
    }
};

}  // namespace

IncrementalTrace greedy_bayes_or(const NodePopulation& pop, const MatchOptions& options) {
    IncrementalTrace trace;
    Rng rng(options.run_seed);
    MatchingEngine eng{&pop, ValueFn::OR, {}, 0, &trace, &options};
    eng.init_random_matching(rng);
    if (options.record_matchings) trace.matchings.push_back(eng.partner);

    const long long n1 = pop.high_count();
    const long long mu_star = optimal_value(pop, ValueFn::OR);
    trace.optimal = mu_star;
    const double regret_offset =
        std::min(static_cast<double>(pop.n) / 2.0 - static_cast<double>(n1), 0.0);

    // classify the initial matching
    std::vector<std::pair<int, int>> zeros, ones;  // value-0 pairs (S), value-1 pairs (U)
    long long u11 = 0;
    for (int v = 0; v < pop.n; ++v)
        if (eng.partner[v] > v) {
            int u = eng.partner[v];
            if (eng.value(v, u) == 0)
                zeros.push_back({v, u});
            else {
                ones.push_back({v, u});
                if (pop.types[v] == 1 && pop.types[u] == 1) ++u11;
            }
        }
    long long known01 = 0;
    trace.s1 = static_cast<long long>(zeros.size());
    trace.u1 = static_cast<long long>(ones.size());
    trace.u11_1 = u11;

    auto instantaneous_regret = [&]() {
        return static_cast<double>(u11) + regret_offset;
    };

    trace.u11_per_round.push_back(u11);
    trace.total_regret += instantaneous_regret();
    eng.emit(MatchEvent::init, static_cast<long long>(zeros.size() + ones.size()) + known01,
             instantaneous_regret());

    while (!zeros.empty() && !ones.empty()) {
        auto take = [&rng](std::vector<std::pair<int, int>>& pool) {
            std::size_t idx = static_cast<std::size_t>(rng.uniform_int(pool.size()));
            auto out = pool[idx];
            pool[idx] = pool.back();
            pool.pop_back();
            return out;
        };
        auto [a, b] = take(zeros);  // both known low
        auto [x, y] = take(ones);   // at least one high
        eng.rematch(a, x);          // pairs become (a, x) and (b, y)
        bool x_high = pop.types[x] == 1, y_high = pop.types[y] == 1;
        if (x_high && y_high) {
            known01 += 2;
            --u11;
        } else {
            known01 += 1;
            // the two low nodes re-form a known 0-0 pair
            if (x_high)
                zeros.push_back({std::min(b, y), std::max(b, y)});
            else
                zeros.push_back({std::min(a, x), std::max(a, x)});
        }
        trace.u11_per_round.push_back(u11);
        trace.total_regret += instantaneous_regret();
        eng.emit(MatchEvent::swap, static_cast<long long>(zeros.size() + ones.size()) + known01,
                 instantaneous_regret());
    }

    trace.tau = eng.round + (eng.round == 1 ? 1 : 0);  // no swap possible counts one idle round
    if (eng.round == 1) {
        trace.u11_per_round.push_back(u11);
        trace.total_regret += instantaneous_regret();
    }
    trace.terminal_regret = instantaneous_regret();
    eng.emit(MatchEvent::terminate, static_cast<long long>(zeros.size() + ones.size()) + known01,
             trace.terminal_regret);
    return trace;
}

namespace {

struct SetKey {
    long long size;
    int min_id;
    bool operator<(const SetKey& o) const {
        return size != o.size ? size < o.size : min_id < o.min_id;
    }
};

struct AndRunState {
    MatchingEngine* eng;
    const NodePopulation* pop;
    IncrementalTrace* trace;
    long long mu_star;
    long long num_sets = 0;

    double regret_now() const {
        return static_cast<double>(mu_star) - static_cast<double>(eng->reward);
    }
    void note_round(MatchEvent ev) {
        trace->total_regret += regret_now();
        eng->emit(ev, num_sets, regret_now());
    }
};

// Examine all cross pairs of node sets A and B by incremental rematchings.
// Returns true when the sets should merge (no high-high pair found).
bool is_merge(AndRunState& run, const std::vector<int>& a_nodes, const std::vector<int>& b_nodes,
              std::vector<int>* high_pair) {
    MatchingEngine& eng = *run.eng;
    std::set<int> a_lookup(a_nodes.begin(), a_nodes.end());
    std::map<int, std::set<int>> candidates;
    for (int u : a_nodes) candidates[u] = std::set<int>(b_nodes.begin(), b_nodes.end());

    MergeCallRecord rec;
    rec.a_nodes = static_cast<long long>(a_nodes.size());
    rec.b_nodes = static_cast<long long>(b_nodes.size());
    rec.first_round = eng.round + 1;
    if (eng.opt->record_matchings) {
        rec.a_list = a_nodes;
        rec.b_list = b_nodes;
    }

    for (int u : a_nodes) {
        auto& pu = candidates[u];
        while (!pu.empty()) {
            int v = *pu.begin();
            if (eng.partner[u] == v) {
                // already matched together, value observed when the pair formed
                pu.erase(pu.begin());
                continue;
            }
            int u2 = eng.partner[u];
            int v2 = eng.partner[v];
            eng.rematch(u, v);
            ++rec.steps;
            int val_uv = eng.value(u, v);
            int val_rest = eng.value(u2, v2);
            pu.erase(v);
            if (val_uv + val_rest == 1) {
                rec.early_exit = true;
                run.trace->merge_calls.push_back(rec);
                *high_pair = val_uv == 1 ? std::vector<int>{u, v} : std::vector<int>{u2, v2};
                run.note_round(MatchEvent::swap);
                return false;
            }
            run.note_round(MatchEvent::swap);
            if (a_lookup.count(u2) != 0) candidates[u2].erase(v2);
            if (a_lookup.count(v2) != 0) candidates[v2].erase(u2);
        }
    }
    run.trace->merge_calls.push_back(rec);
    return true;
}

}  // namespace

IncrementalTrace greedy_bayes_and(const NodePopulation& pop, const MatchOptions& options) {
    IncrementalTrace trace;
    Rng rng(options.run_seed);
    MatchingEngine eng{&pop, ValueFn::AND, {}, 0, &trace, &options};
    eng.init_random_matching(rng);
    if (options.record_matchings) trace.matchings.push_back(eng.partner);

    trace.optimal = optimal_value(pop, ValueFn::AND);
    AndRunState run{&eng, &pop, &trace, trace.optimal, 0};

    // value-0 pairs become singleton matching sets; value-1 pairs are kept
    std::map<SetKey, std::vector<int>> sets;
    for (int v = 0; v < pop.n; ++v)
        if (eng.partner[v] > v && eng.value(v, eng.partner[v]) == 0)
            sets[{2, v}] = {v, eng.partner[v]};
    run.num_sets = static_cast<long long>(sets.size());
    run.note_round(MatchEvent::init);

    auto notify_sets = [&]() {
        if (!options.set_observer) return;
        std::vector<std::vector<int>> snapshot;
        snapshot.reserve(sets.size());
        for (const auto& [key, nodes] : sets) snapshot.push_back(nodes);
        options.set_observer(snapshot);
    };
    notify_sets();

    long long last_class_size = 0;
    while (sets.size() > 1) {
        // A super-epoch boundary is the first examination of two equal-size
        // sets of a new, larger size class. Pops of unequal sizes belong to
        // the previous epoch (the special set's end-of-epoch examination).
        long long class_size = sets.begin()->first.size;
        long long second_size = std::next(sets.begin())->first.size;
        if (class_size == second_size && class_size > last_class_size) {
            std::vector<long long> snapshot;
            for (const auto& [key, nodes] : sets) snapshot.push_back(key.size);
            trace.boundary_set_sizes.push_back(std::move(snapshot));
            last_class_size = class_size;
        }

        auto first = sets.begin();
        std::vector<int> a_nodes = std::move(first->second);
        sets.erase(first);
        auto second = sets.begin();
        std::vector<int> b_nodes = std::move(second->second);
        sets.erase(second);
        run.num_sets = static_cast<long long>(sets.size());

        std::vector<int> high_pair;
        if (is_merge(run, a_nodes, b_nodes, &high_pair)) {
            std::vector<int> merged;
            merged.reserve(a_nodes.size() + b_nodes.size());
            std::merge(a_nodes.begin(), a_nodes.end(), b_nodes.begin(), b_nodes.end(),
                       std::back_inserter(merged));
            SetKey key{static_cast<long long>(merged.size()), merged.front()};
            sets.emplace(key, std::move(merged));
            run.num_sets = static_cast<long long>(sets.size());
            eng.emit(MatchEvent::merge, run.num_sets, run.regret_now());
        } else {
            // both sets leave play; the discovered pair stays matched
            run.num_sets = static_cast<long long>(sets.size());
            eng.emit(MatchEvent::remove, run.num_sets, run.regret_now());
        }
        notify_sets();
    }

    trace.tau = eng.round;
    trace.terminal_regret = run.regret_now();
    eng.emit(MatchEvent::terminate, run.num_sets, trace.terminal_regret);
    return trace;
}

std::vector<ChainState> superepoch_chain(long long n, double p, std::uint64_t seed) {
    if (n <= 0 || n % 2 != 0) throw std::invalid_argument("superepoch_chain: n must be even");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("superepoch_chain: p must lie in [0, 1]");
    Rng rng(seed);
    std::vector<ChainState> states;
    ChainState cur{n / 2, 0};
    states.push_back(cur);

    // first sweep: every initial pair is examined on its own
    long long x1 = rng.binomial(cur.x, 1.0 - posterior_pi(1, p) * posterior_pi(1, p));
    cur = {x1, 0};
    states.push_back(cur);

    long long max_epochs = 4 * static_cast<long long>(std::log2(static_cast<double>(n)) + 2) + 64;
    for (long long s = 1; s <= max_epochs; ++s) {
        if (cur.x == 0 || (cur.x == 1 && cur.y == 0)) break;  // absorbed
        double size_s = std::pow(2.0, static_cast<double>(s));
        double pi_s = posterior_pi(static_cast<long long>(size_s), p);
        long long next_x = rng.binomial(cur.x / 2, 1.0 - pi_s * pi_s);

        long long xi;
        if (cur.x % 2 == 1)
            xi = static_cast<long long>(size_s);
        else if (next_x > 0)
            xi = 2 * static_cast<long long>(size_s);
        else
            xi = 0;

        long long next_y = 0;
        if (cur.y > 0) {
            double remove_prob = posterior_pi(xi, p) * posterior_pi(cur.y, p);
            next_y = rng.bernoulli(1.0 - remove_prob) ? cur.y + xi : 0;
        } else if (cur.x % 2 == 1 && next_x > 0) {
            double remove_prob = pi_s * posterior_pi(2 * static_cast<long long>(size_s), p);
            next_y = rng.bernoulli(1.0 - remove_prob)
                         ? static_cast<long long>(size_s) + 2 * static_cast<long long>(size_s)
                         : 0;
        }
        cur = {next_x, next_y};
        states.push_back(cur);
    }
    return states;
}

}  // namespace maclab

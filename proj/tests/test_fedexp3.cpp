#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "maclab/env.hpp"
#include "maclab/fedexp3.hpp"
#include "maclab/policy.hpp"

using namespace maclab;

TEST_CASE("schedule formulas") {
    auto s = fedexp3_schedules(20, 100, 4, 0.0);
    // min{2 log 100 + log 4, sqrt(4)} + 3 = 2 + 3
    CHECK(s.c_w == doctest::Approx(5.0).epsilon(1e-12));

    auto s2 = fedexp3_schedules(20, 3000, 4, 0.0);
    // unclipped gamma_1 with C_W = 5 would be cbrt(5.5 * 400 * log 20)
    auto pinned = s2;
    pinned.c_w = 5.0;
    CHECK(pinned.gamma_unclipped(1) ==
          doctest::Approx(std::cbrt(5.5 * 400.0 * std::log(20.0))).epsilon(1e-12));
    CHECK(pinned.gamma_unclipped(1) == doctest::Approx(18.7).epsilon(1e-2));
    CHECK(pinned.gamma(1) == 1.0);

    // gamma never increases in t
    for (long long t = 1; t < 200; ++t) CHECK(s2.gamma(t + 1) <= s2.gamma(t));
    CHECK(s2.gamma(s2.horizon) <= s2.gamma(1));

    // eta = log K / (T gamma_T)
    CHECK(s2.eta == doctest::Approx(std::log(20.0) / (3000.0 * s2.gamma(3000))).epsilon(1e-12));

    CHECK_THROWS_AS(fedexp3_schedules(20, 100, 4, 1.0), std::invalid_argument);
}

TEST_CASE("first round is uniform for every agent") {
    auto g = build_grid(2, 2, 1);
    auto env = LossTensor::federated_activation(4, 6, 50, 3);
    FedExp3Options opt;
    opt.horizon = 50;
    opt.seed = 1;
    opt.record_distributions = true;
    auto res = run_fedexp3(g, env, opt);
    for (int v = 0; v < 4; ++v)
        for (double x : res.distributions[0][v])
            CHECK(x == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("two agents with the uniform matrix conserve the average estimate") {
    // directly exercise one round: zbar_{t+1} = zbar_t + mean(g)
    auto g = build_complete(2, 1);
    GossipMatrix w(2, {0.5, 0.5, 0.5, 0.5});
    auto env = LossTensor::bernoulli_linear(3, 10, 5, 2);
    auto schedules = fedexp3_schedules(3, 10, 2, 0.0);
    auto state = fedexp3_init(2, 3);
    state.z = {{1.0, 2.0, 0.0}, {0.0, 1.0, 4.0}};
    std::vector<double> zbar_before(3, 0.0);
    for (int v = 0; v < 2; ++v)
        for (int i = 0; i < 3; ++i) zbar_before[i] += state.z[v][i] / 2;
    Rng rng(2);
    std::vector<std::vector<double>> gvec;
    fedexp3_round(state, env, w, schedules, 1, rng, &gvec);
    for (int i = 0; i < 3; ++i) {
        double zbar_after = (state.z[0][i] + state.z[1][i]) / 2;
        double gbar = (gvec[0][i] + gvec[1][i]) / 2;
        CHECK(zbar_after == doctest::Approx(zbar_before[i] + gbar).epsilon(1e-12));
    }
}

TEST_CASE("run invariants over a full run") {
    // path over an even number of agents so the activation env applies
    auto g10 = CommGraph(10, 1, [] {
        std::vector<std::pair<int, int>> e;
        for (int v = 1; v < 10; ++v) e.emplace_back(v - 1, v);
        return e;
    }());
    auto env9 = LossTensor::federated_activation(10, 5, 2000, 2);
    FedExp3Options opt;
    opt.horizon = 2000;
    opt.seed = 3;
    opt.audit_invariants = true;
    auto res = run_fedexp3(g10, env9, opt);
    // gossip conservation at every round
    CHECK(res.max_conservation_error <= 1e-9);
    // ||g||_inf <= K / gamma_t at every round
    CHECK(res.max_estimator_norm_ratio <= 1.0 + 1e-12);
    // network disagreement bounded by (K / gamma_T) C_W
    double cap = 5.0 / res.schedules.gamma(2000) * res.schedules.c_w;
    CHECK(res.max_disagreement <= cap);
}

TEST_CASE("entropic map lipschitz spot check") {
    // ||x - y||_1 <= eta ||z - zbar||_inf * K at sampled states
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int k = 2 + static_cast<int>(rng.uniform_int(8));
        double eta = 0.001 + 0.01 * rng.uniform01();
        std::vector<double> z(k), zbar(k);
        for (int i = 0; i < k; ++i) {
            zbar[i] = rng.uniform01() * 50.0;
            z[i] = zbar[i] + (rng.uniform01() - 0.5) * 4.0;
        }
        auto x = entropic_argmin(z, eta);
        auto y = entropic_argmin(zbar, eta);
        double l1 = 0.0, linf = 0.0;
        for (int i = 0; i < k; ++i) {
            l1 += std::abs(x[i] - y[i]);
            linf = std::max(linf, std::abs(z[i] - zbar[i]));
        }
        CHECK(l1 <= eta * linf * k + 1e-6);
    }
}

TEST_CASE("homogeneous losses reduce to the shared-loss problem") {
    // identical losses across agents: average loss equals any agent's loss
    auto g = build_complete(3, 1);
    auto env = LossTensor::bernoulli_linear(4, 300, 9, 3);
    for (long long t = 0; t < 300; ++t)
        for (int i = 0; i < 4; ++i)
            CHECK(env.average_loss(t, i) == env.loss(t, 0, i));
    FedExp3Options opt;
    opt.horizon = 300;
    opt.seed = 12;
    auto res = run_fedexp3(g, env, opt);
    CHECK(res.final_regret.size() == 3);
}

TEST_CASE("all-zero environment gives zero regret") {
    auto g = build_complete(4, 1);
    auto zeros = LossTensor::materialized(40, 4, 3, std::vector<double>(40 * 4 * 3, 0.0));
    FedExp3Options opt;
    opt.horizon = 40;
    opt.seed = 8;
    auto res = run_fedexp3(g, zeros, opt);
    for (double r : res.final_regret) CHECK(r == 0.0);
}

TEST_CASE("distributions remain simplex points throughout") {
    auto g = build_grid(2, 3, 1);
    auto env = LossTensor::federated_activation(6, 7, 150, 4);
    FedExp3Options opt;
    opt.horizon = 150;
    opt.seed = 2;
    opt.record_distributions = true;
    auto res = run_fedexp3(g, env, opt);
    for (const auto& round : res.distributions)
        for (const auto& dist : round) CHECK(is_simplex_point(dist, 1e-12));
}

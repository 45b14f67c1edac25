#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "maclab/coop.hpp"
#include "maclab/env.hpp"
#include "maclab/policy.hpp"

using namespace maclab;

TEST_CASE("neighborhood weight") {
    std::vector<std::vector<double>> one = {{0.3, 0.7}};
    CHECK(neighborhood_weight(one, 0) == 0.3);

    std::vector<std::vector<double>> two = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK(neighborhood_weight(two, 0) == doctest::Approx(0.75).epsilon(1e-15));

    std::vector<std::vector<double>> sure = {{1.0, 0.0}, {0.2, 0.8}};
    CHECK(neighborhood_weight(sure, 0) == doctest::Approx(1.0).epsilon(1e-15));

    // q dominates every individual coordinate and stays within (0, 1]
    std::vector<std::vector<double>> mix = {{0.1, 0.9}, {0.4, 0.6}, {0.25, 0.75}};
    for (int arm = 0; arm < 2; ++arm) {
        double q = neighborhood_weight(mix, arm);
        for (const auto& p : mix) CHECK(q >= p[arm] - 1e-15);
        CHECK(q <= 1.0);
    }
    CHECK_THROWS_AS(neighborhood_weight({}, 0), std::invalid_argument);
}

TEST_CASE("collaborative estimator hand trace") {
    // three members (a center and two leaves): the center plays 0.5 on arm 0,
    // the leaves put no mass there, so q(0) = 0.5 exactly; a loss of 1 on that
    // arm contributes an increment of 2
    std::vector<NeighborhoodObservation> obs = {
        {0, 1.0, {0.5, 0.5}},
        {1, 0.0, {0.0, 1.0}},
        {1, 0.0, {0.0, 1.0}},
    };
    auto inc = collaborative_estimator(obs, 2);
    CHECK(inc[0] == doctest::Approx(2.0).epsilon(1e-15));
    // arm 1 observed with q = 1 and loss 0
    CHECK(inc[1] == 0.0);

    // unobserved arms stay zero
    std::vector<NeighborhoodObservation> single = {{2, 0.75, {0.25, 0.25, 0.5}}};
    auto inc3 = collaborative_estimator(single, 3);
    CHECK(inc3[0] == 0.0);
    CHECK(inc3[1] == 0.0);
    CHECK(inc3[2] == doctest::Approx(1.5).epsilon(1e-15));

    // q underflow is floored and counted
    long long floored = 0;
    std::vector<NeighborhoodObservation> tiny = {{0, 1.0, {1e-15, 1.0 - 1e-15}}};
    auto finc = collaborative_estimator(tiny, 2, &floored);
    CHECK(floored == 1);
    CHECK(finc[0] == doctest::Approx(1e12).epsilon(1e-9));
}

TEST_CASE("estimator unbiasedness at a frozen state") {
    // Monte Carlo over the neighborhood's joint action draw
    std::vector<std::vector<double>> dists = {{0.6, 0.3, 0.1}, {0.2, 0.2, 0.6}};
    std::vector<double> losses = {0.9, 0.4, 0.7};
    int draws = 100000;
    Rng rng(17);
    std::vector<double> mean(3, 0.0), second(3, 0.0);
    std::vector<double> q(3);
    for (int i = 0; i < 3; ++i) q[i] = neighborhood_weight(dists, i);
    for (int s = 0; s < draws; ++s) {
        std::vector<NeighborhoodObservation> obs;
        for (const auto& p : dists) {
            int arm = rng.categorical(p);
            obs.push_back({arm, losses[arm], p});
        }
        auto inc = collaborative_estimator(obs, 3);
        for (int i = 0; i < 3; ++i) {
            mean[i] += inc[i] / draws;
            second[i] += inc[i] * inc[i] / draws;
        }
    }
    for (int i = 0; i < 3; ++i) {
        double var = losses[i] * losses[i] / q[i] - losses[i] * losses[i];
        double se = std::sqrt(var / draws);
        CHECK(std::abs(mean[i] - losses[i]) <= 3.0 * se + 1e-9);
        double target2 = losses[i] * losses[i] / q[i];
        double m4 = std::pow(losses[i], 4.0) / std::pow(q[i], 3.0);
        double se2 = std::sqrt(std::max(m4 - target2 * target2, 0.0) / draws);
        CHECK(std::abs(second[i] - target2) <= 3.0 * se2 + 1e-9);
    }
}

TEST_CASE("dftrl zeta schedule") {
    CHECK(dftrl_zeta(10, 1, 100) == doctest::Approx(std::sqrt(std::log(10.0) / 100.0)).epsilon(1e-12));
    CHECK(dftrl_zeta(10, 1, 100) == doctest::Approx(0.15174).epsilon(1e-4));
    // decreasing in t
    CHECK(dftrl_zeta(10, 2, 50) > dftrl_zeta(10, 2, 51));
}

TEST_CASE("center-based runs start uniform until the first delayed update") {
    auto g = build_star(4, 2);  // d = 2
    auto env = LossTensor::bernoulli_linear(5, 40, 3, 4);
    CoopOptions opt;
    opt.horizon = 40;
    opt.seed = 5;
    opt.record_distributions = true;
    for (auto algo : {CoopAlgorithm::cftrl, CoopAlgorithm::center_exp3}) {
        auto res = run_cooperative(g, env, algo, opt);
        int hub = res.centers.centers[0];
        // rounds t <= d: the center has no estimator yet, distribution uniform
        for (long long t = 0; t < 2; ++t)
            for (double x : res.distributions[t][hub])
                CHECK(x == doctest::Approx(0.2).epsilon(1e-9));
    }
    // decentralized variants are uniform for every agent while t <= d
    for (auto algo : {CoopAlgorithm::dftrl, CoopAlgorithm::exp3_coop}) {
        auto res = run_cooperative(g, env, algo, opt);
        for (long long t = 0; t < 2; ++t)
            for (int v = 0; v < 4; ++v)
                for (double x : res.distributions[t][v])
                    CHECK(x == doctest::Approx(0.2).epsilon(1e-9));
    }
}

TEST_CASE("non-center copy contract") {
    auto g = build_star(5, 2);
    auto env = LossTensor::bernoulli_linear(4, 60, 9, 5);
    CoopOptions opt;
    opt.horizon = 60;
    opt.seed = 2;
    opt.record_distributions = true;
    auto res = run_cooperative(g, env, CoopAlgorithm::cftrl, opt);
    int hub = res.centers.centers[0];
    int d = g.edge_delay();
    for (int v = 0; v < 5; ++v) {
        if (v == hub) continue;
        long long lag = static_cast<long long>(res.centers.hop_distance[v]) * d;
        for (long long t = 1; t <= 60; ++t) {
            if (t > lag) {
                // bit-for-bit equality with the center's lagged distribution
                CHECK(res.distributions[t - 1][v] == res.distributions[t - lag - 1][hub]);
            } else {
                for (double x : res.distributions[t - 1][v])
                    CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("exp3-coop with one agent reproduces the single-agent policy") {
    CommGraph lone(1, 0, {});
    auto env = LossTensor::bernoulli_linear(6, 400, 21, 1);
    CoopOptions opt;
    opt.horizon = 400;
    opt.seed = 77;
    auto res = run_cooperative(lone, env, CoopAlgorithm::exp3_coop, opt);

    Exp3Policy pol(6, 400);
    Rng rng(opt.seed);
    std::vector<int> arms;
    for (long long t = 0; t < 400; ++t) {
        int arm = pol.sample(rng);
        arms.push_back(arm);
        pol.update(arm, env.loss(t, 0, arm));
    }
    for (long long t = 0; t < 400; ++t) CHECK(res.arms[t][0] == arms[t]);
}

TEST_CASE("dftrl degenerates to single-agent hybrid ftrl with sublinear regret") {
    CommGraph lone(1, 1, {});
    long long horizon = 4000;
    double total = 0.0;
    int n_seeds = 3;
    for (int seed = 0; seed < n_seeds; ++seed) {
        auto env = LossTensor::bernoulli_linear(2, horizon, 400 + seed, 1);
        CoopOptions opt;
        opt.horizon = horizon;
        opt.seed = seed;
        auto res = run_cooperative(lone, env, CoopAlgorithm::dftrl, opt);
        total += res.final_avg_regret;
    }
    double bound = 4.0 * std::sqrt(2.0 * horizon) + 1.0;  // sqrt(KT) scale
    CHECK(total / n_seeds <= bound);
    CHECK(total / n_seeds <= 0.05 * horizon);  // clearly sublinear in T
}

TEST_CASE("all-zero environment gives exactly zero regret") {
    auto g = build_r_regular(3, 2, 1);
    auto zeros = LossTensor::materialized(30, 3, 4, std::vector<double>(30 * 3 * 4, 0.0));
    CoopOptions opt;
    opt.horizon = 30;
    opt.seed = 1;
    for (auto algo : {CoopAlgorithm::cftrl, CoopAlgorithm::dftrl, CoopAlgorithm::exp3_coop,
                      CoopAlgorithm::center_exp3}) {
        auto res = run_cooperative(g, zeros, algo, opt);
        CHECK(res.final_avg_regret == 0.0);
        for (double r : res.final_regret) CHECK(r == 0.0);
    }
}

TEST_CASE("regret traces agree with direct recomputation") {
    auto g = build_star(4, 1);
    auto env = LossTensor::bernoulli_linear(5, 500, 31, 4);
    CoopOptions opt;
    opt.horizon = 500;
    opt.seed = 13;
    opt.stride = 50;
    auto res = run_cooperative(g, env, CoopAlgorithm::cftrl, opt);
    REQUIRE(res.trace.size() == 10);
    for (const auto& row : res.trace) {
        for (int v = 0; v < 4; ++v) {
            double realized = 0.0;
            std::vector<double> arm_cum(5, 0.0);
            for (long long t = 0; t < row.t; ++t) {
                realized += env.loss(t, v, res.arms[t][v]);
                for (int i = 0; i < 5; ++i) arm_cum[i] += env.loss(t, v, i);
            }
            double expected = realized - *std::min_element(arm_cum.begin(), arm_cum.end());
            CHECK(row.regret[v] == doctest::Approx(expected).epsilon(1e-9));
        }
    }
    // checkpoints strictly increasing
    for (std::size_t i = 1; i < res.trace.size(); ++i)
        CHECK(res.trace[i].t > res.trace[i - 1].t);
}

TEST_CASE("every emitted distribution is a simplex point") {
    auto g = build_r_regular(3, 2, 1);
    auto env = LossTensor::bernoulli_linear(8, 200, 3, 3);
    CoopOptions opt;
    opt.horizon = 200;
    opt.seed = 4;
    opt.record_distributions = true;
    for (auto algo : {CoopAlgorithm::cftrl, CoopAlgorithm::dftrl, CoopAlgorithm::exp3_coop,
                      CoopAlgorithm::center_exp3}) {
        auto res = run_cooperative(g, env, algo, opt);
        for (const auto& round : res.distributions)
            for (const auto& dist : round) CHECK(is_simplex_point(dist, 1e-12));
    }
}

TEST_CASE("sandwich property on a short cftrl run") {
    int k = 8, d = 1;
    double eta = (1.0 - 1.0 / std::sqrt(2.0)) / (std::pow(2.0, 1.5 * d) * std::sqrt(double(k)));
    auto g = build_star(5, d);
    auto env = LossTensor::bernoulli_linear(k, 300, 8, 5);
    CoopOptions opt;
    opt.horizon = 300;
    opt.seed = 6;
    opt.center_eta = eta;
    opt.record_center_detail = true;
    auto res = run_cooperative(g, env, CoopAlgorithm::cftrl, opt);
    int hub = res.centers.centers[0];
    const auto& dists = res.center_distributions.at(hub);
    const auto& incs = res.center_increments.at(hub);
    REQUIRE(dists.size() == 300);
    REQUIRE(incs.size() == 300);
    for (std::size_t t = 0; t + 1 < dists.size(); ++t)
        for (int i = 0; i < k; ++i) {
            CHECK(dists[t + 1][i] <= 2.0 * dists[t][i] + 1e-9);
            CHECK((1.0 - 3.0 * eta * incs[t][i]) * dists[t][i] <= dists[t + 1][i] + 1e-9);
        }
}

#include "maclab/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "maclab/fedexp3.hpp"

namespace maclab {

double or_asymptotic_regret(double n, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("or_asymptotic_regret: p in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    double one_minus = 1.0 - p;
    double m = std::min(p, one_minus);
    return (1.0 - one_minus * one_minus) / (8.0 * p * p) * m * m * m * m * n * n;
}

double and_regret_bound(double n, double p, double c) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("and_regret_bound: p in [0, 1]");
    if (n < 2.0) throw std::invalid_argument("and_regret_bound: n >= 2");
    int smax = static_cast<int>(std::floor(std::log2(n) + 1e-9));
    auto p_s = [p](int s) {
        double a = p * std::pow(2.0, s);
        return a / (1.0 - p + a);
    };
    auto q_s = [&](int s) {
        double x = p_s(s);
        return 1.0 - x * x;
    };
    double a_term = 0.0;
    for (int s = 1; s <= smax; ++s) {
        double ps = p_s(s);
        double prod_sq = 1.0;
        for (int i = 0; i <= s - 1; ++i) prod_sq *= q_s(i) * q_s(i);
        double inner = 0.0;
        for (int i = 0; i <= s - 1; ++i) {
            double w = std::pow(2.0, i + 1);
            double prod1 = 1.0;
            for (int j = 0; j <= i; ++j) prod1 *= q_s(j);
            double prod2 = 1.0;
            for (int j = i + 1; j <= s - 1; ++j) prod2 *= q_s(j) * q_s(j);
            inner += w * prod1 * prod2;
        }
        a_term += (1.0 - 0.5 * ps) * (1.0 - 0.5 * ps * ps) * ps * (prod_sq + inner / n);
    }
    a_term *= 0.25;

    double b_term = 0.0;
    for (int s = 1; s <= smax; ++s) {
        double prod = 1.0;
        for (int i = 0; i <= s - 1; ++i) prod *= q_s(i);
        b_term += std::pow(2.0, s + 1) * p_s(s) * prod;
    }
    b_term /= n;

    double c_term = p > 0.0 ? std::min(c / (n * p), 4.0 / 3.0) : 4.0 / 3.0;
    return (a_term + b_term + c_term) * n * n;
}

double fedexp3_regret_bound(int n_arms, long long horizon, double sigma2, int n_agents) {
    auto schedules = fedexp3_schedules(n_arms, horizon, n_agents, sigma2);
    double k = n_arms;
    return 5.0 * std::cbrt(schedules.c_w * k * k * std::log(k)) *
           std::pow(static_cast<double>(horizon), 2.0 / 3.0);
}

double random_matching_regret(double n, double p, MatchValueKind fn) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_matching_regret: p in [0, 1]");
    if (fn == MatchValueKind::OR) {
        double m = std::min(p, 1.0 - p);
        return 0.5 * m * m * n;
    }
    return 0.5 * p * (1.0 - p) * n;
}

BoundCurve or_lower_bound_curve(double p) {
    double m = std::min(p, 1.0 - p);
    return {"or_lower", {{"p", p}}, [m](double n) { return m * m * m * m * n * n; }};
}

BoundCurve and_lower_bound_curve(double p) {
    double c = p * (1.0 - p);
    return {"and_lower", {{"p", p}}, [c](double n) { return c * c * n * n; }};
}

BoundCurve coop_individual_lower_curve(int n_arms, double neighborhood_size, double delay) {
    double k = n_arms;
    return {"coop_individual_lower",
            {{"K", k}, {"neighborhood", neighborhood_size}, {"d", delay}},
            [k, neighborhood_size, delay](double t) {
                double bandit = std::min(t, std::sqrt(k * t / neighborhood_size));
                double delayed = std::sqrt(delay * std::log(k) * t);
                return std::max(bandit, delayed);
            }};
}

BoundCurve federated_lower_curve(int n_arms, double d_max, double algebraic_connectivity) {
    double k = n_arms;
    return {"federated_lower",
            {{"K", k}, {"d_max", d_max}, {"lambda", algebraic_connectivity}},
            [k, d_max, algebraic_connectivity](double t) {
                return std::pow((1.0 + d_max) / algebraic_connectivity, 0.25) *
                       std::sqrt(t * std::log(k));
            }};
}

std::string curve_to_csv(const BoundCurve& curve, const std::vector<double>& xs) {
    std::string out = "x,value\n";
    char buf[64];
    for (double x : xs) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", x, curve.eval(x));
        out += buf;
    }
    return out;
}

}  // namespace maclab

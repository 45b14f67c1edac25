#pragma once

#include <span>
#include <vector>

#include "maclab/rng.hpp"

namespace maclab {

// Tolerances shared by every solver in this module.
struct SolverTolerances {
    double simplex_sum = 1e-12;   // |sum p - 1|
    double kkt_residual = 1e-10;  // per-coordinate stationarity
    int max_bisection_steps = 200;
};
const SolverTolerances& solver_tolerances();

std::vector<double> uniform_distribution(int n_arms);
bool is_simplex_point(std::span<const double> p, double tol = 1e-12);

// Minimizer over the simplex of <p, cum_loss> - (2/eta) sum_i sqrt(p_i).
// Solution has p_i = 1/(eta*cum_loss_i + lambda)^2 with lambda chosen by
// bisection so the coordinates sum to one.
std::vector<double> tsallis_ftrl_solve(std::span<const double> cum_loss, double eta);
// The simplex multiplier itself (monotone diagnostics and tests).
double tsallis_ftrl_multiplier(std::span<const double> cum_loss, double eta);

// Minimizer over the simplex of
//   <p, cum_loss> - (2/eta) sum_i sqrt(p_i) + (1/zeta) sum_i p_i log p_i.
// Outer root-find on the simplex multiplier, inner per-coordinate Newton in
// log-space on the stationarity condition. lambda_state, when given, seeds
// the multiplier search and receives the solved value (warm starts across
// rounds of a simulation).
std::vector<double> hybrid_ftrl_solve(std::span<const double> cum_loss, double eta, double zeta,
                                      double* lambda_state = nullptr);

// softmax(-eta z) with max subtraction.
std::vector<double> entropic_argmin(std::span<const double> z, double eta);

// loss/prob on the chosen arm, zero elsewhere. prob must be positive.
std::vector<double> importance_weighted_estimate(int chosen_arm, double observed_loss,
                                                 double prob, int n_arms);

// Exponential-weights bandit policy with uniform exploration mixing
// gamma = min{1, sqrt(K ln K / ((e-1) T))} and weight update
// w_i <- w_i * exp(-gamma * lhat_i / K).
class Exp3Policy {
public:
    Exp3Policy(int n_arms, long long horizon);
    double gamma() const { return gamma_; }
    std::vector<double> distribution() const;
    int sample(Rng& rng) const;
    void update(int arm, double loss);

private:
    int n_arms_;
    double gamma_;
    std::vector<double> log_weights_;
};

// Parameter-free FTRL with the sqrt regularizer and learning rate
// eta_t = 2 sqrt(1/t); importance-weighted estimates, no exploration mixing.
class TsallisInfPolicy {
public:
    explicit TsallisInfPolicy(int n_arms);
    double eta() const;  // for the upcoming round
    std::vector<double> distribution() const;
    int sample(Rng& rng);  // advances the round counter on update
    void update(int arm, double loss);

private:
    int n_arms_;
    long long round_ = 1;
    std::vector<double> cum_estimate_;
    mutable std::vector<double> current_;
    mutable bool dirty_ = true;
};

}  // namespace maclab

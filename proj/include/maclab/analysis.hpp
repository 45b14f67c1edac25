#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace maclab {

// Named closed-form reference curve for plot overlays and оracles.
struct BoundCurve {
    std::string name;
    std::map<std::string, double> params;
    std::function<double(double)> eval;  // x (n or T) -> value
};

// Asymptotic total regret of the 1-chain strategy under the OR value
// function: (1 - (1-p)^2) / (8 p^2) * min{p, 1-p}^4 * n^2.
// Returns 0 at p in {0, 1} by continuity.
double or_asymptotic_regret(double n, double p);

// Upper bound (a + b + c) n^2 on the total regret of least-size-merge under
// the AND value function, with
//   p_s = p 2^s / (1 - p + p 2^s),  q_s = 1 - p_s^2,
//   c term = min{c/(n p), 4/3}.
// The constant must exceed 16/(sqrt(2)-1); default 39.
double and_regret_bound(double n, double p, double c = 39.0);

// 5 (C_W K^2 log K)^{1/3} T^{2/3} with C_W from the exploration schedule.
double fedexp3_regret_bound(int n_arms, long long horizon, double sigma2, int n_agents);

enum class MatchValueKind { AND, OR };

// Leading term of the instantaneous regret of a uniformly random matching:
// OR: min{p, 1-p}^2 n / 2; AND: p (1-p) n / 2.
double random_matching_regret(double n, double p, MatchValueKind fn);

// Unnormalized lower-bound reference curves (leading terms with constant 1),
// intended for plot overlays only.
BoundCurve or_lower_bound_curve(double p);                       // x = n
BoundCurve and_lower_bound_curve(double p);                      // x = n
BoundCurve coop_individual_lower_curve(int n_arms, double neighborhood_size, double delay);
BoundCurve federated_lower_curve(int n_arms, double d_max, double algebraic_connectivity);

// Samples a curve over the given x values as "x,value" CSV text.
std::string curve_to_csv(const BoundCurve& curve, const std::vector<double>& xs);

}  // namespace maclab

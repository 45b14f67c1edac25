#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace maclab {

// Loss tensor chosen by an oblivious adversary: loss(t, v, i) in [0, 1] is a
// pure function of (t, v, i) and the construction, never of played actions.
// Either materialized in memory or derived lazily from a seed.
class LossTensor {
public:
    long long horizon() const { return horizon_; }
    int n_agents() const { return n_agents_; }
    int n_arms() const { return n_arms_; }

    double loss(long long t, int v, int i) const;

    // Across-agent average loss of arm i at round t.
    double average_loss(long long t, int i) const;

    // Bernoulli(mu_i) losses with mu_i = (1 + 8(i-1)/(K-1))/10, identical for
    // all agents at a fixed (t, i). K >= 2.
    static LossTensor bernoulli_linear(int n_arms, long long horizon, std::uint64_t seed,
                                       int n_agents = 1);

    // Each round N/2 agents drawn with replacement are activated; activated
    // agents draw Bernoulli((i-1)/(K-1)) losses, everyone else gets 0.
    static LossTensor federated_activation(int n_agents, int n_arms, long long horizon,
                                           std::uint64_t seed);

    // Rows "agent,arm,rating,timestamp" sorted ascending by timestamp.
    // Ratings in {0.5, 1, ..., 5}; loss = (5.5 - rating)/5.5, piecewise
    // constant over per-(agent, arm) buckets of length floor(T/m); the final
    // rating extends to the horizon. horizon <= 0 uses max_{v,i} m^v(i).
    static LossTensor from_ratings_file(const std::string& path, int n_agents, int n_arms,
                                        long long horizon);

    // "T N K" header then T*N*K whitespace-separated values in (t, v, i)
    // row-major order, all in [0, 1].
    static LossTensor from_tensor_file(const std::string& path);
    void write_tensor_file(const std::string& path) const;

    static LossTensor materialized(long long horizon, int n_agents, int n_arms,
                                   std::vector<double> values);

    const double* mu() const { return mu_.empty() ? nullptr : mu_.data(); }

private:
    enum class Mode { dense, bernoulli_linear, federated_activation };
    Mode mode_ = Mode::dense;
    long long horizon_ = 0;
    int n_agents_ = 0;
    int n_arms_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> mu_;      // per-arm Bernoulli means for seeded modes
    std::vector<double> values_;  // dense storage, (t, v, i) row-major

    bool activated(long long t, int v) const;
};

enum class DecisionSet { simplex, l2_ball };

// Online convex problem family: per-(round, agent) convex losses over either
// the probability simplex (linear losses) or the unit euclidean ball
// (quadratic losses). Parameters are generated lazily from the seed.
class OcoProblem {
public:
    enum class Kind { linear, quadratic };

    static OcoProblem linear(int dim, int n_agents, long long horizon, std::uint64_t seed);
    static OcoProblem quadratic(int dim, int n_agents, long long horizon, std::uint64_t seed);

    Kind kind() const { return kind_; }
    DecisionSet decision_set() const { return set_; }
    int dim() const { return dim_; }
    int n_agents() const { return n_agents_; }
    long long horizon() const { return horizon_; }
    double lipschitz() const { return lipschitz_; }
    double set_radius() const { return radius_; }
    // Regularizer scale: psi(x*) <= R^2 over the decision set.
    double regularizer_radius() const;

    // Linear: the cost vector c_t^v; quadratic: the target b_t^v.
    std::vector<double> loss_param(long long t, int v) const;

    double agent_loss(long long t, int v, const std::vector<double>& x) const;
    std::vector<double> subgradient(long long t, int v, const std::vector<double>& x) const;
    // Network loss (1/N) sum_v f_t^v(x).
    double network_loss(long long t, const std::vector<double>& x) const;

private:
    Kind kind_ = Kind::linear;
    DecisionSet set_ = DecisionSet::simplex;
    int dim_ = 0;
    int n_agents_ = 0;
    long long horizon_ = 0;
    std::uint64_t seed_ = 0;
    double lipschitz_ = 1.0;
    double radius_ = 1.0;
};

}  // namespace maclab

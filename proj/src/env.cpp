#include "maclab/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "maclab/errors.hpp"
#include "maclab/rng.hpp"

namespace maclab {

namespace {

// domains for the counter-based generator, so distinct uses never collide
constexpr std::uint64_t kDomainLoss = 1;
constexpr std::uint64_t kDomainActivation = 2;
constexpr std::uint64_t kDomainOcoParam = 3;

}  // namespace

double LossTensor::loss(long long t, int v, int i) const {
    if (t < 0 || t >= horizon_ || v < 0 || v >= n_agents_ || i < 0 || i >= n_arms_)
        throw std::out_of_range("loss tensor index out of range");
    switch (mode_) {
        case Mode::dense:
            return values_[(static_cast<std::size_t>(t) * n_agents_ + v) * n_arms_ + i];
        case Mode::bernoulli_linear:
            // identical for every agent at fixed (t, i)
            return counter_uniform01(seed_, kDomainLoss, t, i) < mu_[i] ? 1.0 : 0.0;
        case Mode::federated_activation:
            if (!activated(t, v)) return 0.0;
            return counter_uniform01(seed_, kDomainLoss,
                                     (static_cast<std::uint64_t>(t) << 20) ^ v, i) < mu_[i]
                       ? 1.0
                       : 0.0;
    }
    return 0.0;
}

bool LossTensor::activated(long long t, int v) const {
    int draws = n_agents_ / 2;
    for (int j = 0; j < draws; ++j) {
        if (static_cast<int>(counter_hash(seed_, kDomainActivation, t, j) % n_agents_) == v)
            return true;
    }
    return false;
}

double LossTensor::average_loss(long long t, int i) const {
    double s = 0.0;
    for (int v = 0; v < n_agents_; ++v) s += loss(t, v, i);
    return s / n_agents_;
}

LossTensor LossTensor::bernoulli_linear(int n_arms, long long horizon, std::uint64_t seed,
                                        int n_agents) {
    if (n_arms < 2) throw std::invalid_argument("bernoulli_linear: needs K >= 2");
    if (horizon < 1 || n_agents < 1) throw std::invalid_argument("bernoulli_linear: bad sizes");
    LossTensor t;
    t.mode_ = Mode::bernoulli_linear;
    t.horizon_ = horizon;
    t.n_agents_ = n_agents;
    t.n_arms_ = n_arms;
    t.seed_ = seed;
    t.mu_.resize(n_arms);
    for (int i = 0; i < n_arms; ++i)
        t.mu_[i] = (1.0 + 8.0 * i / (n_arms - 1)) / 10.0;
    return t;
}

LossTensor LossTensor::federated_activation(int n_agents, int n_arms, long long horizon,
                                            std::uint64_t seed) {
    if (n_agents < 2 || n_agents % 2 != 0)
        throw std::invalid_argument("federated_activation: N must be even and >= 2");
    if (n_arms < 2) throw std::invalid_argument("federated_activation: needs K >= 2");
    if (horizon < 1) throw std::invalid_argument("federated_activation: bad horizon");
    LossTensor t;
    t.mode_ = Mode::federated_activation;
    t.horizon_ = horizon;
    t.n_agents_ = n_agents;
    t.n_arms_ = n_arms;
    t.seed_ = seed;
    t.mu_.resize(n_arms);
    for (int i = 0; i < n_arms; ++i)
        t.mu_[i] = static_cast<double>(i) / (n_arms - 1);
    return t;
}

LossTensor LossTensor::from_ratings_file(const std::string& path, int n_agents, int n_arms,
                                         long long horizon) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open ratings file");
    struct Key {
        int agent, arm;
        bool operator<(const Key& o) const {
            return agent != o.agent ? agent < o.agent : arm < o.arm;
        }
    };
    std::map<Key, std::vector<double>> ratings;
    std::string line;
    long long last_ts = std::numeric_limits<long long>::min();
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        int agent, arm;
        double rating;
        long long ts;
        if (!(row >> agent >> arm >> rating >> ts))
            throw config_error(path + ":" + std::to_string(line_no), "malformed ratings row");
        if (ts < last_ts)
            throw config_error(path + ":" + std::to_string(line_no),
                               "rows must be sorted ascending by timestamp");
        last_ts = ts;
        if (agent < 0 || agent >= n_agents || arm < 0 || arm >= n_arms)
            throw config_error(path + ":" + std::to_string(line_no), "agent/arm out of range");
        double doubled = rating * 2.0;
        bool valid = rating >= 0.5 && rating <= 5.0 &&
                     std::abs(doubled - std::llround(doubled)) < 1e-9;
        if (!valid) {
            std::cerr << "warning: " << path << ":" << line_no << ": rating " << rating
                      << " outside {0.5, 1, ..., 5}, row rejected\n";
            continue;
        }
        ratings[{agent, arm}].push_back(rating);
    }
    long long max_count = 0;
    for (int v = 0; v < n_agents; ++v)
        for (int i = 0; i < n_arms; ++i) {
            auto it = ratings.find({v, i});
            if (it == ratings.end() || it->second.empty())
                throw config_error(path, "agent " + std::to_string(v) + " has no ratings for arm " +
                                             std::to_string(i));
            max_count = std::max<long long>(max_count, it->second.size());
        }
    long long T = horizon > 0 ? horizon : max_count;
    std::vector<double> values(static_cast<std::size_t>(T) * n_agents * n_arms);
    for (int v = 0; v < n_agents; ++v)
        for (int i = 0; i < n_arms; ++i) {
            const auto& r = ratings[{v, i}];
            long long m = static_cast<long long>(r.size());
            long long bucket = std::max<long long>(T / m, 1);
            for (long long t = 0; t < T; ++t) {
                long long j = std::min<long long>(t / bucket, m - 1);
                values[(static_cast<std::size_t>(t) * n_agents + v) * n_arms + i] =
                    (5.5 - r[j]) / 5.5;
            }
        }
    return materialized(T, n_agents, n_arms, std::move(values));
}

LossTensor LossTensor::from_tensor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open tensor file");
    long long T;
    int N, K;
    if (!(in >> T >> N >> K)) throw config_error(path, "missing 'T N K' header");
    if (T < 1 || N < 1 || K < 1) throw config_error(path, "bad tensor dimensions");
    std::vector<double> values(static_cast<std::size_t>(T) * N * K);
    for (auto& x : values) {
        if (!(in >> x)) throw config_error(path, "tensor file truncated");
        if (x < 0.0 || x > 1.0) throw config_error(path, "loss value outside [0, 1]");
    }
    return materialized(T, N, K, std::move(values));
}

void LossTensor::write_tensor_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw config_error(path, "cannot open for writing");
    out << horizon_ << ' ' << n_agents_ << ' ' << n_arms_ << '\n';
    out.precision(17);
    for (long long t = 0; t < horizon_; ++t)
        for (int v = 0; v < n_agents_; ++v) {
            for (int i = 0; i < n_arms_; ++i) {
                out << loss(t, v, i);
                out << (i + 1 == n_arms_ ? '\n' : ' ');
            }
        }
}

LossTensor LossTensor::materialized(long long horizon, int n_agents, int n_arms,
                                    std::vector<double> values) {
    if (values.size() != static_cast<std::size_t>(horizon) * n_agents * n_arms)
        throw std::invalid_argument("materialized tensor: wrong element count");
    for (double x : values)
        if (x < 0.0 || x > 1.0)
            throw std::invalid_argument("materialized tensor: loss outside [0, 1]");
    LossTensor t;
    t.mode_ = Mode::dense;
    t.horizon_ = horizon;
    t.n_agents_ = n_agents;
    t.n_arms_ = n_arms;
    t.values_ = std::move(values);
    return t;
}

OcoProblem OcoProblem::linear(int dim, int n_agents, long long horizon, std::uint64_t seed) {
    if (dim < 1 || n_agents < 1 || horizon < 1)
        throw std::invalid_argument("oco linear: bad sizes");
    OcoProblem p;
    p.kind_ = Kind::linear;
    p.set_ = DecisionSet::simplex;
    p.dim_ = dim;
    p.n_agents_ = n_agents;
    p.horizon_ = horizon;
    p.seed_ = seed;
    p.lipschitz_ = 1.0;
    p.radius_ = 1.0;
    return p;
}

OcoProblem OcoProblem::quadratic(int dim, int n_agents, long long horizon, std::uint64_t seed) {
    if (dim < 1 || n_agents < 1 || horizon < 1)
        throw std::invalid_argument("oco quadratic: bad sizes");
    OcoProblem p;
    p.kind_ = Kind::quadratic;
    p.set_ = DecisionSet::l2_ball;
    p.dim_ = dim;
    p.n_agents_ = n_agents;
    p.horizon_ = horizon;
    p.seed_ = seed;
    p.lipschitz_ = 2.0;
    p.radius_ = 1.0;
    return p;
}

double OcoProblem::regularizer_radius() const {
    if (set_ == DecisionSet::simplex) return std::sqrt(std::log(static_cast<double>(dim_)));
    return radius_ / std::sqrt(2.0);
}

std::vector<double> OcoProblem::loss_param(long long t, int v) const {
    std::vector<double> out(dim_);
    std::uint64_t cell = (static_cast<std::uint64_t>(t) << 20) ^ static_cast<std::uint64_t>(v);
    if (kind_ == Kind::linear) {
        for (int i = 0; i < dim_; ++i)
            out[i] = counter_uniform01(seed_, kDomainOcoParam, cell, i);
    } else {
        double norm2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
            out[i] = 2.0 * counter_uniform01(seed_, kDomainOcoParam, cell, i) - 1.0;
            norm2 += out[i] * out[i];
        }
        double norm = std::sqrt(norm2);
        if (norm > 1.0)
            for (auto& x : out) x /= norm;
    }
    return out;
}

double OcoProblem::agent_loss(long long t, int v, const std::vector<double>& x) const {
    auto param = loss_param(t, v);
    if (kind_ == Kind::linear) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += param[i] * x[i];
        return s;
    }
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double d = x[i] - param[i];
        s += d * d;
    }
    return 0.5 * s;
}

std::vector<double> OcoProblem::subgradient(long long t, int v,
                                            const std::vector<double>& x) const {
    auto param = loss_param(t, v);
    if (kind_ == Kind::linear) return param;
    std::vector<double> g(dim_);
    for (int i = 0; i < dim_; ++i) g[i] = x[i] - param[i];
    return g;
}

double OcoProblem::network_loss(long long t, const std::vector<double>& x) const {
    double s = 0.0;
    for (int v = 0; v < n_agents_; ++v) s += agent_loss(t, v, x);
    return s / n_agents_;
}

}  // namespace maclab

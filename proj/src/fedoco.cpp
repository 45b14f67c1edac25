#include "maclab/fedoco.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maclab/errors.hpp"
#include "maclab/policy.hpp"

namespace maclab {

std::vector<double> oco_projection(const std::vector<double>& z, double eta, DecisionSet set,
                                   double radius) {
    if (!(eta > 0.0)) throw std::invalid_argument("oco_projection: eta must be positive");
    if (set == DecisionSet::simplex) return entropic_argmin(z, eta);
    std::vector<double> x(z.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        x[i] = -eta * z[i];
        norm2 += x[i] * x[i];
    }
    double norm = std::sqrt(norm2);
    if (norm > radius)
        for (auto& v : x) v *= radius / norm;
    return x;
}

double fedoco_expected_lambda2(const CommGraph& graph, long long horizon, double alpha) {
    int n = graph.n_agents();
    double scale = std::pow(static_cast<double>(horizon), alpha) *
                   static_cast<double>(graph.edges().size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
    for (int v = 0; v < n; ++v) w(v, v) -= graph.degree(v) / scale;
    for (auto [u, v] : graph.edges()) {
        w(u, v) += 1.0 / scale;
        w(v, u) += 1.0 / scale;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw numeric_error("fedoco: eigensolver failed");
    std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return n >= 2 ? eig[1] : 0.0;
}

FedOcoResult run_fedoco(const CommGraph& graph, const OcoProblem& problem,
                        const FedOcoOptions& options) {
    if (options.alpha < 0.0 || options.alpha >= 1.0)
        throw std::invalid_argument("run_fedoco: alpha must lie in [0, 1)");
    const int n = graph.n_agents();
    const int k = problem.dim();
    const long long horizon = problem.horizon();
    if (problem.n_agents() != n) throw std::invalid_argument("run_fedoco: problem/graph mismatch");

    FedOcoResult result;
    result.lambda2 = fedoco_expected_lambda2(graph, horizon, options.alpha);
    const double big_r = problem.regularizer_radius();
    const double lip = problem.lipschitz();
    double gap = 1.0 - result.lambda2;
    if (gap <= 0.0) {
        result.schedule_fallback = true;
        result.eta_coefficient = big_r / lip;
    } else {
        result.eta_coefficient = big_r * std::sqrt(gap) / lip;
    }

    const double comm_prob = std::pow(static_cast<double>(horizon), -options.alpha);
    const auto set = problem.decision_set();
    const double radius = problem.set_radius();

    Rng rng(options.seed);
    CommMeter meter;
    std::vector<std::vector<double>> z(n, std::vector<double>(k, 0.0));
    std::vector<std::vector<double>> x(n, oco_projection(std::vector<double>(k, 0.0),
                                                         result.eta_coefficient, set, radius));

    std::vector<double> realized(n, 0.0);
    // comparator accumulators
    std::vector<double> lin_cum(k, 0.0);   // sum over t of averaged cost vectors
    std::vector<double> quad_sum(k, 0.0);  // sum over (t, v)/N of targets b
    double quad_sq = 0.0;                  // sum over (t, v)/N of ||b||^2

    const long long n_edges = static_cast<long long>(graph.edges().size());

    auto comparator_best = [&](long long t) {
        if (problem.kind() == OcoProblem::Kind::linear)
            return *std::min_element(lin_cum.begin(), lin_cum.end());
        double s2 = 0.0;
        for (int i = 0; i < k; ++i) s2 += quad_sum[i] * quad_sum[i];
        // minimizer of (t/2)|x|^2 - <x, S> + Q/2 is S/t, inside the unit ball
        return 0.5 * quad_sq - 0.5 * s2 / static_cast<double>(t);
    };

    for (long long t = 1; t <= horizon; ++t) {
        bool communicate = rng.bernoulli(comm_prob);
        int eu = -1, ev = -1;
        if (communicate) {
            auto e = graph.edges()[static_cast<std::size_t>(rng.uniform_int(n_edges))];
            eu = e.first;
            ev = e.second;
        }
        meter.record(communicate);
        if (meter.last_m != 0 && meter.last_m != 2) result.m_values_valid = false;

        // losses, comparator bookkeeping, gradients
        std::vector<double> mean_param(k, 0.0);
        double mean_sq = 0.0;
        for (int v = 0; v < n; ++v) {
            auto param = problem.loss_param(t - 1, v);
            double p2 = 0.0;
            for (int i = 0; i < k; ++i) {
                mean_param[i] += param[i] / n;
                p2 += param[i] * param[i];
            }
            mean_sq += p2 / n;
        }
        if (problem.kind() == OcoProblem::Kind::linear) {
            for (int i = 0; i < k; ++i) lin_cum[i] += mean_param[i];
        } else {
            for (int i = 0; i < k; ++i) quad_sum[i] += mean_param[i];
            quad_sq += mean_sq;
        }
        for (int v = 0; v < n; ++v) {
            // network loss at this agent's point
            double f;
            if (problem.kind() == OcoProblem::Kind::linear) {
                f = 0.0;
                for (int i = 0; i < k; ++i) f += mean_param[i] * x[v][i];
            } else {
                double xx = 0.0, xb = 0.0;
                for (int i = 0; i < k; ++i) {
                    xx += x[v][i] * x[v][i];
                    xb += x[v][i] * mean_param[i];
                }
                f = 0.5 * xx - xb + 0.5 * mean_sq;
            }
            realized[v] += f;
        }

        std::vector<std::vector<double>> grad(n);
        for (int v = 0; v < n; ++v) {
            grad[v] = problem.subgradient(t - 1, v, x[v]);
            // dual norm of the decision-set geometry: sup norm over the
            // simplex, euclidean over the ball
            double norm = 0.0;
            if (set == DecisionSet::simplex) {
                for (double gi : grad[v]) norm = std::max(norm, std::abs(gi));
            } else {
                for (double gi : grad[v]) norm += gi * gi;
                norm = std::sqrt(norm);
            }
            result.max_subgradient_norm = std::max(result.max_subgradient_norm, norm);
        }

        // z update; the matched endpoints average their round-start values
        if (communicate) {
            double before = 0.0, after = 0.0;
            for (int i = 0; i < k; ++i) before += z[eu][i] + z[ev][i];
            for (int i = 0; i < k; ++i) {
                double avg = 0.5 * (z[eu][i] + z[ev][i]);
                z[eu][i] = avg;
                z[ev][i] = avg;
            }
            for (int i = 0; i < k; ++i) after += z[eu][i] + z[ev][i];
            result.max_sum_conservation =
                std::max(result.max_sum_conservation, std::abs(after - before));
        }
        for (int v = 0; v < n; ++v)
            for (int i = 0; i < k; ++i) z[v][i] += grad[v][i];

        double eta_t = result.eta_coefficient / std::sqrt(static_cast<double>(t));
        for (int v = 0; v < n; ++v) {
            x[v] = oco_projection(z[v], eta_t, set, radius);
            if (set == DecisionSet::simplex) {
                double s = 0.0;
                bool nonneg = true;
                for (double xi : x[v]) {
                    s += xi;
                    nonneg = nonneg && xi >= 0.0;
                }
                if (!nonneg || std::abs(s - 1.0) > 1e-9) result.iterates_feasible = false;
            } else {
                double s2 = 0.0;
                for (double xi : x[v]) s2 += xi * xi;
                if (std::sqrt(s2) > radius + 1e-9) result.iterates_feasible = false;
            }
        }

        if (t % options.stride == 0 || t == horizon) {
            FedOcoTraceRow row;
            row.t = t;
            row.q_running = meter.q;
            double best = comparator_best(t);
            row.regret.resize(n);
            for (int v = 0; v < n; ++v) row.regret[v] = realized[v] - best;
            result.trace.push_back(std::move(row));
        }
        if (communicate) ++result.communicating_rounds;
    }

    result.q_total = meter.q;
    result.final_regret = result.trace.back().regret;
    return result;
}

}  // namespace maclab

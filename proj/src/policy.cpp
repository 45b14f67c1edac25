#include "maclab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "maclab/errors.hpp"

namespace maclab {

const SolverTolerances& solver_tolerances() {
    static const SolverTolerances tol{};
    return tol;
}

std::vector<double> uniform_distribution(int n_arms) {
    return std::vector<double>(n_arms, 1.0 / n_arms);
}

bool is_simplex_point(std::span<const double> p, double tol) {
    double sum = 0.0;
    for (double x : p) {
        if (x < 0.0) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

namespace {

double tsallis_sum(std::span<const double> cum_loss, double eta, double lambda) {
    double s = 0.0;
    for (double l : cum_loss) {
        double denom = eta * l + lambda;
        s += 1.0 / (denom * denom);
    }
    return s;
}

}  // namespace

double tsallis_ftrl_multiplier(std::span<const double> cum_loss, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("tsallis solve: eta must be positive");
    if (cum_loss.empty()) throw std::invalid_argument("tsallis solve: empty loss vector");
    double min_loss = *std::min_element(cum_loss.begin(), cum_loss.end());
    if (min_loss < 0.0 || !std::isfinite(min_loss))
        throw std::invalid_argument("tsallis solve: losses must be finite and non-negative");
    const auto& tol = solver_tolerances();
    double k = static_cast<double>(cum_loss.size());
    // sum(lo) >= 1 (the min-loss term alone blows up), sum(sqrt K) <= 1.
    double lo = -eta * min_loss + 1e-15;
    double hi = std::sqrt(k);
    double best = hi;
    double best_err = std::abs(tsallis_sum(cum_loss, eta, hi) - 1.0);
    for (int step = 0; step < tol.max_bisection_steps && lo < hi; ++step) {
        double lambda = 0.5 * (lo + hi);
        if (lambda <= lo || lambda >= hi) break;  // bracket exhausted
        double s = tsallis_sum(cum_loss, eta, lambda);
        double err = std::abs(s - 1.0);
        if (err < best_err) {
            best_err = err;
            best = lambda;
        }
        if (err == 0.0) break;
        if (s > 1.0)
            lo = lambda;
        else
            hi = lambda;
    }
    if (best_err <= tol.simplex_sum) return best;
    throw numeric_error("tsallis solve: bisection did not converge");
}

std::vector<double> tsallis_ftrl_solve(std::span<const double> cum_loss, double eta) {
    double lambda = tsallis_ftrl_multiplier(cum_loss, eta);
    std::vector<double> p(cum_loss.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        double denom = eta * cum_loss[i] + lambda;
        p[i] = 1.0 / (denom * denom);
    }
    return p;
}

namespace {

// Stationarity for the hybrid objective at coordinate value p = e^u:
//   cum_loss + lambda - e^{-u/2}/eta + (u + 1)/zeta = 0.
// Strictly increasing in u. Safeguarded Newton: the bracket must halve at
// least every other iteration, so a poisoned warm start cannot stall.
double hybrid_coordinate(double shifted_loss, double eta, double zeta, double u_init) {
    auto value = [&](double u) {
        return shifted_loss - std::exp(-0.5 * u) / eta + (u + 1.0) / zeta;
    };
    // p ranges from denormal to e^5; values above 1 only occur transiently
    // while the outer multiplier is still being located
    double lo = -745.0, hi = 5.0;
    double u = std::clamp(u_init, lo + 1e-9, hi - 1e-9);
    double last_width = hi - lo;
    bool force_mid = false;
    for (int it = 0; it < 240; ++it) {
        double f = value(u);
        if (f > 0.0)
            hi = u;
        else
            lo = u;
        double width = hi - lo;
        if (width <= 4e-16 * std::max(1.0, std::abs(lo))) break;
        if (it % 2 == 1) {
            force_mid = width > 0.5 * last_width;
            last_width = width;
        }
        double next;
        if (force_mid) {
            next = 0.5 * (lo + hi);
            force_mid = false;
        } else {
            double deriv = 0.5 * std::exp(-0.5 * u) / eta + 1.0 / zeta;
            next = u - f / deriv;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        }
        if (next == u) {
            next = 0.5 * (lo + hi);
            if (next == u) break;
        }
        u = next;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> hybrid_ftrl_solve(std::span<const double> cum_loss, double eta, double zeta,
                                      double* lambda_state) {
    if (!(eta > 0.0) || !(zeta > 0.0))
        throw std::invalid_argument("hybrid solve: eta and zeta must be positive");
    if (cum_loss.empty()) throw std::invalid_argument("hybrid solve: empty loss vector");
    const auto& tol = solver_tolerances();
    int k = static_cast<int>(cum_loss.size());
    double min_loss = *std::min_element(cum_loss.begin(), cum_loss.end());
    if (min_loss < 0.0 || !std::isfinite(*std::max_element(cum_loss.begin(), cum_loss.end())))
        throw std::invalid_argument("hybrid solve: losses must be finite and non-negative");

    std::vector<double> u(k, std::log(1.0 / k));
    // sum of coordinates and its derivative in lambda (for the outer Newton)
    auto evaluate = [&](double lambda, double* deriv) {
        double s = 0.0, ds = 0.0;
        for (int i = 0; i < k; ++i) {
            u[i] = hybrid_coordinate(cum_loss[i] + lambda, eta, zeta, u[i]);
            double p = std::exp(u[i]);
            s += p;
            if (deriv != nullptr) ds -= p / (0.5 * std::exp(-0.5 * u[i]) / eta + 1.0 / zeta);
        }
        if (deriv != nullptr) *deriv = ds;
        return s;
    };

    // Bracket the multiplier; the coordinate sum strictly decreases in lambda.
    double lambda_lo, lambda_hi;
    if (lambda_state != nullptr && std::isfinite(*lambda_state)) {
        double delta = std::max(0.5, 1e-3 * std::abs(*lambda_state));
        lambda_lo = *lambda_state - delta;
        lambda_hi = *lambda_state + delta;
        for (int it = 0; it < 200 && evaluate(lambda_lo, nullptr) < 1.0; ++it) {
            lambda_hi = lambda_lo;
            lambda_lo -= delta;
            delta *= 2.0;
        }
        for (int it = 0; it < 200 && evaluate(lambda_hi, nullptr) > 1.0; ++it) {
            lambda_lo = lambda_hi;
            lambda_hi += delta;
            delta *= 2.0;
        }
    } else {
        lambda_lo = -min_loss - 1.0 / zeta;
        for (int it = 0; it < 200 && evaluate(lambda_lo, nullptr) < 1.0; ++it)
            lambda_lo -= std::max(1.0, std::abs(lambda_lo));
        lambda_hi = std::max(1.0, -min_loss + std::sqrt(static_cast<double>(k)) / eta);
        for (int it = 0; it < 200 && evaluate(lambda_hi, nullptr) > 1.0; ++it)
            lambda_hi += std::max(1.0, std::abs(lambda_hi));
    }

    double lambda = 0.5 * (lambda_lo + lambda_hi);
    double best = lambda_hi;
    double best_err = std::numeric_limits<double>::infinity();
    double last_width = lambda_hi - lambda_lo;
    bool force_mid = false;
    for (int step = 0; step < tol.max_bisection_steps && lambda_lo < lambda_hi; ++step) {
        double deriv = 0.0;
        double s = evaluate(lambda, &deriv);
        double err = std::abs(s - 1.0);
        if (err < best_err) {
            best_err = err;
            best = lambda;
        }
        if (err == 0.0) break;
        if (s > 1.0)
            lambda_lo = lambda;
        else
            lambda_hi = lambda;
        double width = lambda_hi - lambda_lo;
        if (width <= 1e-16 * std::max(1.0, std::abs(lambda_lo))) break;
        if (step % 2 == 1) {
            force_mid = width > 0.5 * last_width;
            last_width = width;
        }
        double next;
        if (force_mid || deriv >= 0.0) {
            next = 0.5 * (lambda_lo + lambda_hi);
            force_mid = false;
        } else {
            next = lambda - (s - 1.0) / deriv;
            if (!(next > lambda_lo && next < lambda_hi)) next = 0.5 * (lambda_lo + lambda_hi);
        }
        if (next == lambda) {
            next = 0.5 * (lambda_lo + lambda_hi);
            if (next == lambda) break;
        }
        lambda = next;
    }
    if (best_err > tol.simplex_sum)
        throw numeric_error("hybrid solve: multiplier search did not converge (err=" +
                            std::to_string(best_err) + ", eta=" + std::to_string(eta) +
                            ", zeta=" + std::to_string(zeta) + ", K=" + std::to_string(k) + ")");
    lambda = best;
    evaluate(lambda, nullptr);  // restore the coordinates for the winning multiplier
    if (lambda_state != nullptr) *lambda_state = lambda;

    std::vector<double> p(k);
    for (int i = 0; i < k; ++i) p[i] = std::exp(u[i]);
    // final stationarity audit; the floating-point floor of the residual
    // itself scales with the cumulative loss magnitude
    for (int i = 0; i < k; ++i) {
        double resid = cum_loss[i] + lambda - 1.0 / (eta * std::sqrt(p[i])) +
                       (std::log(p[i]) + 1.0) / zeta;
        double scale = std::abs(cum_loss[i] + lambda) + 1.0 / (eta * std::sqrt(p[i]));
        if (std::abs(resid) > std::max(tol.kkt_residual, scale * 2e-13))
            throw numeric_error("hybrid solve: KKT residual too large");
    }
    return p;
}

std::vector<double> entropic_argmin(std::span<const double> z, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("entropic_argmin: eta must be positive");
    double m = std::numeric_limits<double>::infinity();
    for (double x : z) m = std::min(m, eta * x);
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(-(eta * z[i] - m));
        sum += p[i];
    }
    for (auto& x : p) x /= sum;
    return p;
}

std::vector<double> importance_weighted_estimate(int chosen_arm, double observed_loss,
                                                 double prob, int n_arms) {
    if (!(prob > 0.0))
        throw std::invalid_argument("importance_weighted_estimate: probability must be positive");
    if (chosen_arm < 0 || chosen_arm >= n_arms)
        throw std::invalid_argument("importance_weighted_estimate: arm out of range");
    std::vector<double> out(n_arms, 0.0);
    out[chosen_arm] = observed_loss / prob;
    return out;
}

Exp3Policy::Exp3Policy(int n_arms, long long horizon) : n_arms_(n_arms) {
    if (n_arms < 2) throw std::invalid_argument("exp3: needs K >= 2");
    if (horizon < 1) throw std::invalid_argument("exp3: needs T >= 1");
    double k = n_arms;
    gamma_ = std::min(1.0, std::sqrt(k * std::log(k) /
                                     ((std::exp(1.0) - 1.0) * static_cast<double>(horizon))));
    log_weights_.assign(n_arms, 0.0);
}

std::vector<double> Exp3Policy::distribution() const {
    double m = *std::max_element(log_weights_.begin(), log_weights_.end());
    std::vector<double> p(n_arms_);
    double sum = 0.0;
    for (int i = 0; i < n_arms_; ++i) {
        p[i] = std::exp(log_weights_[i] - m);
        sum += p[i];
    }
    for (int i = 0; i < n_arms_; ++i)
        p[i] = (1.0 - gamma_) * (p[i] / sum) + gamma_ / n_arms_;
    return p;
}

int Exp3Policy::sample(Rng& rng) const {
    auto p = distribution();
    return rng.categorical(p);
}

void Exp3Policy::update(int arm, double loss) {
    if (loss < 0.0 || loss > 1.0) throw std::invalid_argument("exp3: loss outside [0, 1]");
    auto p = distribution();
    double estimate = loss / p[arm];
    log_weights_[arm] -= gamma_ * estimate / n_arms_;
}

TsallisInfPolicy::TsallisInfPolicy(int n_arms) : n_arms_(n_arms) {
    if (n_arms < 2) throw std::invalid_argument("tsallis-inf: needs K >= 2");
    cum_estimate_.assign(n_arms, 0.0);
}

double TsallisInfPolicy::eta() const { return 2.0 * std::sqrt(1.0 / static_cast<double>(round_)); }

std::vector<double> TsallisInfPolicy::distribution() const {
    if (dirty_) {
        current_ = tsallis_ftrl_solve(cum_estimate_, eta());
        dirty_ = false;
    }
    return current_;
}

int TsallisInfPolicy::sample(Rng& rng) {
    auto p = distribution();
    return rng.categorical(p);
}

void TsallisInfPolicy::update(int arm, double loss) {
    if (loss < 0.0 || loss > 1.0) throw std::invalid_argument("tsallis-inf: loss outside [0, 1]");
    auto p = distribution();
    cum_estimate_[arm] += loss / p[arm];
    ++round_;
    dirty_ = true;
}

}  // namespace maclab

#include "erp/black_scholes.hpp"
#include "erp/gmm.hpp"
#include "erp/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace erp::gmm {

namespace {

constexpr double kSigmaSpan = kSigmaCap - kSigmaFloor;

double logistic(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double logit_sigma(double sigma) {
    const double p = std::clamp((sigma - kSigmaFloor) / kSigmaSpan, 1e-9, 1.0 - 1e-9);
    return std::log(p / (1.0 - p));
}

// Unconstrained coordinates:
//   z[0..n-2]  weight logits (z_{n-1} = 0)
//   y[0..n-2]  log component-forward ratios (y_{n-1} = 0)
//   s[0..n-1]  logistic volatility coordinates
// Weights sum to one and the martingale condition holds for every theta.
class Parameterization {
public:
    Parameterization(int n, double tau, double growth) : n_(n), tau_(tau), log_growth_(std::log(growth)) {}

    [[nodiscard]] int dim() const { return 3 * n_ - 2; }

    [[nodiscard]] std::vector<Component> decode(const Eigen::VectorXd& theta) const {
        const int n = n_;
        std::vector<double> logw(n);
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            logw[i] = i < n - 1 ? theta[i] : 0.0;
            y[i] = i < n - 1 ? theta[n - 1 + i] : 0.0;
        }
        const double lse_w = log_sum_exp(logw);
        for (auto& v : logw) v -= lse_w;

        std::vector<double> wy(n);
        for (int i = 0; i < n; ++i) wy[i] = logw[i] + y[i];
        const double lse_wy = log_sum_exp(wy);

        std::vector<Component> out(n);
        for (int i = 0; i < n; ++i) {
            const double sigma = kSigmaFloor + kSigmaSpan * logistic(theta[2 * n - 2 + i]);
            const double log_m = log_growth_ + y[i] - lse_wy;
            const double alpha = log_m - 0.5 * sigma * sigma * tau_;
            out[i] = {std::exp(logw[i]), alpha / tau_, sigma};
        }
        return out;
    }

    [[nodiscard]] Eigen::VectorXd encode(const std::vector<Component>& comps) const {
        const int n = n_;
        Eigen::VectorXd theta(dim());
        const auto log_m = [&](int i) {
            const auto& c = comps[i];
            return c.mu * tau_ + 0.5 * c.sigma * c.sigma * tau_;
        };
        for (int i = 0; i < n - 1; ++i) {
            theta[i] = std::log(comps[i].weight) - std::log(comps[n - 1].weight);
            theta[n - 1 + i] = log_m(i) - log_m(n - 1);
        }
        for (int i = 0; i < n; ++i) theta[2 * n - 2 + i] = logit_sigma(comps[i].sigma);
        return theta;
    }

private:
    static double log_sum_exp(const std::vector<double>& v) {
        const double top = *std::max_element(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += std::exp(x - top);
        return top + std::log(s);
    }

    int n_;
    double tau_;
    double log_growth_;
};

class Problem {
public:
    Problem(std::span<const chain::FitQuote> quotes, double spot, const carry::CarryParams& carry,
            const Parameterization& param)
        : quotes_(quotes), spot_(spot), carry_(carry), param_(param) {
        scale_.resize(static_cast<Eigen::Index>(quotes.size()));
        const double n = static_cast<double>(quotes.size());
        for (std::size_t j = 0; j < quotes.size(); ++j) {
            scale_[static_cast<Eigen::Index>(j)] = 1.0 / std::sqrt(n * quotes[j].mid);
        }
    }

    [[nodiscard]] std::size_t size() const { return quotes_.size(); }

    /// Scaled residuals; the sum of squares equals the fit objective.
    bool residuals(const Eigen::VectorXd& theta, Eigen::VectorXd& out) const {
        const auto comps = param_.decode(theta);
        for (const auto& c : comps) {
            if (!std::isfinite(c.mu) || !std::isfinite(c.sigma) || !std::isfinite(c.weight)) return false;
        }
        out.resize(static_cast<Eigen::Index>(quotes_.size()));
        const double tau = carry_.tau;
        for (std::size_t j = 0; j < quotes_.size(); ++j) {
            const auto& q = quotes_[j];
            const double log_sk = std::log(spot_ / q.strike);
            double sum = 0.0;
            for (const auto& c : comps) {
                const double s = c.sigma * std::sqrt(tau);
                const double a = c.mu * tau;
                const double fwd = spot_ * std::exp(a + 0.5 * s * s);
                const double d1 = (log_sk + a) / s + s;
                const double d2 = d1 - s;
                const double v = q.kind == OptionKind::Call ? fwd * norm_cdf(d1) - q.strike * norm_cdf(d2)
                                                            : q.strike * norm_cdf(-d2) - fwd * norm_cdf(-d1);
                sum += c.weight * v;
            }
            const auto idx = static_cast<Eigen::Index>(j);
            out[idx] = (q.mid - carry_.discount * sum) * scale_[idx];
        }
        return out.allFinite();
    }

    bool jacobian(const Eigen::VectorXd& theta, Eigen::MatrixXd& jac) const {
        const auto p = theta.size();
        jac.resize(static_cast<Eigen::Index>(quotes_.size()), p);
        Eigen::VectorXd up;
        Eigen::VectorXd dn;
        Eigen::VectorXd t = theta;
        for (Eigen::Index k = 0; k < p; ++k) {
            const double h = 1e-6 * (1.0 + std::abs(theta[k]));
            t[k] = theta[k] + h;
            if (!residuals(t, up)) return false;
            t[k] = theta[k] - h;
            if (!residuals(t, dn)) return false;
            t[k] = theta[k];
            jac.col(k) = (up - dn) / (2.0 * h);
        }
        return true;
    }

private:
    std::span<const chain::FitQuote> quotes_;
    double spot_;
    const carry::CarryParams& carry_;
    const Parameterization& param_;
    Eigen::VectorXd scale_;
};

struct RunResult {
    Eigen::VectorXd theta;
    double objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

RunResult levenberg_marquardt(const Problem& prob, Eigen::VectorXd theta, const FitConfig& cfg) {
    RunResult res;
    Eigen::VectorXd r;
    if (!prob.residuals(theta, r)) return res;
    double f = r.squaredNorm();
    double lambda = 1e-3;
    int quiet_steps = 0;
    Eigen::MatrixXd jac;
    bool need_jac = true;
    Eigen::MatrixXd jtj;
    Eigen::VectorXd grad;

    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        if (f < 1e-28) {
            res.converged = true;
            break;
        }
        if (need_jac) {
            if (!prob.jacobian(theta, jac)) break;
            jtj = jac.transpose() * jac;
            grad = jac.transpose() * r;
            need_jac = false;
            if (grad.lpNorm<Eigen::Infinity>() < 1e-15 * (1.0 + f)) {
                res.converged = true;
                break;
            }
        }
        Eigen::MatrixXd a = jtj;
        for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += lambda * (jtj(k, k) + 1e-12);
        const Eigen::VectorXd step = a.ldlt().solve(-grad);

        Eigen::VectorXd trial = theta + step;
        Eigen::VectorXd r_trial;
        const bool ok = step.allFinite() && prob.residuals(trial, r_trial);
        const double f_trial = ok ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
        if (f_trial < f) {
            const double rel = (f - f_trial) / f;
            theta = std::move(trial);
            r = std::move(r_trial);
            f = f_trial;
            lambda = std::max(lambda / 3.0, 1e-12);
            need_jac = true;
            quiet_steps = rel < cfg.precision_goal ? quiet_steps + 1 : 0;
            if (quiet_steps >= 2) {
                res.converged = true;
                ++it;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) {
                res.converged = true;
                break;
            }
        }
    }
    res.theta = std::move(theta);
    res.objective = f;
    res.iterations = it;
    return res;
}

double atm_vol(std::span<const chain::FitQuote> quotes, const carry::CarryParams& carry) {
    const chain::FitQuote* nearest = nullptr;
    for (const auto& q : quotes) {
        if (!nearest || std::abs(q.strike - carry.forward) < std::abs(nearest->strike - carry.forward)) {
            nearest = &q;
        }
    }
    try {
        return std::clamp(bs::implied_vol(carry, nearest->strike, nearest->mid, nearest->kind), 0.02, 2.0);
    } catch (const Error&) {
        return 0.2;
    }
}

double sigma_multiplier(int i) {
    static constexpr double kMult[] = {0.6, 1.0, 1.6, 2.4, 3.2, 4.0};
    if (i < 6) return kMult[i];
    return 4.0 + 0.8 * (i - 5);
}

}  // namespace

FitReport calibrate(std::span<const chain::FitQuote> quotes, double spot, const carry::CarryParams& carry,
                    const FitConfig& cfg) {
    if (quotes.empty()) {
        throw FitError("empty fit set");
    }
    if (cfg.n_components < 1 || cfg.max_iterations < 1 || cfg.multistart_count < 1) {
        throw FitError("invalid fit configuration");
    }
    for (const auto& q : quotes) {
        if (!(q.mid > 0.0) || !(q.strike > 0.0)) {
            throw FitError("fit targets and strikes must be positive");
        }
    }
    if (!(spot > 0.0) || !(carry.tau > 0.0)) {
        throw FitError("spot and horizon must be positive");
    }

    const int n = cfg.n_components;
    const double growth = std::exp((carry.r - carry.delta) * carry.tau);
    const Parameterization param(n, carry.tau, growth);
    const Problem prob(quotes, spot, carry, param);
    Rng rng(cfg.seed);

    const double sigma0 = atm_vol(quotes, carry);
    std::vector<Component> base(n);
    for (int i = 0; i < n; ++i) {
        base[i].weight = 1.0 / n;
        base[i].sigma = n == 1 ? sigma0 : std::min(sigma0 * sigma_multiplier(i), 0.9 * kSigmaCap);
        base[i].mu = -0.5 * base[i].sigma * base[i].sigma;
    }
    const Eigen::VectorXd theta0 = param.encode(base);
    const double spread = sigma0 * std::sqrt(carry.tau);

    std::optional<RunResult> best;
    for (int start = 0; start < cfg.multistart_count; ++start) {
        Eigen::VectorXd theta = theta0;
        const double jitter = start == 0 ? 0.01 : 0.5;
        for (int i = 0; i < n - 1; ++i) {
            theta[i] += jitter * rng.normal();
            theta[n - 1 + i] += jitter * spread * rng.normal();
        }
        if (start > 0) {
            for (int i = 0; i < n; ++i) {
                const double sigma = std::clamp(base[i].sigma * std::exp(0.4 * rng.normal()), 2.0 * kSigmaFloor,
                                                0.9 * kSigmaCap);
                theta[2 * n - 2 + i] = logit_sigma(sigma);
            }
        }
        RunResult run = levenberg_marquardt(prob, std::move(theta), cfg);
        if (std::isfinite(run.objective) && (!best || run.objective < best->objective)) {
            best = std::move(run);
        }
    }
    if (!best) {
        throw FitError("every calibration start produced a non-finite objective");
    }

    const GmmDensity density(param.decode(best->theta), carry.tau);
    const double objective = fit_objective(density, quotes, spot, carry);
    if (!std::isfinite(objective)) {
        throw FitError("non-finite objective at the calibrated density");
    }
    const OutStats out = compute_out_stats(density, quotes, spot, carry);
    FitReport report{density, objective, out, classify_fit(out), best->converged, best->iterations, quotes.size()};
    return report;
}

}  // namespace erp::gmm

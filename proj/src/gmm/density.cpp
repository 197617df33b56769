#include "erp/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace erp::gmm {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

GmmDensity::GmmDensity(std::vector<Component> components, double tau)
    : components_(std::move(components)), tau_(tau) {
    if (components_.empty()) {
        throw Error("mixture needs at least one component");
    }
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
        throw Error("mixture horizon must be positive");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
            throw Error("mixture weights must be finite and non-negative");
        }
        if (!(c.sigma >= kSigmaFloor) || !std::isfinite(c.sigma) || !std::isfinite(c.mu)) {
            throw Error("mixture component has invalid volatility or drift");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error("mixture weights must sum to one");
    }
    for (auto& c : components_) {
        c.weight /= total;
    }
}

double GmmDensity::sigma_max() const {
    double s = 0.0;
    for (const auto& c : components_) s = std::max(s, c.sigma);
    return s;
}

double GmmDensity::pdf(double x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const double v = variance(i);
        const double z = x - alpha(i);
        sum += components_[i].weight * kInvSqrt2Pi / std::sqrt(v) * std::exp(-0.5 * z * z / v);
    }
    return sum;
}

double GmmDensity::cdf(double x) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        sum += components_[i].weight * norm_cdf((x - alpha(i)) / std::sqrt(variance(i)));
    }
    return sum;
}

double GmmDensity::log_mgf(double a) const {
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(size());
    for (std::size_t i = 0; i < size(); ++i) {
        const double w = components_[i].weight;
        terms[i] = w > 0.0 ? std::log(w) + a * alpha(i) + 0.5 * a * a * variance(i)
                           : -std::numeric_limits<double>::infinity();
        top = std::max(top, terms[i]);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    return top + std::log(sum);
}

double gmm_pdf(const GmmDensity& d, double x) { return d.pdf(x); }

namespace {

/// Undiscounted component values sum_i w_i C_i (or P_i).
double undiscounted(const GmmDensity& d, double spot, double strike, OptionKind kind) {
    const double log_sk = std::log(spot / strike);
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double a = d.alpha(i);
        const double v = d.variance(i);
        const double s = std::sqrt(v);
        const double fwd = spot * std::exp(a + 0.5 * v);
        const double d1 = (log_sk + a) / s + s;
        const double d2 = d1 - s;
        const double value = kind == OptionKind::Call ? fwd * norm_cdf(d1) - strike * norm_cdf(d2)
                                                      : strike * norm_cdf(-d2) - fwd * norm_cdf(-d1);
        sum += d.components()[i].weight * value;
    }
    return sum;
}

}  // namespace

double price_call(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry) {
    return carry.discount * undiscounted(d, spot, strike, OptionKind::Call);
}

double price_put(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry) {
    return carry.discount * undiscounted(d, spot, strike, OptionKind::Put);
}

double price(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry, OptionKind kind) {
    return carry.discount * undiscounted(d, spot, strike, kind);
}

double martingale_residual(const GmmDensity& d, const carry::CarryParams& carry) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        sum += d.components()[i].weight * std::exp(d.alpha(i) + 0.5 * d.variance(i));
    }
    return sum - std::exp((carry.r - carry.delta) * carry.tau);
}

double fit_objective(const GmmDensity& d, std::span<const chain::FitQuote> quotes, double spot,
                     const carry::CarryParams& carry) {
    if (quotes.empty()) {
        throw FitError("empty fit set");
    }
    double sum = 0.0;
    for (const auto& q : quotes) {
        if (!(q.mid > 0.0)) {
            throw FitError("fit target must be positive");
        }
        const double diff = q.mid - price(d, spot, q.strike, carry, q.kind);
        sum += diff * diff / q.mid;
    }
    return sum / static_cast<double>(quotes.size());
}

char grade_code(Grade g) {
    switch (g) {
        case Grade::G: return 'G';
        case Grade::A: return 'A';
        case Grade::W: return 'W';
    }
    return '?';
}

OutStats compute_out_stats(const GmmDensity& d, std::span<const chain::FitQuote> quotes, double spot,
                           const carry::CarryParams& carry) {
    OutStats out;
    double worst = 0.0;
    for (const auto& q : quotes) {
        const double model = price(d, spot, q.strike, carry, q.kind);
        double err = 0.0;
        if (model < q.bid) {
            err = q.bid - model;
        } else if (model > q.ask) {
            err = model - q.ask;
        }
        if (err > 0.0) {
            ++out.n_outside;
            worst = std::max(worst, err);
        }
    }
    out.worst_error = round_to_cent(worst);
    return out;
}

Grade classify_fit(const OutStats& out) {
    if (out.n_outside == 0 || round_to_cent(out.worst_error) == 0.0) {
        return Grade::G;
    }
    if (out.n_outside <= 2) {
        return Grade::A;
    }
    return Grade::W;
}

}  // namespace erp::gmm

#pragma once

#include "erp/carry.hpp"
#include "erp/chain.hpp"
#include "erp/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace erp::gmm {

inline constexpr double kSigmaFloor = 1e-4;
inline constexpr double kSigmaCap = 5.0;

/// One mixture component: weight, annual drift and annual volatility.
struct Component {
    double weight = 1.0;
    double mu = 0.0;
    double sigma = 0.2;
};

/// Gaussian mixture over log returns X = log(S_T/S_t) at horizon tau:
/// q(x) = sum_i w_i * phi(x; mu_i*tau, sigma_i^2*tau).
class GmmDensity {
public:
    /// Weights must be non-negative and sum to one within 1e-9 (they are
    /// renormalized exactly); every sigma must be >= kSigmaFloor.
    GmmDensity(std::vector<Component> components, double tau);

    [[nodiscard]] const std::vector<Component>& components() const { return components_; }
    [[nodiscard]] std::size_t size() const { return components_.size(); }
    [[nodiscard]] double tau() const { return tau_; }

    /// Component mean of X: mu_i * tau.
    [[nodiscard]] double alpha(std::size_t i) const { return components_[i].mu * tau_; }
    /// Component variance of X: sigma_i^2 * tau.
    [[nodiscard]] double variance(std::size_t i) const {
        return components_[i].sigma * components_[i].sigma * tau_;
    }
    [[nodiscard]] double sigma_max() const;

    [[nodiscard]] double pdf(double x) const;
    [[nodiscard]] double cdf(double x) const;

    /// log E[exp(a X)], evaluated with a log-sum-exp.
    [[nodiscard]] double log_mgf(double a) const;

private:
    std::vector<Component> components_;
    double tau_;
};

double gmm_pdf(const GmmDensity& d, double x);

double price_call(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry);
double price_put(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry);
double price(const GmmDensity& d, double spot, double strike, const carry::CarryParams& carry, OptionKind kind);

/// sum_i w_i exp((mu_i + sigma_i^2/2) tau) - exp((r - delta) tau).
double martingale_residual(const GmmDensity& d, const carry::CarryParams& carry);

class FitError : public Error {
public:
    using Error::Error;
};

/// Geometric-average price error: mean of (C_mkt - C_model)^2 / C_mkt.
double fit_objective(const GmmDensity& d, std::span<const chain::FitQuote> quotes, double spot,
                     const carry::CarryParams& carry);

struct FitConfig {
    int n_components = 4;
    double precision_goal = 1e-5;
    int max_iterations = 250;
    int multistart_count = 8;
    std::uint64_t seed = 0;
};

struct OutStats {
    int n_outside = 0;
    double worst_error = 0.0;  // penny-rounded
};

enum class Grade { G, A, W };

char grade_code(Grade g);

struct FitReport {
    GmmDensity density;
    double objective_value = 0.0;
    OutStats out_stats;
    Grade grade = Grade::W;
    bool converged = false;
    int iterations = 0;
    std::size_t n_opts = 0;
};

/// Model prices outside [bid, ask] and the largest distance to the nearer bound.
OutStats compute_out_stats(const GmmDensity& d, std::span<const chain::FitQuote> quotes, double spot,
                           const carry::CarryParams& carry);

/// G: no outs or a worst error that rounds to $0.00. A: one or two outs.
/// W: everything else.
Grade classify_fit(const OutStats& out);

/// Multistart constrained least-squares fit of an N-component mixture to the
/// quote targets. The norm and martingale conditions hold at every trial point.
FitReport calibrate(std::span<const chain::FitQuote> quotes, double spot, const carry::CarryParams& carry,
                    const FitConfig& cfg);

}  // namespace erp::gmm

#pragma once

#include "erp/common.hpp"

#include <filesystem>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace erp::kappa {

enum class Frequency { Daily, Monthly, Quarterly, Semiannual, Annual };

/// 252, 12, 4, 2, 1.
double periods_per_year(Frequency f);
std::optional<Frequency> parse_frequency(std::string_view name);

struct Observation {
    Date date;
    double log_return = 0.0;  // log total return over the period
    double rf = 0.0;          // simple risk-free return over the period
};

struct ReturnSeries {
    std::vector<Observation> observations;
    double periods_per_year = 12.0;

    /// Throws unless dates are strictly increasing and values finite.
    void validate() const;
};

/// Accepts `date,log_total_return,rf_simple_return`, or the excess-return
/// layout `date,excess_return,rf` where x = ln(1 + excess + rf).
ReturnSeries parse_series_csv(std::string_view text, Frequency frequency);
ReturnSeries load_series_csv(const std::filesystem::path& path, Frequency frequency);

/// sum_i exp(-k x_i) (exp(x_i) - 1 - rf_i).
double f_kappa(const ReturnSeries& series, double kappa);

struct KappaEstimate {
    double kappa_hat = 0.0;
    std::size_t n_obs = 0;
    double f_at_zero = 0.0;
    std::pair<double, double> bracket{-20.0, 20.0};
    bool converged = false;
    int iterations = 0;
};

class KappaError : public Error {
public:
    using Error::Error;
};

/// Bisection for f(k) = 0. The bracket is widened once to (-50, 50) when f
/// has no sign change on the requested one.
KappaEstimate estimate_kappa(const ReturnSeries& series, double lo = -20.0, double hi = 20.0);

/// Block aggregation: log returns add, risk-free returns compound. Without
/// overlap the blocks are anchored so the last one ends at the final period.
ReturnSeries aggregate(const ReturnSeries& series, int k, bool overlap);

struct MeasureMoments {
    double mean_excess_ann_pct = 0.0;
    double std_ann_pct = 0.0;
    std::optional<double> skewness;  // per period
    std::optional<double> kurtosis;  // per period, normal = 3
};

struct MomentReport {
    MeasureMoments real_world;
    MeasureMoments risk_neutral;  // empirical weights tilted by exp(-k x)
};

MomentReport moment_report(const ReturnSeries& series, double kappa_hat);

}  // namespace erp::kappa

#pragma once

#include "erp/chain.hpp"
#include "erp/common.hpp"

#include <filesystem>
#include <vector>

namespace erp::carry {

enum class CarryMethod { VixWhitePaper, PcpRegression };

std::string_view to_string(CarryMethod m);

/// Cost-of-carry for one (trade date, expiration): continuously compounded
/// rate and dividend yield, with the implied forward and discount factor.
struct CarryParams {
    double r = 0.0;
    double delta = 0.0;
    double tau = 0.0;
    double forward = 0.0;
    double discount = 1.0;  // exp(-r * tau); may exceed 1 for negative rates
    CarryMethod method = CarryMethod::VixWhitePaper;

    /// Builds a consistent parameter set from rates.
    static CarryParams from_rates(double spot, double r, double delta, double tau, CarryMethod method);
};

struct Pillar {
    double tau = 0.0;   // years
    double rate = 0.0;  // continuously compounded, per year
};

/// Piecewise-linear rate curve in year fractions with flat extrapolation.
class YieldCurve {
public:
    explicit YieldCurve(std::vector<Pillar> pillars);

    [[nodiscard]] const std::vector<Pillar>& pillars() const { return pillars_; }

    /// Reads `tenor_years,rate_pct` CSV (rates in percent).
    static YieldCurve load_csv(const std::filesystem::path& path);
    static YieldCurve parse_csv(std::string_view text);

private:
    std::vector<Pillar> pillars_;
};

class CarryError : public Error {
public:
    using Error::Error;
};

double interp_rate(const YieldCurve& curve, double tau);

/// Treasury rate from the curve; forward from the strike where |C - P| of
/// mid-quotes is smallest (ties go to the lowest strike).
CarryParams carry_vixwp(const chain::OptionChain& chain, double spot, double tau, const YieldCurve& curve);

struct PcpRegression {
    CarryParams carry;
    double intercept = 0.0;  // exp(-r tau)
    double slope = 0.0;      // -exp(-delta tau)
    double r_squared = 0.0;
    std::vector<double> strikes;
    std::vector<double> residuals;
};

/// OLS of (P - C)/K on spot/K with intercept, over every strike that has a
/// put-call pair with nonzero bids on both legs.
PcpRegression carry_pcp_regression(const chain::OptionChain& chain, double spot, double tau);

/// Takes the PM leg of a dual expiration as correct and rescales the AM rates
/// so that r*tau and delta*tau agree; the two forwards are then identical.
CarryParams align_dual_forwards(const CarryParams& am, const CarryParams& pm, double tau_am, double tau_pm);

}  // namespace erp::carry

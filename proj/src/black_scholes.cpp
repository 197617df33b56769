#include "erp/black_scholes.hpp"

#include <algorithm>
#include <cmath>

namespace erp::bs {

double price(double forward, double discount, double strike, double total_vol, OptionKind kind) {
    if (total_vol <= 0.0) {
        const double intrinsic = kind == OptionKind::Call ? forward - strike : strike - forward;
        return discount * std::max(intrinsic, 0.0);
    }
    const double d1 = std::log(forward / strike) / total_vol + 0.5 * total_vol;
    const double d2 = d1 - total_vol;
    if (kind == OptionKind::Call) {
        return discount * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
    }
    return discount * (strike * norm_cdf(-d2) - forward * norm_cdf(-d1));
}

double price(const carry::CarryParams& carry, double strike, double sigma, OptionKind kind) {
    return price(carry.forward, carry.discount, strike, sigma * std::sqrt(carry.tau), kind);
}

double implied_vol(const carry::CarryParams& carry, double strike, double target, OptionKind kind) {
    const double f = carry.forward;
    const double d = carry.discount;
    const double lower = d * std::max(kind == OptionKind::Call ? f - strike : strike - f, 0.0);
    const double upper = d * (kind == OptionKind::Call ? f : strike);
    if (!(target > lower) || !(target < upper)) {
        throw ImpliedVolError("price outside no-arbitrage bounds for implied volatility");
    }
    double lo = 1e-6;
    double hi = 10.0;
    auto value = [&](double s) { return price(carry, strike, s, kind); };
    if (value(lo) > target) {
        throw ImpliedVolError("price below the minimum-volatility bracket");
    }
    while (value(hi) < target) {
        hi *= 2.0;
        if (hi > 100.0) {
            throw ImpliedVolError("implied volatility bracket expansion failed");
        }
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace erp::bs

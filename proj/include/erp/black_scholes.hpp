#pragma once

#include "erp/carry.hpp"
#include "erp/common.hpp"

namespace erp::bs {

/// Black-Scholes price on the forward: D * [F N(d1) - K N(d2)] for calls.
double price(double forward, double discount, double strike, double total_vol, OptionKind kind);

/// Black-Scholes price using the forward and discount carried by `carry`.
double price(const carry::CarryParams& carry, double strike, double sigma, OptionKind kind);

class ImpliedVolError : public Error {
public:
    using Error::Error;
};

/// Bisection on [1e-6, 10] (expanded up to 100 if needed) to 1e-10 in vol.
/// Throws ImpliedVolError when the price is outside the no-arbitrage bounds.
double implied_vol(const carry::CarryParams& carry, double strike, double price, OptionKind kind);

}  // namespace erp::bs

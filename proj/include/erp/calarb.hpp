#pragma once

#include "erp/carry.hpp"
#include "erp/chain.hpp"
#include "erp/gmm.hpp"
#include "erp/measure.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace erp::calarb {

struct PairLeg {
    carry::CarryParams carry;
    std::vector<chain::FitQuote> quotes;
    std::optional<gmm::GmmDensity> density;
};

/// AM- and PM-settled legs sharing a trade date and expiration date.
struct DualPair {
    double spot = 0.0;
    PairLeg am;
    PairLeg pm;
};

/// Strikes quoted with the same option kind in both fit sets.
std::vector<double> shared_strikes(const DualPair& pair);

DualPair make_dual_pair(const chain::OptionChain& am, const chain::OptionChain& pm,
                        const measure::PipelineConfig& cfg);

enum class Source { Data, Model };
std::string_view to_string(Source s);

struct ArbViolation {
    double strike = 0.0;
    OptionKind kind = OptionKind::Put;
    double am_price = 0.0;
    double pm_price = 0.0;
    double magnitude = 0.0;  // am - pm
    Source source = Source::Data;
};

/// Strikes where the AM price exceeds the PM price by more than `tolerance`.
/// Data mode compares fit targets at shared strikes (restricted to `strikes`
/// when given). Model mode prices both densities at `strikes`, or on
/// model_check_grid when empty; each strike uses its out-of-the-money kind.
std::vector<ArbViolation> detect_violations(const DualPair& pair, Source source, std::span<const double> strikes = {},
                                            double tolerance = 0.0);

/// Shared strikes plus 50 log-spaced strikes out to moneyness exp(+-10 s),
/// s the larger of sigma_max * sqrt(tau) over the two fitted legs.
std::vector<double> model_check_grid(const DualPair& pair);

enum class Side { RaisePm, LowerAm };

/// max(0.005 * mid, 0.01).
double quote_increment(double mid);

struct QuoteAdjustment {
    double strike = 0.0;
    OptionKind kind = OptionKind::Put;
    Settlement leg = Settlement::PM;
    double original_mid = 0.0;
    double adjusted_mid = 0.0;
    bool outside_quote = false;
};

struct AdjustedQuotes {
    std::vector<chain::FitQuote> am;
    std::vector<chain::FitQuote> pm;
    std::vector<QuoteAdjustment> adjustments;
    std::vector<std::string> warnings;
};

/// Moves the fit target on one side at every strike violating in data.
/// Bid and ask stay at the original quotes.
AdjustedQuotes adjust_quotes(const DualPair& pair, Side side);

struct RepairConfig {
    gmm::FitConfig fit;
    double kappa = 3.0;
    double model_tolerance = 1e-6;
};

struct LegErp {
    double before = 0.0;         // own carry, original quotes
    double raise_scenario = 0.0;  // PM raised, AM untouched
    double lower_scenario = 0.0;  // AM lowered, PM untouched
    double final_erp = 0.0;      // average of the two scenarios
};

struct RepairResult {
    std::vector<ArbViolation> data_violations;
    carry::CarryParams am_carry_aligned;
    AdjustedQuotes raised;
    AdjustedQuotes lowered;
    gmm::FitReport am_before;
    gmm::FitReport am_aligned;
    gmm::FitReport am_lowered;
    gmm::FitReport pm_original;
    gmm::FitReport pm_raised;
    std::vector<ArbViolation> residual_raise;
    std::vector<ArbViolation> residual_lower;
    LegErp am;
    LegErp pm;
    bool repaired = false;
};

/// Aligns the AM forward to the PM leg, refits under both adjustment
/// directions, checks the model grid and averages the two ERP values per leg.
RepairResult repair_pair(const DualPair& pair, const RepairConfig& cfg);

}  // namespace erp::calarb

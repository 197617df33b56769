#include "erp/calarb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace erp::calarb {

namespace {

using QuoteKey = std::pair<double, OptionKind>;

std::map<QuoteKey, const chain::FitQuote*> index_quotes(const std::vector<chain::FitQuote>& quotes) {
    std::map<QuoteKey, const chain::FitQuote*> out;
    for (const auto& q : quotes) out[{q.strike, q.kind}] = &q;
    return out;
}

double leg_scale(const PairLeg& leg) {
    return leg.density->sigma_max() * std::sqrt(leg.density->tau());
}

double fitted_erp(const gmm::FitReport& fit, const carry::CarryParams& carry, double kappa) {
    return measure::erp_annual_pct({fit.density, {}, 0.0}, carry, kappa);
}

}  // namespace

std::string_view to_string(Source s) { return s == Source::Data ? "data" : "model"; }

std::vector<double> shared_strikes(const DualPair& pair) {
    const auto pm = index_quotes(pair.pm.quotes);
    std::vector<double> out;
    for (const auto& q : pair.am.quotes) {
        if (pm.contains({q.strike, q.kind})) out.push_back(q.strike);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DualPair make_dual_pair(const chain::OptionChain& am, const chain::OptionChain& pm,
                        const measure::PipelineConfig& cfg) {
    if (am.settlement != Settlement::AM || pm.settlement != Settlement::PM) {
        throw Error("dual pair needs one AM and one PM chain");
    }
    if (am.trade_date != pm.trade_date || am.expiration != pm.expiration) {
        throw Error("dual pair legs must share trade date and expiration");
    }
    const double spot = pm.spot > 0.0 ? pm.spot : am.spot;
    if (!(spot > 0.0)) {
        throw Error("dual pair has no spot level");
    }
    DualPair pair;
    pair.spot = spot;
    pair.am.carry = measure::estimate_carry(am, spot, am.tau(), cfg);
    pair.pm.carry = measure::estimate_carry(pm, spot, pm.tau(), cfg);
    pair.am.quotes = chain::select_fit_set(am, spot, cfg.filter);
    pair.pm.quotes = chain::select_fit_set(pm, spot, cfg.filter);
    return pair;
}

std::vector<double> model_check_grid(const DualPair& pair) {
    if (!pair.am.density || !pair.pm.density) {
        throw Error("model check grid needs fitted densities on both legs");
    }
    auto grid = shared_strikes(pair);
    const double width = 10.0 * std::max(leg_scale(pair.am), leg_scale(pair.pm));
    for (double k : measure::log_strike_grid(pair.spot, width, 50)) grid.push_back(k);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<ArbViolation> detect_violations(const DualPair& pair, Source source, std::span<const double> strikes,
                                            double tolerance) {
    const auto shared = shared_strikes(pair);
    if (shared.empty()) {
        throw Error("dual pair has no shared strikes");
    }
    std::vector<ArbViolation> out;
    if (source == Source::Data) {
        const auto am = index_quotes(pair.am.quotes);
        const auto pm = index_quotes(pair.pm.quotes);
        for (const auto& [key, a] : am) {
            auto it = pm.find(key);
            if (it == pm.end()) continue;
            if (!strikes.empty() && std::find(strikes.begin(), strikes.end(), key.first) == strikes.end()) continue;
            const double diff = a->mid - it->second->mid;
            if (diff > tolerance) {
                out.push_back({key.first, key.second, a->mid, it->second->mid, diff, Source::Data});
            }
        }
        std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.strike < y.strike; });
        return out;
    }

    if (!pair.am.density || !pair.pm.density) {
        throw Error("model violations need fitted densities on both legs");
    }
    std::vector<double> grid;
    if (strikes.empty()) {
        grid = model_check_grid(pair);
        strikes = grid;
    }
    for (double k : strikes) {
        const OptionKind kind = k < pair.spot ? OptionKind::Put : OptionKind::Call;
        const double a = gmm::price(*pair.am.density, pair.spot, k, pair.am.carry, kind);
        const double p = gmm::price(*pair.pm.density, pair.spot, k, pair.pm.carry, kind);
        if (a - p > tolerance) {
            out.push_back({k, kind, a, p, a - p, Source::Model});
        }
    }
    return out;
}

double quote_increment(double mid) { return std::max(0.005 * mid, 0.01); }

AdjustedQuotes adjust_quotes(const DualPair& pair, Side side) {
    AdjustedQuotes out{pair.am.quotes, pair.pm.quotes, {}, {}};
    const auto violations = detect_violations(pair, Source::Data);
    auto& target = side == Side::RaisePm ? out.pm : out.am;
    for (const auto& v : violations) {
        auto it = std::find_if(target.begin(), target.end(),
                               [&](const chain::FitQuote& q) { return q.strike == v.strike && q.kind == v.kind; });
        if (it == target.end()) continue;
        QuoteAdjustment adj;
        adj.strike = v.strike;
        adj.kind = v.kind;
        adj.leg = side == Side::RaisePm ? Settlement::PM : Settlement::AM;
        adj.original_mid = it->mid;
        const double step = quote_increment(it->mid);
        it->mid += side == Side::RaisePm ? step : -step;
        adj.adjusted_mid = it->mid;
        adj.outside_quote = it->mid > it->ask || it->mid < it->bid;
        if (adj.outside_quote) {
            std::ostringstream msg;
            msg << to_string(adj.leg) << ' ' << kind_code(v.kind) << ' ' << v.strike << ": adjusted target "
                << it->mid << " leaves the quoted spread [" << it->bid << ", " << it->ask << "]";
            out.warnings.push_back(msg.str());
        }
        if (!(it->mid > 0.0)) {
            throw Error("quote adjustment produced a non-positive fit target");
        }
        out.adjustments.push_back(adj);
    }
    return out;
}

RepairResult repair_pair(const DualPair& pair, const RepairConfig& cfg) {
    const auto data_violations = detect_violations(pair, Source::Data);
    const auto aligned = carry::align_dual_forwards(pair.am.carry, pair.pm.carry, pair.am.carry.tau,
                                                    pair.pm.carry.tau);
    auto raised = adjust_quotes(pair, Side::RaisePm);
    auto lowered = adjust_quotes(pair, Side::LowerAm);

    // Adjusted targets keep the original bid/ask, so OutStats refer to the quotes.
    auto fit = [&](const std::vector<chain::FitQuote>& q, const carry::CarryParams& c) {
        return gmm::calibrate(q, pair.spot, c, cfg.fit);
    };

    auto am_before = fit(pair.am.quotes, pair.am.carry);
    auto am_aligned = fit(pair.am.quotes, aligned);
    auto pm_original = fit(pair.pm.quotes, pair.pm.carry);
    auto am_lowered = lowered.adjustments.empty() ? am_aligned : fit(lowered.am, aligned);
    auto pm_raised = raised.adjustments.empty() ? pm_original : fit(raised.pm, pair.pm.carry);

    auto residual = [&](const gmm::FitReport& am, const gmm::FitReport& pm) {
        DualPair p = pair;
        p.am.carry = aligned;
        p.am.density = am.density;
        p.pm.density = pm.density;
        return detect_violations(p, Source::Model, {}, cfg.model_tolerance);
    };
    auto residual_raise = residual(am_aligned, pm_raised);
    auto residual_lower = residual(am_lowered, pm_original);

    LegErp am_erp;
    am_erp.before = fitted_erp(am_before, pair.am.carry, cfg.kappa);
    am_erp.raise_scenario = fitted_erp(am_aligned, aligned, cfg.kappa);
    am_erp.lower_scenario = fitted_erp(am_lowered, aligned, cfg.kappa);
    am_erp.final_erp = 0.5 * (am_erp.raise_scenario + am_erp.lower_scenario);

    LegErp pm_erp;
    pm_erp.before = fitted_erp(pm_original, pair.pm.carry, cfg.kappa);
    pm_erp.raise_scenario = fitted_erp(pm_raised, pair.pm.carry, cfg.kappa);
    pm_erp.lower_scenario = pm_erp.before;
    pm_erp.final_erp = 0.5 * (pm_erp.raise_scenario + pm_erp.lower_scenario);

    const bool repaired = residual_raise.empty() && residual_lower.empty();
    return RepairResult{
        .data_violations = data_violations,
        .am_carry_aligned = aligned,
        .raised = std::move(raised),
        .lowered = std::move(lowered),
        .am_before = std::move(am_before),
        .am_aligned = std::move(am_aligned),
        .am_lowered = std::move(am_lowered),
        .pm_original = std::move(pm_original),
        .pm_raised = std::move(pm_raised),
        .residual_raise = std::move(residual_raise),
        .residual_lower = std::move(residual_lower),
        .am = am_erp,
        .pm = pm_erp,
        .repaired = repaired,
    };
}

}  // namespace erp::calarb

#include "erp/measure.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <variant>

namespace erp::measure {

carry::CarryParams estimate_carry(const chain::OptionChain& chain, double spot, double tau,
                                  const PipelineConfig& cfg) {
    if (cfg.carry_method == carry::CarryMethod::PcpRegression) {
        return carry::carry_pcp_regression(chain, spot, tau).carry;
    }
    if (!cfg.curve) {
        throw carry::CarryError("the white-paper carry method needs a yield curve");
    }
    return carry::carry_vixwp(chain, spot, tau, *cfg.curve);
}

FittedExpiration fit_expiration(const chain::OptionChain& chain, const PipelineConfig& cfg) {
    if (!(chain.spot > 0.0)) {
        throw Error("no spot level for " + chain.root + " " + format_date(chain.expiration));
    }
    const auto start = std::chrono::steady_clock::now();
    const double tau = chain.tau();
    const auto carry = estimate_carry(chain, chain.spot, tau, cfg);
    auto quotes = chain::select_fit_set(chain, chain.spot, cfg.filter);
    auto report = gmm::calibrate(quotes, chain.spot, carry, cfg.fit);
    return FittedExpiration{
        .root = chain.root,
        .expiration = chain.expiration,
        .days = chain.days_to_expiration(),
        .tau = tau,
        .settlement = chain.settlement,
        .spot = chain.spot,
        .carry = carry,
        .quotes = std::move(quotes),
        .report = std::move(report),
        .runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
    };
}

namespace {

using Outcome = std::variant<ErpPoint, ExpirationFailure>;

Outcome run_one(const chain::OptionChain& chain, const PipelineConfig& cfg) {
    try {
        auto fitted = fit_expiration(chain, cfg);
        const auto band = erp_band(fitted.q_price(), fitted.carry, cfg.kappa, cfg.halfwidth);
        if (cfg.drop_weak && fitted.report.grade == gmm::Grade::W) {
            return ExpirationFailure{chain.root, chain.expiration, "weak fit excluded"};
        }
        return ErpPoint{std::move(fitted), cfg.kappa, cfg.halfwidth, band};
    } catch (const Error& e) {
        return ExpirationFailure{chain.root, chain.expiration, e.what()};
    }
}

}  // namespace

ErpTermStructure pipeline_erp(std::span<const chain::OptionChain> chains, const PipelineConfig& cfg) {
    std::vector<std::optional<Outcome>> outcomes(chains.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
    if (jobs == 1) {
        for (std::size_t i = 0; i < chains.size(); ++i) outcomes[i] = run_one(chains[i], cfg);
    } else {
        // Strided work split; every slot is written by exactly one task.
        std::vector<std::future<void>> tasks;
        for (std::size_t t = 0; t < jobs; ++t) {
            tasks.push_back(std::async(std::launch::async, [&, t] {
                for (std::size_t i = t; i < chains.size(); i += jobs) outcomes[i] = run_one(chains[i], cfg);
            }));
        }
        for (auto& task : tasks) task.get();
    }

    ErpTermStructure out;
    for (auto& o : outcomes) {
        if (auto* p = std::get_if<ErpPoint>(&*o)) {
            out.points.push_back(std::move(*p));
        } else {
            out.failures.push_back(std::get<ExpirationFailure>(std::move(*o)));
        }
    }
    std::stable_sort(out.points.begin(), out.points.end(), [](const ErpPoint& a, const ErpPoint& b) {
        if (a.fitted.tau != b.fitted.tau) return a.fitted.tau < b.fitted.tau;
        return a.fitted.root < b.fitted.root;
    });
    return out;
}

}  // namespace erp::measure

#include "erp/calarb.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

using namespace erp;
using namespace erp::calarb;

namespace {

chain::FitQuote quote(double k, OptionKind kind, double mid) { return {k, kind, mid, mid - 0.1, mid + 0.1}; }

DualPair sample_pair() {
    DualPair p;
    p.spot = 100.0;
    p.am.carry = carry::CarryParams::from_rates(100.0, 0.02, 0.01, 0.099, carry::CarryMethod::PcpRegression);
    p.pm.carry = carry::CarryParams::from_rates(100.0, 0.02, 0.01, 0.1, carry::CarryMethod::PcpRegression);
    p.am.quotes = {quote(90, OptionKind::Put, 1.02), quote(95, OptionKind::Put, 2.0), quote(105, OptionKind::Call, 2.5),
                   quote(110, OptionKind::Call, 1.3)};
    p.pm.quotes = {quote(90, OptionKind::Put, 1.0), quote(95, OptionKind::Put, 2.1), quote(100, OptionKind::Call, 4.0),
                   quote(110, OptionKind::Call, 1.2)};
    return p;
}

}  // namespace

TEST_CASE("quote increment") {
    CHECK(quote_increment(10.0) == doctest::Approx(0.05));
    CHECK(quote_increment(1.0) == doctest::Approx(0.01));
    CHECK(quote_increment(0.2) == doctest::Approx(0.01));
}

TEST_CASE("shared strikes and data violations") {
    const auto p = sample_pair();
    const auto shared = shared_strikes(p);
    CHECK(shared == std::vector<double>{90, 95, 110});

    const auto v = detect_violations(p, Source::Data);
    REQUIRE(v.size() == 2);
    CHECK(v[0].strike == 90);
    CHECK(v[0].magnitude == doctest::Approx(0.02));
    CHECK(v[1].strike == 110);
    CHECK(v[1].source == Source::Data);

    const std::vector<double> only{110.0};
    CHECK(detect_violations(p, Source::Data, only).size() == 1);
    CHECK(detect_violations(p, Source::Data, {}, 0.05).size() == 1);
    CHECK_THROWS_AS(detect_violations(p, Source::Model), Error);
    CHECK(to_string(Source::Model) == "model");
}

TEST_CASE("adjustments move one side by one increment") {
    const auto p = sample_pair();
    const auto raised = adjust_quotes(p, Side::RaisePm);
    REQUIRE(raised.adjustments.size() == 2);
    CHECK(raised.adjustments[0].leg == Settlement::PM);
    CHECK(raised.pm[0].mid == doctest::Approx(1.01));
    CHECK(raised.pm[3].mid == doctest::Approx(1.21));
    CHECK(raised.am[0].mid == p.am.quotes[0].mid);
    CHECK(raised.pm[0].bid == p.pm.quotes[0].bid);
    CHECK(raised.warnings.empty());

    const auto lowered = adjust_quotes(p, Side::LowerAm);
    REQUIRE(lowered.adjustments.size() == 2);
    CHECK(lowered.adjustments[1].leg == Settlement::AM);
    CHECK(lowered.am[0].mid == doctest::Approx(1.01));
    CHECK(lowered.pm[0].mid == p.pm.quotes[0].mid);
}

TEST_CASE("adjustments that leave the spread are flagged") {
    auto p = sample_pair();
    p.pm.quotes[0].ask = 1.005;
    const auto raised = adjust_quotes(p, Side::RaisePm);
    CHECK(raised.adjustments[0].outside_quote);
    CHECK(raised.warnings.size() == 1);
}

TEST_CASE("model grid and model violations") {
    auto p = sample_pair();
    p.am.density = synth::martingale_density({{1.0, 0.0, 0.2}}, 0.099, 0.02, 0.01);
    p.pm.density = synth::martingale_density({{1.0, 0.0, 0.2}}, 0.1, 0.02, 0.01);
    const auto grid = model_check_grid(p);
    CHECK(grid.size() == 53);
    CHECK(grid.front() == doctest::Approx(100.0 * std::exp(-10.0 * 0.2 * std::sqrt(0.1))));
    // Same volatility with a shorter horizon makes every AM option cheaper.
    CHECK(detect_violations(p, Source::Model).empty());

    p.am.density = synth::martingale_density({{1.0, 0.0, 0.25}}, 0.099, 0.02, 0.01);
    const auto v = detect_violations(p, Source::Model, {}, 1e-6);
    CHECK_FALSE(v.empty());
    CHECK(v[0].source == Source::Model);
}

TEST_CASE("dual pair construction checks the legs") {
    const auto trade = synth::date(2018, 2, 7);
    const auto exp = synth::date(2018, 3, 16);
    const auto d = synth::martingale_density({{1.0, 0.0, 0.2}}, 0.1, 0.02, 0.01);
    const auto c = carry::CarryParams::from_rates(100.0, 0.02, 0.01, 0.1, carry::CarryMethod::PcpRegression);
    const auto strikes = synth::strike_ladder(100.0, 0.06, 15);
    const auto am = synth::make_chain(d, 100.0, c, strikes, "SPX", trade, exp, Settlement::AM);
    const auto pm = synth::make_chain(d, 100.0, c, strikes, "SPXW", trade, exp, Settlement::PM);
    measure::PipelineConfig cfg;
    cfg.carry_method = carry::CarryMethod::PcpRegression;
    const auto pair = make_dual_pair(am, pm, cfg);
    CHECK(pair.spot == 100.0);
    CHECK(pair.am.carry.tau < pair.pm.carry.tau);
    CHECK_THROWS_AS(make_dual_pair(pm, am, cfg), Error);
    auto other = pm;
    other.expiration = synth::date(2018, 3, 23);
    CHECK_THROWS_AS(make_dual_pair(am, other, cfg), Error);
}

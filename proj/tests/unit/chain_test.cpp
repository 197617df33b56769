#include "erp/chain.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <sstream>

using namespace erp;
using namespace erp::chain;

namespace {

const char* kHeader = "trade_date,root,expiration,strike,kind,bid,ask,settlement,spot\n";

}  // namespace

TEST_CASE("settlement follows the root suffix") {
    CHECK(infer_settlement("SPXW") == Settlement::PM);
    CHECK(infer_settlement("SPX") == Settlement::AM);
}

TEST_CASE("year fraction for PM and AM settlement") {
    const auto t = synth::date(2018, 2, 7);
    const auto e = synth::date(2018, 7, 31);
    CHECK(year_fraction(t, e, Settlement::PM, 0.25) == doctest::Approx((174 + 0.25 / 24) / 365).epsilon(1e-15));
    CHECK(year_fraction(t, e, Settlement::AM, 0.25) == doctest::Approx((174 + (0.25 - 6.5) / 24) / 365).epsilon(1e-15));
    // A same-day PM contract is still alive at the quote time; an AM one has settled.
    CHECK(year_fraction(t, t, Settlement::PM, 0.25) > 0.0);
    CHECK_THROWS_AS(year_fraction(t, t, Settlement::AM, 0.25), ExpiredContract);
    CHECK_THROWS_AS(year_fraction(e, t, Settlement::PM, 0.25), ExpiredContract);
}

TEST_CASE("parser groups rows into sorted chains and reports bad rows") {
    std::string text = kHeader;
    text += "2018-02-07,SPXW,2018-03-16,2700,C,40,41,,2700\n";
    text += "2018-02-07,SPXW,2018-03-16,2600,P,20,21,,\n";
    text += "2018-02-07,SPXW,2018-03-16,2700,P,39,40,,\n";
    text += "2018-02-07,SPX,2018-03-16,2700,P,39,40,,2700\n";
    text += "2018-02-07,SPXW,2018-03-16,2700,P,39,40,,\n";        // duplicate
    text += "2018-02-07,SPXW,2018-03-16,2650,X,1,2,,\n";          // bad kind
    text += "2018-02-07,SPXW,2018-03-16,2650,P,3,2,,\n";          // ask below bid
    text += "2018-02-07,SPXW,2018-03-16,2650,P,-1,2,,\n";         // negative
    text += "2018-02-07,SPXW,2018-03-16,abc,P,1,2,,\n";           // bad number
    text += "2018-02-07,SPXW,2018-03-16,2650,P,1,2,AM,\n";        // settlement conflict
    text += "2018-02-07,SPXW,2018-03-16,2650,P,1,2\n";            // field count
    const auto res = parse_chain_text(text);
    REQUIRE(res.chains.size() == 2);
    CHECK(res.errors.size() == 7);
    CHECK(res.errors.front().line == 6);

    const auto& am = res.chains[0].root == "SPX" ? res.chains[0] : res.chains[1];
    const auto& pm = res.chains[0].root == "SPX" ? res.chains[1] : res.chains[0];
    CHECK(am.settlement == Settlement::AM);
    CHECK(pm.settlement == Settlement::PM);
    CHECK(pm.spot == 2700.0);
    REQUIRE(pm.rows.size() == 3);
    CHECK(pm.rows[0].strike == 2600.0);
    CHECK(pm.rows[1].kind == OptionKind::Put);
    CHECK(pm.rows[2].kind == OptionKind::Call);
    CHECK(pm.rows[1].mid() == 39.5);
}

TEST_CASE("schema problems throw") {
    CHECK_THROWS_AS(parse_chain_text(""), SchemaError);
    CHECK_THROWS_AS(parse_chain_text("trade_date,root,expiration,strike,kind,bid\n"), SchemaError);
    CHECK_THROWS_AS(parse_chain_text(kHeader), SchemaError);
    CHECK_THROWS_AS(parse_chain_file("/nonexistent/chains.csv"), SchemaError);
}

TEST_CASE("custom column names map onto the reference schema") {
    ColumnSchema schema;
    schema.trade_date = "quote_date";
    schema.kind = "option_type";
    schema.bid = "bid_eod";
    schema.ask = "ask_eod";
    const auto res = parse_chain_text(
        "quote_date,root,expiration,strike,option_type,bid_eod,ask_eod\n"
        "2018-02-07,SPXW,2018-03-16,2700,C,40,41\n",
        schema);
    REQUIRE(res.chains.size() == 1);
    CHECK(res.chains[0].rows[0].ask == 41.0);
}

TEST_CASE("written chains parse back unchanged") {
    std::string text = kHeader;
    text += "2018-02-07,SPX,2018-03-16,2650.5,P,12.25,12.75,AM,2706.48\n";
    text += "2018-02-07,SPX,2018-03-16,2750,C,30.1,31.2,AM,2706.48\n";
    const auto first = parse_chain_text(text);
    std::ostringstream out;
    write_chain_csv(out, first.chains);
    const auto second = parse_chain_text(out.str());
    REQUIRE(second.chains.size() == 1);
    REQUIRE(second.chains[0].rows.size() == 2);
    CHECK(second.chains[0].rows[0].strike == 2650.5);
    CHECK(second.chains[0].rows[1].bid == 30.1);
    CHECK(second.chains[0].spot == 2706.48);
    CHECK(second.errors.empty());
}

TEST_CASE("fit set keeps out-of-the-money quotes above the bid floors") {
    OptionChain ch;
    ch.root = "SPXW";
    ch.trade_date = synth::date(2018, 2, 7);
    ch.expiration = synth::date(2018, 3, 16);
    auto add = [&](double k, OptionKind kind, double bid, double ask) {
        ch.rows.push_back({"SPXW", ch.expiration, k, kind, bid, ask, Settlement::PM});
    };
    add(2500, OptionKind::Put, 0.04, 0.10);
    add(2600, OptionKind::Put, 5.0, 5.5);
    add(2600, OptionKind::Call, 110.0, 112.0);
    add(2700, OptionKind::Put, 40.0, 41.0);
    add(2700, OptionKind::Call, 38.0, 39.0);
    add(2900, OptionKind::Call, 0.0, 0.05);

    const auto fs = select_fit_set(ch, 2700.0, {});
    REQUIRE(fs.size() == 2);
    CHECK(fs[0].strike == 2600.0);
    CHECK(fs[0].kind == OptionKind::Put);
    CHECK(fs[1].strike == 2700.0);
    CHECK(fs[1].kind == OptionKind::Call);

    FilterConfig loose;
    loose.put_bid_min = 0.01;
    CHECK(select_fit_set(ch, 2700.0, loose).size() == 3);

    FilterConfig strict;
    strict.put_bid_min = 100.0;
    strict.call_bid_min = 100.0;
    CHECK_THROWS_AS(select_fit_set(ch, 2700.0, strict), UnfittableExpiration);
}

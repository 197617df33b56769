#include "erp/measure.hpp"
#include "erp/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace erp;
using namespace erp::measure;

namespace {

carry::CarryParams flat_carry(double spot, double r, double delta, double tau) {
    return carry::CarryParams::from_rates(spot, r, delta, tau, carry::CarryMethod::VixWhitePaper);
}

TaggedDensity sample_q(double tau, double r, double delta, std::uint64_t seed = 17) {
    Rng rng(seed);
    return {synth::martingale_density(synth::random_components(rng, 4), tau, r, delta), {}, 0.0};
}

}  // namespace

TEST_CASE("tags follow the transforms") {
    const auto c = flat_carry(100.0, 0.02, 0.01, 0.5);
    const auto q = sample_q(0.5, 0.02, 0.01);
    const auto qt = to_total_return(q, c);
    CHECK(qt.tag == MeasureTag{Measure::Q, ReturnKind::Total});
    CHECK_THROWS_AS(to_total_return(qt, c), Error);

    const auto p = tilt(qt, 3.0, TiltDirection::QtoP);
    CHECK(p.tag.measure == Measure::P);
    CHECK(p.kappa_applied == 3.0);
    CHECK_THROWS_AS(tilt(p, 3.0, TiltDirection::QtoP), Error);
    CHECK_THROWS_AS(tilt(q, 3.0, TiltDirection::PtoQ), Error);
    CHECK_THROWS_AS(erp_annual_pct(qt, c, 3.0), Error);
    CHECK_THROWS_AS(sdf_check(qt, c, 3.0), Error);
    CHECK_THROWS_AS(erp_annual_pct(q, flat_carry(100.0, 0.02, 0.01, 0.6), 3.0), Error);
}

TEST_CASE("total-return shift moves every mean by delta tau") {
    const auto c = flat_carry(100.0, 0.02, 0.03, 0.5);
    const auto q = sample_q(0.5, 0.02, 0.03);
    const auto qt = to_total_return(q, c);
    for (std::size_t i = 0; i < q.density.size(); ++i) {
        CHECK(qt.density.alpha(i) - q.density.alpha(i) == doctest::Approx(0.015).epsilon(1e-12));
    }
    // Total return is a martingale at the risk-free rate.
    CHECK(std::exp(qt.density.log_mgf(1.0)) == doctest::Approx(std::exp(0.02 * 0.5)).epsilon(1e-14));
}

TEST_CASE("discount factor prices the bond and the index") {
    const double tau = 0.8;
    const auto c = flat_carry(100.0, 0.025, 0.018, tau);
    const auto q = sample_q(tau, 0.025, 0.018, 5);
    for (double kappa : {0.5, 3.0, 6.0}) {
        const auto p = tilt(to_total_return(q, c), kappa, TiltDirection::QtoP);
        const auto res = sdf_check(p, c, kappa);
        CHECK(std::abs(res.discount_residual) < 1e-12);
        CHECK(std::abs(res.pricing_residual) < 1e-14);
    }
}

TEST_CASE("ERP band is ordered for a left-skewed density") {
    const double tau = 0.5;
    const auto c = flat_carry(100.0, 0.02, 0.015, tau);
    const TaggedDensity q{synth::martingale_density({{0.85, 0.1, 0.12}, {0.15, -0.8, 0.4}}, tau, 0.02, 0.015), {},
                          0.0};
    const auto band = erp_band(q, c, 3.0, 0.5);
    CHECK(band.low < band.mid);
    CHECK(band.mid < band.high);
    CHECK(band.mid == erp_annual_pct(q, c, 3.0));
}

TEST_CASE("ERP for a single lognormal is closed form") {
    for (double sigma : {0.1, 0.25}) {
        for (double kappa : {1.0, 3.0}) {
            const double tau = 0.5;
            const auto c = flat_carry(100.0, 0.03, 0.01, tau);
            const TaggedDensity q{synth::martingale_density({{1.0, 0.0, sigma}}, tau, 0.03, 0.01), {}, 0.0};
            const double expected = 100.0 / tau * std::exp(0.03 * tau) * std::expm1(kappa * sigma * sigma * tau);
            CHECK(erp_annual_pct(q, c, kappa) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("smile tends to the widest component volatility in both wings") {
    const double tau = 0.25;
    const auto c = flat_carry(100.0, 0.02, 0.01, tau);
    // Components sharing the forward: the wing gap is only the log-weight term.
    std::vector<gmm::Component> comps{{0.6, 0.0, 0.12}, {0.3, 0.0, 0.25}, {0.1, 0.0, 0.45}};
    for (auto& k : comps) k.mu = 0.01 - 0.5 * k.sigma * k.sigma;
    const gmm::GmmDensity d(comps, tau);
    const double s = d.sigma_max() * std::sqrt(tau);
    const std::vector<double> strikes{100.0 * std::exp(-15.0 * s), 100.0, 100.0 * std::exp(15.0 * s)};
    const auto smile = smile_curve(d, 100.0, c, strikes);
    REQUIRE(smile.size() == 3);
    CHECK(smile[0].kind == OptionKind::Put);
    CHECK(smile[2].kind == OptionKind::Call);
    CHECK(std::abs(smile[0].iv - 0.45) < 0.005);
    CHECK(std::abs(smile[2].iv - 0.45) < 0.005);
    CHECK(smile[1].iv > 0.12);
    CHECK(smile[1].iv < 0.45);

    // Offset component means slow the approach to O(1/z), but it stays monotone.
    const auto skewed = synth::martingale_density({{0.6, 0.1, 0.12}, {0.3, -0.2, 0.25}, {0.1, -0.9, 0.45}}, tau,
                                                  0.02, 0.01);
    double last_put = 1.0;
    double last_call = 1.0;
    for (double z : {5.0, 10.0, 15.0, 20.0, 30.0}) {
        const std::vector<double> k{100.0 * std::exp(-z * s), 100.0 * std::exp(z * s)};
        const auto sm = smile_curve(skewed, 100.0, c, k);
        const double gp = std::abs(sm[0].iv - 0.45);
        const double gc = std::abs(sm[1].iv - 0.45);
        CHECK(gp < last_put);
        CHECK(gc < last_call);
        last_put = gp;
        last_call = gc;
    }
    CHECK(last_put < 0.015);
    CHECK(last_call < 0.015);
}

TEST_CASE("single component gives a flat smile") {
    const double tau = 0.5;
    const auto c = flat_carry(100.0, 0.02, 0.01, tau);
    const auto d = synth::martingale_density({{1.0, 0.0, 0.23}}, tau, 0.02, 0.01);
    for (const auto& pt : smile_curve(d, 100.0, c, log_strike_grid(100.0, 1.5, 31))) {
        CHECK(pt.iv == doctest::Approx(0.23).epsilon(1e-9));
    }
}

TEST_CASE("implied volatility inverts Black-Scholes") {
    const double tau = 0.4;
    const auto c = flat_carry(100.0, 0.01, 0.02, tau);
    for (double k : {70.0, 100.0, 130.0}) {
        for (auto kind : {OptionKind::Put, OptionKind::Call}) {
            const double p = oracle::bsm(100.0, k, tau, 0.01, 0.02, 0.3, kind == OptionKind::Call);
            CHECK(implied_vol(p, k, c, kind) == doctest::Approx(0.3).epsilon(1e-8));
        }
    }
}

TEST_CASE("log strike grid") {
    const auto g = log_strike_grid(100.0, 0.5, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(100.0 * std::exp(-0.5)));
    CHECK(g[2] == doctest::Approx(100.0));
    CHECK(g.back() == doctest::Approx(100.0 * std::exp(0.5)));
}

TEST_CASE("density grids integrate to the covered mass") {
    const double tau = 0.5;
    const auto c = flat_carry(100.0, 0.02, 0.015, tau);
    const auto q = sample_q(tau, 0.02, 0.015, 9);
    const auto p = tilt(q, 3.0, TiltDirection::QtoP);
    const auto m = default_moneyness_grid(q, p, 2001, 0.999);
    const auto rows = density_grids(q, p, m);
    double mq = 0.0;
    double mp = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double h = rows[i].moneyness - rows[i - 1].moneyness;
        mq += 0.5 * h * (rows[i].q + rows[i - 1].q);
        mp += 0.5 * h * (rows[i].p + rows[i - 1].p);
        CHECK(rows[i].diff == rows[i].q - rows[i].p);
    }
    CHECK(mq > 0.999 - 1e-4);
    CHECK(mp > 0.999 - 1e-4);
    CHECK(mq < 1.0 + 1e-6);
    CHECK_THROWS_AS(density_grids(q, to_total_return(p, c), m), Error);
    CHECK_THROWS_AS(default_moneyness_grid(q, p, 1), Error);
}

TEST_CASE("pipeline records failures and sorts by horizon") {
    const double spot = 2700.0;
    const auto trade = synth::date(2018, 2, 7);
    std::vector<chain::OptionChain> chains;
    for (int days : {60, 20}) {
        const auto exp = synth::add_days(trade, days);
        const double tau = chain::year_fraction(trade, exp, Settlement::PM, 0.25);
        const auto c = flat_carry(spot, 0.02, 0.015, tau);
        const auto d = synth::martingale_density({{0.8, 0.1, 0.12}, {0.2, -0.5, 0.3}}, tau, 0.02, 0.015);
        chains.push_back(synth::make_chain(d, spot, c, synth::strike_ladder(c.forward, 0.15 * std::sqrt(tau), 30),
                                           "SPXW", trade, exp, Settlement::PM));
    }
    auto broken = chains[0];
    broken.root = "SPX";
    broken.settlement = Settlement::AM;
    broken.spot = 0.0;
    chains.push_back(broken);

    PipelineConfig cfg;
    cfg.curve = carry::YieldCurve({{0.1, 0.02}});
    cfg.fit.n_components = 2;
    cfg.fit.multistart_count = 2;
    cfg.jobs = 2;
    const auto ts = pipeline_erp(chains, cfg);
    REQUIRE(ts.points.size() == 2);
    CHECK(ts.points[0].fitted.days == 20);
    CHECK(ts.points[1].fitted.days == 60);
    REQUIRE(ts.failures.size() == 1);
    CHECK(ts.failures[0].root == "SPX");

    PipelineConfig no_curve = cfg;
    no_curve.curve.reset();
    const auto ts2 = pipeline_erp(std::span(chains).first(1), no_curve);
    CHECK(ts2.points.empty());
    CHECK(ts2.failures.size() == 1);

    cfg.jobs = 1;
    const auto serial = pipeline_erp(chains, cfg);
    REQUIRE(serial.points.size() == 2);
    CHECK(serial.points[0].band.mid == ts.points[0].band.mid);
}

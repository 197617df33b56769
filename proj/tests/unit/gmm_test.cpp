#include "erp/gmm.hpp"
#include "erp/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace erp;
using namespace erp::gmm;

namespace {

carry::CarryParams flat_carry(double spot, double r, double delta, double tau) {
    return carry::CarryParams::from_rates(spot, r, delta, tau, carry::CarryMethod::VixWhitePaper);
}

std::vector<chain::FitQuote> synthetic_quotes(const GmmDensity& d, double spot, const carry::CarryParams& c,
                                              const std::vector<double>& strikes) {
    std::vector<chain::FitQuote> out;
    for (double k : strikes) {
        const auto kind = k < spot ? OptionKind::Put : OptionKind::Call;
        const double p = price(d, spot, k, c, kind);
        const double h = synth::half_spread(p);
        out.push_back({k, kind, p, p - h, p + h});
    }
    return out;
}

}  // namespace

TEST_CASE("density validation") {
    CHECK_THROWS_AS(GmmDensity({}, 1.0), Error);
    CHECK_THROWS_AS(GmmDensity({{1.0, 0.0, 0.2}}, 0.0), Error);
    CHECK_THROWS_AS(GmmDensity({{0.5, 0.0, 0.2}, {0.4, 0.0, 0.3}}, 1.0), Error);
    CHECK_THROWS_AS(GmmDensity({{-0.1, 0.0, 0.2}, {1.1, 0.0, 0.3}}, 1.0), Error);
    CHECK_THROWS_AS(GmmDensity({{1.0, 0.0, 1e-6}}, 1.0), Error);
    const GmmDensity d({{0.3 + 1e-12, 0.0, 0.2}, {0.7, 0.0, 0.3}}, 1.0);
    CHECK(d.components()[0].weight + d.components()[1].weight == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("pdf, cdf and mgf agree with direct sums") {
    Rng rng(21);
    const GmmDensity d(synth::random_components(rng, 3), 0.4);
    const auto q = synth::to_oracle(d);
    for (double x : {-0.8, -0.2, 0.0, 0.1, 0.5}) {
        CHECK(d.pdf(x) == doctest::Approx(oracle::mixture_pdf(q, x)).epsilon(1e-13));
        CHECK(gmm_pdf(d, x) == d.pdf(x));
        double cdf = 0.0;
        for (const auto& c : q) cdf += c.w * oracle::phi_cdf((x - c.alpha) / std::sqrt(c.v));
        CHECK(d.cdf(x) == doctest::Approx(cdf).epsilon(1e-13));
    }
    for (double a : {-3.0, 0.0, 1.0, 4.0}) {
        CHECK(std::exp(d.log_mgf(a)) == doctest::Approx(oracle::quad_moment(q, a)).epsilon(1e-10));
    }
    CHECK(d.log_mgf(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    // Large arguments stay finite through the log-sum-exp.
    CHECK(std::isfinite(d.log_mgf(400.0)));
}

TEST_CASE("put-call parity holds for mixture prices") {
    Rng rng(4);
    const double tau = 0.7;
    const auto d = synth::martingale_density(synth::random_components(rng, 4), tau, 0.03, 0.01);
    const auto c = flat_carry(100.0, 0.03, 0.01, tau);
    CHECK(std::abs(martingale_residual(d, c)) < 1e-14);
    for (double k : {60.0, 90.0, 100.0, 115.0, 180.0}) {
        const double lhs = price_call(d, 100.0, k, c) - price_put(d, 100.0, k, c);
        CHECK(lhs == doctest::Approx(c.discount * (c.forward - k)).epsilon(1e-12));
    }
}

TEST_CASE("objective and OutStats") {
    const GmmDensity d({{1.0, -0.02, 0.2}}, 1.0);
    const auto c = flat_carry(100.0, 0.0, 0.0, 1.0);
    auto quotes = synthetic_quotes(d, 100.0, c, {80, 90, 100, 110, 120});
    CHECK(fit_objective(d, quotes, 100.0, c) < 1e-28);
    auto out = compute_out_stats(d, quotes, 100.0, c);
    CHECK(out.n_outside == 0);
    CHECK(classify_fit(out) == Grade::G);

    quotes[0].bid = quotes[0].mid + 0.031;
    quotes[0].ask = quotes[0].mid + 0.2;
    quotes[4].ask = quotes[4].mid - 0.004;
    quotes[4].bid = quotes[4].mid - 0.5;
    out = compute_out_stats(d, quotes, 100.0, c);
    CHECK(out.n_outside == 2);
    CHECK(out.worst_error == 0.03);
    CHECK(classify_fit(out) == Grade::A);

    quotes[0].mid = 0.0;
    CHECK_THROWS_AS(fit_objective(d, quotes, 100.0, c), FitError);
}

TEST_CASE("grades") {
    CHECK(classify_fit({0, 0.0}) == Grade::G);
    CHECK(classify_fit({5, 0.0}) == Grade::G);
    CHECK(classify_fit({1, 0.05}) == Grade::A);
    CHECK(classify_fit({2, 0.11}) == Grade::A);
    CHECK(classify_fit({3, 0.01}) == Grade::W);
    CHECK(grade_code(Grade::W) == 'W');
    CHECK(round_to_cent(0.005) == 0.01);
    CHECK(round_to_cent(-0.005) == -0.01);
    CHECK(round_to_cent(0.0049) == 0.0);
}

TEST_CASE("calibration recovers a two-component density") {
    const double tau = 0.25;
    const auto truth = synth::martingale_density({{0.8, 0.1, 0.12}, {0.2, -0.6, 0.35}}, tau, 0.02, 0.015);
    const auto c = flat_carry(2700.0, 0.02, 0.015, tau);
    const auto quotes = synthetic_quotes(truth, 2700.0, c, synth::strike_ladder(c.forward, 0.2 * std::sqrt(tau), 40));

    FitConfig cfg;
    cfg.n_components = 2;
    cfg.seed = 3;
    const auto rep = calibrate(quotes, 2700.0, c, cfg);
    CHECK(rep.objective_value < 1e-12);
    CHECK(rep.grade == Grade::G);
    CHECK(rep.n_opts == quotes.size());
    CHECK(std::abs(martingale_residual(rep.density, c)) < 1e-12);
    for (const auto& k : rep.density.components()) {
        CHECK(k.sigma >= kSigmaFloor);
        CHECK(k.sigma <= kSigmaCap);
    }
    CHECK(rep.density.cdf(-0.2) == doctest::Approx(truth.cdf(-0.2)).epsilon(1e-4));
}

TEST_CASE("calibration is reproducible for a fixed seed") {
    const double tau = 0.1;
    const auto truth = synth::martingale_density({{0.7, 0.0, 0.15}, {0.3, 0.0, 0.3}}, tau, 0.01, 0.0);
    const auto c = flat_carry(100.0, 0.01, 0.0, tau);
    const auto quotes = synthetic_quotes(truth, 100.0, c, synth::strike_ladder(c.forward, 0.2 * std::sqrt(tau), 25));
    FitConfig cfg;
    cfg.n_components = 3;
    cfg.seed = 99;
    const auto a = calibrate(quotes, 100.0, c, cfg);
    const auto b = calibrate(quotes, 100.0, c, cfg);
    CHECK(a.objective_value == b.objective_value);
    for (std::size_t i = 0; i < a.density.size(); ++i) {
        CHECK(a.density.components()[i].mu == b.density.components()[i].mu);
        CHECK(a.density.components()[i].sigma == b.density.components()[i].sigma);
    }
}

TEST_CASE("calibration rejects bad input") {
    const auto c = flat_carry(100.0, 0.0, 0.0, 0.5);
    FitConfig cfg;
    CHECK_THROWS_AS(calibrate({}, 100.0, c, cfg), FitError);
    std::vector<chain::FitQuote> q{{100.0, OptionKind::Call, 5.0, 4.9, 5.1}};
    cfg.n_components = 0;
    CHECK_THROWS_AS(calibrate(q, 100.0, c, cfg), FitError);
    cfg.n_components = 1;
    CHECK_THROWS_AS(calibrate(q, -1.0, c, cfg), FitError);
    q[0].mid = -1.0;
    CHECK_THROWS_AS(calibrate(q, 100.0, c, cfg), FitError);
}

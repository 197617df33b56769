#include "erp/json_io.hpp"

namespace erp::json_io {

namespace {

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json moments(const kappa::MeasureMoments& m) {
    return {{"mean_excess_ann_pct", m.mean_excess_ann_pct},
            {"std_ann_pct", m.std_ann_pct},
            {"skewness", optional_number(m.skewness)},
            {"kurtosis", optional_number(m.kurtosis)}};
}

}  // namespace

ordered_json to_json(const gmm::GmmDensity& d) {
    ordered_json comps = ordered_json::array();
    for (const auto& c : d.components()) {
        comps.push_back({{"weight", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
    }
    return {{"tau", d.tau()}, {"components", comps}};
}

gmm::GmmDensity density_from_json(const ordered_json& j) {
    std::vector<gmm::Component> comps;
    for (const auto& c : j.at("components")) {
        comps.push_back({c.at("weight").get<double>(), c.at("mu").get<double>(), c.at("sigma").get<double>()});
    }
    return gmm::GmmDensity(std::move(comps), j.at("tau").get<double>());
}

ordered_json to_json(const gmm::FitReport& r) {
    return {{"density", to_json(r.density)},
            {"objective", r.objective_value},
            {"out_stats", {{"n_outside", r.out_stats.n_outside}, {"worst_error", r.out_stats.worst_error}}},
            {"grade", std::string(1, gmm::grade_code(r.grade))},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"n_opts", r.n_opts}};
}

ordered_json to_json(const carry::CarryParams& c) {
    return {{"method", std::string(carry::to_string(c.method))},
            {"r", c.r},
            {"delta", c.delta},
            {"tau", c.tau},
            {"forward", c.forward},
            {"discount", c.discount}};
}

ordered_json to_json(const measure::ErpPoint& p) {
    const auto& f = p.fitted;
    return {{"root", f.root},
            {"expiration", format_date(f.expiration)},
            {"days", f.days},
            {"tau", f.tau},
            {"settlement", std::string(to_string(f.settlement))},
            {"kappa", p.kappa},
            {"kappa_halfwidth", p.halfwidth},
            {"erp_low", p.band.low},
            {"erp_mid", p.band.mid},
            {"erp_high", p.band.high},
            {"grade", std::string(1, gmm::grade_code(p.grade()))},
            {"carry", to_json(f.carry)},
            {"fit", to_json(f.report)}};
}

ordered_json to_json(const measure::ErpTermStructure& ts) {
    ordered_json points = ordered_json::array();
    for (const auto& p : ts.points) points.push_back(to_json(p));
    ordered_json failures = ordered_json::array();
    for (const auto& f : ts.failures) {
        failures.push_back({{"root", f.root}, {"expiration", format_date(f.expiration)}, {"error", f.message}});
    }
    return {{"points", points}, {"failures", failures}};
}

ordered_json to_json(const kappa::KappaEstimate& k) {
    return {{"kappa_hat", k.kappa_hat},
            {"n_obs", k.n_obs},
            {"f_at_zero", k.f_at_zero},
            {"bracket", {k.bracket.first, k.bracket.second}},
            {"converged", k.converged},
            {"iterations", k.iterations}};
}

ordered_json to_json(const kappa::MomentReport& m) {
    return {{"true", moments(m.real_world)}, {"risk_neutral", moments(m.risk_neutral)}};
}

ordered_json to_json(const calarb::ArbViolation& v) {
    return {{"strike", v.strike},
            {"kind", std::string(1, kind_code(v.kind))},
            {"am_price", v.am_price},
            {"pm_price", v.pm_price},
            {"magnitude", v.magnitude},
            {"source", std::string(calarb::to_string(v.source))}};
}

}  // namespace erp::json_io

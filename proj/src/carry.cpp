#include "erp/carry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace erp::carry {

namespace {

struct PutCallPair {
    double strike;
    const chain::QuoteRow* put;
    const chain::QuoteRow* call;
};

std::vector<PutCallPair> put_call_pairs(const chain::OptionChain& chain) {
    std::map<double, PutCallPair> by_strike;
    for (const auto& row : chain.rows) {
        auto& p = by_strike.try_emplace(row.strike, PutCallPair{row.strike, nullptr, nullptr}).first->second;
        (row.kind == OptionKind::Put ? p.put : p.call) = &row;
    }
    std::vector<PutCallPair> out;
    for (const auto& [k, p] : by_strike) {
        if (p.put && p.call) out.push_back(p);
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view to_string(CarryMethod m) {
    return m == CarryMethod::VixWhitePaper ? "vixwp" : "pcp_regression";
}

CarryParams CarryParams::from_rates(double spot, double r, double delta, double tau, CarryMethod method) {
    CarryParams c;
    c.r = r;
    c.delta = delta;
    c.tau = tau;
    c.forward = spot * std::exp((r - delta) * tau);
    c.discount = std::exp(-r * tau);
    c.method = method;
    return c;
}

YieldCurve::YieldCurve(std::vector<Pillar> pillars) : pillars_(std::move(pillars)) {
    if (pillars_.empty()) {
        throw CarryError("yield curve needs at least one pillar");
    }
    std::sort(pillars_.begin(), pillars_.end(), [](const Pillar& a, const Pillar& b) { return a.tau < b.tau; });
    for (std::size_t i = 1; i < pillars_.size(); ++i) {
        if (!(pillars_[i].tau > pillars_[i - 1].tau)) {
            throw CarryError("yield curve tenors must be distinct");
        }
    }
}

YieldCurve YieldCurve::parse_csv(std::string_view text) {
    std::vector<Pillar> pillars;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        auto s = trim(line);
        if (s.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (s.find("tenor") != std::string_view::npos) continue;
        }
        const auto comma = s.find(',');
        if (comma == std::string_view::npos) {
            throw CarryError("malformed yield curve line: " + std::string(s));
        }
        const auto a = trim(s.substr(0, comma));
        const auto b = trim(s.substr(comma + 1));
        double tenor = 0.0;
        double pct = 0.0;
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), tenor);
        auto r2 = std::from_chars(b.data(), b.data() + b.size(), pct);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || tenor <= 0.0) {
            throw CarryError("malformed yield curve line: " + std::string(s));
        }
        pillars.push_back({tenor, pct / 100.0});
    }
    return YieldCurve(std::move(pillars));
}

YieldCurve YieldCurve::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CarryError("cannot open yield curve " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

double interp_rate(const YieldCurve& curve, double tau) {
    if (!(tau > 0.0)) {
        throw CarryError("interp_rate requires tau > 0");
    }
    const auto& p = curve.pillars();
    if (tau <= p.front().tau) return p.front().rate;
    if (tau >= p.back().tau) return p.back().rate;
    auto hi = std::upper_bound(p.begin(), p.end(), tau, [](double t, const Pillar& q) { return t < q.tau; });
    auto lo = hi - 1;
    const double t = (tau - lo->tau) / (hi->tau - lo->tau);
    return lo->rate + t * (hi->rate - lo->rate);
}

CarryParams carry_vixwp(const chain::OptionChain& chain, double spot, double tau, const YieldCurve& curve) {
    const auto pairs = put_call_pairs(chain);
    const PutCallPair* best = nullptr;
    double best_diff = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) {
        const double diff = std::abs(p.call->mid() - p.put->mid());
        if (diff < best_diff) {  // strict: ties keep the lower strike
            best_diff = diff;
            best = &p;
        }
    }
    if (!best) {
        throw CarryError("no strike with both a put and a call quote");
    }
    const double r = interp_rate(curve, tau);
    const double forward = best->strike + std::exp(r * tau) * (best->call->mid() - best->put->mid());
    if (!(forward > 0.0)) {
        throw CarryError("non-positive implied forward; quotes look corrupt");
    }
    const double delta = r - std::log(forward / spot) / tau;
    auto c = CarryParams::from_rates(spot, r, delta, tau, CarryMethod::VixWhitePaper);
    c.forward = forward;
    return c;
}

PcpRegression carry_pcp_regression(const chain::OptionChain& chain, double spot, double tau) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ks;
    for (const auto& p : put_call_pairs(chain)) {
        if (p.put->bid <= 0.0 || p.call->bid <= 0.0) continue;
        ks.push_back(p.strike);
        xs.push_back(spot / p.strike);
        ys.push_back((p.put->mid() - p.call->mid()) / p.strike);
    }
    const std::size_t n = xs.size();
    if (n < 2) {
        throw CarryError("put-call regression needs at least two paired strikes with nonzero bids");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw CarryError("singular put-call regression design");
    }
    PcpRegression out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ssr = 0.0;
    out.strikes = ks;
    out.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.residuals[i] = ys[i] - (out.intercept + out.slope * xs[i]);
        ssr += out.residuals[i] * out.residuals[i];
    }
    out.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    if (!(out.intercept > 0.0) || !(out.slope < 0.0)) {
        throw CarryError("put-call regression gives non-physical carry coefficients");
    }
    const double r = -std::log(out.intercept) / tau;
    const double delta = -std::log(-out.slope) / tau;
    out.carry = CarryParams::from_rates(spot, r, delta, tau, CarryMethod::PcpRegression);
    return out;
}

CarryParams align_dual_forwards(const CarryParams& am, const CarryParams& pm, double tau_am, double tau_pm) {
    CarryParams out = am;
    const double scale = tau_pm / tau_am;
    out.r = pm.r * scale;
    out.delta = pm.delta * scale;
    out.tau = tau_am;
    out.forward = pm.forward;
    out.discount = pm.discount;
    return out;
}

}  // namespace erp::carry

#include "erp/black_scholes.hpp"
#include "erp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erp::measure {

namespace {

void require_same_horizon(const gmm::GmmDensity& d, const carry::CarryParams& carry) {
    if (std::abs(d.tau() - carry.tau) > 1e-12 * std::max(1.0, carry.tau)) {
        throw Error("density horizon does not match the carry horizon");
    }
}

}  // namespace

TaggedDensity shift(const TaggedDensity& d, double c) {
    const double tau = d.density.tau();
    auto comps = d.density.components();
    for (auto& comp : comps) {
        comp.mu = (comp.mu * tau + c) / tau;
    }
    return {gmm::GmmDensity(std::move(comps), tau), d.tag, d.kappa_applied};
}

TaggedDensity to_total_return(const TaggedDensity& d, const carry::CarryParams& carry) {
    if (d.tag.return_kind != ReturnKind::Price) {
        throw Error("density is already a total-return density");
    }
    require_same_horizon(d.density, carry);
    auto out = shift(d, carry.delta * carry.tau);
    out.tag.return_kind = ReturnKind::Total;
    return out;
}

TaggedDensity tilt(const TaggedDensity& d, double kappa, TiltDirection direction) {
    const Measure from = direction == TiltDirection::QtoP ? Measure::Q : Measure::P;
    if (d.tag.measure != from) {
        throw Error("tilt direction does not match the density's measure");
    }
    const double k = direction == TiltDirection::QtoP ? kappa : -kappa;
    const auto& src = d.density;
    const double tau = src.tau();

    std::vector<double> log_w(src.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double a = src.alpha(i);
        const double v = src.variance(i);
        const double w = src.components()[i].weight;
        log_w[i] = w > 0.0 ? std::log(w) + k * a + 0.5 * k * k * v : -std::numeric_limits<double>::infinity();
        top = std::max(top, log_w[i]);
    }
    double norm = 0.0;
    for (double lw : log_w) norm += std::exp(lw - top);

    std::vector<gmm::Component> comps(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& c = src.components()[i];
        comps[i] = {std::exp(log_w[i] - top) / norm, (src.alpha(i) + k * src.variance(i)) / tau, c.sigma};
    }
    MeasureTag tag = d.tag;
    tag.measure = direction == TiltDirection::QtoP ? Measure::P : Measure::Q;
    return {gmm::GmmDensity(std::move(comps), tau), tag, d.kappa_applied + k};
}

double erp_annual_pct(const TaggedDensity& q_price, const carry::CarryParams& carry, double kappa) {
    if (q_price.tag != MeasureTag{Measure::Q, ReturnKind::Price}) {
        throw Error("ERP needs a risk-neutral price-return density");
    }
    require_same_horizon(q_price.density, carry);
    const double tau = carry.tau;
    // sum_i w~_i exp(alpha_i + (k + 1/2) v_i) = M(k + 1) / M(k)
    const double log_ratio = q_price.density.log_mgf(kappa + 1.0) - q_price.density.log_mgf(kappa);
    return 100.0 / tau * (std::exp(carry.delta * tau + log_ratio) - std::exp(carry.r * tau));
}

ErpBand erp_band(const TaggedDensity& q_price, const carry::CarryParams& carry, double kappa_center,
                 double kappa_halfwidth) {
    return {erp_annual_pct(q_price, carry, kappa_center - kappa_halfwidth),
            erp_annual_pct(q_price, carry, kappa_center),
            erp_annual_pct(q_price, carry, kappa_center + kappa_halfwidth)};
}

double implied_vol(double price, double strike, const carry::CarryParams& carry, OptionKind kind) {
    return bs::implied_vol(carry, strike, price, kind);
}

std::vector<SmilePoint> smile_curve(const gmm::GmmDensity& d, double spot, const carry::CarryParams& carry,
                                    std::span<const double> strikes) {
    std::vector<SmilePoint> out;
    out.reserve(strikes.size());
    for (double k : strikes) {
        SmilePoint pt;
        pt.strike = k;
        pt.kind = k < carry.forward ? OptionKind::Put : OptionKind::Call;
        pt.price = gmm::price(d, spot, k, carry, pt.kind);
        try {
            pt.iv = bs::implied_vol(carry, k, pt.price, pt.kind);
        } catch (const bs::ImpliedVolError&) {
            pt.iv = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(pt);
    }
    return out;
}

std::vector<double> log_strike_grid(double spot, double width, int count) {
    std::vector<double> out;
    if (count < 2) {
        if (count == 1) out.push_back(spot);
        return out;
    }
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = -width + 2.0 * width * i / (count - 1);
        out.push_back(spot * std::exp(t));
    }
    return out;
}

SdfResiduals sdf_check(const TaggedDensity& p_total, const carry::CarryParams& carry, double kappa) {
    if (p_total.tag != MeasureTag{Measure::P, ReturnKind::Total}) {
        throw Error("discount factor check needs a real-world total-return density");
    }
    require_same_horizon(p_total.density, carry);
    const auto& d = p_total.density;
    const double log_c = -d.log_mgf(1.0 - kappa);
    SdfResiduals out;
    out.discount_residual = std::exp(log_c + d.log_mgf(-kappa)) - std::exp(-carry.r * carry.tau);
    out.pricing_residual = std::exp(log_c + d.log_mgf(1.0 - kappa)) - 1.0;
    return out;
}

std::vector<GridRow> density_grids(const TaggedDensity& q, const TaggedDensity& p, std::span<const double> moneyness) {
    if (q.tag.return_kind != p.tag.return_kind) {
        throw Error("density grids need both densities on the same return basis");
    }
    std::vector<GridRow> out;
    out.reserve(moneyness.size());
    for (double m : moneyness) {
        if (!(m > 0.0)) {
            throw Error("moneyness must be positive");
        }
        const double x = std::log(m);
        GridRow row{m, q.density.pdf(x) / m, p.density.pdf(x) / m, 0.0};
        row.diff = row.q - row.p;
        out.push_back(row);
    }
    return out;
}

namespace {

double quantile(const gmm::GmmDensity& d, double prob) {
    const double width = 40.0 * d.sigma_max() * std::sqrt(d.tau());
    double lo = -width;
    double hi = width;
    for (std::size_t i = 0; i < d.size(); ++i) {
        lo = std::min(lo, d.alpha(i) - width);
        hi = std::max(hi, d.alpha(i) + width);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (d.cdf(mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> default_moneyness_grid(const TaggedDensity& q, const TaggedDensity& p, int points,
                                           double coverage) {
    if (points < 2 || !(coverage > 0.0 && coverage < 1.0)) {
        throw Error("invalid moneyness grid request");
    }
    const double tail = 0.5 * (1.0 - coverage);
    const double x_lo = std::min(quantile(q.density, tail), quantile(p.density, tail));
    const double x_hi = std::max(quantile(q.density, 1.0 - tail), quantile(p.density, 1.0 - tail));
    const double m_lo = std::exp(x_lo);
    const double m_hi = std::exp(x_hi);
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = m_lo + (m_hi - m_lo) * i / (points - 1);
    }
    return out;
}

}  // namespace erp::measure

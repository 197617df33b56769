#pragma once

#include "erp/carry.hpp"
#include "erp/chain.hpp"
#include "erp/gmm.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace erp::measure {

enum class Measure { Q, P };
enum class ReturnKind { Price, Total };

struct MeasureTag {
    Measure measure = Measure::Q;
    ReturnKind return_kind = ReturnKind::Price;

    bool operator==(const MeasureTag&) const = default;
};

struct TaggedDensity {
    gmm::GmmDensity density;
    MeasureTag tag;
    double kappa_applied = 0.0;
};

enum class TiltDirection { QtoP, PtoQ };

/// Adds `c` to every component mean of the log return. The tag is unchanged.
TaggedDensity shift(const TaggedDensity& d, double c);

/// Price-return to total-return conversion: shift by delta*tau.
TaggedDensity to_total_return(const TaggedDensity& d, const carry::CarryParams& carry);

/// Exponential tilt. QtoP multiplies the density by exp(kappa x), PtoQ by
/// exp(-kappa x); both renormalize. Closed form: weights scale by exp(gamma_i),
/// gamma_i = k alpha_i + k^2 v_i / 2, and means move by k v_i.
TaggedDensity tilt(const TaggedDensity& d, double kappa, TiltDirection direction);

/// Annualized equity risk premium in percent for a Q price-return density.
double erp_annual_pct(const TaggedDensity& q_price, const carry::CarryParams& carry, double kappa);

struct ErpBand {
    double low = 0.0;
    double mid = 0.0;
    double high = 0.0;
};

ErpBand erp_band(const TaggedDensity& q_price, const carry::CarryParams& carry, double kappa_center,
                 double kappa_halfwidth);

/// Black-Scholes implied volatility on the carry's forward and discount.
double implied_vol(double price, double strike, const carry::CarryParams& carry, OptionKind kind);

struct SmilePoint {
    double strike = 0.0;
    OptionKind kind = OptionKind::Put;  // out-of-the-money kind relative to the forward
    double price = 0.0;
    double iv = 0.0;  // NaN where the price cannot be inverted
};

std::vector<SmilePoint> smile_curve(const gmm::GmmDensity& d, double spot, const carry::CarryParams& carry,
                                    std::span<const double> strikes);

/// `count` log-spaced strikes spanning spot*exp(+-width).
std::vector<double> log_strike_grid(double spot, double width, int count);

struct SdfResiduals {
    double discount_residual = 0.0;
    double pricing_residual = 0.0;
};

/// Consistency of the power-utility discount factor m = c exp(-kappa x) with
/// c = 1 / E_P[exp((1 - kappa) x)]. Both residuals vanish for a total-return P
/// density tilted from a martingale-consistent Q density.
SdfResiduals sdf_check(const TaggedDensity& p_total, const carry::CarryParams& carry, double kappa);

struct GridRow {
    double moneyness = 0.0;
    double q = 0.0;
    double p = 0.0;
    double diff = 0.0;  // q - p
};

/// Densities over K/S, i.e. pdf_x(ln m) / m.
std::vector<GridRow> density_grids(const TaggedDensity& q, const TaggedDensity& p, std::span<const double> moneyness);

/// Evenly spaced moneyness covering at least `coverage` of the mass of both densities.
std::vector<double> default_moneyness_grid(const TaggedDensity& q, const TaggedDensity& p, int points = 201,
                                           double coverage = 0.999);

// Term-structure pipeline.

struct PipelineConfig {
    chain::FilterConfig filter;
    gmm::FitConfig fit;
    carry::CarryMethod carry_method = carry::CarryMethod::VixWhitePaper;
    std::optional<carry::YieldCurve> curve;
    double kappa = 3.0;
    double halfwidth = 0.5;
    int jobs = 1;
    bool drop_weak = false;
};

struct FittedExpiration {
    std::string root;
    Date expiration;
    int days = 0;
    double tau = 0.0;
    Settlement settlement = Settlement::PM;
    double spot = 0.0;
    carry::CarryParams carry;
    std::vector<chain::FitQuote> quotes;
    gmm::FitReport report;
    double runtime_seconds = 0.0;  // wall time of carry plus calibration

    [[nodiscard]] TaggedDensity q_price() const { return {report.density, {}, 0.0}; }
};

/// Carry estimate by the configured method; the white-paper method needs a curve.
carry::CarryParams estimate_carry(const chain::OptionChain& chain, double spot, double tau,
                                  const PipelineConfig& cfg);

/// Carry, fit set and calibration for one expiration.
FittedExpiration fit_expiration(const chain::OptionChain& chain, const PipelineConfig& cfg);

struct ErpPoint {
    FittedExpiration fitted;
    double kappa = 3.0;
    double halfwidth = 0.5;
    ErpBand band;

    [[nodiscard]] gmm::Grade grade() const { return fitted.report.grade; }
};

struct ExpirationFailure {
    std::string root;
    Date expiration;
    std::string message;
};

struct ErpTermStructure {
    std::vector<ErpPoint> points;  // sorted by tau, then root
    std::vector<ExpirationFailure> failures;
};

/// Per expiration: carry, fit set, calibration and the ERP band. Failed
/// expirations are recorded and skipped.
ErpTermStructure pipeline_erp(std::span<const chain::OptionChain> chains, const PipelineConfig& cfg);

}  // namespace erp::measure

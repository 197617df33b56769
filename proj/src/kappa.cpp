#include "erp/kappa.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace erp::kappa {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw KappaError("line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

// Summands exp(-k x_i - shift) * excess_i with the largest exponent factored out.
struct ScaledSum {
    double sum = 0.0;
    double abs_sum = 0.0;
    double log_scale = 0.0;
};

ScaledSum scaled_f(const ReturnSeries& s, double k) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& o : s.observations) top = std::max(top, -k * o.log_return);
    ScaledSum out;
    out.log_scale = top;
    for (const auto& o : s.observations) {
        const double term = std::exp(-k * o.log_return - top) * (std::expm1(o.log_return) - o.rf);
        out.sum += term;
        out.abs_sum += std::abs(term);
    }
    return out;
}

}  // namespace

double periods_per_year(Frequency f) {
    switch (f) {
        case Frequency::Daily: return 252.0;
        case Frequency::Monthly: return 12.0;
        case Frequency::Quarterly: return 4.0;
        case Frequency::Semiannual: return 2.0;
        case Frequency::Annual: return 1.0;
    }
    return 1.0;
}

std::optional<Frequency> parse_frequency(std::string_view name) {
    if (name == "daily") return Frequency::Daily;
    if (name == "monthly") return Frequency::Monthly;
    if (name == "quarterly") return Frequency::Quarterly;
    if (name == "semiannual") return Frequency::Semiannual;
    if (name == "annual") return Frequency::Annual;
    return std::nullopt;
}

void ReturnSeries::validate() const {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!std::isfinite(o.log_return) || !std::isfinite(o.rf)) {
            throw KappaError("non-finite return at observation " + std::to_string(i + 1));
        }
        if (i > 0 && !(observations[i - 1].date < o.date)) {
            throw KappaError("dates must be strictly increasing at " + format_date(o.date));
        }
    }
    if (!(periods_per_year > 0.0)) {
        throw KappaError("periods per year must be positive");
    }
}

ReturnSeries parse_series_csv(std::string_view text, Frequency frequency) {
    ReturnSeries series;
    series.periods_per_year = periods_per_year(frequency);
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    int date_col = -1;
    int x_col = -1;
    int excess_col = -1;
    int rf_col = -1;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (!header) {
            header = true;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto f = fields[i];
                const int idx = static_cast<int>(i);
                if (f == "date") date_col = idx;
                else if (f == "log_total_return") x_col = idx;
                else if (f == "excess_return") excess_col = idx;
                else if (f == "rf_simple_return" || f == "rf") rf_col = idx;
            }
            if (date_col < 0 || rf_col < 0 || (x_col < 0 && excess_col < 0)) {
                throw KappaError(
                    "series header needs date, rf_simple_return (or rf) and log_total_return (or excess_return)");
            }
            continue;
        }
        const int needed = std::max({date_col, x_col, excess_col, rf_col});
        if (static_cast<int>(fields.size()) <= needed) {
            throw KappaError("line " + std::to_string(line_no) + ": too few fields");
        }
        const auto date = parse_iso_date(fields[static_cast<std::size_t>(date_col)]);
        if (!date) {
            throw KappaError("line " + std::to_string(line_no) + ": bad date");
        }
        Observation o;
        o.date = *date;
        o.rf = parse_number(fields[static_cast<std::size_t>(rf_col)], line_no);
        if (x_col >= 0) {
            o.log_return = parse_number(fields[static_cast<std::size_t>(x_col)], line_no);
        } else {
            const double gross = 1.0 + parse_number(fields[static_cast<std::size_t>(excess_col)], line_no) + o.rf;
            if (!(gross > 0.0)) {
                throw KappaError("line " + std::to_string(line_no) + ": total return below -100%");
            }
            o.log_return = std::log(gross);
        }
        series.observations.push_back(o);
    }
    if (!header) {
        throw KappaError("empty return series file");
    }
    series.validate();
    return series;
}

ReturnSeries load_series_csv(const std::filesystem::path& path, Frequency frequency) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw KappaError("cannot open return series " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_series_csv(ss.str(), frequency);
}

double f_kappa(const ReturnSeries& series, double kappa) {
    const auto s = scaled_f(series, kappa);
    return std::exp(s.log_scale) * s.sum;
}

KappaEstimate estimate_kappa(const ReturnSeries& series, double lo, double hi) {
    if (series.observations.size() < 2) {
        throw KappaError("kappa estimation needs at least two observations");
    }
    if (!(lo < hi)) {
        throw KappaError("invalid kappa bracket");
    }
    const bool degenerate = std::all_of(series.observations.begin(), series.observations.end(), [](const auto& o) {
        return std::expm1(o.log_return) - o.rf == 0.0;
    });
    if (degenerate) {
        throw KappaError("every excess return is zero; kappa is not identified");
    }

    KappaEstimate est;
    est.n_obs = series.observations.size();
    est.f_at_zero = f_kappa(series, 0.0);

    auto sign_change = [&](double a, double b) {
        return std::signbit(scaled_f(series, a).sum) != std::signbit(scaled_f(series, b).sum) ||
               scaled_f(series, a).sum == 0.0 || scaled_f(series, b).sum == 0.0;
    };
    if (!sign_change(lo, hi)) {
        const double wide_lo = std::min(lo, -50.0);
        const double wide_hi = std::max(hi, 50.0);
        if (!sign_change(wide_lo, wide_hi)) {
            std::ostringstream msg;
            msg << "f(kappa) has no sign change: f(" << wide_lo << ") = " << f_kappa(series, wide_lo) << ", f("
                << wide_hi << ") = " << f_kappa(series, wide_hi);
            throw KappaError(msg.str());
        }
        lo = wide_lo;
        hi = wide_hi;
    }
    est.bracket = {lo, hi};

    double a = lo;
    double b = hi;
    const bool neg_at_a = std::signbit(scaled_f(series, a).sum);
    for (int it = 0; it < 500; ++it) {
        est.iterations = it + 1;
        const double mid = 0.5 * (a + b);
        const auto s = scaled_f(series, mid);
        if (std::abs(s.sum) <= 1e-10 * s.abs_sum) {
            est.kappa_hat = mid;
            est.converged = true;
            return est;
        }
        if (std::signbit(s.sum) == neg_at_a) {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a < 1e-10) {
            est.kappa_hat = 0.5 * (a + b);
            est.converged = true;
            return est;
        }
    }
    est.kappa_hat = 0.5 * (a + b);
    return est;
}

ReturnSeries aggregate(const ReturnSeries& series, int k, bool overlap) {
    const auto& obs = series.observations;
    if (k < 1) {
        throw KappaError("aggregation block length must be at least 1");
    }
    if (static_cast<std::size_t>(k) > obs.size()) {
        throw KappaError("aggregation block longer than the series");
    }
    ReturnSeries out;
    out.periods_per_year = series.periods_per_year / k;
    const std::size_t m = obs.size();
    const std::size_t uk = static_cast<std::size_t>(k);
    auto block = [&](std::size_t last) {
        Observation o;
        o.date = obs[last].date;
        double growth = 1.0;
        for (std::size_t i = last + 1 - uk; i <= last; ++i) {
            o.log_return += obs[i].log_return;
            growth *= 1.0 + obs[i].rf;
        }
        o.rf = growth - 1.0;
        return o;
    };
    if (overlap) {
        for (std::size_t last = uk - 1; last < m; ++last) out.observations.push_back(block(last));
    } else {
        const std::size_t count = m / uk;
        for (std::size_t j = 0; j < count; ++j) out.observations.push_back(block(m - 1 - (count - 1 - j) * uk));
    }
    return out;
}

namespace {

MeasureMoments weighted_moments(const ReturnSeries& s, const std::vector<double>& weights) {
    const auto& obs = s.observations;
    const double n = static_cast<double>(obs.size());
    MeasureMoments out;
    double mean_x = 0.0;
    double mean_excess = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        mean_x += weights[i] * obs[i].log_return;
        mean_excess += weights[i] * (std::expm1(obs[i].log_return) - obs[i].rf);
    }
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double d = obs[i].log_return - mean_x;
        m2 += weights[i] * d * d;
        m3 += weights[i] * d * d * d;
        m4 += weights[i] * d * d * d * d;
    }
    out.mean_excess_ann_pct = 100.0 * s.periods_per_year * mean_excess;
    const double sample_var = n > 1.0 ? m2 * n / (n - 1.0) : 0.0;
    out.std_ann_pct = 100.0 * std::sqrt(s.periods_per_year * sample_var);
    if (m2 > 1e-24 * std::max(1.0, mean_x * mean_x)) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.kurtosis = m4 / (m2 * m2);
    }
    return out;
}

}  // namespace

MomentReport moment_report(const ReturnSeries& series, double kappa_hat) {
    const auto& obs = series.observations;
    if (obs.empty()) {
        throw KappaError("moment report needs observations");
    }
    const std::size_t n = obs.size();
    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));

    double top = -std::numeric_limits<double>::infinity();
    for (const auto& o : obs) top = std::max(top, -kappa_hat * o.log_return);
    std::vector<double> tilted(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tilted[i] = std::exp(-kappa_hat * obs[i].log_return - top);
        total += tilted[i];
    }
    for (auto& w : tilted) w /= total;

    return {weighted_moments(series, uniform), weighted_moments(series, tilted)};
}

}  // namespace erp::kappa

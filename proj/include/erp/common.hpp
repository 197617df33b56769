#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace erp {

using Date = std::chrono::year_month_day;

enum class OptionKind { Put, Call };

/// AM options settle on the opening print, PM options on the close.
enum class Settlement { AM, PM };

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::optional<Date> parse_iso_date(std::string_view text);
std::string format_date(const Date& d);

/// Whole calendar days from `from` to `to` (negative if `to` is earlier).
int days_between(const Date& from, const Date& to);

char kind_code(OptionKind kind);
std::string_view to_string(Settlement s);

/// Standard normal CDF.
double norm_cdf(double x);

/// Round half away from zero to the nearest cent.
double round_to_cent(double value);

}  // namespace erp

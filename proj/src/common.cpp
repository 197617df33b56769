#include "erp/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace erp {

std::optional<Date> parse_iso_date(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [](std::string_view s, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) || !parse(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int days_between(const Date& from, const Date& to) {
    return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

char kind_code(OptionKind kind) { return kind == OptionKind::Put ? 'P' : 'C'; }

std::string_view to_string(Settlement s) { return s == Settlement::AM ? "AM" : "PM"; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double round_to_cent(double value) {
    // The relative nudge keeps decimal halves such as 0.005 (stored as 0.00499...) rounding up.
    return std::round(value * 100.0 * (1.0 + 1e-12)) / 100.0;
}

}  // namespace erp

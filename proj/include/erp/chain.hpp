#pragma once

#include "erp/common.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace erp::chain {

/// One end-of-day quote. The mid-quote is always derived from bid and ask.
struct QuoteRow {
    std::string root;
    Date expiration;
    double strike = 0.0;
    OptionKind kind = OptionKind::Call;
    double bid = 0.0;
    double ask = 0.0;
    Settlement settlement = Settlement::PM;

    [[nodiscard]] double mid() const { return 0.5 * (bid + ask); }
};

/// All quotes for one (trade date, root, expiration) slice.
///
/// Rows are sorted by strike, puts before calls at equal strikes, and each
/// (strike, kind) appears at most once.
struct OptionChain {
    Date trade_date;
    double quote_time_offset_hours = 0.25;  // hours before the regular session close
    double spot = 0.0;                      // 0 when the file carries no index level
    std::string root;
    Date expiration;
    Settlement settlement = Settlement::PM;
    std::vector<QuoteRow> rows;

    [[nodiscard]] int days_to_expiration() const { return days_between(trade_date, expiration); }
    [[nodiscard]] double tau() const;
};

struct FilterConfig {
    double put_bid_min = 0.05;
    double call_bid_min = 0.05;
    bool oom_only = true;
};

/// Maps logical column names onto the header names of a vendor file.
/// `settlement` and `spot` are optional columns.
struct ColumnSchema {
    std::string trade_date = "trade_date";
    std::string root = "root";
    std::string expiration = "expiration";
    std::string strike = "strike";
    std::string kind = "kind";
    std::string bid = "bid";
    std::string ask = "ask";
    std::string settlement = "settlement";
    std::string spot = "spot";
};

struct RowError {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string message;
};

struct ParseResult {
    std::vector<OptionChain> chains;
    std::vector<RowError> errors;
};

/// Raised for problems that make the whole file unusable (missing columns, empty input).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Raised when an AM contract has already settled relative to the quote time.
class ExpiredContract : public Error {
public:
    using Error::Error;
};

class UnfittableExpiration : public Error {
public:
    using Error::Error;
};

ParseResult parse_chain_text(std::string_view text, const ColumnSchema& schema = {});
ParseResult parse_chain_file(const std::filesystem::path& path, const ColumnSchema& schema = {});

/// Writes chains in the reference schema, with `settlement` and `spot` columns.
void write_chain_csv(std::ostream& out, std::span<const OptionChain> chains);

Settlement infer_settlement(std::string_view root);

/// Year fraction between the quote time and settlement.
///
/// PM: (days + offset/24)/365. AM: (days + (offset - 6.5)/24)/365, since AM
/// contracts settle on the opening print, one regular session (6.5 h) earlier.
double year_fraction(const Date& trade_date, const Date& expiration, Settlement settlement,
                     double quote_time_offset_hours = 0.25);

/// A quote used as a calibration target. `mid` is the fit target; it starts
/// at the mid-quote but may be moved by calendar-arbitrage adjustments.
struct FitQuote {
    double strike = 0.0;
    OptionKind kind = OptionKind::Call;
    double mid = 0.0;
    double bid = 0.0;
    double ask = 0.0;
};

/// Out-of-the-money quotes that pass the bid filters, sorted by strike.
/// Puts for K < spot, calls for K >= spot.
std::vector<FitQuote> select_fit_set(const OptionChain& chain, double spot, const FilterConfig& cfg);

}  // namespace erp::chain

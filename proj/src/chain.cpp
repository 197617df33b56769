#include "erp/chain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

namespace erp::chain {

namespace {

constexpr double kSessionHours = 6.5;

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<OptionKind> parse_kind(std::string_view s) {
    if (s == "P" || s == "p" || s == "Put" || s == "PUT" || s == "put") return OptionKind::Put;
    if (s == "C" || s == "c" || s == "Call" || s == "CALL" || s == "call") return OptionKind::Call;
    return std::nullopt;
}

std::optional<Settlement> parse_settlement(std::string_view s) {
    if (s == "AM" || s == "am") return Settlement::AM;
    if (s == "PM" || s == "pm") return Settlement::PM;
    return std::nullopt;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

using ChainKey = std::tuple<int, unsigned, unsigned, std::string, int, unsigned, unsigned>;

ChainKey make_key(const Date& trade, const std::string& root, const Date& exp) {
    return {static_cast<int>(trade.year()), static_cast<unsigned>(trade.month()),
            static_cast<unsigned>(trade.day()), root, static_cast<int>(exp.year()),
            static_cast<unsigned>(exp.month()), static_cast<unsigned>(exp.day())};
}

}  // namespace

double OptionChain::tau() const {
    return year_fraction(trade_date, expiration, settlement, quote_time_offset_hours);
}

Settlement infer_settlement(std::string_view root) {
    return !root.empty() && (root.back() == 'W' || root.back() == 'w') ? Settlement::PM
                                                                        : Settlement::AM;
}

double year_fraction(const Date& trade_date, const Date& expiration, Settlement settlement,
                     double quote_time_offset_hours) {
    const int days = days_between(trade_date, expiration);
    if (days < 0) {
        throw ExpiredContract("expiration " + format_date(expiration) + " precedes trade date " +
                              format_date(trade_date));
    }
    const double hours = settlement == Settlement::PM ? quote_time_offset_hours
                                                      : quote_time_offset_hours - kSessionHours;
    const double tau = (days + hours / 24.0) / 365.0;
    if (tau <= 0.0) {
        throw ExpiredContract("contract expiring " + format_date(expiration) +
                              " has settled before the quote time");
    }
    return tau;
}

ParseResult parse_chain_text(std::string_view text, const ColumnSchema& schema) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }

    std::vector<std::string_view> lines;
    {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            auto line = text.substr(pos, nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            pos = nl + 1;
        }
    }
    std::size_t header_idx = 0;
    while (header_idx < lines.size() && lines[header_idx].find_first_not_of(" \t") == std::string_view::npos) {
        ++header_idx;
    }
    if (header_idx == lines.size()) {
        throw SchemaError("chain file is empty");
    }

    const auto header = split_csv_line(lines[header_idx]);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };
    auto required = [&](const std::string& name) {
        auto idx = column(name);
        if (!idx) throw SchemaError("missing required column '" + name + "'");
        return *idx;
    };
    const std::size_t c_trade = required(schema.trade_date);
    const std::size_t c_root = required(schema.root);
    const std::size_t c_exp = required(schema.expiration);
    const std::size_t c_strike = required(schema.strike);
    const std::size_t c_kind = required(schema.kind);
    const std::size_t c_bid = required(schema.bid);
    const std::size_t c_ask = required(schema.ask);
    const auto c_settle = column(schema.settlement);
    const auto c_spot = column(schema.spot);

    ParseResult result;
    std::map<ChainKey, OptionChain> groups;
    std::size_t data_rows = 0;

    for (std::size_t li = header_idx + 1; li < lines.size(); ++li) {
        const auto line = lines[li];
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        ++data_rows;
        const std::size_t line_no = li + 1;
        auto fail = [&](std::string msg) { result.errors.push_back({line_no, std::move(msg)}); };

        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
            continue;
        }
        const auto trade = parse_iso_date(f[c_trade]);
        const auto exp = parse_iso_date(f[c_exp]);
        if (!trade || !exp) {
            fail("invalid date");
            continue;
        }
        const auto strike = parse_double(f[c_strike]);
        const auto bid = parse_double(f[c_bid]);
        const auto ask = parse_double(f[c_ask]);
        const auto kind = parse_kind(f[c_kind]);
        if (!strike || !bid || !ask) {
            fail("invalid number");
            continue;
        }
        if (!kind) {
            fail("invalid option kind '" + f[c_kind] + "'");
            continue;
        }
        if (*strike <= 0.0) {
            fail("strike must be positive");
            continue;
        }
        if (*bid < 0.0 || *ask < 0.0) {
            fail("negative quote");
            continue;
        }
        if (*ask < *bid) {
            fail("ask below bid");
            continue;
        }
        if (f[c_root].empty()) {
            fail("empty root");
            continue;
        }
        Settlement settlement = infer_settlement(f[c_root]);
        if (c_settle && !f[*c_settle].empty()) {
            const auto s = parse_settlement(f[*c_settle]);
            if (!s) {
                fail("invalid settlement '" + f[*c_settle] + "'");
                continue;
            }
            settlement = *s;
        }
        double spot = 0.0;
        if (c_spot && !f[*c_spot].empty()) {
            const auto s = parse_double(f[*c_spot]);
            if (!s || *s <= 0.0) {
                fail("invalid spot");
                continue;
            }
            spot = *s;
        }

        const auto key = make_key(*trade, f[c_root], *exp);
        auto [it, inserted] = groups.try_emplace(key);
        OptionChain& chain = it->second;
        if (inserted) {
            chain.trade_date = *trade;
            chain.root = f[c_root];
            chain.expiration = *exp;
            chain.settlement = settlement;
            chain.spot = spot;
        } else if (chain.settlement != settlement) {
            fail("settlement differs from earlier rows of the same expiration");
            continue;
        }
        if (chain.spot == 0.0) chain.spot = spot;

        const bool duplicate = std::any_of(chain.rows.begin(), chain.rows.end(), [&](const QuoteRow& r) {
            return r.strike == *strike && r.kind == *kind;
        });
        if (duplicate) {
            fail("duplicate quote for strike " + f[c_strike]);
            continue;
        }
        chain.rows.push_back({f[c_root], *exp, *strike, *kind, *bid, *ask, settlement});
    }

    if (data_rows == 0) {
        throw SchemaError("chain file has no data rows");
    }

    for (auto& [key, chain] : groups) {
        std::sort(chain.rows.begin(), chain.rows.end(), [](const QuoteRow& a, const QuoteRow& b) {
            if (a.strike != b.strike) return a.strike < b.strike;
            return a.kind == OptionKind::Put && b.kind == OptionKind::Call;
        });
        result.chains.push_back(std::move(chain));
    }
    return result;
}

ParseResult parse_chain_file(const std::filesystem::path& path, const ColumnSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot open chain file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_chain_text(ss.str(), schema);
}

void write_chain_csv(std::ostream& out, std::span<const OptionChain> chains) {
    out << "trade_date,root,expiration,strike,kind,bid,ask,settlement,spot\n";
    for (const auto& chain : chains) {
        for (const auto& row : chain.rows) {
            out << format_date(chain.trade_date) << ',' << row.root << ',' << format_date(row.expiration) << ','
                << format_number(row.strike) << ',' << kind_code(row.kind) << ',' << format_number(row.bid) << ','
                << format_number(row.ask) << ',' << to_string(row.settlement) << ','
                << (chain.spot > 0.0 ? format_number(chain.spot) : std::string{}) << '\n';
        }
    }
}

std::vector<FitQuote> select_fit_set(const OptionChain& chain, double spot, const FilterConfig& cfg) {
    if (chain.rows.empty()) {
        throw UnfittableExpiration("chain " + chain.root + " " + format_date(chain.expiration) + " has no quotes");
    }
    std::vector<FitQuote> out;
    for (const auto& row : chain.rows) {
        if (row.bid <= 0.0) continue;
        const bool otm = row.kind == OptionKind::Put ? row.strike < spot : row.strike >= spot;
        if (cfg.oom_only && !otm) continue;
        const double min_bid = row.kind == OptionKind::Put ? cfg.put_bid_min : cfg.call_bid_min;
        if (row.bid < min_bid) continue;
        out.push_back({row.strike, row.kind, row.mid(), row.bid, row.ask});
    }
    if (out.empty()) {
        throw UnfittableExpiration("no quotes left after filtering for " + chain.root + " " +
                                   format_date(chain.expiration));
    }
    return out;
}

}  // namespace erp::chain

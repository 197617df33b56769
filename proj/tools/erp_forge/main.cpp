// erp-forge: carry, density fits, risk-premium term structures, kappa
// estimation, calendar-arbitrage repair and smile export.

#include "report.hpp"

#include "erp/calarb.hpp"
#include "erp/carry.hpp"
#include "erp/chain.hpp"
#include "erp/gmm.hpp"
#include "erp/json_io.hpp"
#include "erp/kappa.hpp"
#include "erp/measure.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string output_dir = ".";
    std::string format = "csv";
    double quote_offset_hours = 0.25;
    bool with_runtime = false;
};

struct ChainOptions {
    std::string chains;
    std::string curve;
    std::string carry = "vixwp";
    std::optional<double> spot;
    int n_components = 4;
    double put_bid_min = 0.05;
    double precision_goal = 1e-5;
    int max_iterations = 250;
    int multistart = 8;
    double kappa = 3.0;
    double kappa_band = 0.5;
    bool drop_weak = false;
};

struct KappaOptions {
    std::string series;
    std::string frequency;
    int aggregate = 1;
    bool overlap = false;
    std::vector<std::string> starts;
};

struct CalarbOptions {
    std::string side = "both";
};

struct SmileOptions {
    std::string expiration;
    std::string root;
    int grid_points = 101;
    double grid_width = 6.0;
};

void add_chain_options(CLI::App* cmd, ChainOptions& o, bool fit_options) {
    cmd->add_option("--chains", o.chains, "option-chain CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--curve", o.curve, "yield curve CSV (tenor_years,rate_pct)")->check(CLI::ExistingFile);
    cmd->add_option("--spot", o.spot, "index level overriding the file's spot column")->check(CLI::PositiveNumber);
    if (!fit_options) return;
    cmd->add_option("--carry", o.carry, "carry method")->check(CLI::IsMember({"vixwp", "pcp"}));
    cmd->add_option("--n-components", o.n_components, "mixture components")->check(CLI::Range(1, 12));
    cmd->add_option("--put-bid-min", o.put_bid_min, "minimum put bid kept in the fit set")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--precision-goal", o.precision_goal, "relative objective tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iterations", o.max_iterations, "optimizer iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--multistart", o.multistart, "optimizer starts per expiration")->check(CLI::PositiveNumber);
    cmd->add_option("--kappa", o.kappa, "risk-aversion (tilt) parameter");
    cmd->add_option("--kappa-band", o.kappa_band, "half-width of the kappa band")->check(CLI::NonNegativeNumber);
}

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Context {
    GlobalOptions global;
    std::vector<std::string> argv;
    fs::path out_dir;
};

erp::measure::PipelineConfig pipeline_config(const ChainOptions& o, const GlobalOptions& g, forge::Manifest& m) {
    erp::measure::PipelineConfig cfg;
    cfg.filter.put_bid_min = o.put_bid_min;
    cfg.fit.n_components = o.n_components;
    cfg.fit.precision_goal = o.precision_goal;
    cfg.fit.max_iterations = o.max_iterations;
    cfg.fit.multistart_count = o.multistart;
    cfg.fit.seed = g.seed;
    cfg.carry_method = o.carry == "pcp" ? erp::carry::CarryMethod::PcpRegression
                                        : erp::carry::CarryMethod::VixWhitePaper;
    cfg.kappa = o.kappa;
    cfg.halfwidth = o.kappa_band;
    cfg.jobs = g.jobs;
    cfg.drop_weak = o.drop_weak;
    if (!o.curve.empty()) {
        cfg.curve = erp::carry::YieldCurve::load_csv(o.curve);
        m.input(o.curve);
    } else if (cfg.carry_method == erp::carry::CarryMethod::VixWhitePaper) {
        throw UsageError("--curve is required with the vixwp carry method");
    }
    m.config("carry", o.carry);
    m.config("n_components", o.n_components);
    m.config("put_bid_min", o.put_bid_min);
    m.config("call_bid_min", cfg.filter.call_bid_min);
    m.config("precision_goal", o.precision_goal);
    m.config("max_iterations", o.max_iterations);
    m.config("multistart", o.multistart);
    m.config("kappa", o.kappa);
    m.config("kappa_band", o.kappa_band);
    m.config("drop_weak", o.drop_weak);
    return cfg;
}

std::vector<erp::chain::OptionChain> load_chains(const ChainOptions& o, const GlobalOptions& g, forge::Manifest& m) {
    m.input(o.chains);
    m.config("quote_offset_hours", g.quote_offset_hours);
    if (o.spot) m.config("spot", *o.spot);
    auto parsed = erp::chain::parse_chain_file(o.chains);
    for (const auto& e : parsed.errors) {
        const std::string msg = o.chains + ":" + std::to_string(e.line) + ": " + e.message;
        std::cerr << "warning: " << msg << '\n';
        m.warning(msg);
    }
    for (auto& ch : parsed.chains) {
        ch.quote_time_offset_hours = g.quote_offset_hours;
        if (o.spot) ch.spot = *o.spot;
    }
    return std::move(parsed.chains);
}

std::string ext(const GlobalOptions& g) { return g.format == "json" ? ".json" : ".csv"; }

std::string pct(double v) { return forge::num(100.0 * v, 4); }

// ---------------------------------------------------------------------------

int cmd_carry(Context& ctx, const ChainOptions& o) {
    forge::Manifest m("carry", ctx.argv);
    if (o.curve.empty()) throw UsageError("--curve is required for carry estimates");
    const auto curve = erp::carry::YieldCurve::load_csv(o.curve);
    m.input(o.curve);
    const auto chains = load_chains(o, ctx.global, m);

    forge::Csv csv({"trade_date", "root", "expiration", "settlement", "days", "tau", "spot", "vixwp_r_pct",
                    "vixwp_delta_pct", "vixwp_forward", "pcp_r_pct", "pcp_delta_pct", "pcp_forward",
                    "pcp_one_minus_r2"});
    ordered_json rows = ordered_json::array();
    for (const auto& ch : chains) {
        const std::string exp = erp::format_date(ch.expiration);
        std::vector<std::string> cells{erp::format_date(ch.trade_date), ch.root, exp,
                                       std::string(erp::to_string(ch.settlement)), std::to_string(ch.days_to_expiration())};
        ordered_json row{{"trade_date", cells[0]}, {"root", ch.root}, {"expiration", exp}};
        std::string problems;
        try {
            if (!(ch.spot > 0.0)) throw erp::Error("no spot level");
            const double tau = ch.tau();
            cells.push_back(forge::num(tau, 5));
            cells.push_back(forge::num(ch.spot, 2));
            try {
                const auto c = erp::carry::carry_vixwp(ch, ch.spot, tau, curve);
                cells.insert(cells.end(), {pct(c.r), pct(c.delta), forge::num(c.forward, 4)});
                row["vixwp"] = erp::json_io::to_json(c);
            } catch (const erp::Error& e) {
                cells.insert(cells.end(), {"NA", "NA", "NA"});
                problems += std::string("vixwp: ") + e.what() + "; ";
            }
            try {
                const auto reg = erp::carry::carry_pcp_regression(ch, ch.spot, tau);
                cells.insert(cells.end(), {pct(reg.carry.r), pct(reg.carry.delta), forge::num(reg.carry.forward, 4),
                                           forge::num(1.0 - reg.r_squared, 12)});
                row["pcp_regression"] = erp::json_io::to_json(reg.carry);
                row["pcp_regression"]["r_squared"] = reg.r_squared;
            } catch (const erp::Error& e) {
                cells.insert(cells.end(), {"NA", "NA", "NA", "NA"});
                problems += std::string("pcp: ") + e.what() + "; ";
            }
        } catch (const erp::Error& e) {
            cells.resize(5);
            cells.insert(cells.end(), 9, "NA");
            problems += e.what();
        }
        csv.row(cells);
        rows.push_back(row);
        m.outcome(ch.root, exp, problems.empty() ? "ok" : "failed", problems);
    }
    m.write_output(ctx.out_dir, "carry" + ext(ctx.global),
                   ctx.global.format == "json" ? rows.dump(2) + "\n" : csv.text());
    m.save(ctx.out_dir);
    return m.failures() ? kExitPartial : kExitOk;
}

int cmd_fit_or_erp(Context& ctx, const ChainOptions& o, bool erp_table) {
    forge::Manifest m(erp_table ? "erp" : "fit", ctx.argv);
    auto cfg = pipeline_config(o, ctx.global, m);
    const auto chains = load_chains(o, ctx.global, m);
    const auto t0 = std::chrono::steady_clock::now();
    const auto ts = erp::measure::pipeline_erp(chains, cfg);
    m.timing("pipeline", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    for (const auto& p : ts.points) {
        m.outcome(p.fitted.root, erp::format_date(p.fitted.expiration), "ok");
        m.timing(p.fitted.root + " " + erp::format_date(p.fitted.expiration), p.fitted.runtime_seconds);
    }
    for (const auto& f : ts.failures) {
        m.outcome(f.root, erp::format_date(f.expiration), "failed", f.message);
        std::cerr << "warning: " << f.root << ' ' << erp::format_date(f.expiration) << ": " << f.message << '\n';
    }

    std::string body;
    if (ctx.global.format == "json") {
        auto doc = erp::json_io::to_json(ts);
        if (ctx.global.with_runtime) {
            for (std::size_t i = 0; i < ts.points.size(); ++i) {
                doc["points"][i]["runtime_s"] = ts.points[i].fitted.runtime_seconds;
            }
        }
        body = doc.dump(2) + "\n";
    } else if (erp_table) {
        forge::Csv csv({"root", "expiration", "days", "tau", "erp_low", "erp_mid", "erp_high", "grade"});
        for (const auto& p : ts.points) {
            csv.row({p.fitted.root, erp::format_date(p.fitted.expiration), std::to_string(p.fitted.days),
                     forge::num(p.fitted.tau, 5), forge::num(p.band.low, 4), forge::num(p.band.mid, 4),
                     forge::num(p.band.high, 4), std::string(1, erp::gmm::grade_code(p.grade()))});
        }
        body = csv.text();
    } else {
        std::vector<std::string> header{"root", "expiration", "days", "tau", "put_bid_min", "n", "n_opts",
                                        "out_count", "out_worst", "grade", "converged", "iterations", "objective",
                                        "erp"};
        if (ctx.global.with_runtime) header.push_back("runtime_s");
        forge::Csv csv(header);
        for (const auto& p : ts.points) {
            const auto& r = p.fitted.report;
            std::vector<std::string> cells{p.fitted.root,
                                           erp::format_date(p.fitted.expiration),
                                           std::to_string(p.fitted.days),
                                           forge::num(p.fitted.tau, 5),
                                           forge::num(o.put_bid_min, 2),
                                           std::to_string(r.density.size()),
                                           std::to_string(r.n_opts),
                                           std::to_string(r.out_stats.n_outside),
                                           forge::num(r.out_stats.worst_error, 2),
                                           std::string(1, erp::gmm::grade_code(r.grade)),
                                           r.converged ? "yes" : "no",
                                           std::to_string(r.iterations),
                                           forge::num(r.objective_value, 12),
                                           forge::num(p.band.mid, 4)};
            if (ctx.global.with_runtime) cells.push_back(forge::num(p.fitted.runtime_seconds, 3));
            csv.row(cells);
        }
        body = csv.text();
    }
    m.write_output(ctx.out_dir, (erp_table ? "erp_term_structure" : "fit") + ext(ctx.global), body);
    m.save(ctx.out_dir);
    if (ts.points.empty()) {
        std::cerr << "error: every expiration failed\n";
    }
    return m.failures() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

std::vector<std::string> moment_cells(const erp::kappa::MeasureMoments& mm) {
    auto opt = [](const std::optional<double>& v) { return v ? forge::num(*v, 4) : std::string("NA"); };
    return {forge::num(mm.mean_excess_ann_pct, 4), forge::num(mm.std_ann_pct, 4), opt(mm.skewness), opt(mm.kurtosis)};
}

int cmd_kappa(Context& ctx, const KappaOptions& o) {
    forge::Manifest m("kappa", ctx.argv);
    const auto freq = erp::kappa::parse_frequency(o.frequency);
    if (!freq) throw UsageError("unknown frequency '" + o.frequency + "'");
    m.input(o.series);
    m.config("frequency", o.frequency);
    m.config("aggregate", o.aggregate);
    m.config("overlap", o.overlap);
    const auto series = erp::kappa::load_series_csv(o.series, *freq);
    if (series.observations.empty()) throw UsageError("return series is empty");

    std::vector<erp::Date> starts;
    for (const auto& s : o.starts) {
        const auto d = erp::parse_iso_date(s);
        if (!d) throw UsageError("bad --start date '" + s + "'");
        starts.push_back(*d);
    }
    if (starts.empty()) starts.push_back(series.observations.front().date);

    forge::Csv csv({"start", "end", "n_obs", "kappa_hat", "true_mean_excess", "true_std", "true_skew", "true_kurt",
                    "rn_mean_excess", "rn_std", "rn_skew", "rn_kurt"});
    ordered_json rows = ordered_json::array();
    for (const auto& start : starts) {
        erp::kappa::ReturnSeries sub;
        sub.periods_per_year = series.periods_per_year;
        for (const auto& obs : series.observations) {
            if (!(obs.date < start)) sub.observations.push_back(obs);
        }
        const std::string label = erp::format_date(start);
        try {
            const auto agg = erp::kappa::aggregate(sub, o.aggregate, o.overlap);
            const auto est = erp::kappa::estimate_kappa(agg);
            const auto mom = erp::kappa::moment_report(agg, est.kappa_hat);
            std::vector<std::string> cells{erp::format_date(agg.observations.front().date),
                                           erp::format_date(agg.observations.back().date),
                                           std::to_string(est.n_obs), forge::num(est.kappa_hat, 4)};
            for (const auto& c : moment_cells(mom.real_world)) cells.push_back(c);
            for (const auto& c : moment_cells(mom.risk_neutral)) cells.push_back(c);
            csv.row(cells);
            rows.push_back({{"start", cells[0]},
                            {"end", cells[1]},
                            {"estimate", erp::json_io::to_json(est)},
                            {"moments", erp::json_io::to_json(mom)}});
            m.outcome("series", label, "ok");
        } catch (const erp::Error& e) {
            std::cerr << "warning: start " << label << ": " << e.what() << '\n';
            m.outcome("series", label, "failed", e.what());
        }
    }
    m.write_output(ctx.out_dir, "kappa" + ext(ctx.global),
                   ctx.global.format == "json" ? rows.dump(2) + "\n" : csv.text());
    m.save(ctx.out_dir);
    return m.failures() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_calarb(Context& ctx, const ChainOptions& o, const CalarbOptions& co) {
    forge::Manifest m("calarb", ctx.argv);
    const auto cfg = pipeline_config(o, ctx.global, m);
    m.config("side", co.side);
    const auto chains = load_chains(o, ctx.global, m);

    struct Legs {
        const erp::chain::OptionChain* am = nullptr;
        const erp::chain::OptionChain* pm = nullptr;
    };
    std::map<std::pair<std::string, std::string>, Legs> pairs;
    for (const auto& ch : chains) {
        auto& legs = pairs[{erp::format_date(ch.trade_date), erp::format_date(ch.expiration)}];
        auto*& slot = ch.settlement == erp::Settlement::AM ? legs.am : legs.pm;
        if (!slot) slot = &ch;
    }

    forge::Csv violations({"trade_date", "expiration", "strike", "kind", "am_price", "pm_price", "magnitude",
                           "source", "scenario"});
    forge::Csv erp_csv({"trade_date", "expiration", "leg", "root", "erp_before", "erp_raise_pm", "erp_lower_am",
                        "erp_final", "repaired"});
    ordered_json doc = ordered_json::array();
    erp::calarb::RepairConfig rc;
    rc.fit = cfg.fit;
    rc.kappa = cfg.kappa;

    int n_pairs = 0;
    for (const auto& [key, legs] : pairs) {
        if (!legs.am || !legs.pm) continue;
        ++n_pairs;
        const auto& [trade, exp] = key;
        try {
            const auto pair = erp::calarb::make_dual_pair(*legs.am, *legs.pm, cfg);
            const auto res = erp::calarb::repair_pair(pair, rc);
            auto add = [&](const std::vector<erp::calarb::ArbViolation>& list, const std::string& scenario) {
                for (const auto& v : list) {
                    violations.row({trade, exp, forge::num(v.strike, 2), std::string(1, erp::kind_code(v.kind)),
                                    forge::num(v.am_price, 6), forge::num(v.pm_price, 6), forge::num(v.magnitude, 6),
                                    std::string(erp::calarb::to_string(v.source)), scenario});
                }
            };
            add(res.data_violations, "original");
            add(res.residual_raise, "raise_pm");
            add(res.residual_lower, "lower_am");

            auto final_of = [&](const erp::calarb::LegErp& leg) {
                if (co.side == "raise_pm") return leg.raise_scenario;
                if (co.side == "lower_am") return leg.lower_scenario;
                return leg.final_erp;
            };
            const bool repaired = co.side == "raise_pm"   ? res.residual_raise.empty()
                                  : co.side == "lower_am" ? res.residual_lower.empty()
                                                          : res.repaired;
            for (const auto& [name, root, leg] :
                 {std::tuple{"AM", legs.am->root, res.am}, std::tuple{"PM", legs.pm->root, res.pm}}) {
                erp_csv.row({trade, exp, name, root, forge::num(leg.before, 4), forge::num(leg.raise_scenario, 4),
                             forge::num(leg.lower_scenario, 4), forge::num(final_of(leg), 4),
                             repaired ? "yes" : "no"});
            }
            ordered_json j{{"trade_date", trade},
                           {"expiration", exp},
                           {"am_carry_aligned", erp::json_io::to_json(res.am_carry_aligned)},
                           {"data_violations", ordered_json::array()},
                           {"adjustment_warnings", ordered_json::array()},
                           {"repaired", repaired}};
            for (const auto& v : res.data_violations) j["data_violations"].push_back(erp::json_io::to_json(v));
            for (const auto* adj : {&res.raised, &res.lowered}) {
                for (const auto& w : adj->warnings) {
                    j["adjustment_warnings"].push_back(w);
                    m.warning(exp + ": " + w);
                }
            }
            doc.push_back(std::move(j));
            m.outcome(legs.am->root + "/" + legs.pm->root, exp, repaired ? "ok" : "failed",
                      repaired ? "" : "model violations remain after adjustment");
        } catch (const erp::Error& e) {
            std::cerr << "warning: pair " << exp << ": " << e.what() << '\n';
            m.outcome(legs.am->root + "/" + legs.pm->root, exp, "failed", e.what());
        }
    }
    if (n_pairs == 0) {
        m.warning("no dual AM/PM expirations found");
        std::cerr << "warning: no dual AM/PM expirations found\n";
    }
    m.config("note", "OutStats use the original quotes even where fit targets were adjusted");
    if (ctx.global.format == "json") {
        m.write_output(ctx.out_dir, "calarb.json", doc.dump(2) + "\n");
    } else {
        m.write_output(ctx.out_dir, "calarb_violations.csv", violations.text());
        m.write_output(ctx.out_dir, "calarb_erp.csv", erp_csv.text());
    }
    m.save(ctx.out_dir);
    return m.failures() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_smile(Context& ctx, const ChainOptions& o, const SmileOptions& so) {
    forge::Manifest m("smile", ctx.argv);
    const auto cfg = pipeline_config(o, ctx.global, m);
    m.config("grid_points", so.grid_points);
    m.config("grid_width", so.grid_width);
    auto chains = load_chains(o, ctx.global, m);
    std::erase_if(chains, [&](const erp::chain::OptionChain& ch) {
        return (!so.expiration.empty() && erp::format_date(ch.expiration) != so.expiration) ||
               (!so.root.empty() && ch.root != so.root);
    });
    if (chains.empty()) throw UsageError("no chain matches the --expiration/--root selection");

    forge::Csv smile({"root", "expiration", "strike", "kind", "model_price", "model_iv", "market_iv"});
    forge::Csv grid({"root", "expiration", "moneyness", "q", "p", "q_minus_p"});
    ordered_json doc = ordered_json::array();
    for (const auto& ch : chains) {
        const std::string exp = erp::format_date(ch.expiration);
        try {
            const auto fitted = erp::measure::fit_expiration(ch, cfg);
            const auto& d = fitted.report.density;
            std::map<double, double> market;
            for (const auto& q : fitted.quotes) {
                try {
                    market[q.strike] = erp::measure::implied_vol(q.mid, q.strike, fitted.carry, q.kind);
                } catch (const erp::Error&) {
                }
            }
            std::vector<double> strikes = erp::measure::log_strike_grid(
                fitted.spot, so.grid_width * d.sigma_max() * std::sqrt(d.tau()), so.grid_points);
            for (const auto& q : fitted.quotes) strikes.push_back(q.strike);
            std::sort(strikes.begin(), strikes.end());
            strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());
            const auto curve = erp::measure::smile_curve(d, fitted.spot, fitted.carry, strikes);
            ordered_json j{{"root", ch.root}, {"expiration", exp}, {"smile", ordered_json::array()},
                           {"density_grid", ordered_json::array()}};
            for (const auto& pt : curve) {
                auto it = market.find(pt.strike);
                const double mkt = it == market.end() ? std::nan("") : it->second;
                smile.row({ch.root, exp, forge::num(pt.strike, 4), std::string(1, erp::kind_code(pt.kind)),
                           forge::num(pt.price, 8), forge::num(pt.iv, 6), forge::num(mkt, 6)});
                j["smile"].push_back({{"strike", pt.strike},
                                      {"kind", std::string(1, erp::kind_code(pt.kind))},
                                      {"model_price", pt.price},
                                      {"model_iv", std::isfinite(pt.iv) ? ordered_json(pt.iv) : ordered_json()},
                                      {"market_iv", std::isfinite(mkt) ? ordered_json(mkt) : ordered_json()}});
            }
            const auto q = fitted.q_price();
            const auto p = erp::measure::tilt(q, cfg.kappa, erp::measure::TiltDirection::QtoP);
            const auto mgrid = erp::measure::default_moneyness_grid(q, p);
            for (const auto& row : erp::measure::density_grids(q, p, mgrid)) {
                grid.row({ch.root, exp, forge::num(row.moneyness, 6), forge::num(row.q, 8), forge::num(row.p, 8),
                          forge::num(row.diff, 8)});
                j["density_grid"].push_back({{"moneyness", row.moneyness}, {"q", row.q}, {"p", row.p}});
            }
            doc.push_back(std::move(j));
            m.outcome(ch.root, exp, "ok");
        } catch (const erp::Error& e) {
            std::cerr << "warning: " << ch.root << ' ' << exp << ": " << e.what() << '\n';
            m.outcome(ch.root, exp, "failed", e.what());
        }
    }
    if (ctx.global.format == "json") {
        m.write_output(ctx.out_dir, "smile.json", doc.dump(2) + "\n");
    } else {
        m.write_output(ctx.out_dir, "smile.csv", smile.text());
        m.write_output(ctx.out_dir, "density_grid.csv", grid.text());
    }
    m.save(ctx.out_dir);
    return m.failures() ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equity risk premium term structures from index option chains"};
    app.require_subcommand(1);
    Context ctx;
    ctx.argv.assign(argv, argv + argc);
    auto& g = ctx.global;
    app.add_option("--seed", g.seed, "random seed for optimizer starts");
    app.add_option("--jobs", g.jobs, "parallel expirations")->check(CLI::PositiveNumber);
    app.add_option("--output-dir", g.output_dir, "directory for result files and manifest.json");
    app.add_option("--format", g.format, "result format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--quote-offset-hours", g.quote_offset_hours, "quote time, hours before the close")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--with-runtime", g.with_runtime, "include wall-clock runtime columns in fit results");

    ChainOptions carry_o;
    auto* carry = app.add_subcommand("carry", "rates, dividend yields and forwards by both methods");
    add_chain_options(carry, carry_o, false);

    ChainOptions fit_o;
    auto* fit = app.add_subcommand("fit", "per-expiration mixture fits with OutStats grades");
    add_chain_options(fit, fit_o, true);

    ChainOptions erp_o;
    auto* erp_cmd = app.add_subcommand("erp", "risk-premium term structure with a kappa band");
    add_chain_options(erp_cmd, erp_o, true);
    erp_cmd->add_flag("--drop-weak", erp_o.drop_weak, "exclude grade-W fits from the term structure");

    KappaOptions kappa_o;
    auto* kappa = app.add_subcommand("kappa", "estimate the risk-aversion parameter from a return series");
    kappa->add_option("--series", kappa_o.series, "return series CSV")->required()->check(CLI::ExistingFile);
    kappa->add_option("--frequency", kappa_o.frequency, "daily|monthly|quarterly|semiannual|annual")->required();
    kappa->add_option("--aggregate", kappa_o.aggregate, "periods per aggregated block")->check(CLI::PositiveNumber);
    kappa->add_flag("--overlap", kappa_o.overlap, "overlapping blocks");
    kappa->add_option("--start", kappa_o.starts, "sample start date (repeatable, one row each)");

    ChainOptions calarb_o;
    CalarbOptions calarb_co;
    auto* calarb = app.add_subcommand("calarb", "calendar-arbitrage detection and repair for dual expirations");
    add_chain_options(calarb, calarb_o, true);
    calarb->add_option("--side", calarb_co.side, "adjustment direction")
        ->check(CLI::IsMember({"raise_pm", "lower_am", "both"}));

    ChainOptions smile_o;
    SmileOptions smile_so;
    auto* smile = app.add_subcommand("smile", "model smiles and Q/P density grids");
    add_chain_options(smile, smile_o, true);
    smile->add_option("--expiration", smile_so.expiration, "only this expiration (YYYY-MM-DD)");
    smile->add_option("--root", smile_so.root, "only this root symbol");
    smile->add_option("--grid-points", smile_so.grid_points, "extended strike grid size")->check(CLI::Range(2, 100000));
    smile->add_option("--grid-width", smile_so.grid_width, "grid half-width in units of sigma_max*sqrt(tau)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        ctx.out_dir = g.output_dir;
        fs::create_directories(ctx.out_dir);
        if (*carry) return cmd_carry(ctx, carry_o);
        if (*fit) return cmd_fit_or_erp(ctx, fit_o, false);
        if (*erp_cmd) return cmd_fit_or_erp(ctx, erp_o, true);
        if (*kappa) return cmd_kappa(ctx, kappa_o);
        if (*calarb) return cmd_calarb(ctx, calarb_o, calarb_co);
        if (*smile) return cmd_smile(ctx, smile_o, smile_so);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const forge::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const erp::chain::SchemaError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const erp::carry::CarryError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const erp::kappa::KappaError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const erp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPartial;
    }
    return kExitUsage;
}

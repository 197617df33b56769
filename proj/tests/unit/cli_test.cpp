#include "erp/chain.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace erp;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("erp_forge_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(ERP_FORGE_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli exit codes for usage and input errors") {
    TempDir tmp;
    const auto log = tmp.path / "log.txt";
    CHECK(run("", log) == 2);
    CHECK(run("--help", log) == 0);
    CHECK(run("kappa --series " + (tmp.path / "missing.csv").string() + " --frequency monthly", log) == 2);

    std::ofstream(tmp.path / "bad.csv") << "date,foo\n1990-01-31,1\n";
    CHECK(run("--output-dir " + (tmp.path / "out").string() + " kappa --frequency monthly --series " +
                  (tmp.path / "bad.csv").string(),
              log) == 2);

    std::ofstream(tmp.path / "chains.csv") << "trade_date,root\n2018-02-07,SPX\n";
    CHECK(run("--output-dir " + (tmp.path / "out").string() + " fit --carry pcp --chains " +
                  (tmp.path / "chains.csv").string(),
              log) == 2);
}

TEST_CASE("cli kappa writes results and a manifest") {
    TempDir tmp;
    {
        std::ofstream s(tmp.path / "series.csv");
        s << "date,log_total_return,rf_simple_return\n";
        auto d = synth::date(2000, 1, 31);
        for (int i = 0; i < 48; ++i) {
            s << format_date(d) << ',' << (i % 3 == 0 ? -0.04 : 0.03) << ",0.001\n";
            d = synth::add_days(d, 30);
        }
    }
    const auto out = tmp.path / "out";
    REQUIRE(run("--output-dir " + out.string() + " kappa --frequency monthly --series " +
                    (tmp.path / "series.csv").string() + " --start 2000-01-01 --start 2001-01-01",
                tmp.path / "log.txt") == 0);
    const auto csv = slurp(out / "kappa.csv");
    CHECK(csv.find("kappa_hat") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.contains("outputs"));
    CHECK(manifest.dump().find("kappa.csv") != std::string::npos);
}

TEST_CASE("cli reports a partial failure with exit code 1") {
    TempDir tmp;
    const double spot = 2700.0;
    const auto trade = synth::date(2018, 2, 7);
    const auto exp = synth::add_days(trade, 30);
    const double tau = chain::year_fraction(trade, exp, Settlement::PM, 0.25);
    const auto c = carry::CarryParams::from_rates(spot, 0.02, 0.015, tau, carry::CarryMethod::PcpRegression);
    const auto d = synth::martingale_density({{0.8, 0.1, 0.12}, {0.2, -0.5, 0.3}}, tau, 0.02, 0.015);
    std::vector<chain::OptionChain> chains{synth::make_chain(d, spot, c, synth::strike_ladder(c.forward, 0.04, 30),
                                                             "SPXW", trade, exp, Settlement::PM)};
    // Only one strike: no put-call regression is possible.
    chains.push_back(synth::make_chain(d, spot, c, {2700.0}, "SPXW", trade, synth::add_days(exp, 7),
                                       Settlement::PM));
    {
        std::ofstream f(tmp.path / "chains.csv");
        chain::write_chain_csv(f, chains);
    }
    const auto out = tmp.path / "out";
    CHECK(run("--output-dir " + out.string() + " fit --carry pcp --n-components 2 --multistart 2 --chains " +
                  (tmp.path / "chains.csv").string(),
              tmp.path / "log.txt") == 1);
    const auto csv = slurp(out / "fit.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sectoral/cli.hpp"
#include "sectoral/ingest.hpp"

using namespace sectoral;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{SECTORAL_FIXTURES};

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "sectoral_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string fixture(const char* name)
{
    return (kFixtures / name).string();
}

} // namespace

TEST_SUITE("cli.general") {

TEST_CASE("help and bad usage")
{
    CHECK(run({"--help"}).code == cli::kExitOk);
    CHECK(run({"fit", "--help"}).code == cli::kExitOk);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"classify", "--k1", "1", "--bogus"}).code == cli::kExitUsage);
    CHECK(run({"simulate", "--k1", "x", "--k2", "1", "--alpha", "0.5"}).code == cli::kExitUsage);
}

}

TEST_SUITE("cli.fit") {

TEST_CASE("bundled three-country fixture")
{
    const fs::path out = scratch("fit.csv");
    const Run r = run({"fit", fixture("synthetic_three.csv"), "--out", out.string(), "--jobs", "1"});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("accepted: 3\n") != std::string::npos);
    CHECK(r.out.find("types: 1:1 2:1 3:1\n") != std::string::npos);

    const auto results = read_results(out, OutputFormat::Csv);
    REQUIRE(results.size() == 3);
    for (const auto& fr : results)
        CHECK(fr.accepted);
    CHECK(results[0].code == "FIN");
    CHECK(std::abs(results[0].params.k2 - 0.35) < 1e-6);
}

TEST_CASE("json output by extension")
{
    const fs::path out = scratch("fit.json");
    REQUIRE(run({"fit", fixture("synthetic_three.csv"), "--out", out.string(), "--max-evals", "3000"}).code ==
            cli::kExitOk);
    const auto results = read_results(out, OutputFormat::Json);
    CHECK(results.size() == 3);
}

TEST_CASE("missing input path")
{
    const Run r = run({"fit", "/no/such/file.csv", "--out", scratch("x.csv").string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("/no/such/file.csv") != std::string::npos);
}

TEST_CASE("zero threshold accepts nothing")
{
    const Run r = run({"fit", fixture("synthetic_three.csv"), "--out", scratch("t0.csv").string(), "--threshold", "0",
                       "--max-evals", "2000"});
    CHECK(r.code == cli::kExitNoneAccepted);
    CHECK(r.out.find("accepted: 0\n") != std::string::npos);
    CHECK(r.out.find("fitted: 3\n") != std::string::npos);
}

TEST_CASE("rules fixture reports ineligible countries without failing")
{
    const Run r = run({"fit", fixture("ingest_rules.csv"), "--out", scratch("rules.csv").string(), "--max-evals",
                       "2000", "--first-year", "1990", "--last-year", "2000"});
    CHECK(r.out.find("countries: 4\n") != std::string::npos);
    CHECK(r.out.find("eligible: 3\n") != std::string::npos);
    CHECK(r.err.find("SP.POP.TOTL") != std::string::npos);
}

TEST_CASE("invalid bounds")
{
    const Run r = run({"fit", fixture("synthetic_three.csv"), "--out", scratch("b.csv").string(), "--k2-bounds", "1",
                       "-1"});
    CHECK(r.code == cli::kExitUsage);
}

}

TEST_SUITE("cli.collapse") {

TEST_CASE("model-exact fixture lies on the diagonal")
{
    const fs::path out = scratch("collapse.csv");
    const Run r = run({"collapse", fixture("synthetic_three.csv"), "--results", fixture("synthetic_three_params.csv"),
                       "--out", out.string()});
    REQUIRE(r.code == cli::kExitOk);
    std::ifstream in(out);
    const std::string text{std::istreambuf_iterator<char>(in), {}};
    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == 1 + 3 * 26);
    CHECK(rows[0] == std::vector<std::string>{"code", "year", "type", "x", "y", "x_display", "y_display"});
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double x = std::stod(rows[k][3]), y = std::stod(rows[k][4]);
        CHECK(std::abs(y - x) < 1e-9);
        if (rows[k][0] == "PAK" && rows[k][1] != "1980") {
            CHECK(rows[k][2] == "3");
            CHECK(std::stod(rows[k][5]) == doctest::Approx(std::log(-x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("country filter and absent country")
{
    const Run ok = run({"collapse", fixture("synthetic_three.csv"), "--results", fixture("synthetic_three_params.csv"),
                        "--country", "FIN"});
    CHECK(ok.code == cli::kExitOk);
    CHECK(csv_rows(ok.out).size() == 27);

    const Run missing = run({"collapse", fixture("synthetic_three.csv"), "--results",
                             fixture("synthetic_three_params.csv"), "--country", "XXX"});
    CHECK(missing.code == cli::kExitUsage);
    CHECK(missing.err.find("XXX") != std::string::npos);
}

}

TEST_SUITE("cli.simulate") {

TEST_CASE("two-sector transition curve")
{
    const Run r = run({"simulate", "--k1", "1", "--k2", "0.5", "--alpha", "1", "--g0", "0", "--g-max", "6"});
    REQUIRE(r.code == cli::kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 602);
    std::size_t peak = 1;
    for (std::size_t k = 2; k < rows.size(); ++k) {
        CHECK(std::stod(rows[k][1]) < std::stod(rows[k - 1][1]));
        CHECK(std::stod(rows[k][3]) > std::stod(rows[k - 1][3]));
        if (std::stod(rows[k][2]) > std::stod(rows[peak][2]))
            peak = k;
    }
    CHECK(std::abs(std::stod(rows[peak][0]) - std::log(2.0) / 0.5) < 0.01);
    CHECK(rows.back()[0] == "6");
}

TEST_CASE("integrator agrees with the closed form")
{
    const std::vector<std::string> base{"simulate", "--k1", "1", "--k2", "0.5", "--alpha", "1", "--step", "1e-3"};
    std::vector<std::string> with_rk4 = base;
    with_rk4.push_back("--rk4");
    const auto a = csv_rows(run(base).out), b = csv_rows(run(with_rk4).out);
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t k = 1; k < a.size(); ++k) {
        CHECK(a[k][0] == b[k][0]);
        for (int c = 1; c <= 3; ++c)
            worst = std::max(worst, std::abs(std::stod(a[k][c]) - std::stod(b[k][c])));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("single point range")
{
    const Run r = run({"simulate", "--k1", "1", "--k2", "0.5", "--alpha", "1", "--g-min", "2", "--g-max", "2"});
    CHECK(r.code == cli::kExitOk);
    CHECK(csv_rows(r.out).size() == 2);
}

TEST_CASE("bad ranges")
{
    CHECK(run({"simulate", "--k1", "1", "--k2", "0.5", "--alpha", "1", "--g-min", "2", "--g-max", "1"}).code ==
          cli::kExitUsage);
    CHECK(run({"simulate", "--k1", "1", "--k2", "0.5", "--alpha", "1", "--step", "0"}).code == cli::kExitUsage);
}

}

TEST_SUITE("cli.correlate") {

TEST_CASE("exact linear relation")
{
    const Run r = run({"correlate", fixture("correlate_data.csv"), "--rural", fixture("correlate_rural.csv")});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("n: 8\n") != std::string::npos);
    const auto pos = r.out.find("pearson_r: ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 11)) == doctest::Approx(1.0).epsilon(1e-12));
    const auto rows = csv_rows(r.out.substr(r.out.find("quartile,")));
    REQUIRE(rows.size() == 5);
    // Lowest GDP quartile holds the two largest agrarian shares.
    CHECK(std::stod(rows[1][4]) == doctest::Approx((std::log(0.32) + std::log(0.37)) / 2));
}

TEST_CASE("fewer than two countries")
{
    const Run r = run({"correlate", fixture("correlate_data.csv"), "--rural", fixture("correlate_rural.csv"), "--year",
                       "2004"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("degenerate") != std::string::npos);
}

}

TEST_SUITE("cli.classify") {

TEST_CASE("reported parameter sets")
{
    const Run pak = run({"classify", "--k1", "0.56", "--k2", "-0.01", "--alpha", "0.32"});
    CHECK(pak.code == cli::kExitOk);
    CHECK(pak.out.rfind("type 3\n", 0) == 0);
    CHECK(pak.out.find("g_max_i") == std::string::npos);

    const Run usa = run({"classify", "--k1", "1.76", "--k2", "0.94", "--alpha", "1.27"});
    CHECK(usa.out.rfind("type 2\n", 0) == 0);

    const Run fin = run({"classify", "--k1", "2.29", "--k2", "0.35", "--alpha", "0.5", "--g0", "8.74"});
    CHECK(fin.out.find("g_max_i: 9.708") != std::string::npos);
    CHECK(fin.out.find("convergent: yes") != std::string::npos);
}

TEST_CASE("boundary and missing arguments")
{
    const Run r = run({"classify", "--alpha", "1"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("unclassifiable") != std::string::npos);
    CHECK(run({"classify", "--k1", "1"}).code == cli::kExitUsage);
}

TEST_CASE("results file")
{
    const Run r = run({"classify", "--results", fixture("synthetic_three_params.csv")});
    CHECK(r.code == cli::kExitOk);
    CHECK(r.out.find("PAK,3,") != std::string::npos);
    CHECK(r.out.find("FIN,1,") != std::string::npos);
    CHECK(r.out.find("USA,2,") != std::string::npos);
}

}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out, err;
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qedflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Run run(const fs::path& dir, const std::string& args) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + QEDFLOW_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    Run r;
    const int raw = std::system(cmd.c_str());
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = support::slurp(out);
    r.err = support::slurp(err);
    return r;
}

std::string one_policy_estimate(const fs::path& out, const std::string& extra = "") {
    return "estimate --policies \"" + support::data_path("one_policy_policies.csv").string() + "\" --claims \"" +
           support::data_path("one_policy_claims.csv").string() +
           "\" --reporting-date 2019-06-30 --unit month --limitation 24"
           " --s-edges 0,10000,39000,95000 --tau-edges 0,12,24,36 --out \"" +
           out.string() + "\" " + extra;
}

}  // namespace

TEST_CASE("estimate on the single-policy registers") {
    const fs::path dir = scratch("estimate");
    const Run r = run(dir, one_policy_estimate(dir / "fit"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("sample: 12 units") != std::string::npos);
    CHECK(r.out.find("k,delta,amount,delay,elapsed\n") != std::string::npos);
    CHECK(r.out.find("\n12,") != std::string::npos);
    CHECK(r.out.find("\n13,") == std::string::npos);
    for (const char* f : {"sample.csv", "grouped.csv", "grid.json", "estimate.csv", "estimate.json", "convergence.csv"}) {
        CHECK(fs::exists(dir / "fit" / f));
    }
    const auto j = nlohmann::json::parse(support::slurp(dir / "fit" / "estimate.json"));
    CHECK(j["converged"] == true);

    const Run capped = run(dir, one_policy_estimate(dir / "capped", "--max-iterations 1 --tolerance 1e-15"));
    CHECK(capped.status == 0);
    CHECK(capped.err.find("warning") != std::string::npos);
    const auto jc = nlohmann::json::parse(support::slurp(dir / "capped" / "estimate.json"));
    CHECK(jc["converged"] == false);
}

TEST_CASE("missing input files name the path") {
    const fs::path dir = scratch("missing");
    const Run r = run(dir, "estimate --policies /nonexistent/pol.csv --claims /nonexistent/cl.csv "
                           "--reporting-date 2019-06-30 --out \"" + (dir / "o").string() + "\"");
    CHECK(r.status != 0);
    CHECK(r.err.find("/nonexistent/pol.csv") != std::string::npos);
    const Run bad_date = run(dir, "estimate --policies a --claims b --reporting-date 2019-06-31");
    CHECK(bad_date.status != 0);
}

TEST_CASE("reserves from a fitted estimate") {
    const fs::path dir = scratch("reserves");
    REQUIRE(run(dir, one_policy_estimate(dir / "fit")).status == 0);
    const fs::path fit = dir / "fit";
    const std::string base = "reserves --estimate \"" + (fit / "estimate.csv").string() + "\" --sample \"" +
                             (fit / "sample.csv").string() + "\" ";
    const Run r = run(dir, base + "--grid \"" + (fit / "grid.json").string() +
                               "\" --schedule-edges 0,6,12 --out \"" + (dir / "rep").string() + "\"");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("IBNR:") != std::string::npos);
    const auto j = nlohmann::json::parse(support::slurp(dir / "rep" / "report.json"));
    REQUIRE(j["schedule"].size() == 3);
    double sum = 0;
    for (const auto& row : j["schedule"]) sum += row["mean"].get<double>();
    CHECK(sum == doctest::Approx(j["ibnr"].get<double>()).epsilon(1e-6));
    CHECK(fs::exists(dir / "rep" / "schedule.csv"));

    {
        std::ofstream g(dir / "other_grid.json");
        g << R"({"s_edges": [0, 5], "tau_edges": [0, 12]})";
    }
    const Run mismatch = run(dir, base + "--grid \"" + (dir / "other_grid.json").string() + "\" --out \"" +
                                      (dir / "rep2").string() + "\"");
    CHECK(mismatch.status != 0);
    CHECK(mismatch.err.find("grid") != std::string::npos);
}

TEST_CASE("triangle command") {
    const fs::path dir = scratch("triangle");
    const Run r = run(dir, "triangle --triangle \"" + support::data_path("half_year_triangle.csv").string() + "\" --out \"" +
                               (dir / "o").string() + "\"");
    REQUIRE(r.status == 0);
    CHECK(r.out.find("development factors: 1.701 1.103 1.048 1.022 1.017 1.020 1.010 1.005 1.000") !=
          std::string::npos);
    CHECK(fs::exists(dir / "o" / "classical.json"));

    const Run empty = run(dir, "triangle --payments \"" + support::data_path("empty_payments.csv").string() +
                                   "\" --reporting-date 2019-06-30 --out \"" + (dir / "e").string() + "\"");
    CHECK(empty.status != 0);
    CHECK(empty.err.find("empty") != std::string::npos);
}

TEST_CASE("simulate is reproducible") {
    const fs::path dir = scratch("simulate");
    const std::string args = "simulate --seed 5 --replications 3 --n-policies 300 --threads 2 --out ";
    REQUIRE(run(dir, args + "\"" + (dir / "a").string() + "\"").status == 0);
    REQUIRE(run(dir, args + "\"" + (dir / "b").string() + "\"").status == 0);
    CHECK(support::slurp(dir / "a" / "replications.csv") == support::slurp(dir / "b" / "replications.csv"));
    CHECK(support::slurp(dir / "a" / "summary.json") == support::slurp(dir / "b" / "summary.json"));

    {
        std::ofstream c(dir / "bad.json");
        c << R"({"frequency": 1.5})";
    }
    const Run bad = run(dir, "simulate --config \"" + (dir / "bad.json").string() + "\"");
    CHECK(bad.status != 0);
    CHECK(bad.err.find("frequency") != std::string::npos);
}

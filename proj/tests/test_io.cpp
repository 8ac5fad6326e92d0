#include <doctest.h>

#include <sstream>

#include "qedflow/io.hpp"
#include "support.hpp"

using namespace qedflow;
using support::d;

namespace {

struct Fitted {
    CensoredTally sample;
    GroupedSample grouped;
    DistributionEstimate estimate;
};

Fitted fitted(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto r = support::random_register(rng, 25, d("2020-01-01"));
    Fitted f;
    f.sample = tally_censored_sample(r.policies, r.claims, d("2020-01-01"));
    f.grouped = group(f.sample, support::grid_for(f.sample, 6, 30));
    f.estimate = fit(f.grouped);
    return f;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(kInfinity) == "inf");
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_money(135556927.456) == "135556927.46");
    CHECK(format_probability(0.000555123456) == "0.000555123");
    CHECK(round_money(2.005001) == 2.01);
}

TEST_CASE("grid JSON round trip") {
    const Grid g({0, 10.5, 39}, {0, 12, 24, 36});
    std::stringstream ss;
    write_grid_json(ss, g);
    CHECK(read_grid_json(ss, "g") == g);
    std::istringstream bad("{\"s_edges\": [1, 2]}");
    CHECK_THROWS(read_grid_json(bad, "bad"));
}

TEST_CASE("grouped CSV round trip") {
    const Fitted f = fitted(1);
    std::stringstream ss;
    write_grouped_csv(ss, f.grouped);
    const auto back = read_grouped_csv(ss, "g", f.grouped.grid);
    CHECK(back.patterns == f.grouped.patterns);
    CHECK(back.total == f.grouped.total);

    std::istringstream bad("s_bin,delta,tau_bin,count,low_cells,limit_cell\n0,3,0,1,0,0\n");
    CHECK_THROWS_WITH(read_grouped_csv(bad, "bad.csv", f.grouped.grid), doctest::Contains("bad.csv:2"));
}

TEST_CASE("grouped CSV of the monthly single-policy sample") {
    const Registers r = parse_registers(support::data_path("one_policy_policies.csv"),
                                        support::data_path("one_policy_claims.csv"));
    SampleOptions o;
    o.unit = TimeUnit::Month;
    o.limitation_override = 24;
    const auto s = build_censored_sample(r.policies, r.claims, d("2019-06-30"), o);
    std::stringstream ss;
    write_grouped_csv(ss, group(s, Grid({0, 10000, 39000, 95000}, {0, 12, 24, 36})));
    CHECK(ss.str() ==
          "s_bin,delta,tau_bin,count,low_cells,limit_cell\n"
          "0,0,inf,5,0,0\n"
          "3,0,0,1,0,0\n"
          "2,1,1,1,0,0\n"
          "0,2,1,5,1,2\n");
}

TEST_CASE("estimate CSV round trip") {
    const Fitted f = fitted(2);
    std::stringstream ss;
    write_estimate_csv(ss, f.estimate);
    const auto back = read_estimate_csv(ss, "e");
    CHECK(back.grid == f.estimate.grid);
    CHECK(back.mass == f.estimate.mass);
    CHECK(ss.str().find("inf,inf") != std::string::npos);

    std::istringstream bad("s_lo,s_hi,tau_lo,tau_hi,mass\n0,1,0,1,0.5\n");
    CHECK_THROWS(read_estimate_csv(bad, "bad"));

    std::stringstream js;
    write_estimate_json(js, f.estimate, FitConfig{});
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j["converged"] == f.estimate.converged);
    CHECK(j["iterations"] == f.estimate.iterations);

    std::stringstream log;
    write_convergence_log(log, f.estimate);
    const std::string text = log.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == f.estimate.iterations + 1);
}

TEST_CASE("sample CSV round trip") {
    const Fitted f = fitted(3);
    std::stringstream ss;
    write_sample_csv(ss, f.sample);
    const auto back = read_sample_csv(ss, "s");
    REQUIRE(back.size() == f.sample.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].observation == f.sample[k].observation);
        CHECK(back[k].count == f.sample[k].count);
    }
    std::istringstream bad("delta,amount,delay,elapsed,deductible,limitation,count\n1,5,,3,0,10,1\n");
    CHECK_THROWS(read_sample_csv(bad, "bad"));
}

TEST_CASE("payments CSV") {
    std::istringstream in("claim_id,occurrence_date,payment_date,amount\nC1,2018-01-01,2018-02-01,5.5\n");
    const auto p = read_payments_csv(in, "p");
    REQUIRE(p.size() == 1);
    CHECK(p[0].amount == 5.5);
    std::istringstream bad("claim_id,occurrence_date,payment_date,amount\nC1,2018-03-01,2018-02-01,5.5\n");
    CHECK_THROWS_AS(read_payments_csv(bad, "p"), RegisterError);
}

TEST_CASE("report JSON and schedule CSV") {
    const Fitted f = fitted(4);
    const auto rep = reserve_report(f.estimate, f.sample, std::int64_t(total_count(f.sample)), 0.0, 0.95);
    const double edges[] = {0, 30, 90};
    const auto sched = ibnr_schedule(f.estimate, f.sample, edges, 0.95);
    const auto j = report_to_json(rep, sched);
    CHECK(j["schedule"].size() == 3);
    CHECK(j["schedule"][2]["t_hi"] == "inf");
    CHECK(j["quantile_mode"] == "two-sided");
    std::stringstream ss;
    write_schedule_csv(ss, sched);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "t_lo,t_hi,lower,mean,upper,sd,expected_claims");
}

TEST_CASE("simulation config JSON") {
    SimulationConfig c;
    c.n_policies = 123;
    c.frequency_basis = FrequencyBasis::PerDay;
    c.frequency = 0.001;
    c.epoch = d("2001-02-03");
    const auto back = simulation_config_from_json(simulation_config_to_json(c));
    CHECK(back.n_policies == 123);
    CHECK(back.frequency_basis == FrequencyBasis::PerDay);
    CHECK(back.epoch == c.epoch);
    CHECK_THROWS_WITH(simulation_config_from_json(nlohmann::json{{"n_polices", 5}}), doctest::Contains("unknown"));
    CHECK_THROWS(simulation_config_from_json(nlohmann::json{{"n_policies", "many"}}));
    CHECK_THROWS(simulation_config_from_json(nlohmann::json{{"frequency", 2.0}}));
    std::istringstream partial("{\"seed\": 9}");
    const auto p = read_simulation_config(partial, "cfg");
    CHECK(p.seed == 9);
    CHECK(p.n_policies == SimulationConfig{}.n_policies);
}

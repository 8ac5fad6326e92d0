#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qedflow/analytics.hpp"
#include "qedflow/classical.hpp"
#include "qedflow/estimator.hpp"
#include "qedflow/io.hpp"
#include "qedflow/registers.hpp"
#include "qedflow/sample.hpp"
#include "qedflow/simulation.hpp"

namespace fs = std::filesystem;
using namespace qedflow;

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf") {
            out.push_back(kInfinity);
            continue;
        }
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("bad number '") + item + "' in " + what);
        }
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + " is empty");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

Period parse_period(const std::string& text) {
    if (text.size() < 2) throw std::invalid_argument("period must look like 6m or 182d");
    Period p;
    const char suffix = text.back();
    if (suffix == 'm') {
        p.unit = TimeUnit::Month;
    } else if (suffix == 'd') {
        p.unit = TimeUnit::Day;
    } else {
        throw std::invalid_argument("period must end in m (months) or d (days): " + text);
    }
    try {
        p.count = std::stol(text.substr(0, text.size() - 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad period " + text);
    }
    if (p.count <= 0) throw std::invalid_argument("period must be positive");
    return p;
}

// ---- estimate

struct EstimateArgs {
    std::string policies, claims, reporting_date, out = "out";
    std::string unit = "day";
    std::optional<long> limitation;
    long default_limitation_days = kDefaultLimitationDays;
    std::string s_edges, tau_edges;
    int s_cells = 100;
    double tau_step = 1.0;
    double tolerance = 1e-9;
    int max_iterations = 10000;
};

std::vector<double> auto_s_edges(const CensoredTally& sample, int cells) {
    double top = 0.0;
    for (const auto& t : sample) {
        const auto& o = t.observation;
        if (!o.zero_claim) top = std::max({top, o.amount, o.deductible});
    }
    std::vector<double> edges{0.0};
    if (top <= 0.0) return edges;
    const double step = top / cells;
    for (int i = 1; i <= cells; ++i) edges.push_back(step * i);
    return edges;
}

std::vector<double> auto_tau_edges(const CensoredTally& sample, double step) {
    double top = 0.0;
    for (const auto& t : sample) {
        const auto& o = t.observation;
        if (o.zero_claim) continue;
        top = std::max(top, static_cast<double>(o.limitation));
        if (o.delay) top = std::max(top, static_cast<double>(*o.delay));
    }
    return uniform_edges(0.0, top + 1.0, step);
}

int cmd_estimate(const EstimateArgs& a) {
    const Registers reg = parse_registers(a.policies, a.claims, a.default_limitation_days);
    const Date t = parse_date(a.reporting_date);
    const auto violations = validate(reg.policies, reg.claims, t);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "error: " << v.record << ": " << v.message << '\n';
        return 1;
    }
    SampleOptions opts;
    opts.unit = parse_time_unit(a.unit);
    opts.limitation_override = a.limitation;
    const CensoredTally sample = tally_censored_sample(reg.policies, reg.claims, t, opts);

    const Grid grid(a.s_edges.empty() ? auto_s_edges(sample, a.s_cells) : parse_list(a.s_edges, "--s-edges"),
                    a.tau_edges.empty() ? auto_tau_edges(sample, a.tau_step)
                                        : parse_list(a.tau_edges, "--tau-edges"));
    const GroupedSample grouped = group(sample, grid);

    FitConfig config;
    config.tolerance = a.tolerance;
    config.max_iterations = a.max_iterations;
    const DistributionEstimate est = fit(grouped, config);

    const fs::path dir(a.out);
    ensure_dir(dir);
    { auto o = open_out(dir / "sample.csv"); write_sample_csv(o, sample); }
    { auto o = open_out(dir / "grouped.csv"); write_grouped_csv(o, grouped); }
    { auto o = open_out(dir / "grid.json"); write_grid_json(o, grid); }
    { auto o = open_out(dir / "estimate.csv"); write_estimate_csv(o, est); }
    { auto o = open_out(dir / "estimate.json"); write_estimate_json(o, est, config); }
    { auto o = open_out(dir / "convergence.csv"); write_convergence_log(o, est); }

    const std::uint64_t n = total_count(sample);
    std::cout << "sample: " << n << " units, " << sample.size() << " distinct observations\n";
    if (n <= 50) {
        const auto units = build_censored_sample(reg.policies, reg.claims, t, opts);
        std::cout << "k,delta,amount,delay,elapsed\n";
        for (std::size_t k = 0; k < units.size(); ++k) {
            const auto& o = units[k];
            std::cout << k + 1 << ',' << static_cast<int>(o.status) << ',' << format_money(o.amount) << ',';
            if (o.zero_claim) {
                std::cout << "inf";
            } else if (o.delay) {
                std::cout << *o.delay;
            }
            std::cout << ',' << o.elapsed << '\n';
        }
    }
    std::cout << "grid: " << grid.s_cells() << " x " << grid.tau_cells() << " cells, "
              << grouped.patterns.size() << " censoring patterns\n";
    std::cout << "fit: iterations=" << est.iterations << " final_delta=" << format_number(est.final_delta)
              << " converged=" << (est.converged ? "true" : "false") << '\n';
    for (const auto& w : est.warnings) std::cerr << "warning: " << w << '\n';
    if (!est.converged) {
        std::cerr << "warning: fit stopped after " << est.iterations
                  << " iterations without reaching tolerance " << format_number(a.tolerance) << '\n';
    }
    return 0;
}

// ---- reserves

struct ReservesArgs {
    std::string estimate, sample, grid, out = "out";
    std::optional<double> paid;
    std::optional<long long> exposure;
    double p = 0.95;
    std::string quantile_mode = "two-sided";
    std::string schedule_edges = "0,90,180,270,360,450,540,630,720,810,900,990,1080";
};

int cmd_reserves(const ReservesArgs& a) {
    DistributionEstimate est;
    { auto in = open_in(a.estimate); est = read_estimate_csv(in, a.estimate); }
    CensoredTally sample;
    { auto in = open_in(a.sample); sample = read_sample_csv(in, a.sample); }
    if (!a.grid.empty()) {
        auto in = open_in(a.grid);
        if (!(read_grid_json(in, a.grid) == est.grid)) {
            throw std::invalid_argument("grid in " + a.grid + " does not match the estimate grid");
        }
    }
    // every observation must fit the estimate's grid
    try {
        (void)group(sample, est.grid);
    } catch (const std::out_of_range& e) {
        throw std::invalid_argument(std::string("sample does not match the estimate grid: ") + e.what());
    }

    double paid = 0.0;
    for (const auto& t : sample) {
        const auto& o = t.observation;
        if (!o.zero_claim && o.status != Status::NotReported) paid += static_cast<double>(t.count) * o.amount;
    }
    if (a.paid) paid = *a.paid;
    const std::int64_t exposure = a.exposure ? *a.exposure : static_cast<std::int64_t>(total_count(sample));

    const QuantileMode mode = parse_quantile_mode(a.quantile_mode);
    const ReserveReport report = reserve_report(est, sample, exposure, paid, a.p, mode);
    const std::vector<double> edges = parse_list(a.schedule_edges, "--schedule-edges");
    const auto schedule = ibnr_schedule(est, sample, edges, a.p, mode);

    const fs::path dir(a.out);
    ensure_dir(dir);
    { auto o = open_out(dir / "report.json"); o << report_to_json(report, schedule).dump(2) << '\n'; }
    { auto o = open_out(dir / "schedule.csv"); write_schedule_csv(o, schedule); }

    std::cout << "net premium per unit: " << format_number(report.net_premium_daily) << '\n'
              << "claim frequency per unit: " << format_probability(report.frequency_daily) << '\n'
              << "average severity: "
              << (report.average_severity ? format_money(*report.average_severity) : std::string("none")) << '\n'
              << "exposure: " << report.exposure << '\n'
              << "paid: " << format_money(report.paid_total) << '\n'
              << "claims reserve: " << format_money(report.claims_reserve) << '\n'
              << "IBNR: " << format_money(report.ibnr_mean) << " (sd " << format_money(report.ibnr_sd)
              << ", " << format_probability(report.tolerance_p) << " interval "
              << format_money(report.ibnr_lower) << " .. " << format_money(report.ibnr_upper) << ")\n"
              << "expected unreported claims: " << format_money(report.ibnr_expected_count) << '\n'
              << "OCR: " << format_money(report.ocr) << " (from outstanding claims "
              << format_money(report.ocr_by_sum) << ")\n";
    return 0;
}

// ---- triangle

struct TriangleArgs {
    std::string payments, triangle, counts, reporting_date, out = "out";
    std::string period = "6m";
    std::string apriori;
    std::optional<double> severity;
    std::optional<double> paid;
    std::string extra;
    double tail = 1.0;
};

int cmd_triangle(const TriangleArgs& a) {
    const Period period = parse_period(a.period);
    Triangle paid_tri;
    std::optional<Triangle> count_tri;
    if (!a.payments.empty()) {
        if (a.reporting_date.empty()) throw std::invalid_argument("--reporting-date is required with --payments");
        std::vector<Payment> payments;
        { auto in = open_in(a.payments); payments = read_payments_csv(in, a.payments); }
        const Date t = parse_date(a.reporting_date);
        paid_tri = build_triangle(payments, period, t);
        count_tri = build_count_triangle(payments, period, t);
    } else if (!a.triangle.empty()) {
        auto in = open_in(a.triangle);
        paid_tri = read_triangle_csv(in, a.triangle, period);
    } else {
        throw std::invalid_argument("give --payments or --triangle");
    }
    if (!a.counts.empty()) {
        auto in = open_in(a.counts);
        count_tri = read_triangle_csv(in, a.counts, period);
    }

    const ChainLadderResult cl = chain_ladder(paid_tri, a.tail);
    nlohmann::json report;
    report["factors"] = cl.factors;
    report["chain_ladder"] = {{"ultimates", cl.ultimates}, {"reserves", cl.reserves}, {"reserve", cl.reserve}};
    std::vector<double> reserves{cl.reserve};

    std::cout << "development factors:";
    for (double f : cl.factors) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.3f", f);
        std::cout << buf;
    }
    std::cout << "\nchain-ladder reserve: " << format_money(cl.reserve) << '\n';

    if (!a.apriori.empty()) {
        const auto apriori = parse_list(a.apriori, "--apriori");
        const MethodReserve bf = bornhuetter_ferguson(paid_tri, apriori, a.tail);
        report["bornhuetter_ferguson"] = {{"reserves", bf.reserves}, {"reserve", bf.reserve}};
        reserves.push_back(bf.reserve);
        std::cout << "Bornhuetter-Ferguson reserve: " << format_money(bf.reserve) << '\n';
    }
    if (a.severity) {
        if (!count_tri) throw std::invalid_argument("--severity needs claim counts (--payments or --counts)");
        double paid = 0.0;
        for (std::size_t i = 0; i < paid_tri.origins(); ++i) paid += paid_tri.latest(i);
        if (a.paid) paid = *a.paid;
        const MethodReserve fs = frequency_severity(*count_tri, *a.severity, paid, a.tail);
        report["frequency_severity"] = {{"ultimates", fs.ultimates}, {"reserve", fs.reserve}};
        reserves.push_back(fs.reserve);
        std::cout << "frequency-severity reserve: " << format_money(fs.reserve) << '\n';
    }
    if (!a.extra.empty()) {
        const auto extra = parse_list(a.extra, "--include-reserve");
        reserves.insert(reserves.end(), extra.begin(), extra.end());
        report["other_reserves"] = extra;
    }
    const ReserveRange range = reasonable_range(reserves);
    report["range"] = {{"min", range.min}, {"max", range.max}, {"midpoint", range.midpoint}};
    std::cout << "range: " << format_money(range.min) << " .. " << format_money(range.max)
              << " (midpoint " << format_money(range.midpoint) << ")\n";

    const fs::path dir(a.out);
    ensure_dir(dir);
    { auto o = open_out(dir / "triangle.csv"); write_triangle_csv(o, paid_tri); }
    if (count_tri) { auto o = open_out(dir / "counts.csv"); write_triangle_csv(o, *count_tri); }
    { auto o = open_out(dir / "classical.json"); o << report.dump(2) << '\n'; }
    return 0;
}

// ---- simulate

struct SimulateArgs {
    std::string config, out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads, replications;
    std::optional<long> n_policies;
    bool emit_registers = false;
};

int cmd_simulate(const SimulateArgs& a) {
    SimulationConfig c;
    if (!a.config.empty()) {
        auto in = open_in(a.config);
        c = read_simulation_config(in, a.config);
    }
    if (a.seed) c.seed = *a.seed;
    if (a.threads) c.threads = *a.threads;
    if (a.replications) c.replications = *a.replications;
    if (a.n_policies) c.n_policies = *a.n_policies;
    check_config(c);

    const AccuracyResult r = run_accuracy_study(c);
    const fs::path dir(a.out);
    ensure_dir(dir);
    { auto o = open_out(dir / "replications.csv"); write_replications_csv(o, r); }
    {
        auto o = open_out(dir / "summary.json");
        nlohmann::json j = accuracy_to_json(r);
        j["config"] = simulation_config_to_json(c);
        o << j.dump(2) << '\n';
    }
    if (a.emit_registers) {
        const SimulatedPortfolio p = simulate_portfolio(c, c.seed, 0);
        { auto o = open_out(dir / "policies.csv"); write_policies(o, p.policies); }
        { auto o = open_out(dir / "claims.csv"); write_claims(o, p.claims); }
    }
    std::cout << "replications: " << r.replications.size() << " (excluded " << r.excluded
              << ", not converged " << r.not_converged << ")\n"
              << "ratio mean " << format_probability(r.mean) << ", median " << format_probability(r.median)
              << ", variance " << format_probability(r.variance) << ", skewness "
              << format_probability(r.skewness) << '\n'
              << "empirical " << format_probability(r.band_level) << " band " << format_probability(r.band_lower)
              << " .. " << format_probability(r.band_upper) << " (width " << format_probability(r.empirical_width)
              << "), analytic width " << format_probability(r.analytic_width) << '\n';
    if (r.excluded > 0) {
        std::cerr << "warning: " << r.excluded << " replications had no unreported claims and were excluded\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qedflow: censored-sample claim distribution estimates and claims reserves"};
    app.require_subcommand(1);

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "Build the censored sample and fit the joint distribution");
    est->add_option("--policies", ea.policies, "Policy register CSV")->required();
    est->add_option("--claims", ea.claims, "Claims register CSV")->required();
    est->add_option("--reporting-date", ea.reporting_date, "Reporting date YYYY-MM-DD")->required();
    est->add_option("--unit", ea.unit, "Exposure unit: day or month")->capture_default_str();
    est->add_option("--limitation", ea.limitation, "Limitation period in units for every policy");
    est->add_option("--default-limitation-days", ea.default_limitation_days,
                    "Limitation used when the register leaves it blank")->capture_default_str();
    est->add_option("--s-edges", ea.s_edges, "Claim-size edges, comma separated, starting at 0");
    est->add_option("--tau-edges", ea.tau_edges, "Delay edges in units, comma separated, starting at 0");
    est->add_option("--s-cells", ea.s_cells, "Claim-size cells when --s-edges is not given")->capture_default_str();
    est->add_option("--tau-step", ea.tau_step, "Delay cell width when --tau-edges is not given")->capture_default_str();
    est->add_option("--tolerance", ea.tolerance, "Sup-norm CDF change at which the fit stops")->capture_default_str();
    est->add_option("--max-iterations", ea.max_iterations, "Iteration cap")->capture_default_str();
    est->add_option("--out", ea.out, "Output directory")->capture_default_str();

    ReservesArgs ra;
    auto* res = app.add_subcommand("reserves", "Claims reserve, IBNR, OCR and the IBNR schedule");
    res->add_option("--estimate", ra.estimate, "estimate.csv from the estimate command")->required();
    res->add_option("--sample", ra.sample, "sample.csv from the estimate command")->required();
    res->add_option("--grid", ra.grid, "grid.json to check against the estimate");
    res->add_option("--paid", ra.paid, "Paid to date (default: sum over reported claims in the sample)");
    res->add_option("--exposure", ra.exposure, "Exposure in units (default: sample size)");
    res->add_option("-p,--level", ra.p, "Tolerance level")->capture_default_str();
    res->add_option("--quantile-mode", ra.quantile_mode, "two-sided or one-sided")
        ->check(CLI::IsMember({"two-sided", "one-sided"}))
        ->capture_default_str();
    res->add_option("--schedule-edges", ra.schedule_edges, "Schedule window edges in units")->capture_default_str();
    res->add_option("--out", ra.out, "Output directory")->capture_default_str();

    TriangleArgs ta;
    auto* tri = app.add_subcommand("triangle", "Chain-ladder, Bornhuetter-Ferguson and frequency-severity reserves");
    tri->add_option("--payments", ta.payments, "Payments CSV (claim_id,occurrence_date,payment_date,amount)");
    tri->add_option("--triangle", ta.triangle, "Cumulative triangle CSV");
    tri->add_option("--counts", ta.counts, "Cumulative claim-count triangle CSV");
    tri->add_option("--reporting-date", ta.reporting_date, "Reporting date for --payments");
    tri->add_option("--period", ta.period, "Origin/development period, e.g. 6m or 182d")->capture_default_str();
    tri->add_option("--apriori", ta.apriori, "A-priori ultimates per origin for Bornhuetter-Ferguson");
    tri->add_option("--severity", ta.severity, "Average severity for frequency-severity");
    tri->add_option("--paid", ta.paid, "Paid to date for frequency-severity (default: latest diagonal)");
    tri->add_option("--include-reserve", ta.extra, "Further reserves to include in the range");
    tri->add_option("--tail", ta.tail, "Tail factor")->capture_default_str();
    tri->add_option("--out", ta.out, "Output directory")->capture_default_str();

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo accuracy study of the IBNR estimate");
    sim->add_option("--config", sa.config, "Simulation config JSON");
    sim->add_option("--seed", sa.seed, "Random seed");
    sim->add_option("--threads", sa.threads, "Worker threads (0: all cores)");
    sim->add_option("--replications", sa.replications, "Number of replications");
    sim->add_option("--n-policies", sa.n_policies, "Policies per portfolio");
    sim->add_flag("--emit-registers", sa.emit_registers, "Also write the registers of replication 0");
    sim->add_option("--out", sa.out, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*est) return cmd_estimate(ea);
        if (*res) return cmd_reserves(ra);
        if (*tri) return cmd_triangle(ta);
        if (*sim) return cmd_simulate(sa);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

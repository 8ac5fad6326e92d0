#include "qedflow/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include "csv.hpp"

namespace qedflow {

using nlohmann::json;

namespace {

constexpr std::string_view kGroupedHeader = "s_bin,delta,tau_bin,count,low_cells,limit_cell";
constexpr std::string_view kEstimateHeader = "s_lo,s_hi,tau_lo,tau_hi,mass";
constexpr std::string_view kSampleHeader =
    "delta,amount,delay,elapsed,deductible,limitation,count";
constexpr std::string_view kPaymentsHeader = "claim_id,occurrence_date,payment_date,amount";
constexpr std::string_view kScheduleHeader = "t_lo,t_hi,lower,mean,upper,sd,expected_claims";

double number(const detail::RowReader& r, std::size_t col) {
    const std::string& s = r.raw(col);
    if (s == "inf") return kInfinity;
    return r.money(col);
}

// Rows of a CSV whose header must match exactly.
template <class F>
void for_each_row(std::istream& in, std::string_view source, std::string_view header, F f) {
    const auto names = detail::read_header(in, source, header);
    std::string line;
    std::size_t row = 1;
    while (detail::next_line(in, line)) {
        ++row;
        const auto fields = detail::split_csv(line);
        if (fields.size() != names.size()) {
            throw RegisterError(std::string(source), row, "",
                                "expected " + std::to_string(names.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        f(detail::RowReader{source, row, fields, names});
    }
}

std::size_t index_field(const detail::RowReader& r, std::size_t col) {
    const long v = r.integer(col);
    if (v < 0) r.fail(col, "negative index");
    return static_cast<std::size_t>(v);
}

json edges_json(const std::vector<double>& edges) {
    json a = json::array();
    for (double e : edges) a.push_back(e);
    return a;
}

}  // namespace

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("cannot format number");
    return std::string(buf, ptr);
}

std::string format_money(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return buf;
}

std::string format_probability(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

double round_money(double value) { return std::stod(format_money(value)); }
double round_probability(double value) { return std::stod(format_probability(value)); }

json grid_to_json(const Grid& grid) {
    return {{"s_edges", edges_json(grid.s_edges())}, {"tau_edges", edges_json(grid.tau_edges())}};
}

Grid grid_from_json(const json& j) {
    try {
        return Grid(j.at("s_edges").get<std::vector<double>>(),
                    j.at("tau_edges").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("grid descriptor: ") + e.what());
    }
}

void write_grid_json(std::ostream& out, const Grid& grid) { out << grid_to_json(grid).dump(2) << '\n'; }

Grid read_grid_json(std::istream& in, std::string_view source) {
    try {
        return grid_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string(source) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(source) + ": " + e.what());
    }
}

void write_grouped_csv(std::ostream& out, const GroupedSample& grouped) {
    out << kGroupedHeader << '\n';
    for (const auto& [key, count] : grouped.patterns) {
        out << key.s_bin << ',' << status_code(key.kind) << ',';
        if (key.kind == PatternKind::ZeroClaim) {
            out << "inf";
        } else {
            out << key.tau_bin;
        }
        out << ',' << count << ',' << key.low_cells << ',' << key.limit_cell << '\n';
    }
}

GroupedSample read_grouped_csv(std::istream& in, std::string_view source, const Grid& grid) {
    GroupedSample g;
    g.grid = grid;
    for_each_row(in, source, kGroupedHeader, [&](const detail::RowReader& r) {
        PatternKey key;
        const long delta = r.integer(1);
        if (r.raw(2) == "inf") {
            if (delta != 0) r.fail(1, "zero claims carry delta 0");
            key.kind = PatternKind::ZeroClaim;
        } else {
            key.tau_bin = static_cast<std::uint32_t>(index_field(r, 2));
            switch (delta) {
                case 0: key.kind = PatternKind::Exact; break;
                case 1: key.kind = PatternKind::Outstanding; break;
                case 2: key.kind = PatternKind::NotReported; break;
                default: r.fail(1, "delta must be 0, 1 or 2");
            }
            if (key.tau_bin >= grid.tau_cells()) r.fail(2, "delay cell outside the grid");
        }
        key.s_bin = static_cast<std::uint32_t>(index_field(r, 0));
        key.low_cells = static_cast<std::uint32_t>(index_field(r, 4));
        key.limit_cell = static_cast<std::uint32_t>(index_field(r, 5));
        if (key.s_bin >= grid.s_cells()) r.fail(0, "claim-size cell outside the grid");
        if (key.low_cells > grid.s_cells()) r.fail(4, "more low cells than the grid has");
        if (key.limit_cell >= grid.tau_cells()) r.fail(5, "limit cell outside the grid");
        const long count = r.integer(3);
        if (count <= 0) r.fail(3, "count must be positive");
        g.patterns[key] += static_cast<std::uint64_t>(count);
        g.total += static_cast<std::uint64_t>(count);
    });
    return g;
}

void write_estimate_csv(std::ostream& out, const DistributionEstimate& est) {
    const Grid& g = est.grid;
    out << kEstimateHeader << '\n';
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) {
            out << format_number(g.s_lower(i)) << ',' << format_number(g.s_upper(i)) << ','
                << format_number(g.tau_lower(j)) << ',' << format_number(g.tau_upper(j)) << ','
                << format_number(est.cell(i, j)) << '\n';
        }
    }
    out << "0,0,inf,inf," << format_number(est.atom()) << '\n';
}

DistributionEstimate read_estimate_csv(std::istream& in, std::string_view source) {
    struct Row {
        double s_lo, s_hi, tau_lo, tau_hi, mass;
        std::size_t line;
    };
    std::vector<Row> rows;
    for_each_row(in, source, kEstimateHeader, [&](const detail::RowReader& r) {
        Row row{number(r, 0), number(r, 1), number(r, 2), number(r, 3), r.money(4), r.row};
        if (!(row.mass >= 0.0)) r.fail(4, "mass must be nonnegative");
        rows.push_back(row);
    });
    if (rows.size() < 2) throw RegisterError(std::string(source), 1, "", "too few cells");
    const Row atom = rows.back();
    rows.pop_back();
    if (atom.s_lo != 0.0 || atom.s_hi != 0.0 || atom.tau_lo != kInfinity || atom.tau_hi != kInfinity) {
        throw RegisterError(std::string(source), atom.line, "",
                            "last row must be the zero-claim atom 0,0,inf,inf");
    }
    std::set<double> s_set, tau_set;
    for (const auto& r : rows) {
        s_set.insert(r.s_lo);
        tau_set.insert(r.tau_lo);
        tau_set.insert(r.tau_hi);
    }
    DistributionEstimate est;
    est.grid = Grid({s_set.begin(), s_set.end()}, {tau_set.begin(), tau_set.end()});
    const Grid& g = est.grid;
    if (rows.size() != g.finite_cells()) {
        throw RegisterError(std::string(source), 1, "", "cell bounds do not form a grid");
    }
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) {
            const Row& r = rows[g.index(i, j)];
            if (r.s_lo != g.s_lower(i) || r.s_hi != g.s_upper(i) || r.tau_lo != g.tau_lower(j) ||
                r.tau_hi != g.tau_upper(j)) {
                throw RegisterError(std::string(source), r.line, "",
                                    "cell out of order or inconsistent with the grid");
            }
            est.mass.push_back(r.mass);
        }
    }
    est.mass.push_back(atom.mass);
    return est;
}

void write_estimate_json(std::ostream& out, const DistributionEstimate& est, const FitConfig& config) {
    json j = {{"iterations", est.iterations},
              {"final_delta", est.final_delta},
              {"converged", est.converged},
              {"tolerance", config.tolerance},
              {"max_iterations", config.max_iterations},
              {"warnings", est.warnings},
              {"grid", grid_to_json(est.grid)}};
    out << j.dump(2) << '\n';
}

void write_convergence_log(std::ostream& out, const DistributionEstimate& est) {
    out << "iteration,log_likelihood,delta\n";
    for (const auto& h : est.history) {
        out << h.iteration << ',' << format_number(h.log_likelihood) << ','
            << format_number(h.delta) << '\n';
    }
}

void write_sample_csv(std::ostream& out, const CensoredTally& sample) {
    out << kSampleHeader << '\n';
    for (const auto& t : sample) {
        const auto& o = t.observation;
        out << static_cast<int>(o.status) << ',' << format_number(o.amount) << ',';
        if (o.zero_claim) {
            out << "inf";
        } else if (o.status != Status::NotReported && o.delay) {
            out << *o.delay;
        }
        out << ',' << o.elapsed << ',' << format_number(o.deductible) << ',' << o.limitation << ','
            << t.count << '\n';
    }
}

CensoredTally read_sample_csv(std::istream& in, std::string_view source) {
    CensoredTally out;
    for_each_row(in, source, kSampleHeader, [&](const detail::RowReader& r) {
        CensoredObservation o;
        const long delta = r.integer(0);
        if (delta < 0 || delta > 2) r.fail(0, "delta must be 0, 1 or 2");
        o.status = static_cast<Status>(delta);
        o.amount = r.money(1);
        if (r.raw(2) == "inf") {
            if (o.status != Status::Settled) r.fail(2, "zero claims carry delta 0");
            o.zero_claim = true;
        } else if (!r.raw(2).empty()) {
            if (o.status == Status::NotReported) r.fail(2, "not-reported units have no delay");
            o.delay = r.integer(2);
        } else if (o.status != Status::NotReported) {
            r.fail(2, "reported claims need a delay");
        }
        o.elapsed = r.integer(3);
        if (o.status == Status::NotReported) o.delay = o.elapsed;
        o.deductible = r.money(4);
        o.limitation = r.integer(5);
        const long count = r.integer(6);
        if (count <= 0) r.fail(6, "count must be positive");
        out.push_back({o, static_cast<std::uint64_t>(count)});
    });
    return out;
}

void write_triangle_csv(std::ostream& out, const Triangle& t) {
    check_shape(t);
    out << "origin";
    for (const auto& a : t.age_labels) out << ',' << a;
    out << '\n';
    for (std::size_t i = 0; i < t.origins(); ++i) {
        out << t.origin_labels[i];
        for (std::size_t j = 0; j < t.ages(); ++j) {
            out << ',';
            if (j < t.rows[i].size()) out << format_number(t.rows[i][j]);
        }
        out << '\n';
    }
}

Triangle read_triangle_csv(std::istream& in, std::string_view source, const Period& period) {
    std::string line;
    if (!detail::next_line(in, line)) throw RegisterError(std::string(source), 1, "", "missing header");
    const auto header = detail::split_csv(line);
    if (header.size() < 2) {
        throw RegisterError(std::string(source), 1, "", "need an origin column and at least one age");
    }
    Triangle t;
    t.period = period;
    t.age_labels.assign(header.begin() + 1, header.end());
    std::size_t row = 1;
    while (detail::next_line(in, line)) {
        ++row;
        const auto fields = detail::split_csv(line);
        if (fields.size() > header.size()) {
            throw RegisterError(std::string(source), row, "", "more fields than ages");
        }
        detail::RowReader r{source, row, fields, header};
        std::vector<double> values;
        bool ended = false;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c].empty()) {
                ended = true;
                continue;
            }
            if (ended) r.fail(c, "value after a blank cell");
            values.push_back(r.money(c));
        }
        t.origin_labels.push_back(fields[0]);
        t.rows.push_back(std::move(values));
    }
    try {
        check_shape(t);
    } catch (const std::invalid_argument& e) {
        throw RegisterError(std::string(source), row, "", e.what());
    }
    return t;
}

std::vector<Payment> read_payments_csv(std::istream& in, std::string_view source) {
    std::vector<Payment> out;
    for_each_row(in, source, kPaymentsHeader, [&](const detail::RowReader& r) {
        Payment p{r.text(0), r.date(1), r.date(2), r.money(3)};
        if (p.payment_date < p.occurrence_date) r.fail(2, "payment before occurrence");
        out.push_back(std::move(p));
    });
    return out;
}

json report_to_json(const ReserveReport& r, std::span<const ScheduleRow> schedule) {
    json j = {
        {"net_premium_per_unit", r.net_premium_daily},
        {"claim_frequency_per_unit", round_probability(r.frequency_daily)},
        {"average_severity", r.average_severity ? json(round_money(*r.average_severity)) : json()},
        {"exposure", r.exposure},
        {"paid_total", round_money(r.paid_total)},
        {"claims_reserve", round_money(r.claims_reserve)},
        {"ibnr", round_money(r.ibnr_mean)},
        {"ibnr_sd", round_money(r.ibnr_sd)},
        {"ibnr_expected_count", r.ibnr_expected_count},
        {"ibnr_average_claim",
         r.ibnr_average_claim ? json(round_money(*r.ibnr_average_claim)) : json()},
        {"ocr", round_money(r.ocr)},
        {"ocr_by_sum", round_money(r.ocr_by_sum)},
        {"tolerance_level", r.tolerance_p},
        {"quantile_mode", std::string(to_string(r.quantile_mode))},
        {"ibnr_lower", round_money(r.ibnr_lower)},
        {"ibnr_upper", round_money(r.ibnr_upper)},
    };
    json rows = json::array();
    for (const auto& s : schedule) {
        rows.push_back({{"t_lo", s.window.start},
                        {"t_hi", std::isinf(s.window.end) ? json("inf") : json(s.window.end)},
                        {"lower", round_money(s.lower)},
                        {"mean", round_money(s.mean)},
                        {"upper", round_money(s.upper)},
                        {"sd", round_money(s.sd)},
                        {"expected_claims", s.expected_count}});
    }
    j["schedule"] = rows;
    return j;
}

void write_schedule_csv(std::ostream& out, std::span<const ScheduleRow> schedule) {
    out << kScheduleHeader << '\n';
    for (const auto& s : schedule) {
        out << format_number(s.window.start) << ',' << format_number(s.window.end) << ','
            << format_money(s.lower) << ',' << format_money(s.mean) << ',' << format_money(s.upper)
            << ',' << format_money(s.sd) << ',' << format_money(s.expected_count) << '\n';
    }
}

json simulation_config_to_json(const SimulationConfig& c) {
    return {{"n_policies", c.n_policies},
            {"policy_term", c.policy_term},
            {"mean_claim", c.mean_claim},
            {"frequency", c.frequency},
            {"frequency_basis", std::string(to_string(c.frequency_basis))},
            {"severity_sigma", c.severity_sigma},
            {"delay_shape", c.delay_shape},
            {"delay_scale", c.delay_scale},
            {"sales_window", c.sales_window},
            {"reporting_offset", c.reporting_offset},
            {"limitation", c.limitation},
            {"deductible", c.deductible},
            {"replications", c.replications},
            {"seed", c.seed},
            {"epoch", format_date(c.epoch)},
            {"s_cells", c.s_cells},
            {"tau_step", c.tau_step},
            {"tolerance", c.tolerance},
            {"max_iterations", c.max_iterations},
            {"band_level", c.band_level},
            {"threads", c.threads}};
}

SimulationConfig simulation_config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("simulation config must be a JSON object");
    SimulationConfig c;
    const json known = simulation_config_to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("unknown simulation config key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const json::exception&) {
            throw std::invalid_argument(std::string("simulation config: bad value for '") + key + "'");
        }
    };
    get("n_policies", c.n_policies);
    get("policy_term", c.policy_term);
    get("mean_claim", c.mean_claim);
    get("frequency", c.frequency);
    get("severity_sigma", c.severity_sigma);
    get("delay_shape", c.delay_shape);
    get("delay_scale", c.delay_scale);
    get("sales_window", c.sales_window);
    get("reporting_offset", c.reporting_offset);
    get("limitation", c.limitation);
    get("deductible", c.deductible);
    get("replications", c.replications);
    get("seed", c.seed);
    get("s_cells", c.s_cells);
    get("tau_step", c.tau_step);
    get("tolerance", c.tolerance);
    get("max_iterations", c.max_iterations);
    get("band_level", c.band_level);
    get("threads", c.threads);
    std::string text;
    if (j.contains("frequency_basis")) {
        get("frequency_basis", text);
        c.frequency_basis = parse_frequency_basis(text);
    }
    if (j.contains("epoch")) {
        get("epoch", text);
        c.epoch = parse_date(text);
    }
    check_config(c);
    return c;
}

SimulationConfig read_simulation_config(std::istream& in, std::string_view source) {
    try {
        return simulation_config_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string(source) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(source) + ": " + e.what());
    }
}

void write_replications_csv(std::ostream& out, const AccuracyResult& result) {
    out << "replication,true_unreported,estimate,sd,ratio,iterations,converged,excluded\n";
    for (const auto& r : result.replications) {
        out << r.replication << ',' << format_money(r.true_unreported) << ','
            << format_money(r.estimate) << ',' << format_money(r.sd) << ','
            << format_probability(r.ratio) << ',' << r.iterations << ','
            << (r.converged ? "true" : "false") << ',' << (r.excluded ? "true" : "false") << '\n';
    }
}

json accuracy_to_json(const AccuracyResult& r) {
    return {{"replications", r.replications.size()},
            {"included", r.ratios.size()},
            {"excluded", r.excluded},
            {"not_converged", r.not_converged},
            {"mean", round_probability(r.mean)},
            {"median", round_probability(r.median)},
            {"variance", round_probability(r.variance)},
            {"skewness", round_probability(r.skewness)},
            {"band_level", r.band_level},
            {"band_lower", round_probability(r.band_lower)},
            {"band_upper", round_probability(r.band_upper)},
            {"empirical_width", round_probability(r.empirical_width)},
            {"analytic_width", round_probability(r.analytic_width)}};
}

}  // namespace qedflow

#include "qedflow/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "qedflow/analytics.hpp"
#include "qedflow/estimator.hpp"
#include "qedflow/sample.hpp"
#include "summation.hpp"

namespace qedflow {

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("simulation config: ") + field + " " + what);
}

}  // namespace

FrequencyBasis parse_frequency_basis(std::string_view text) {
    if (text == "term") return FrequencyBasis::PerTerm;
    if (text == "day") return FrequencyBasis::PerDay;
    throw std::invalid_argument("unknown frequency basis '" + std::string(text) +
                                "' (expected term or day)");
}

std::string_view to_string(FrequencyBasis basis) {
    return basis == FrequencyBasis::PerTerm ? "term" : "day";
}

void check_config(const SimulationConfig& c) {
    require(c.n_policies > 0, "n_policies", "must be positive");
    require(c.policy_term > 0, "policy_term", "must be positive");
    require(c.mean_claim > 0.0, "mean_claim", "must be positive");
    require(c.frequency >= 0.0 && c.frequency < 1.0, "frequency", "must lie in [0, 1)");
    require(c.severity_sigma >= 0.0, "severity_sigma", "must be nonnegative");
    require(c.delay_shape > 0.0, "delay_shape", "must be positive");
    require(c.delay_scale > 0.0, "delay_scale", "must be positive");
    require(c.sales_window > 0, "sales_window", "must be positive");
    require(c.reporting_offset >= 0, "reporting_offset", "must be nonnegative");
    require(c.limitation > 0, "limitation", "must be positive");
    require(c.deductible >= 0.0, "deductible", "must be nonnegative");
    require(c.replications >= 1, "replications", "must be at least 1");
    require(c.s_cells >= 1, "s_cells", "must be at least 1");
    require(c.tau_step > 0.0, "tau_step", "must be positive");
    require(c.tolerance > 0.0, "tolerance", "must be positive");
    require(c.max_iterations >= 1, "max_iterations", "must be at least 1");
    require(c.band_level > 0.0 && c.band_level < 1.0, "band_level", "must lie in (0, 1)");
    require(c.threads >= 0, "threads", "must be nonnegative");
}

double daily_claim_probability(const SimulationConfig& c) {
    return c.frequency_basis == FrequencyBasis::PerTerm
               ? c.frequency / static_cast<double>(c.policy_term)
               : c.frequency;
}

SimulatedPortfolio simulate_portfolio(const SimulationConfig& c, std::uint64_t seed,
                                      std::uint64_t stream) {
    check_config(c);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    std::mt19937_64 rng(seq);

    const double p = daily_claim_probability(c);
    const double a = std::log(c.mean_claim) - c.severity_sigma * c.severity_sigma / 2.0;
    std::uniform_int_distribution<long> start_day(0, c.sales_window - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> delay(c.delay_shape, c.delay_scale);

    const long epoch = day_number(c.epoch);
    const long t = c.sales_window + c.reporting_offset;  // reporting day, relative to epoch

    SimulatedPortfolio out;
    out.reporting_date = from_day_number(epoch + t);
    out.policies.reserve(static_cast<std::size_t>(c.n_policies));
    detail::CompensatedSum unreported;
    long claim_no = 0;

    for (long k = 0; k < c.n_policies; ++k) {
        PolicyRecord pol;
        pol.policy_id = "P" + std::to_string(k + 1);
        const long start = start_day(rng);
        pol.start_date = from_day_number(epoch + start);
        pol.end_date = from_day_number(epoch + start + c.policy_term);
        pol.deductible = c.deductible;
        pol.limitation_days = c.limitation;
        pol.row = static_cast<std::size_t>(k + 1);
        out.policies.push_back(pol);
        if (p <= 0.0) continue;

        std::geometric_distribution<long> gap(p);
        const long end = start + c.policy_term;
        for (long day = start + gap(rng); day < end; day += 1 + gap(rng)) {
            const double size = std::exp(a + c.severity_sigma * normal(rng));
            const long lag = static_cast<long>(std::floor(delay(rng)));
            out.claim_sizes.push_back(size);
            if (day >= t) continue;  // not yet incurred at the reporting date
            if (size < c.deductible || lag > c.limitation) continue;  // never reportable
            if (day + lag > t) {
                unreported += size;
                ++out.true_unreported_count;
                continue;
            }
            ClaimRecord cl;
            cl.policy_id = pol.policy_id;
            cl.claim_id = "C" + std::to_string(++claim_no);
            cl.occurrence_date = from_day_number(epoch + day);
            cl.report_date = from_day_number(epoch + day + lag);
            cl.settlement_date = cl.report_date;
            cl.paid_to_date = size;
            cl.settled = true;
            cl.row = static_cast<std::size_t>(claim_no);
            out.claims.push_back(cl);
        }
    }
    out.true_unreported_total = unreported.value();
    return out;
}

ReplicationResult run_replication(const SimulationConfig& c, int replication) {
    const SimulatedPortfolio portfolio =
        simulate_portfolio(c, c.seed, static_cast<std::uint64_t>(replication));
    ReplicationResult r;
    r.replication = replication;
    r.true_unreported = portfolio.true_unreported_total;

    const CensoredTally sample =
        tally_censored_sample(portfolio.policies, portfolio.claims, portfolio.reporting_date);

    double top = 0.0;
    for (const auto& cl : portfolio.claims) top = std::max(top, cl.paid_to_date);
    std::vector<double> s_edges{0.0};
    if (top > 0.0) {
        const double step = top / c.s_cells;
        for (int i = 1; i <= c.s_cells; ++i) s_edges.push_back(step * i);
    }
    const Grid grid(s_edges,
                    uniform_edges(0.0, static_cast<double>(c.limitation) + 1.0, c.tau_step));

    FitConfig fc;
    fc.tolerance = c.tolerance;
    fc.max_iterations = c.max_iterations;
    const DistributionEstimate est = fit(group(sample, grid), fc);
    r.iterations = est.iterations;
    r.converged = est.converged;

    const IbnrTotals ibnr = portfolio_ibnr(est, sample);
    r.estimate = ibnr.mean;
    r.sd = std::sqrt(ibnr.variance);
    if (r.true_unreported > 0.0) {
        r.ratio = r.estimate / r.true_unreported;
    } else {
        r.excluded = true;
    }
    return r;
}

double sample_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

AccuracyResult run_accuracy_study(const SimulationConfig& c) {
    check_config(c);
    const int n = c.replications;
    std::vector<ReplicationResult> results(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));

    unsigned workers = c.threads > 0 ? static_cast<unsigned>(c.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int k = next++; k < n; k = next++) {
            try {
                results[k] = run_replication(c, k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    AccuracyResult out;
    out.band_level = c.band_level;
    out.replications = results;
    const double z = tolerance_multiplier(c.band_level, QuantileMode::TwoSided);
    detail::CompensatedSum width;
    for (const auto& r : results) {
        if (!r.converged) ++out.not_converged;
        if (r.excluded) {
            ++out.excluded;
            continue;
        }
        out.ratios.push_back(r.ratio);
        if (r.estimate > 0.0) width += 2.0 * z * r.sd / r.estimate;
    }
    if (out.ratios.empty()) return out;

    const double m = static_cast<double>(out.ratios.size());
    detail::CompensatedSum sum;
    for (double k : out.ratios) sum += k;
    out.mean = sum.value() / m;
    detail::CompensatedSum m2, m3;
    for (double k : out.ratios) {
        const double d = k - out.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    out.variance = out.ratios.size() > 1 ? m2.value() / (m - 1.0) : 0.0;
    const double pop2 = m2.value() / m;
    out.skewness = pop2 > 0.0 ? (m3.value() / m) / std::pow(pop2, 1.5) : 0.0;

    std::vector<double> sorted = out.ratios;
    std::sort(sorted.begin(), sorted.end());
    out.median = sample_quantile(sorted, 0.5);
    out.band_lower = sample_quantile(sorted, (1.0 - c.band_level) / 2.0);
    out.band_upper = sample_quantile(sorted, 1.0 - (1.0 - c.band_level) / 2.0);
    out.empirical_width = out.band_upper - out.band_lower;
    out.analytic_width = width.value() / m;
    return out;
}

}  // namespace qedflow

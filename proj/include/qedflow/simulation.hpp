#ifndef QEDFLOW_SIMULATION_HPP
#define QEDFLOW_SIMULATION_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "qedflow/dates.hpp"
#include "qedflow/registers.hpp"

namespace qedflow {

enum class FrequencyBasis { PerTerm, PerDay };

FrequencyBasis parse_frequency_basis(std::string_view text);
std::string_view to_string(FrequencyBasis basis);

struct SimulationConfig {
    long n_policies = 10000;
    long policy_term = 365;  // days
    double mean_claim = 100.0;
    double frequency = 0.2;
    FrequencyBasis frequency_basis = FrequencyBasis::PerTerm;
    double severity_sigma = 0.9;
    double delay_shape = 1.0;
    double delay_scale = 1000.0;  // days
    long sales_window = 3650;     // policy starts are uniform over this many days
    long reporting_offset = 0;    // reporting date = epoch + sales_window + offset
    long limitation = kDefaultLimitationDays;
    double deductible = 0.0;
    int replications = 200;
    std::uint64_t seed = 1;
    Date epoch{std::chrono::year{2000}, std::chrono::month{1}, std::chrono::day{1}};

    // estimation settings of the accuracy study
    int s_cells = 200;
    double tau_step = 15.0;
    double tolerance = 1e-9;
    int max_iterations = 10000;
    double band_level = 0.98;
    int threads = 0;  // 0: hardware concurrency
};

// Throws std::invalid_argument naming the offending field.
void check_config(const SimulationConfig& config);

// Probability of a claim on any single policy day.
double daily_claim_probability(const SimulationConfig& config);

struct SimulatedPortfolio {
    Date reporting_date;
    std::vector<PolicyRecord> policies;
    std::vector<ClaimRecord> claims;  // reported by the reporting date
    double true_unreported_total = 0.0;
    long true_unreported_count = 0;
    std::vector<double> claim_sizes;  // every simulated claim, reported or not
};

// One synthetic portfolio. Claims occur at most once per policy day, sizes
// are lognormal with mean mean_claim, delays gamma distributed and floored
// to whole days. Claims below the deductible or with delay beyond the
// limitation period are never reported. `stream` selects an independent
// random substream of `seed`.
SimulatedPortfolio simulate_portfolio(const SimulationConfig& config, std::uint64_t seed,
                                      std::uint64_t stream = 0);

struct ReplicationResult {
    int replication = 0;
    double true_unreported = 0.0;
    double estimate = 0.0;
    double sd = 0.0;
    double ratio = 0.0;
    int iterations = 0;
    bool converged = false;
    bool excluded = false;  // true unreported total was zero
};

struct AccuracyResult {
    std::vector<ReplicationResult> replications;
    std::vector<double> ratios;  // included replications in order
    double mean = 0.0;
    double median = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double band_level = 0.98;
    double band_lower = 0.0;  // empirical quantiles of the ratios
    double band_upper = 0.0;
    double empirical_width = 0.0;
    // Mean over replications of the Gaussian band width relative to the
    // estimate, 2 z sqrt(D) / M.
    double analytic_width = 0.0;
    int excluded = 0;
    int not_converged = 0;
};

ReplicationResult run_replication(const SimulationConfig& config, int replication);

// Runs config.replications replications in parallel and aggregates them in
// replication order, so the result does not depend on the thread count.
AccuracyResult run_accuracy_study(const SimulationConfig& config);

// Linear-interpolation sample quantile of sorted data.
double sample_quantile(const std::vector<double>& sorted, double q);

}  // namespace qedflow

#endif  // QEDFLOW_SIMULATION_HPP

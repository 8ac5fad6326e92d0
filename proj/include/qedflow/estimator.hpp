#ifndef QEDFLOW_ESTIMATOR_HPP
#define QEDFLOW_ESTIMATOR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qedflow/grid.hpp"
#include "qedflow/sample.hpp"

namespace qedflow {

struct IterationRecord {
    int iteration = 0;
    double log_likelihood = 0.0;  // grouped log-likelihood of the iterate the step started from
    double delta = 0.0;           // sup-norm CDF change produced by the step
};

// Probability masses on a grid: finite cells in Grid::index order followed
// by the zero-claim atom.
struct DistributionEstimate {
    Grid grid;
    std::vector<double> mass;
    int iterations = 0;
    double final_delta = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<IterationRecord> history;

    double cell(std::size_t s_cell, std::size_t tau_cell) const {
        return mass[grid.index(s_cell, tau_cell)];
    }
    double atom() const { return mass[grid.atom_index()]; }
};

struct FitConfig {
    double tolerance = 1e-9;
    int max_iterations = 10000;
    // Custom starting masses (cell order as in DistributionEstimate); the
    // uniform distribution over all cells when absent.
    std::optional<std::vector<double>> initial_mass;
};

// A censoring set with its multiplicity.
struct WeightedSet {
    CensoringSet set;
    double count = 0.0;
};

DistributionEstimate uniform_estimate(const Grid& grid);

std::vector<WeightedSet> weighted_sets(const GroupedSample& grouped);

// Estimate restricted to the set and renormalized; uniform over the set when
// the set carries no mass. Throws std::invalid_argument for an empty set.
std::vector<double> conditional_mass(const DistributionEstimate& estimate, const CensoringSet& set);
std::vector<double> conditional_mass(const DistributionEstimate& estimate, const PatternKey& key);

// One self-consistency update: (1/n) sum_k count_k * P(. | C_k).
DistributionEstimate em_step(const DistributionEstimate& estimate, const GroupedSample& grouped);
DistributionEstimate em_step(const DistributionEstimate& estimate,
                             std::span<const WeightedSet> sets);

// Iterates em_step until the sup-norm CDF change drops below the tolerance
// or max_iterations is reached (converged == false then).
DistributionEstimate fit(const GroupedSample& grouped, const FitConfig& config = {});
DistributionEstimate fit(const Grid& grid, std::span<const WeightedSet> sets,
                         const FitConfig& config = {});

double log_likelihood(const DistributionEstimate& estimate, std::span<const WeightedSet> sets);
double log_likelihood(const DistributionEstimate& estimate, const GroupedSample& grouped);

// Sup-norm CDF distance between two estimates on the same grid, evaluated at
// every grid corner including the infinite delay column.
double cdf_distance(const DistributionEstimate& a, const DistributionEstimate& b);

// Sup-norm CDF change produced by one more em_step.
double self_consistency_residual(const DistributionEstimate& estimate,
                                 const GroupedSample& grouped);

// P(S < s, delay < tau), counting the cells that lie entirely inside the
// quadrant (exact at grid edges). tau = +inf selects every delay including
// the infinite one.
double cdf(const DistributionEstimate& estimate, double s, double tau);

// One-dimensional distribution on a list of cells.
struct Marginal {
    std::vector<double> lower;  // cell lower bounds
    std::vector<double> upper;  // cell upper bounds (inf for unbounded)
    std::vector<double> mass;
};

// Claim-size marginal. Entry 0 is the point s = 0 (zero-claim atom), the
// remaining entries are the claim-size cells summed over all delays.
Marginal marginal_claim(const DistributionEstimate& estimate);
// Delay marginal. The last entry is tau = inf (the zero-claim atom).
Marginal marginal_delay(const DistributionEstimate& estimate);

}  // namespace qedflow

#endif  // QEDFLOW_ESTIMATOR_HPP

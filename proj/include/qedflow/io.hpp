#ifndef QEDFLOW_IO_HPP
#define QEDFLOW_IO_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qedflow/analytics.hpp"
#include "qedflow/classical.hpp"
#include "qedflow/estimator.hpp"
#include "qedflow/grid.hpp"
#include "qedflow/sample.hpp"
#include "qedflow/simulation.hpp"

namespace qedflow {

// Shortest text that reads back to the same double; "inf" for infinity.
std::string format_number(double value);
// Money with two decimals.
std::string format_money(double value);
// Six significant digits.
std::string format_probability(double value);

// Rounded values for JSON reports.
double round_money(double value);
double round_probability(double value);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
void write_grid_json(std::ostream& out, const Grid& grid);
Grid read_grid_json(std::istream& in, std::string_view source);

// Columns s_bin,delta,tau_bin,count,low_cells,limit_cell. Zero claims have
// tau_bin "inf".
void write_grouped_csv(std::ostream& out, const GroupedSample& grouped);
GroupedSample read_grouped_csv(std::istream& in, std::string_view source, const Grid& grid);

// Columns s_lo,s_hi,tau_lo,tau_hi,mass in cell order, then the zero-claim
// atom as 0,0,inf,inf.
void write_estimate_csv(std::ostream& out, const DistributionEstimate& estimate);
// Rebuilds the grid from the cell bounds. Iteration metadata is not part of
// the CSV and stays at its defaults.
DistributionEstimate read_estimate_csv(std::istream& in, std::string_view source);
void write_estimate_json(std::ostream& out, const DistributionEstimate& estimate,
                         const FitConfig& config);
// Columns iteration,log_likelihood,delta.
void write_convergence_log(std::ostream& out, const DistributionEstimate& estimate);

// Columns delta,amount,delay,elapsed,deductible,limitation,count. The delay
// is blank for not-reported units and "inf" for zero claims.
void write_sample_csv(std::ostream& out, const CensoredTally& sample);
CensoredTally read_sample_csv(std::istream& in, std::string_view source);

// Header: origin label column then one column per development age.
void write_triangle_csv(std::ostream& out, const Triangle& triangle);
Triangle read_triangle_csv(std::istream& in, std::string_view source, const Period& period);

// Columns claim_id,occurrence_date,payment_date,amount.
std::vector<Payment> read_payments_csv(std::istream& in, std::string_view source);

nlohmann::json report_to_json(const ReserveReport& report, std::span<const ScheduleRow> schedule);
// Columns t_lo,t_hi,lower,mean,upper,sd,expected_claims.
void write_schedule_csv(std::ostream& out, std::span<const ScheduleRow> schedule);

nlohmann::json simulation_config_to_json(const SimulationConfig& config);
// Keys as in SimulationConfig; missing keys keep their defaults, unknown
// keys are an error.
SimulationConfig simulation_config_from_json(const nlohmann::json& j);
SimulationConfig read_simulation_config(std::istream& in, std::string_view source);

// Columns replication,true_unreported,estimate,sd,ratio,iterations,converged,excluded.
void write_replications_csv(std::ostream& out, const AccuracyResult& result);
nlohmann::json accuracy_to_json(const AccuracyResult& result);

}  // namespace qedflow

#endif  // QEDFLOW_IO_HPP

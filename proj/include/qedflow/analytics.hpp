#ifndef QEDFLOW_ANALYTICS_HPP
#define QEDFLOW_ANALYTICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qedflow/estimator.hpp"
#include "qedflow/sample.hpp"

namespace qedflow {

// Expected claim per exposure unit: sum of cell value x cell mass. The
// zero-claim atom contributes nothing.
double net_premium_daily(const DistributionEstimate& estimate);
// P(S > 0) per exposure unit: everything except the zero-claim atom.
double claim_frequency_daily(const DistributionEstimate& estimate);
// Mean claim given a claim occurred; none when the frequency is zero.
std::optional<double> average_severity(const DistributionEstimate& estimate);

// Expected claims over the exposure minus what has already been paid.
double claims_reserve(double premium_per_unit, std::int64_t exposure_units, double paid_total);
double claims_reserve(const DistributionEstimate& estimate, std::int64_t exposure_units,
                      double paid_total);

// Reporting window [start, end) in units after the reporting date.
struct Window {
    double start = 0.0;
    double end = kInfinity;
};

struct WindowStats {
    double expected_claim = 0.0;
    double variance = 0.0;
    double report_probability = 0.0;
};

// Conditional contribution of one not-reported unit to claims reported in
// `window`, given nothing was reported by the reporting date. Only claims
// above the deductible count. Delays are spread uniformly inside each delay
// cell and reporting stops at the limitation period (rounded up to the
// enclosing delay cell). Throws std::domain_error when no mass lies beyond
// the elapsed time.
WindowStats window_stats(const DistributionEstimate& estimate, const CensoredObservation& obs,
                         const Window& window);

struct IbnrTotals {
    double mean = 0.0;
    double variance = 0.0;
    double expected_count = 0.0;
};

// Sums window_stats over every not-reported unit of the sample.
IbnrTotals portfolio_ibnr(const DistributionEstimate& estimate, const CensoredTally& sample,
                          const Window& window = {});
IbnrTotals portfolio_ibnr(const DistributionEstimate& estimate,
                          std::span<const CensoredObservation> sample, const Window& window = {});

enum class QuantileMode {
    TwoSided,  // z = Phi^-1(1 - (1 - p) / 2)
    OneSided,  // z = Phi^-1(p)
};

QuantileMode parse_quantile_mode(std::string_view text);
std::string_view to_string(QuantileMode mode);
double tolerance_multiplier(double p, QuantileMode mode);

struct ToleranceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

// Gaussian band mean -/+ z sqrt(variance); the lower limit is floored at 0.
ToleranceInterval tolerance_interval(double mean, double variance, double p,
                                     QuantileMode mode = QuantileMode::TwoSided);

struct ScheduleRow {
    Window window;
    double mean = 0.0;
    double sd = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double expected_count = 0.0;
};

// IBNR spread over consecutive reporting windows. Edges must start at 0 and
// ascend; when the last edge is finite a final [last, inf) row is appended
// so the rows always cover [0, inf).
std::vector<ScheduleRow> ibnr_schedule(const DistributionEstimate& estimate,
                                       const CensoredTally& sample, std::span<const double> edges,
                                       double p, QuantileMode mode = QuantileMode::TwoSided);

struct OcrEstimate {
    double by_difference = 0.0;
    double by_sum = 0.0;
};

// Outstanding claims reserve two ways: claims reserve minus IBNR, and the
// sum over reported-outstanding units of E[S | S >= paid, delay cell] minus
// paid.
OcrEstimate ocr(const DistributionEstimate& estimate, const CensoredTally& sample,
                double claims_reserve, double ibnr);

struct ReserveReport {
    double net_premium_daily = 0.0;
    double frequency_daily = 0.0;
    std::optional<double> average_severity;
    std::int64_t exposure = 0;
    double paid_total = 0.0;
    double claims_reserve = 0.0;
    double ibnr_mean = 0.0;
    double ibnr_sd = 0.0;
    double ibnr_expected_count = 0.0;
    std::optional<double> ibnr_average_claim;
    double ocr = 0.0;         // claims_reserve - ibnr_mean
    double ocr_by_sum = 0.0;  // from the reported-outstanding units
    double tolerance_p = 0.0;
    QuantileMode quantile_mode = QuantileMode::TwoSided;
    double ibnr_lower = 0.0;
    double ibnr_upper = 0.0;
};

ReserveReport reserve_report(const DistributionEstimate& estimate, const CensoredTally& sample,
                             std::int64_t exposure_units, double paid_total, double p,
                             QuantileMode mode = QuantileMode::TwoSided);

}  // namespace qedflow

#endif  // QEDFLOW_ANALYTICS_HPP

#ifndef QEDFLOW_CLASSICAL_HPP
#define QEDFLOW_CLASSICAL_HPP

#include <span>
#include <string>
#include <vector>

#include "qedflow/dates.hpp"

namespace qedflow {

// Length of an origin/development period, e.g. 6 months or 182 days.
struct Period {
    long count = 6;
    TimeUnit unit = TimeUnit::Month;
};

// Cumulative development triangle. Row i holds the values at development
// ages 1..rows[i].size() (in periods); future cells are simply absent.
struct Triangle {
    Period period;
    std::vector<std::string> origin_labels;
    std::vector<std::string> age_labels;
    std::vector<std::vector<double>> rows;

    std::size_t origins() const { return rows.size(); }
    std::size_t ages() const { return age_labels.size(); }
    double latest(std::size_t origin) const { return rows[origin].back(); }
};

// Throws std::invalid_argument unless every row is nonempty, no longer than
// the age list and no longer than the row above (a staircase), and the
// labels match the shape.
void check_shape(const Triangle& triangle);

struct Payment {
    std::string claim_id;
    Date occurrence_date;
    Date payment_date;
    double amount = 0.0;
};

// Buckets payments by origin period (of the occurrence) and calendar period
// (of the payment) counted from the period containing the earliest
// occurrence. Payments after the reporting date are ignored. Throws when a
// payment precedes its occurrence or nothing is left to tabulate.
Triangle build_triangle(std::span<const Payment> payments, const Period& period,
                        const Date& reporting_date);
// Same bucketing, counting each claim once from its first payment on.
Triangle build_count_triangle(std::span<const Payment> payments, const Period& period,
                              const Date& reporting_date);

struct ChainLadderResult {
    // Volume-weighted link ratios for ages 1->2, ..., followed by the tail
    // factor: one factor per development age.
    std::vector<double> factors;
    std::vector<double> to_ultimate;  // per origin: product of the remaining factors
    std::vector<std::vector<double>> completed;
    std::vector<double> ultimates;
    std::vector<double> reserves;  // per origin: ultimate - latest
    double reserve = 0.0;
};

ChainLadderResult chain_ladder(const Triangle& triangle, double tail_factor = 1.0);

struct MethodReserve {
    std::vector<double> ultimates;  // per origin
    std::vector<double> reserves;   // per origin, when the method splits them
    double reserve = 0.0;
};

// reserve_i = apriori_i (1 - 1 / to_ultimate_i).
MethodReserve bornhuetter_ferguson(const Triangle& triangle, std::span<const double> apriori,
                                   double tail_factor = 1.0);

// Chain-ladder projected ultimate claim counts times the average severity,
// less what has been paid.
MethodReserve frequency_severity(const Triangle& counts, double average_severity,
                                 double paid_total, double tail_factor = 1.0);

struct ReserveRange {
    double min = 0.0;
    double max = 0.0;
    double midpoint = 0.0;
};

ReserveRange reasonable_range(std::span<const double> reserves);

}  // namespace qedflow

#endif  // QEDFLOW_CLASSICAL_HPP

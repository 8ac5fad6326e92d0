#ifndef QEDFLOW_SAMPLE_HPP
#define QEDFLOW_SAMPLE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qedflow/dates.hpp"
#include "qedflow/grid.hpp"
#include "qedflow/registers.hpp"

namespace qedflow {

enum class Status : int { Settled = 0, ReportedOutstanding = 1, NotReported = 2 };

// What is known at the reporting date about one exposure unit (one policy
// day, or month) under the one-claim-per-unit convention. Times are in
// whole units.
struct CensoredObservation {
    Status status = Status::Settled;
    // Settled: exact claim. Outstanding: paid so far (lower bound).
    // NotReported: the deductible, i.e. the bound on reportable claims.
    double amount = 0.0;
    // Settled/Outstanding: exact delay. NotReported: elapsed time (lower
    // bound). Zero claim: none (infinite delay).
    std::optional<long> delay;
    long elapsed = 0;  // t - occurrence
    double deductible = 0.0;
    long limitation = 0;
    bool zero_claim = false;

    auto operator<=>(const CensoredObservation&) const = default;
};

struct SampleOptions {
    TimeUnit unit = TimeUnit::Day;
    // Limitation period in units for every policy; when absent each policy's
    // limitation_days is converted to units.
    std::optional<long> limitation_override;
};

// One observation per policy per unit in [start, min(end, reporting_date)).
// Events dated after the reporting date are ignored. Throws
// std::invalid_argument when a policy period is shorter than one unit or
// two claims of one policy fall into the same unit.
std::vector<CensoredObservation> build_censored_sample(std::span<const PolicyRecord> policies,
                                                       std::span<const ClaimRecord> claims,
                                                       const Date& reporting_date,
                                                       const SampleOptions& options = {});

// Same sample with identical observations collapsed into counts, built
// without materializing every policy day.
struct TalliedObservation {
    CensoredObservation observation;
    std::uint64_t count = 0;
};
using CensoredTally = std::vector<TalliedObservation>;

CensoredTally tally_censored_sample(std::span<const PolicyRecord> policies,
                                    std::span<const ClaimRecord> claims,
                                    const Date& reporting_date, const SampleOptions& options = {});
CensoredTally tally(std::span<const CensoredObservation> sample);
std::uint64_t total_count(const CensoredTally& tally);

enum class PatternKind : std::uint8_t { ZeroClaim, Exact, Outstanding, NotReported };

// Canonical description of an observation's censoring set on a grid.
// Fields that do not apply to a kind are zero.
struct PatternKey {
    PatternKind kind = PatternKind::ZeroClaim;
    std::uint32_t s_bin = 0;       // amount cell (Exact, Outstanding)
    std::uint32_t tau_bin = 0;     // delay cell, or elapsed cell for NotReported
    std::uint32_t low_cells = 0;   // NotReported: cells at or below the deductible
    std::uint32_t limit_cell = 0;  // NotReported: last reportable delay cell

    auto operator<=>(const PatternKey&) const = default;
};

int status_code(PatternKind kind);

PatternKey pattern_key(const Grid& grid, const CensoredObservation& obs);
CensoringSet censoring_set(const Grid& grid, const PatternKey& key);

struct GroupedSample {
    Grid grid;
    std::map<PatternKey, std::uint64_t> patterns;
    std::uint64_t total = 0;
};

// Throws std::out_of_range (with a hint to extend the grid) when an
// observation does not fit.
GroupedSample group(std::span<const CensoredObservation> sample, const Grid& grid);
GroupedSample group(const CensoredTally& tally, const Grid& grid);

}  // namespace qedflow

#endif  // QEDFLOW_SAMPLE_HPP

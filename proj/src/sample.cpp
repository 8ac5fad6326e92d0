#include "qedflow/sample.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace qedflow {

namespace {

struct PolicyUnits {
    long first = 0;       // first unit index
    long end = 0;         // one past the last observed unit
    long limitation = 0;  // in units
};

PolicyUnits policy_units(const PolicyRecord& p, long t_index, const SampleOptions& options) {
    const long start = unit_index(p.start_date, options.unit);
    const long stop = unit_index(p.end_date, options.unit);
    if (stop <= start) {
        throw std::invalid_argument("policy " + p.policy_id + ": period shorter than one " +
                                    std::string(to_string(options.unit)) + " unit");
    }
    PolicyUnits u;
    u.first = start;
    u.end = std::min(stop, t_index);
    u.limitation = options.limitation_override ? *options.limitation_override
                                               : days_to_units(p.limitation_days, options.unit);
    return u;
}

using ClaimsByPolicy = std::unordered_map<std::string, std::vector<const ClaimRecord*>>;

ClaimsByPolicy index_claims(std::span<const ClaimRecord> claims) {
    ClaimsByPolicy out;
    for (const auto& c : claims) out[c.policy_id].push_back(&c);
    return out;
}

// Claims of one policy keyed by occurrence unit; enforces one claim per unit.
std::map<long, const ClaimRecord*> claims_by_unit(const PolicyRecord& p, const PolicyUnits& units,
                                                  const ClaimsByPolicy& index,
                                                  const Date& reporting_date,
                                                  const SampleOptions& options) {
    std::map<long, const ClaimRecord*> out;
    const auto it = index.find(p.policy_id);
    if (it == index.end()) return out;
    for (const ClaimRecord* c : it->second) {
        // the unit holding the reporting date is not yet observed
        const long u = unit_index(c->occurrence_date, options.unit);
        if (u >= unit_index(reporting_date, options.unit)) continue;
        if (u < units.first || u >= units.end) {
            throw std::invalid_argument("claim " + c->claim_id +
                                        ": occurrence outside the observed units of policy " +
                                        p.policy_id);
        }
        if (!out.emplace(u, c).second) {
            throw std::invalid_argument("policy " + p.policy_id + ": claims " +
                                        out.at(u)->claim_id + " and " + c->claim_id +
                                        " fall into the same unit; use a finer time unit");
        }
    }
    return out;
}

// Observation for a unit that carries a claim reported by the reporting date.
CensoredObservation reported_observation(const ClaimRecord& c, long unit, long t_index,
                                         const PolicyRecord& p, const PolicyUnits& units,
                                         const Date& reporting_date, const SampleOptions& options) {
    CensoredObservation obs;
    const bool settled = c.settled && c.settlement_date && !(reporting_date < *c.settlement_date);
    obs.status = settled ? Status::Settled : Status::ReportedOutstanding;
    obs.amount = c.paid_to_date;
    obs.delay = unit_index(c.report_date, options.unit) - unit;
    obs.elapsed = t_index - unit;
    obs.deductible = p.deductible;
    obs.limitation = units.limitation;
    return obs;
}

// Observation for a unit without a reported claim.
CensoredObservation silent_observation(long elapsed, double deductible, long limitation) {
    CensoredObservation obs;
    obs.elapsed = elapsed;
    obs.deductible = deductible;
    obs.limitation = limitation;
    if (elapsed >= limitation) {
        // Nothing can be reported any more: the unit carried a zero claim.
        obs.status = Status::Settled;
        obs.zero_claim = true;
    } else {
        obs.status = Status::NotReported;
        obs.amount = deductible;
        obs.delay = elapsed;
    }
    return obs;
}

bool is_reported(const ClaimRecord& c, const Date& reporting_date) {
    return !(reporting_date < c.report_date);
}

}  // namespace

std::vector<CensoredObservation> build_censored_sample(std::span<const PolicyRecord> policies,
                                                       std::span<const ClaimRecord> claims,
                                                       const Date& reporting_date,
                                                       const SampleOptions& options) {
    const long t_index = unit_index(reporting_date, options.unit);
    const auto index = index_claims(claims);
    std::vector<CensoredObservation> out;
    for (const auto& p : policies) {
        const PolicyUnits units = policy_units(p, t_index, options);
        const auto by_unit = claims_by_unit(p, units, index, reporting_date, options);
        for (long u = units.first; u < units.end; ++u) {
            const auto it = by_unit.find(u);
            if (it != by_unit.end() && is_reported(*it->second, reporting_date)) {
                out.push_back(reported_observation(*it->second, u, t_index, p, units,
                                                   reporting_date, options));
            } else {
                out.push_back(silent_observation(t_index - u, p.deductible, units.limitation));
            }
        }
    }
    return out;
}

CensoredTally tally_censored_sample(std::span<const PolicyRecord> policies,
                                    std::span<const ClaimRecord> claims,
                                    const Date& reporting_date, const SampleOptions& options) {
    const long t_index = unit_index(reporting_date, options.unit);
    const auto index = index_claims(claims);

    // Silent units are counted per (deductible, limitation) with a
    // difference array over elapsed time.
    struct Silent {
        double deductible;
        long limitation;
        std::vector<std::int64_t> diff;  // indexed by elapsed
    };
    std::map<std::pair<double, long>, Silent> silent;
    std::map<CensoredObservation, std::uint64_t> counts;

    for (const auto& p : policies) {
        const PolicyUnits units = policy_units(p, t_index, options);
        if (units.end <= units.first) continue;
        const auto by_unit = claims_by_unit(p, units, index, reporting_date, options);
        auto& s = silent[{p.deductible, units.limitation}];
        s.deductible = p.deductible;
        s.limitation = units.limitation;
        const long lo = t_index - units.end + 1;
        const long hi = t_index - units.first;  // inclusive
        if (s.diff.size() < static_cast<std::size_t>(hi + 2)) s.diff.resize(hi + 2, 0);
        s.diff[lo] += 1;
        s.diff[hi + 1] -= 1;
        for (const auto& [u, c] : by_unit) {
            if (!is_reported(*c, reporting_date)) continue;
            const long e = t_index - u;
            s.diff[e] -= 1;
            s.diff[e + 1] += 1;
            ++counts[reported_observation(*c, u, t_index, p, units, reporting_date, options)];
        }
    }
    for (const auto& [key, s] : silent) {
        std::int64_t running = 0;
        for (std::size_t e = 0; e < s.diff.size(); ++e) {
            running += s.diff[e];
            if (running > 0) {
                counts[silent_observation(static_cast<long>(e), s.deductible, s.limitation)] +=
                    static_cast<std::uint64_t>(running);
            }
        }
    }

    CensoredTally out;
    out.reserve(counts.size());
    for (const auto& [obs, n] : counts) out.push_back({obs, n});
    return out;
}

CensoredTally tally(std::span<const CensoredObservation> sample) {
    std::map<CensoredObservation, std::uint64_t> counts;
    for (const auto& obs : sample) ++counts[obs];
    CensoredTally out;
    out.reserve(counts.size());
    for (const auto& [obs, n] : counts) out.push_back({obs, n});
    return out;
}

std::uint64_t total_count(const CensoredTally& tally) {
    std::uint64_t n = 0;
    for (const auto& t : tally) n += t.count;
    return n;
}

int status_code(PatternKind kind) {
    switch (kind) {
        case PatternKind::ZeroClaim:
        case PatternKind::Exact:
            return 0;
        case PatternKind::Outstanding:
            return 1;
        case PatternKind::NotReported:
            return 2;
    }
    return 0;
}

PatternKey pattern_key(const Grid& grid, const CensoredObservation& obs) {
    PatternKey key;
    if (obs.zero_claim) {
        key.kind = PatternKind::ZeroClaim;
        return key;
    }
    switch (obs.status) {
        case Status::Settled:
        case Status::ReportedOutstanding:
            if (!obs.delay) throw std::invalid_argument("reported observation without a delay");
            key.kind = obs.status == Status::Settled ? PatternKind::Exact : PatternKind::Outstanding;
            key.s_bin = static_cast<std::uint32_t>(grid.s_cell(obs.amount));
            key.tau_bin = static_cast<std::uint32_t>(grid.tau_cell(static_cast<double>(*obs.delay)));
            break;
        case Status::NotReported:
            if (obs.elapsed >= obs.limitation) {
                throw std::invalid_argument("not-reported observation past its limitation period");
            }
            key.kind = PatternKind::NotReported;
            key.tau_bin = static_cast<std::uint32_t>(grid.tau_cell(static_cast<double>(obs.elapsed)));
            key.low_cells = static_cast<std::uint32_t>(grid.low_cells(obs.deductible));
            key.limit_cell =
                static_cast<std::uint32_t>(grid.limit_cell(static_cast<double>(obs.limitation)));
            break;
    }
    return key;
}

CensoringSet censoring_set(const Grid& grid, const PatternKey& key) {
    const std::size_t top_s = grid.s_cells() - 1;
    CensoringSet set;
    switch (key.kind) {
        case PatternKind::ZeroClaim:
            set.zero_atom = true;
            break;
        case PatternKind::Exact:
            set.rects.push_back({key.s_bin, key.s_bin, key.tau_bin, key.tau_bin});
            break;
        case PatternKind::Outstanding:
            set.rects.push_back({key.s_bin, top_s, key.tau_bin, key.tau_bin});
            break;
        case PatternKind::NotReported:
            // {s <= d} x (0, L]  u  {s > d} x (t_k, L]  u  {(0, inf)}
            if (key.low_cells > 0) {
                set.rects.push_back({0, key.low_cells - 1u, 0, key.limit_cell});
            }
            if (key.low_cells <= top_s && key.tau_bin <= key.limit_cell) {
                set.rects.push_back({key.low_cells, top_s, key.tau_bin, key.limit_cell});
            }
            set.zero_atom = true;
            break;
    }
    return set;
}

GroupedSample group(std::span<const CensoredObservation> sample, const Grid& grid) {
    GroupedSample out;
    out.grid = grid;
    for (const auto& obs : sample) {
        ++out.patterns[pattern_key(grid, obs)];
        ++out.total;
    }
    return out;
}

GroupedSample group(const CensoredTally& tally, const Grid& grid) {
    GroupedSample out;
    out.grid = grid;
    for (const auto& t : tally) {
        out.patterns[pattern_key(grid, t.observation)] += t.count;
        out.total += t.count;
    }
    return out;
}

}  // namespace qedflow

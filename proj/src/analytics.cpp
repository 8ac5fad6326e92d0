#include "qedflow/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "summation.hpp"

namespace qedflow {

namespace {

using Wide = long double;

// Cumulative delay profile of the claim-size cells from `first_cell` up:
// moments 0, 1 and 2 of the claim value, piecewise linear in the delay.
class DelayProfile {
public:
    DelayProfile(const DistributionEstimate& est, std::size_t first_cell) : grid_(&est.grid) {
        const Grid& g = est.grid;
        const std::size_t T = g.tau_cells();
        for (auto& c : col_) c.assign(T, 0.0L);
        for (std::size_t i = first_cell; i < g.s_cells(); ++i) {
            const Wide v = g.s_value(i);
            for (std::size_t j = 0; j < T; ++j) {
                const Wide m = est.cell(i, j);
                col_[0][j] += m;
                col_[1][j] += m * v;
                col_[2][j] += m * v * v;
            }
        }
        for (int k = 0; k < 3; ++k) {
            cum_[k].assign(T + 1, 0.0L);
            for (std::size_t j = 0; j < T; ++j) cum_[k][j + 1] = cum_[k][j] + col_[k][j];
        }
    }

    // Moment k of the mass with delay <= tau.
    Wide at(int k, double tau) const {
        const auto& edges = grid_->tau_edges();
        if (tau <= edges.front()) return 0.0L;
        if (tau >= edges.back()) return cum_[k].back();
        const std::size_t j = grid_->tau_cell(tau);
        const Wide frac = (Wide(tau) - edges[j]) / (Wide(edges[j + 1]) - edges[j]);
        return cum_[k][j] + frac * col_[k][j];
    }
    Wide total(int k) const { return cum_[k].back(); }

private:
    const Grid* grid_;
    std::vector<Wide> col_[3];
    std::vector<Wide> cum_[3];
};

class IbnrCalculator {
public:
    explicit IbnrCalculator(const DistributionEstimate& est) : est_(est), all_(est, 0) {}

    WindowStats stats(const CensoredObservation& obs, const Window& window) {
        if (obs.zero_claim || obs.status != Status::NotReported) {
            throw std::invalid_argument("window_stats needs a not-reported observation");
        }
        if (!(window.start >= 0.0) || !(window.end > window.start)) {
            throw std::invalid_argument("window must satisfy 0 <= start < end");
        }
        const Grid& g = est_.grid;
        const double elapsed = static_cast<double>(obs.elapsed);
        if (elapsed >= static_cast<double>(obs.limitation)) {
            throw std::invalid_argument("not-reported observation past its limitation period");
        }
        const double reportable = g.tau_upper(g.limit_cell(static_cast<double>(obs.limitation)));

        const Wide denom = Wide(est_.atom()) + (all_.total(0) - all_.at(0, elapsed));
        if (!(denom > 0.0L)) {
            throw std::domain_error("no conditional mass beyond elapsed time " +
                                    std::to_string(obs.elapsed));
        }
        WindowStats out;
        const double lo = elapsed + window.start;
        const double hi = std::min(elapsed + window.end, reportable);
        if (!(hi > lo)) return out;

        const DelayProfile& high = profile(g.low_cells(obs.deductible));
        const Wide p = (high.at(0, hi) - high.at(0, lo)) / denom;
        const Wide m1 = (high.at(1, hi) - high.at(1, lo)) / denom;
        const Wide m2 = (high.at(2, hi) - high.at(2, lo)) / denom;
        out.report_probability = static_cast<double>(std::max(p, 0.0L));
        out.expected_claim = static_cast<double>(std::max(m1, 0.0L));
        out.variance = static_cast<double>(std::max(m2 - m1 * m1, 0.0L));
        return out;
    }

    IbnrTotals totals(const CensoredTally& sample, const Window& window) {
        detail::CompensatedSum mean, var, count;
        for (const auto& t : sample) {
            const auto& obs = t.observation;
            if (obs.zero_claim || obs.status != Status::NotReported) continue;
            const WindowStats s = stats(obs, window);
            const double n = static_cast<double>(t.count);
            mean += n * s.expected_claim;
            var += n * s.variance;
            count += n * s.report_probability;
        }
        return {mean.value(), var.value(), count.value()};
    }

private:
    const DelayProfile& profile(std::size_t first_cell) {
        auto it = profiles_.find(first_cell);
        if (it == profiles_.end()) it = profiles_.try_emplace(first_cell, est_, first_cell).first;
        return it->second;
    }

    const DistributionEstimate& est_;
    DelayProfile all_;
    std::map<std::size_t, DelayProfile> profiles_;
};

}  // namespace

double net_premium_daily(const DistributionEstimate& estimate) {
    const Grid& g = estimate.grid;
    detail::CompensatedSum total;
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        const double v = g.s_value(i);
        for (std::size_t j = 0; j < g.tau_cells(); ++j) total += v * estimate.cell(i, j);
    }
    return total.value();
}

double claim_frequency_daily(const DistributionEstimate& estimate) {
    detail::CompensatedSum total;
    for (std::size_t c = 0; c < estimate.grid.finite_cells(); ++c) total += estimate.mass[c];
    return total.value();
}

std::optional<double> average_severity(const DistributionEstimate& estimate) {
    const double freq = claim_frequency_daily(estimate);
    if (!(freq > 0.0)) return std::nullopt;
    return net_premium_daily(estimate) / freq;
}

double claims_reserve(double premium_per_unit, std::int64_t exposure_units, double paid_total) {
    if (exposure_units <= 0) throw std::invalid_argument("exposure must be positive");
    if (!(paid_total >= 0.0)) throw std::invalid_argument("paid total must be nonnegative");
    return premium_per_unit * static_cast<double>(exposure_units) - paid_total;
}

double claims_reserve(const DistributionEstimate& estimate, std::int64_t exposure_units,
                      double paid_total) {
    return claims_reserve(net_premium_daily(estimate), exposure_units, paid_total);
}

WindowStats window_stats(const DistributionEstimate& estimate, const CensoredObservation& obs,
                         const Window& window) {
    IbnrCalculator calc(estimate);
    return calc.stats(obs, window);
}

IbnrTotals portfolio_ibnr(const DistributionEstimate& estimate, const CensoredTally& sample,
                          const Window& window) {
    IbnrCalculator calc(estimate);
    return calc.totals(sample, window);
}

IbnrTotals portfolio_ibnr(const DistributionEstimate& estimate,
                          std::span<const CensoredObservation> sample, const Window& window) {
    return portfolio_ibnr(estimate, tally(sample), window);
}

QuantileMode parse_quantile_mode(std::string_view text) {
    if (text == "two-sided") return QuantileMode::TwoSided;
    if (text == "one-sided") return QuantileMode::OneSided;
    throw std::invalid_argument("unknown quantile mode '" + std::string(text) +
                                "' (expected two-sided or one-sided)");
}

std::string_view to_string(QuantileMode mode) {
    return mode == QuantileMode::TwoSided ? "two-sided" : "one-sided";
}

double tolerance_multiplier(double p, QuantileMode mode) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("tolerance level must lie in (0, 1)");
    const boost::math::normal standard;
    const double level = mode == QuantileMode::TwoSided ? 1.0 - (1.0 - p) / 2.0 : p;
    return boost::math::quantile(standard, level);
}

ToleranceInterval tolerance_interval(double mean, double variance, double p, QuantileMode mode) {
    if (!(variance >= 0.0)) throw std::invalid_argument("variance must be nonnegative");
    const double half = tolerance_multiplier(p, mode) * std::sqrt(variance);
    return {std::max(0.0, mean - half), mean + half};
}

std::vector<ScheduleRow> ibnr_schedule(const DistributionEstimate& estimate,
                                       const CensoredTally& sample, std::span<const double> edges,
                                       double p, QuantileMode mode) {
    if (edges.empty() || edges.front() != 0.0) {
        throw std::invalid_argument("schedule edges must start at 0");
    }
    std::vector<double> bounds(edges.begin(), edges.end());
    for (std::size_t k = 1; k < bounds.size(); ++k) {
        if (!(bounds[k] > bounds[k - 1])) {
            throw std::invalid_argument("schedule edges must be strictly ascending");
        }
    }
    if (bounds.back() != kInfinity) bounds.push_back(kInfinity);

    IbnrCalculator calc(estimate);
    std::vector<ScheduleRow> rows;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        ScheduleRow row;
        row.window = {bounds[k], bounds[k + 1]};
        const IbnrTotals t = calc.totals(sample, row.window);
        row.mean = t.mean;
        row.sd = std::sqrt(t.variance);
        row.expected_count = t.expected_count;
        const ToleranceInterval band = tolerance_interval(t.mean, t.variance, p, mode);
        row.lower = band.lower;
        row.upper = band.upper;
        rows.push_back(row);
    }
    return rows;
}

OcrEstimate ocr(const DistributionEstimate& estimate, const CensoredTally& sample,
                double claims_reserve, double ibnr) {
    const Grid& g = estimate.grid;
    detail::CompensatedSum outstanding;
    for (const auto& t : sample) {
        const auto& obs = t.observation;
        if (obs.zero_claim || obs.status != Status::ReportedOutstanding) continue;
        const PatternKey key = pattern_key(g, obs);
        Wide mass = 0.0L, value = 0.0L;
        for (std::size_t i = key.s_bin; i < g.s_cells(); ++i) {
            const Wide m = estimate.cell(i, key.tau_bin);
            mass += m;
            value += m * std::max(g.s_value(i), obs.amount);
        }
        if (!(mass > 0.0L)) continue;
        const double expected = static_cast<double>(value / mass);
        outstanding += static_cast<double>(t.count) * (expected - obs.amount);
    }
    return {claims_reserve - ibnr, outstanding.value()};
}

ReserveReport reserve_report(const DistributionEstimate& estimate, const CensoredTally& sample,
                             std::int64_t exposure_units, double paid_total, double p,
                             QuantileMode mode) {
    ReserveReport r;
    r.net_premium_daily = net_premium_daily(estimate);
    r.frequency_daily = claim_frequency_daily(estimate);
    r.average_severity = average_severity(estimate);
    r.exposure = exposure_units;
    r.paid_total = paid_total;
    r.claims_reserve = claims_reserve(r.net_premium_daily, exposure_units, paid_total);

    const IbnrTotals ibnr = portfolio_ibnr(estimate, sample);
    r.ibnr_mean = ibnr.mean;
    r.ibnr_sd = std::sqrt(ibnr.variance);
    r.ibnr_expected_count = ibnr.expected_count;
    if (ibnr.expected_count > 0.0) r.ibnr_average_claim = ibnr.mean / ibnr.expected_count;

    const OcrEstimate o = ocr(estimate, sample, r.claims_reserve, r.ibnr_mean);
    r.ocr = o.by_difference;
    r.ocr_by_sum = o.by_sum;

    r.tolerance_p = p;
    r.quantile_mode = mode;
    const ToleranceInterval band = tolerance_interval(ibnr.mean, ibnr.variance, p, mode);
    r.ibnr_lower = band.lower;
    r.ibnr_upper = band.upper;
    return r;
}

}  // namespace qedflow

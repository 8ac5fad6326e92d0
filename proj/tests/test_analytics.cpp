#include <doctest.h>

#include "support.hpp"

using namespace qedflow;
using support::d;

namespace {

// Window statistics by direct summation over cells, each cell weighted by
// the fraction of its delay range that falls in the shifted window.
WindowStats oracle_window(const DistributionEstimate& e, const CensoredObservation& o, const Window& w) {
    const Grid& g = e.grid;
    const double tk = double(o.elapsed);
    const double cap = g.tau_upper(g.limit_cell(double(o.limitation)));
    const double lo = tk + w.start;
    const double hi = std::min(tk + w.end, cap);
    long double denom = e.atom(), m0 = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) {
            const double b0 = g.tau_lower(j), b1 = g.tau_upper(j);
            const double beyond = std::clamp((b1 - std::max(b0, tk)) / (b1 - b0), 0.0, 1.0);
            denom += beyond * e.cell(i, j);
            if (g.s_lower(i) < o.deductible) continue;
            const double in = hi > lo ? std::clamp((std::min(b1, hi) - std::max(b0, lo)) / (b1 - b0), 0.0, 1.0) : 0.0;
            const long double m = in * e.cell(i, j);
            const double v = g.s_value(i);
            m0 += m;
            m1 += m * v;
            m2 += m * v * v;
        }
    }
    WindowStats s;
    s.report_probability = double(m0 / denom);
    s.expected_claim = double(m1 / denom);
    s.variance = double(m2 / denom - (m1 / denom) * (m1 / denom));
    return s;
}

DistributionEstimate random_estimate(const Grid& g, std::mt19937_64& rng, double atom_share = 0.9) {
    DistributionEstimate e = uniform_estimate(g);
    std::uniform_real_distribution<double> u(0, 1);
    double total = 0;
    for (std::size_t c = 0; c < g.finite_cells(); ++c) total += (e.mass[c] = u(rng));
    for (std::size_t c = 0; c < g.finite_cells(); ++c) e.mass[c] *= (1 - atom_share) / total;
    e.mass[g.atom_index()] = atom_share;
    return e;
}

CensoredObservation not_reported(long elapsed, double deductible, long limitation) {
    CensoredObservation o;
    o.status = Status::NotReported;
    o.amount = deductible;
    o.delay = elapsed;
    o.elapsed = elapsed;
    o.deductible = deductible;
    o.limitation = limitation;
    return o;
}

}  // namespace

TEST_CASE("premium, frequency and severity on a two-cell estimate") {
    const Grid g({0, 10, 30}, {0, 5});
    DistributionEstimate e = uniform_estimate(g);
    e.mass = {0.1, 0.3, 0.0, 0.6};  // values 5, 20, 30; atom last
    CHECK(net_premium_daily(e) == doctest::Approx(0.1 * 5 + 0.3 * 20));
    CHECK(claim_frequency_daily(e) == doctest::Approx(0.4));
    CHECK(*average_severity(e) == doctest::Approx(6.5 / 0.4));

    DistributionEstimate zero = e;
    zero.mass = {0, 0, 0, 1};
    CHECK(claim_frequency_daily(zero) == 0.0);
    CHECK_FALSE(average_severity(zero).has_value());
}

TEST_CASE("claims reserve") {
    CHECK(claims_reserve(11.141814, 85244280, 814218985) == doctest::Approx(135556927).epsilon(1e-8));
    CHECK(std::fabs(claims_reserve(11.141814, 85244280, 814218985) - 135556927) < 1.0);
    // a three-day portfolio
    CHECK(claims_reserve(2.5, 3, 4.0) == doctest::Approx(3.5));
    CHECK(claims_reserve(2.5, 3, 7.5) == 0.0);
    CHECK_THROWS(claims_reserve(1.0, 0, 0.0));
    CHECK_THROWS(claims_reserve(1.0, 5, -1.0));
}

TEST_CASE("tolerance intervals") {
    CHECK(tolerance_multiplier(0.95, QuantileMode::TwoSided) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(tolerance_multiplier(0.95, QuantileMode::OneSided) == doctest::Approx(1.644854).epsilon(1e-6));
    // half-width 4,057,684 around 35,759,781 with sd 2,466,898
    const auto band = tolerance_interval(35759781, 2466898.0 * 2466898.0, 0.95, QuantileMode::OneSided);
    CHECK(std::fabs((band.upper - 35759781) - 4057684) < 10);
    // schedule rows: [0, 90) and a floored lower limit
    const auto row = tolerance_interval(9.095, 1.270 * 1.270, 0.95, QuantileMode::OneSided);
    CHECK(row.lower == doctest::Approx(7.006).epsilon(2e-4));
    CHECK(row.upper == doctest::Approx(11.184).epsilon(2e-4));
    const auto floored = tolerance_interval(0.486, 0.371 * 0.371, 0.95, QuantileMode::OneSided);
    CHECK(floored.lower == 0.0);
    CHECK(floored.upper == doctest::Approx(1.095).epsilon(2e-3));

    const auto flat = tolerance_interval(7.0, 0.0, 0.9);
    CHECK(flat.lower == 7.0);
    CHECK(flat.upper == 7.0);
    CHECK_THROWS(tolerance_interval(1.0, -1.0, 0.9));
    CHECK_THROWS(tolerance_multiplier(1.0, QuantileMode::TwoSided));
    CHECK(parse_quantile_mode("one-sided") == QuantileMode::OneSided);
    CHECK_THROWS(parse_quantile_mode("upper"));
}

TEST_CASE("window statistics on a single claim cell") {
    const Grid g({0, 10, 30}, {0, 5, 10});
    DistributionEstimate e = uniform_estimate(g);
    std::fill(e.mass.begin(), e.mass.end(), 0.0);
    e.mass[g.index(1, 1)] = 0.2;  // value 20, delay in [5, 10)
    e.mass[g.atom_index()] = 0.8;
    const auto o = not_reported(2, 0.0, 9);
    const auto s = window_stats(e, o, {});
    CHECK(s.report_probability == doctest::Approx(0.2));
    CHECK(s.expected_claim == doctest::Approx(20 * 0.2));
    CHECK(s.variance == doctest::Approx(400 * 0.2 - 16));

    // nothing can be reported after the limitation period
    const auto late = window_stats(e, o, {20, kInfinity});
    CHECK(late.report_probability == 0.0);
    CHECK(late.expected_claim == 0.0);

    // every bit of mass already behind the elapsed time
    DistributionEstimate done = e;
    std::fill(done.mass.begin(), done.mass.end(), 0.0);
    done.mass[g.index(0, 0)] = 1.0;
    CHECK_THROWS_AS(window_stats(done, not_reported(7, 0.0, 9), {}), std::domain_error);

    CensoredObservation reported;
    reported.amount = 3;
    reported.delay = 1;
    reported.elapsed = 4;
    reported.limitation = 9;
    CHECK_THROWS_AS(window_stats(e, reported, {}), std::invalid_argument);
}

TEST_CASE("window statistics agree with the overlap oracle") {
    std::mt19937_64 rng(7);
    const Grid g({0, 4, 9, 15, 40}, {0, 7, 14, 21, 28, 35});
    for (int rep = 0; rep < 20; ++rep) {
        const auto e = random_estimate(g, rng);
        for (double ded : {0.0, 4.0, 10.0}) {
            for (long tk : {0L, 3L, 11L, 20L}) {
                const auto o = not_reported(tk, ded, 30);
                for (Window w : {Window{}, Window{0, 5}, Window{2.5, 9}, Window{6, 40}, Window{40, kInfinity}}) {
                    const auto a = window_stats(e, o, w);
                    const auto b = oracle_window(e, o, w);
                    CHECK(a.report_probability == doctest::Approx(b.report_probability).epsilon(1e-12));
                    CHECK(a.expected_claim == doctest::Approx(b.expected_claim).epsilon(1e-12));
                    CHECK(a.variance == doctest::Approx(b.variance).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("property: monotone windows, bounds, additivity") {
    std::mt19937_64 rng(8);
    const Grid g({0, 4, 9, 15, 40}, {0, 7, 14, 21, 28, 35});
    for (int rep = 0; rep < 10; ++rep) {
        const auto e = random_estimate(g, rng);
        const auto o = not_reported(long(rng() % 25), 4.0, 30);
        double prev = 0.0;
        for (double t2 = 0.5; t2 < 40; t2 += 1.5) {
            const double p = window_stats(e, o, {0, t2}).report_probability;
            CHECK(p >= prev - 1e-15);
            prev = p;
        }
        prev = 1.0;
        for (double t1 = 0.0; t1 < 40; t1 += 1.5) {
            const double p = window_stats(e, o, {t1, kInfinity}).report_probability;
            CHECK(p <= prev + 1e-15);
            prev = p;
        }

        CensoredTally part_a, part_b;
        std::uint64_t units = 0;
        for (int k = 0; k < 12; ++k) {
            const auto x = not_reported(long(rng() % 29), k % 2 ? 0.0 : 9.0, 30);
            const std::uint64_t c = 1 + rng() % 5;
            units += c;
            (k % 3 ? part_a : part_b).push_back({x, c});
        }
        CensoredTally all = part_a;
        all.insert(all.end(), part_b.begin(), part_b.end());
        const auto ta = portfolio_ibnr(e, part_a), tb = portfolio_ibnr(e, part_b), tt = portfolio_ibnr(e, all);
        CHECK(ta.mean + tb.mean == doctest::Approx(tt.mean).epsilon(1e-12));
        CHECK(ta.variance + tb.variance == doctest::Approx(tt.variance).epsilon(1e-12));
        CHECK(ta.expected_count + tb.expected_count == doctest::Approx(tt.expected_count).epsilon(1e-12));
        CHECK(tt.expected_count >= 0.0);
        CHECK(tt.expected_count <= double(units));

        std::vector<double> edges{0};
        for (double x = 3; x < 45; x += 1 + double(rng() % 9)) edges.push_back(x);
        const auto rows = ibnr_schedule(e, all, edges, 0.9);
        double sum = 0, cnt = 0;
        for (const auto& r : rows) {
            sum += r.mean;
            cnt += r.expected_count;
            CHECK(r.lower <= r.mean);
            CHECK(r.mean <= r.upper);
        }
        CHECK(rows.back().window.end == kInfinity);
        CHECK(sum == doctest::Approx(tt.mean).epsilon(1e-9));
        CHECK(cnt == doctest::Approx(tt.expected_count).epsilon(1e-9));
    }
}

TEST_CASE("schedule edges") {
    const Grid g({0, 10}, {0, 5, 10});
    const auto e = uniform_estimate(g);
    const CensoredTally t{{not_reported(1, 0, 8), 3}};
    const double bad1[] = {1, 2};
    const double bad2[] = {0, 5, 5};
    CHECK_THROWS(ibnr_schedule(e, t, bad1, 0.9));
    CHECK_THROWS(ibnr_schedule(e, t, bad2, 0.9));
    const double whole[] = {0, kInfinity};
    const auto rows = ibnr_schedule(e, t, whole, 0.9);
    REQUIRE(rows.size() == 1);
    const auto total = portfolio_ibnr(e, t);
    CHECK(rows[0].mean == doctest::Approx(total.mean));
    CHECK(rows[0].sd == doctest::Approx(std::sqrt(total.variance)));
    CHECK(portfolio_ibnr(e, CensoredTally{}).mean == 0.0);
}

TEST_CASE("OCR from outstanding claims") {
    const Grid g({0, 10, 30}, {0, 5, 10});
    DistributionEstimate e = uniform_estimate(g);
    e.mass = {0.05, 0.05, 0.1, 0.2, 0.0, 0.3, 0.3};
    CensoredObservation o;
    o.status = Status::ReportedOutstanding;
    o.amount = 12;
    o.delay = 3;
    o.elapsed = 6;
    o.limitation = 9;
    // column 0 from the cell holding 12 up: values 20 (0.1) and 30 (0.0)
    const auto r = ocr(e, CensoredTally{{o, 2}}, 100.0, 40.0);
    CHECK(r.by_difference == 60.0);
    CHECK(r.by_sum == doctest::Approx(2 * (20.0 - 12.0)));

    o.amount = 25;  // paid already beyond the cell value
    CHECK(ocr(e, CensoredTally{{o, 1}}, 0, 0).by_sum == doctest::Approx(0.0));
    CHECK(ocr(e, CensoredTally{}, 135556927, 35759781).by_difference == 99797146);
    CHECK(ocr(e, CensoredTally{}, 0, 0).by_sum == 0.0);
}

TEST_CASE("reserve identities on a fitted sample") {
    std::mt19937_64 rng(9);
    const auto r = support::random_register(rng, 40, d("2020-01-01"));
    const auto sample = tally_censored_sample(r.policies, r.claims, d("2020-01-01"));
    const Grid grid = support::grid_for(sample, 8, 20);
    const auto e = fit(group(sample, grid));
    double paid = 0;
    for (const auto& c : r.claims) {
        if (!(d("2020-01-01") < c.report_date)) paid += c.paid_to_date;
    }
    const auto exposure = std::int64_t(total_count(sample));
    const auto rep = reserve_report(e, sample, exposure, paid, 0.95);
    CHECK(rep.claims_reserve + paid == doctest::Approx(rep.net_premium_daily * double(exposure)).epsilon(1e-12));
    CHECK(*rep.average_severity * rep.frequency_daily == doctest::Approx(rep.net_premium_daily).epsilon(1e-12));
    CHECK(rep.ocr == doctest::Approx(rep.claims_reserve - rep.ibnr_mean).epsilon(1e-12));
    CHECK(rep.ibnr_lower <= rep.ibnr_mean);
    CHECK(rep.ibnr_mean <= rep.ibnr_upper);
    CHECK(rep.ibnr_mean >= 0.0);
}

#ifndef QEDFLOW_TESTS_SUPPORT_HPP
#define QEDFLOW_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qedflow/analytics.hpp"
#include "qedflow/estimator.hpp"
#include "qedflow/grid.hpp"
#include "qedflow/registers.hpp"
#include "qedflow/sample.hpp"

namespace support {

using namespace qedflow;

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(QEDFLOW_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Date d(const char* text) { return parse_date(text); }

// Membership straight from the region definitions, cell by cell: a cell
// belongs to an observation's set when it meets the region of (size,
// delay) values consistent with the observation.
inline bool in_region(const Grid& g, const CensoredObservation& o, std::size_t i, std::size_t j) {
    const double a0 = g.s_lower(i), a1 = g.s_upper(i);
    const double b0 = g.tau_lower(j), b1 = g.tau_upper(j);
    if (o.zero_claim) return false;
    const double delay = static_cast<double>(*o.delay);
    switch (o.status) {
        case Status::Settled:
            return a0 <= o.amount && o.amount < a1 && b0 <= delay && delay < b1;
        case Status::ReportedOutstanding:
            return a1 > o.amount && b0 <= delay && delay < b1;
        case Status::NotReported: {
            const double L = static_cast<double>(o.limitation);
            const double tk = static_cast<double>(o.elapsed);
            const bool below = a0 < o.deductible && b0 <= L;
            const bool late = a1 > o.deductible && b1 > tk && b0 <= L;
            return below || late;
        }
    }
    return false;
}

inline bool atom_in_region(const CensoredObservation& o) {
    return o.zero_claim || o.status == Status::NotReported;
}

// Dense membership vector over all cells, atom last.
inline std::vector<char> membership(const Grid& g, const CensoredObservation& o) {
    std::vector<char> m(g.cell_count(), 0);
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) m[g.index(i, j)] = in_region(g, o, i, j);
    }
    m[g.atom_index()] = atom_in_region(o);
    return m;
}

inline std::vector<char> membership(const Grid& g, const CensoringSet& set) {
    std::vector<char> m(g.cell_count(), 0);
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) m[g.index(i, j)] = set.contains(i, j);
    }
    m[g.atom_index()] = set.zero_atom;
    return m;
}

struct DenseSet {
    std::vector<char> member;
    double count = 0.0;
};

// Plain self-consistency update in long double over dense membership
// vectors.
inline std::vector<long double> dense_step(const std::vector<long double>& p,
                                           const std::vector<DenseSet>& sets) {
    long double n = 0.0L;
    for (const auto& s : sets) n += s.count;
    std::vector<long double> next(p.size(), 0.0L);
    for (const auto& s : sets) {
        long double mass = 0.0L;
        std::size_t size = 0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            if (s.member[c]) {
                mass += p[c];
                ++size;
            }
        }
        for (std::size_t c = 0; c < p.size(); ++c) {
            if (!s.member[c]) continue;
            next[c] += mass > 0.0L ? s.count * p[c] / (n * mass) : s.count / (n * size);
        }
    }
    return next;
}

// Fixed point of dense_step from the uniform start.
inline std::vector<long double> dense_fixed_point(std::size_t cells, const std::vector<DenseSet>& sets,
                                                  int max_iterations = 2000000,
                                                  long double tolerance = 1e-17L) {
    std::vector<long double> p(cells, 1.0L / static_cast<long double>(cells));
    for (int it = 0; it < max_iterations; ++it) {
        auto next = dense_step(p, sets);
        long double change = 0.0L;
        for (std::size_t c = 0; c < cells; ++c) change = std::max(change, std::fabs(next[c] - p[c]));
        p = std::move(next);
        if (change < tolerance) break;
    }
    return p;
}

inline long double dense_log_likelihood(const std::vector<long double>& p, const std::vector<DenseSet>& sets) {
    long double ll = 0.0L;
    for (const auto& s : sets) {
        long double mass = 0.0L;
        for (std::size_t c = 0; c < p.size(); ++c) {
            if (s.member[c]) mass += p[c];
        }
        ll += s.count * std::log(mass);
    }
    return ll;
}

// CDF straight from the definition: cells whose upper corners lie inside
// the quadrant, atom only for tau = inf and s > 0.
inline double dense_cdf(const DistributionEstimate& e, double s, double tau) {
    const Grid& g = e.grid;
    long double total = 0.0L;
    for (std::size_t i = 0; i < g.s_cells(); ++i) {
        for (std::size_t j = 0; j < g.tau_cells(); ++j) {
            if (g.s_upper(i) <= s && g.tau_upper(j) <= tau) total += e.cell(i, j);
        }
    }
    if (std::isinf(tau) && s > 0.0) total += e.atom();
    return static_cast<double>(total);
}

// Random portfolio of policies and claims. Some claims are reported after
// `horizon` so that the same register can be viewed at several dates.
struct RandomRegister {
    std::vector<PolicyRecord> policies;
    std::vector<ClaimRecord> claims;
};

inline RandomRegister random_register(std::mt19937_64& rng, int n_policies, const Date& horizon) {
    RandomRegister r;
    const long h = day_number(horizon);
    std::uniform_int_distribution<long> start(h - 900, h - 40);
    std::uniform_int_distribution<long> term(20, 400);
    std::uniform_int_distribution<int> ded_pick(0, 2);
    std::uniform_int_distribution<long> lim(60, 500);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> delay(1.0 / 80.0);
    std::exponential_distribution<double> size(1.0 / 60.0);
    const double deductibles[] = {0.0, 10.0, 35.0};
    int claim_no = 0;
    for (int k = 0; k < n_policies; ++k) {
        PolicyRecord p;
        p.policy_id = "P" + std::to_string(k);
        const long s0 = start(rng);
        const long s1 = s0 + term(rng);
        p.start_date = from_day_number(s0);
        p.end_date = from_day_number(s1);
        p.deductible = deductibles[ded_pick(rng)];
        p.limitation_days = lim(rng);
        p.row = static_cast<std::size_t>(k + 1);
        std::vector<long> days;
        for (long day = s0; day < std::min(s1, h); ++day) {
            if (u(rng) < 0.02) days.push_back(day);
        }
        for (long day : days) {
            const long lag = static_cast<long>(delay(rng));
            if (lag > p.limitation_days) continue;
            const double amount = p.deductible + std::floor(size(rng) * 100.0) / 100.0;
            ClaimRecord c;
            c.policy_id = p.policy_id;
            c.claim_id = "C" + std::to_string(++claim_no);
            c.occurrence_date = from_day_number(day);
            c.report_date = from_day_number(day + lag);
            if (u(rng) < 0.7) {
                c.settled = true;
                c.settlement_date = from_day_number(day + lag + static_cast<long>(u(rng) * 60));
                c.paid_to_date = amount;
            } else {
                c.paid_to_date = std::floor(amount * u(rng));
            }
            c.row = static_cast<std::size_t>(claim_no);
            r.claims.push_back(c);
        }
        r.policies.push_back(p);
    }
    return r;
}

// A grid that holds every observation of the sample.
inline Grid grid_for(const CensoredTally& sample, std::size_t s_cells, double tau_step) {
    double top = 1.0, tau_top = 1.0;
    for (const auto& t : sample) {
        const auto& o = t.observation;
        if (o.zero_claim) continue;
        top = std::max({top, o.amount, o.deductible});
        tau_top = std::max(tau_top, static_cast<double>(o.limitation));
        if (o.delay) tau_top = std::max(tau_top, static_cast<double>(*o.delay));
    }
    std::vector<double> s{0.0};
    for (std::size_t i = 1; i < s_cells; ++i) s.push_back(top * static_cast<double>(i) / static_cast<double>(s_cells));
    return Grid(s, uniform_edges(0.0, tau_top + 1.0, tau_step));
}

}  // namespace support

#endif  // QEDFLOW_TESTS_SUPPORT_HPP

#include "qedflow/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "summation.hpp"

namespace qedflow {

namespace {

using Wide = long double;

// Row-major (S+1) x (T+1) table used for 2-D prefix sums and difference
// arrays over the finite cells.
class Table {
public:
    Table(std::size_t s, std::size_t t) : cols_(t + 1), data_((s + 1) * (t + 1), 0.0L) {}
    Wide& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    Wide at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t cols_;
    std::vector<Wide> data_;
};

Table prefix_table(const Grid& grid, const std::vector<double>& mass) {
    const std::size_t S = grid.s_cells(), T = grid.tau_cells();
    Table p(S, T);
    for (std::size_t i = 0; i < S; ++i) {
        Wide row = 0.0L;
        for (std::size_t j = 0; j < T; ++j) {
            row += mass[grid.index(i, j)];
            p.at(i + 1, j + 1) = p.at(i, j + 1) + row;
        }
    }
    return p;
}

Wide rect_mass(const Table& p, const CellRect& r) {
    return p.at(r.s_hi + 1, r.tau_hi + 1) - p.at(r.s_lo, r.tau_hi + 1) -
           p.at(r.s_hi + 1, r.tau_lo) + p.at(r.s_lo, r.tau_lo);
}

void add_rect(Table& d, const CellRect& r, Wide v) {
    d.at(r.s_lo, r.tau_lo) += v;
    d.at(r.s_hi + 1, r.tau_lo) -= v;
    d.at(r.s_lo, r.tau_hi + 1) -= v;
    d.at(r.s_hi + 1, r.tau_hi + 1) += v;
}

// Turns a difference table into per-cell values in place.
void integrate(Table& d, std::size_t S, std::size_t T) {
    for (std::size_t i = 0; i < S; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            Wide v = d.at(i, j);
            if (i > 0) v += d.at(i - 1, j);
            if (j > 0) v += d.at(i, j - 1);
            if (i > 0 && j > 0) v -= d.at(i - 1, j - 1);
            d.at(i, j) = v;
        }
    }
}

void check_set(const Grid& grid, const CensoringSet& set) {
    if (set.empty()) throw std::invalid_argument("censoring set is empty on the grid");
    for (const auto& r : set.rects) {
        if (r.s_lo > r.s_hi || r.tau_lo > r.tau_hi || r.s_hi >= grid.s_cells() ||
            r.tau_hi >= grid.tau_cells()) {
            throw std::invalid_argument("censoring set rectangle outside the grid");
        }
    }
}

struct StepOutcome {
    std::vector<double> mass;
    double log_likelihood = 0.0;
    std::size_t empty_sets = 0;  // sets that carried no mass and were reseeded
};

class StepKernel {
public:
    StepKernel(const Grid& grid, std::span<const WeightedSet> sets) : grid_(grid), sets_(sets) {
        detail::CompensatedSum n;
        for (const auto& ws : sets_) {
            check_set(grid_, ws.set);
            if (!(ws.count >= 0.0)) throw std::invalid_argument("negative pattern count");
            n += ws.count;
        }
        n_ = n.value();
        if (!(n_ > 0.0)) throw std::invalid_argument("grouped sample is empty");
        all_points_ = std::all_of(sets_.begin(), sets_.end(),
                                  [](const WeightedSet& ws) { return ws.set.is_point(); });
    }

    bool all_points() const { return all_points_; }

    StepOutcome step(const std::vector<double>& mass) const {
        const std::size_t S = grid_.s_cells(), T = grid_.tau_cells();
        if (mass.size() != grid_.cell_count()) {
            throw std::invalid_argument("estimate does not match the grid");
        }
        const Table prefix = prefix_table(grid_, mass);
        const double atom = mass[grid_.atom_index()];

        Table weight(S, T);
        std::vector<Wide> point_weight(grid_.finite_cells(), 0.0L);
        Wide atom_weight = 0.0L;
        std::optional<Table> reseed;
        Wide atom_reseed = 0.0L;

        StepOutcome out;
        detail::CompensatedSum loglik;
        for (const auto& ws : sets_) {
            if (ws.count == 0.0) continue;
            Wide m = ws.set.zero_atom ? Wide(atom) : 0.0L;
            for (const auto& r : ws.set.rects) {
                m += r.area() == 1 ? Wide(mass[grid_.index(r.s_lo, r.tau_lo)]) : rect_mass(prefix, r);
            }
            const double md = static_cast<double>(m);
            if (md > 0.0) {
                loglik += ws.count * std::log(md);
                const Wide v = Wide(ws.count) / (Wide(n_) * m);
                for (const auto& r : ws.set.rects) {
                    if (r.area() == 1) {
                        point_weight[grid_.index(r.s_lo, r.tau_lo)] += v;
                    } else {
                        add_rect(weight, r, v);
                    }
                }
                if (ws.set.zero_atom) atom_weight += v;
            } else {
                loglik += -std::numeric_limits<double>::infinity();
                ++out.empty_sets;
                if (!reseed) reseed.emplace(S, T);
                const Wide u = Wide(ws.count) / (Wide(n_) * Wide(ws.set.size()));
                for (const auto& r : ws.set.rects) add_rect(*reseed, r, u);
                if (ws.set.zero_atom) atom_reseed += u;
            }
        }
        integrate(weight, S, T);
        if (reseed) integrate(*reseed, S, T);

        out.mass.assign(grid_.cell_count(), 0.0);
        for (std::size_t i = 0; i < S; ++i) {
            for (std::size_t j = 0; j < T; ++j) {
                const std::size_t c = grid_.index(i, j);
                Wide v = Wide(mass[c]) * (weight.at(i, j) + point_weight[c]);
                if (reseed) v += reseed->at(i, j);
                out.mass[c] = std::max(0.0, static_cast<double>(v));
            }
        }
        out.mass[grid_.atom_index()] = static_cast<double>(Wide(atom) * atom_weight + atom_reseed);
        out.log_likelihood = loglik.value();
        return out;
    }

private:
    const Grid& grid_;
    std::span<const WeightedSet> sets_;
    double n_ = 0.0;
    bool all_points_ = false;
};

std::string reseed_warning(int iteration, std::size_t count) {
    return "iteration " + std::to_string(iteration) + ": " + std::to_string(count) +
           " censoring set(s) carried no mass and were reseeded uniformly";
}

void check_mass(const Grid& grid, const std::vector<double>& mass) {
    if (mass.size() != grid.cell_count()) {
        throw std::invalid_argument("initial mass has " + std::to_string(mass.size()) +
                                    " entries, grid has " + std::to_string(grid.cell_count()) +
                                    " cells");
    }
    detail::CompensatedSum total;
    for (double m : mass) {
        if (!(m >= 0.0)) throw std::invalid_argument("initial mass must be nonnegative");
        total += m;
    }
    if (std::fabs(total.value() - 1.0) > 1e-9) {
        throw std::invalid_argument("initial mass must sum to 1");
    }
}

}  // namespace

DistributionEstimate uniform_estimate(const Grid& grid) {
    DistributionEstimate est;
    est.grid = grid;
    est.mass.assign(grid.cell_count(), 1.0 / static_cast<double>(grid.cell_count()));
    return est;
}

std::vector<WeightedSet> weighted_sets(const GroupedSample& grouped) {
    std::vector<WeightedSet> out;
    out.reserve(grouped.patterns.size());
    for (const auto& [key, count] : grouped.patterns) {
        out.push_back({censoring_set(grouped.grid, key), static_cast<double>(count)});
    }
    return out;
}

std::vector<double> conditional_mass(const DistributionEstimate& estimate, const CensoringSet& set) {
    const Grid& grid = estimate.grid;
    check_set(grid, set);
    std::vector<double> out(grid.cell_count(), 0.0);
    detail::CompensatedSum total;
    for (const auto& r : set.rects) {
        for (std::size_t i = r.s_lo; i <= r.s_hi; ++i) {
            for (std::size_t j = r.tau_lo; j <= r.tau_hi; ++j) {
                const std::size_t c = grid.index(i, j);
                out[c] = estimate.mass[c];
                total += out[c];
            }
        }
    }
    if (set.zero_atom) {
        out[grid.atom_index()] = estimate.atom();
        total += estimate.atom();
    }
    const double m = total.value();
    if (m > 0.0) {
        for (double& v : out) v /= m;
        return out;
    }
    const double u = 1.0 / static_cast<double>(set.size());
    for (const auto& r : set.rects) {
        for (std::size_t i = r.s_lo; i <= r.s_hi; ++i) {
            for (std::size_t j = r.tau_lo; j <= r.tau_hi; ++j) out[grid.index(i, j)] = u;
        }
    }
    if (set.zero_atom) out[grid.atom_index()] = u;
    return out;
}

std::vector<double> conditional_mass(const DistributionEstimate& estimate, const PatternKey& key) {
    return conditional_mass(estimate, censoring_set(estimate.grid, key));
}

DistributionEstimate em_step(const DistributionEstimate& estimate,
                             std::span<const WeightedSet> sets) {
    const StepKernel kernel(estimate.grid, sets);
    StepOutcome out = kernel.step(estimate.mass);
    DistributionEstimate next;
    next.grid = estimate.grid;
    next.mass = std::move(out.mass);
    next.iterations = estimate.iterations + 1;
    next.final_delta = cdf_distance(estimate, next);
    if (out.empty_sets > 0) next.warnings.push_back(reseed_warning(next.iterations, out.empty_sets));
    return next;
}

DistributionEstimate em_step(const DistributionEstimate& estimate, const GroupedSample& grouped) {
    if (!(estimate.grid == grouped.grid)) {
        throw std::invalid_argument("estimate and grouped sample use different grids");
    }
    const auto sets = weighted_sets(grouped);
    return em_step(estimate, sets);
}

DistributionEstimate fit(const Grid& grid, std::span<const WeightedSet> sets,
                         const FitConfig& config) {
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    const StepKernel kernel(grid, sets);

    DistributionEstimate current = uniform_estimate(grid);
    if (config.initial_mass) {
        check_mass(grid, *config.initial_mass);
        current.mass = *config.initial_mass;
    }

    for (int it = 1; it <= config.max_iterations; ++it) {
        StepOutcome out = kernel.step(current.mass);
        DistributionEstimate next;
        next.grid = grid;
        next.mass = std::move(out.mass);
        const double delta = cdf_distance(current, next);
        next.history = std::move(current.history);
        next.warnings = std::move(current.warnings);
        next.history.push_back({it, out.log_likelihood, delta});
        if (out.empty_sets > 0) next.warnings.push_back(reseed_warning(it, out.empty_sets));
        next.iterations = it;
        next.final_delta = delta;
        current = std::move(next);
        if (kernel.all_points() && out.empty_sets == 0) {
            // Point sets do not depend on the current iterate: the first
            // update is already the fixed point (the empirical distribution).
            current.final_delta = 0.0;
            current.converged = true;
            break;
        }
        if (delta < config.tolerance) {
            current.converged = true;
            break;
        }
    }
    return current;
}

DistributionEstimate fit(const GroupedSample& grouped, const FitConfig& config) {
    const auto sets = weighted_sets(grouped);
    return fit(grouped.grid, sets, config);
}

double log_likelihood(const DistributionEstimate& estimate, std::span<const WeightedSet> sets) {
    detail::CompensatedSum ll;
    for (const auto& ws : sets) {
        if (ws.count == 0.0) continue;
        const auto cond_total = [&] {
            detail::CompensatedSum m;
            for (const auto& r : ws.set.rects) {
                for (std::size_t i = r.s_lo; i <= r.s_hi; ++i) {
                    for (std::size_t j = r.tau_lo; j <= r.tau_hi; ++j) m += estimate.cell(i, j);
                }
            }
            if (ws.set.zero_atom) m += estimate.atom();
            return m.value();
        }();
        ll += ws.count * std::log(cond_total);
    }
    return ll.value();
}

double log_likelihood(const DistributionEstimate& estimate, const GroupedSample& grouped) {
    const auto sets = weighted_sets(grouped);
    return log_likelihood(estimate, sets);
}

double cdf_distance(const DistributionEstimate& a, const DistributionEstimate& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("cdf_distance: grids differ");
    const Grid& grid = a.grid;
    const std::size_t S = grid.s_cells(), T = grid.tau_cells();
    std::vector<Wide> column(T, 0.0L);  // cumulative over claim-size cells
    const Wide atom = Wide(b.atom()) - Wide(a.atom());
    Wide worst = 0.0L;
    for (std::size_t i = 0; i < S; ++i) {
        Wide corner = 0.0L;
        for (std::size_t j = 0; j < T; ++j) {
            const std::size_t c = grid.index(i, j);
            column[j] += Wide(b.mass[c]) - Wide(a.mass[c]);
            corner += column[j];
            worst = std::max(worst, std::fabs(corner));
        }
        worst = std::max(worst, std::fabs(corner + atom));
    }
    return static_cast<double>(worst);
}

double self_consistency_residual(const DistributionEstimate& estimate,
                                 const GroupedSample& grouped) {
    return cdf_distance(estimate, em_step(estimate, grouped));
}

double cdf(const DistributionEstimate& estimate, double s, double tau) {
    const Grid& grid = estimate.grid;
    detail::CompensatedSum total;
    for (std::size_t i = 0; i < grid.s_cells(); ++i) {
        if (!(grid.s_upper(i) <= s)) break;
        for (std::size_t j = 0; j < grid.tau_cells(); ++j) {
            if (!(grid.tau_upper(j) <= tau)) break;
            total += estimate.cell(i, j);
        }
    }
    if (tau == kInfinity && s > 0.0) total += estimate.atom();
    return total.value();
}

Marginal marginal_claim(const DistributionEstimate& estimate) {
    const Grid& grid = estimate.grid;
    Marginal m;
    m.lower.push_back(0.0);
    m.upper.push_back(0.0);
    m.mass.push_back(estimate.atom());
    for (std::size_t i = 0; i < grid.s_cells(); ++i) {
        detail::CompensatedSum row;
        for (std::size_t j = 0; j < grid.tau_cells(); ++j) row += estimate.cell(i, j);
        m.lower.push_back(grid.s_lower(i));
        m.upper.push_back(grid.s_upper(i));
        m.mass.push_back(row.value());
    }
    return m;
}

Marginal marginal_delay(const DistributionEstimate& estimate) {
    const Grid& grid = estimate.grid;
    Marginal m;
    for (std::size_t j = 0; j < grid.tau_cells(); ++j) {
        detail::CompensatedSum col;
        for (std::size_t i = 0; i < grid.s_cells(); ++i) col += estimate.cell(i, j);
        m.lower.push_back(grid.tau_lower(j));
        m.upper.push_back(grid.tau_upper(j));
        m.mass.push_back(col.value());
    }
    m.lower.push_back(kInfinity);
    m.upper.push_back(kInfinity);
    m.mass.push_back(estimate.atom());
    return m;
}

}  // namespace qedflow

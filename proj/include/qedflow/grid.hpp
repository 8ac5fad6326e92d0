#ifndef QEDFLOW_GRID_HPP
#define QEDFLOW_GRID_HPP

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace qedflow {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Discretization of the (claim size, reporting delay) plane.
//
// Claim-size cells are [s_edges[i], s_edges[i+1]) with the last cell
// [s_edges.back(), inf). Delay cells are [tau_edges[j], tau_edges[j+1]) and
// are bounded: every reportable delay must lie below tau_edges.back().
// Besides these finite cells the grid always carries one extra cell, the
// zero-claim atom (s = 0, tau = inf).
class Grid {
public:
    Grid() = default;
    Grid(std::vector<double> s_edges, std::vector<double> tau_edges);

    const std::vector<double>& s_edges() const { return s_edges_; }
    const std::vector<double>& tau_edges() const { return tau_edges_; }

    std::size_t s_cells() const { return s_edges_.size(); }
    std::size_t tau_cells() const { return tau_edges_.size() - 1; }
    std::size_t finite_cells() const { return s_cells() * tau_cells(); }
    std::size_t cell_count() const { return finite_cells() + 1; }

    std::size_t index(std::size_t s_cell, std::size_t tau_cell) const {
        return s_cell * tau_cells() + tau_cell;
    }
    std::size_t atom_index() const { return finite_cells(); }

    double s_lower(std::size_t i) const { return s_edges_[i]; }
    double s_upper(std::size_t i) const {
        return i + 1 < s_edges_.size() ? s_edges_[i + 1] : kInfinity;
    }
    // Representative claim value: cell midpoint, lower edge for the
    // unbounded top cell.
    double s_value(std::size_t i) const;

    double tau_lower(std::size_t j) const { return tau_edges_[j]; }
    double tau_upper(std::size_t j) const { return tau_edges_[j + 1]; }

    // Cell containing `amount` (half-open bins). Throws std::out_of_range for
    // negative or non-finite amounts.
    std::size_t s_cell(double amount) const;
    // Cell containing `delay`. Throws std::out_of_range when the delay is
    // negative or not below the last delay edge.
    std::size_t tau_cell(double delay) const;

    // Number of leading claim-size cells that intersect [0, d): the cells
    // treated as "at or below the deductible".
    std::size_t low_cells(double deductible) const;
    // Last delay cell that can hold a delay <= L. Throws std::out_of_range
    // when L is not below the last delay edge.
    std::size_t limit_cell(double limitation) const;

    bool operator==(const Grid&) const = default;

private:
    std::vector<double> s_edges_{0.0};
    std::vector<double> tau_edges_{0.0, 1.0};
};

// Evenly spaced edges lo, lo+step, ... up to and including the first edge
// >= hi.
std::vector<double> uniform_edges(double lo, double hi, double step);

// Inclusive rectangle of finite cells, in cell indices.
struct CellRect {
    std::size_t s_lo, s_hi;
    std::size_t tau_lo, tau_hi;

    std::size_t area() const { return (s_hi - s_lo + 1) * (tau_hi - tau_lo + 1); }
    bool contains(std::size_t i, std::size_t j) const {
        return i >= s_lo && i <= s_hi && j >= tau_lo && j <= tau_hi;
    }
    bool operator==(const CellRect&) const = default;
};

// A censoring set on the grid: a union of disjoint rectangles of finite
// cells, optionally together with the zero-claim atom.
struct CensoringSet {
    std::vector<CellRect> rects;
    bool zero_atom = false;

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    bool contains(std::size_t i, std::size_t j) const;
    bool is_point() const { return size() == 1; }
};

}  // namespace qedflow

#endif  // QEDFLOW_GRID_HPP

#include "qedflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qedflow {

namespace {

void check_edges(const std::vector<double>& edges, const char* axis, std::size_t min_size) {
    if (edges.size() < min_size) {
        throw std::invalid_argument(std::string(axis) + " edges: need at least " +
                                    std::to_string(min_size) + " values");
    }
    if (edges.front() != 0.0) {
        throw std::invalid_argument(std::string(axis) + " edges must start at 0");
    }
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (!(edges[k] > edges[k - 1]) || !std::isfinite(edges[k])) {
            throw std::invalid_argument(std::string(axis) +
                                        " edges must be finite and strictly ascending");
        }
    }
}

}  // namespace

Grid::Grid(std::vector<double> s_edges, std::vector<double> tau_edges)
    : s_edges_(std::move(s_edges)), tau_edges_(std::move(tau_edges)) {
    check_edges(s_edges_, "claim-size", 1);
    check_edges(tau_edges_, "delay", 2);
}

double Grid::s_value(std::size_t i) const {
    if (i + 1 == s_edges_.size()) return s_edges_[i];
    return 0.5 * (s_edges_[i] + s_edges_[i + 1]);
}

std::size_t Grid::s_cell(double amount) const {
    if (!(amount >= 0.0) || !std::isfinite(amount)) {
        throw std::out_of_range("claim amount " + std::to_string(amount) +
                                " is outside the grid");
    }
    const auto it = std::upper_bound(s_edges_.begin(), s_edges_.end(), amount);
    return static_cast<std::size_t>(it - s_edges_.begin()) - 1;
}

std::size_t Grid::tau_cell(double delay) const {
    if (!(delay >= 0.0) || !(delay < tau_edges_.back())) {
        throw std::out_of_range("delay " + std::to_string(delay) +
                                " is outside the grid; extend the delay edges beyond " +
                                std::to_string(tau_edges_.back()));
    }
    const auto it = std::upper_bound(tau_edges_.begin(), tau_edges_.end(), delay);
    return static_cast<std::size_t>(it - tau_edges_.begin()) - 1;
}

std::size_t Grid::low_cells(double deductible) const {
    const auto it = std::lower_bound(s_edges_.begin(), s_edges_.end(), deductible);
    return static_cast<std::size_t>(it - s_edges_.begin());
}

std::size_t Grid::limit_cell(double limitation) const {
    if (!(limitation < tau_edges_.back())) {
        throw std::out_of_range("limitation period " + std::to_string(limitation) +
                                " is not covered by the grid; extend the delay edges beyond it");
    }
    return tau_cell(limitation);
}

std::vector<double> uniform_edges(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("uniform_edges: bad range");
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        const double e = lo + static_cast<double>(k) * step;
        out.push_back(e);
        if (e >= hi) break;
    }
    return out;
}

std::size_t CensoringSet::size() const {
    std::size_t n = zero_atom ? 1 : 0;
    for (const auto& r : rects) n += r.area();
    return n;
}

bool CensoringSet::contains(std::size_t i, std::size_t j) const {
    return std::any_of(rects.begin(), rects.end(),
                       [&](const CellRect& r) { return r.contains(i, j); });
}

}  // namespace qedflow

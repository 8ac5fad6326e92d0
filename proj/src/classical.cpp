#include "qedflow/classical.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "summation.hpp"

namespace qedflow {

namespace {

long bucket(const Date& date, const Date& anchor, const Period& period) {
    long diff = unit_index(date, period.unit) - unit_index(anchor, period.unit);
    return diff / period.count;
}

std::string age_label(const Period& period, std::size_t age) {
    return std::to_string(period.count * static_cast<long>(age + 1));
}

template <class Add>
Triangle tabulate(std::span<const Payment> payments, const Period& period,
                  const Date& reporting_date, Add add) {
    if (period.count <= 0) throw std::invalid_argument("period length must be positive");
    std::vector<const Payment*> kept;
    for (const auto& p : payments) {
        if (p.payment_date < p.occurrence_date) {
            throw std::invalid_argument("claim " + p.claim_id + ": payment on " +
                                        format_date(p.payment_date) + " before occurrence on " +
                                        format_date(p.occurrence_date));
        }
        if (p.payment_date <= reporting_date) kept.push_back(&p);
    }
    if (kept.empty()) throw std::invalid_argument("no payments to tabulate: the triangle is empty");

    Date anchor = kept.front()->occurrence_date;
    for (const auto* p : kept) anchor = std::min(anchor, p->occurrence_date);
    const long last = bucket(reporting_date, anchor, period);
    const std::size_t n = static_cast<std::size_t>(last + 1);

    // incremental[i][j]: origin i, development j
    std::vector<std::vector<double>> incremental(n);
    for (std::size_t i = 0; i < n; ++i) incremental[i].assign(n - i, 0.0);
    add(kept, anchor, incremental);

    Triangle tri;
    tri.period = period;
    for (std::size_t i = 0; i < n; ++i) {
        double running = 0.0;
        std::vector<double> row;
        for (double v : incremental[i]) row.push_back(running += v);
        tri.rows.push_back(std::move(row));
        tri.origin_labels.push_back(age_label(period, i));
        tri.age_labels.push_back(age_label(period, i));
    }
    return tri;
}

}  // namespace

void check_shape(const Triangle& t) {
    if (t.rows.empty()) throw std::invalid_argument("triangle has no rows");
    if (t.origin_labels.size() != t.rows.size()) {
        throw std::invalid_argument("triangle has " + std::to_string(t.rows.size()) +
                                    " rows but " + std::to_string(t.origin_labels.size()) +
                                    " origin labels");
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row.empty()) throw std::invalid_argument("triangle row " + t.origin_labels[i] + " is empty");
        if (row.size() > t.ages()) {
            throw std::invalid_argument("triangle row " + t.origin_labels[i] +
                                        " is longer than the age list");
        }
        if (i > 0 && row.size() > t.rows[i - 1].size()) {
            throw std::invalid_argument("triangle row " + t.origin_labels[i] +
                                        " is longer than the row above");
        }
    }
}

Triangle build_triangle(std::span<const Payment> payments, const Period& period,
                        const Date& reporting_date) {
    return tabulate(payments, period, reporting_date,
                    [&](const std::vector<const Payment*>& kept, const Date& anchor,
                        std::vector<std::vector<double>>& cells) {
                        for (const auto* p : kept) {
                            const long origin = bucket(p->occurrence_date, anchor, period);
                            const long paid = bucket(p->payment_date, anchor, period);
                            cells[origin][paid - origin] += p->amount;
                        }
                    });
}

Triangle build_count_triangle(std::span<const Payment> payments, const Period& period,
                              const Date& reporting_date) {
    return tabulate(payments, period, reporting_date,
                    [&](const std::vector<const Payment*>& kept, const Date& anchor,
                        std::vector<std::vector<double>>& cells) {
                        std::map<std::string, const Payment*> first;
                        for (const auto* p : kept) {
                            auto [it, fresh] = first.try_emplace(p->claim_id, p);
                            if (!fresh && p->payment_date < it->second->payment_date) it->second = p;
                        }
                        for (const auto& [id, p] : first) {
                            const long origin = bucket(p->occurrence_date, anchor, period);
                            const long paid = bucket(p->payment_date, anchor, period);
                            cells[origin][paid - origin] += 1.0;
                        }
                    });
}

ChainLadderResult chain_ladder(const Triangle& t, double tail_factor) {
    check_shape(t);
    if (t.ages() < 2) throw std::invalid_argument("chain ladder needs at least two development ages");
    if (!(tail_factor > 0.0)) throw std::invalid_argument("tail factor must be positive");

    ChainLadderResult r;
    const std::size_t ages = t.ages();
    for (std::size_t j = 0; j + 1 < ages; ++j) {
        detail::CompensatedSum num, den;
        bool any = false;
        for (const auto& row : t.rows) {
            if (row.size() > j + 1) {
                num += row[j + 1];
                den += row[j];
                any = true;
            }
        }
        if (!any) {
            throw std::invalid_argument("no origin observed at ages " + t.age_labels[j] + " and " +
                                        t.age_labels[j + 1]);
        }
        if (den.value() == 0.0) {
            throw std::invalid_argument("zero column sum at age " + t.age_labels[j]);
        }
        r.factors.push_back(num.value() / den.value());
    }
    r.factors.push_back(tail_factor);

    detail::CompensatedSum total;
    for (const auto& row : t.rows) {
        std::vector<double> full = row;
        double to_ult = 1.0;
        for (std::size_t j = row.size() - 1; j < ages; ++j) to_ult *= r.factors[j];
        for (std::size_t j = row.size(); j < ages; ++j) full.push_back(full.back() * r.factors[j - 1]);
        const double ultimate = row.back() * to_ult;
        r.to_ultimate.push_back(to_ult);
        r.completed.push_back(std::move(full));
        r.ultimates.push_back(ultimate);
        r.reserves.push_back(ultimate - row.back());
        total += ultimate - row.back();
    }
    r.reserve = total.value();
    return r;
}

MethodReserve bornhuetter_ferguson(const Triangle& t, std::span<const double> apriori,
                                   double tail_factor) {
    const ChainLadderResult cl = chain_ladder(t, tail_factor);
    if (apriori.size() != t.origins()) {
        throw std::invalid_argument("a-priori ultimates missing: need " +
                                    std::to_string(t.origins()) + ", got " +
                                    std::to_string(apriori.size()));
    }
    MethodReserve out;
    detail::CompensatedSum total;
    for (std::size_t i = 0; i < t.origins(); ++i) {
        const double r = apriori[i] * (1.0 - 1.0 / cl.to_ultimate[i]);
        out.reserves.push_back(r);
        out.ultimates.push_back(t.latest(i) + r);
        total += r;
    }
    out.reserve = total.value();
    return out;
}

MethodReserve frequency_severity(const Triangle& counts, double average_severity,
                                 double paid_total, double tail_factor) {
    const ChainLadderResult cl = chain_ladder(counts, tail_factor);
    MethodReserve out;
    detail::CompensatedSum incurred;
    for (double u : cl.ultimates) {
        out.ultimates.push_back(u * average_severity);
        incurred += u * average_severity;
    }
    out.reserve = incurred.value() - paid_total;
    return out;
}

ReserveRange reasonable_range(std::span<const double> reserves) {
    if (reserves.empty()) throw std::invalid_argument("reasonable range needs at least one reserve");
    const auto [lo, hi] = std::minmax_element(reserves.begin(), reserves.end());
    return {*lo, *hi, (*lo + *hi) / 2.0};
}

}  // namespace qedflow

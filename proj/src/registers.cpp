#include "qedflow/registers.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"

namespace qedflow {

namespace {

constexpr std::string_view kPolicyHeader =
    "policy_id,start_date,end_date,deductible,limitation_days";
constexpr std::string_view kClaimsHeader =
    "policy_id,claim_id,occurrence_date,report_date,settlement_date,paid_to_date,settled";

std::string format_money(double value) {
    std::ostringstream os;
    os << std::setprecision(17) << value;
    return os.str();
}

}  // namespace

RegisterError::RegisterError(std::string source, std::size_t row, std::string column,
                             const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(row) +
                         (column.empty() ? std::string() : " column '" + column + "'") + ": " +
                         what),
      source_(std::move(source)),
      row_(row),
      column_(std::move(column)) {}

std::vector<PolicyRecord> read_policies(std::istream& in, std::string_view source,
                                        long default_limitation_days) {
    const auto names = detail::read_header(in, source, kPolicyHeader);
    std::vector<PolicyRecord> out;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != names.size()) {
            throw RegisterError(std::string(source), row, "",
                                "expected " + std::to_string(names.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        detail::RowReader r{source, row, fields, names};
        PolicyRecord p;
        p.policy_id = r.text(0);
        p.start_date = r.date(1);
        p.end_date = r.date(2);
        p.deductible = fields[3].empty() ? 0.0 : r.money(3);
        p.limitation_days = fields[4].empty() ? default_limitation_days : r.integer(4);
        p.row = row;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ClaimRecord> read_claims(std::istream& in, std::string_view source) {
    const auto names = detail::read_header(in, source, kClaimsHeader);
    std::vector<ClaimRecord> out;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != names.size()) {
            throw RegisterError(std::string(source), row, "",
                                "expected " + std::to_string(names.size()) + " fields, got " +
                                    std::to_string(fields.size()));
        }
        detail::RowReader r{source, row, fields, names};
        ClaimRecord c;
        c.policy_id = r.text(0);
        c.claim_id = r.text(1);
        c.occurrence_date = r.date(2);
        c.report_date = r.date(3);
        if (!fields[4].empty()) c.settlement_date = r.date(4);
        c.paid_to_date = r.money(5);
        c.settled = r.boolean(6);
        if (c.report_date < c.occurrence_date) {
            r.fail(3, "report date precedes occurrence date");
        }
        c.row = row;
        out.push_back(std::move(c));
    }
    return out;
}

Registers parse_registers(const std::filesystem::path& policy_path,
                          const std::filesystem::path& claims_path, long default_limitation_days) {
    std::ifstream pin(policy_path);
    if (!pin) throw RegisterError(policy_path.string(), 0, "", "cannot open file");
    std::ifstream cin(claims_path);
    if (!cin) throw RegisterError(claims_path.string(), 0, "", "cannot open file");

    Registers regs;
    regs.policies = read_policies(pin, policy_path.string(), default_limitation_days);
    regs.claims = read_claims(cin, claims_path.string());

    std::unordered_set<std::string> ids;
    for (const auto& p : regs.policies) ids.insert(p.policy_id);
    for (const auto& c : regs.claims) {
        if (!ids.contains(c.policy_id)) {
            throw RegisterError(claims_path.string(), c.row, "policy_id",
                                "unknown policy '" + c.policy_id + "'");
        }
    }
    return regs;
}

void write_policies(std::ostream& out, std::span<const PolicyRecord> policies) {
    out << kPolicyHeader << '\n';
    for (const auto& p : policies) {
        out << p.policy_id << ',' << format_date(p.start_date) << ',' << format_date(p.end_date)
            << ',' << format_money(p.deductible) << ',' << p.limitation_days << '\n';
    }
}

void write_claims(std::ostream& out, std::span<const ClaimRecord> claims) {
    out << kClaimsHeader << '\n';
    for (const auto& c : claims) {
        out << c.policy_id << ',' << c.claim_id << ',' << format_date(c.occurrence_date) << ','
            << format_date(c.report_date) << ','
            << (c.settlement_date ? format_date(*c.settlement_date) : std::string()) << ','
            << format_money(c.paid_to_date) << ',' << (c.settled ? "true" : "false") << '\n';
    }
}

std::vector<Violation> validate(std::span<const PolicyRecord> policies,
                                std::span<const ClaimRecord> claims, const Date& reporting_date) {
    std::vector<Violation> out;
    std::unordered_map<std::string, const PolicyRecord*> by_id;
    for (const auto& p : policies) {
        const std::string rec = "policy " + p.policy_id;
        if (!by_id.emplace(p.policy_id, &p).second) out.push_back({rec, "duplicate policy id"});
        if (!(p.start_date < p.end_date)) out.push_back({rec, "policy duration nonpositive"});
        if (!(p.start_date < reporting_date)) {
            out.push_back({rec, "policy starts on or after the reporting date"});
        }
        if (p.deductible < 0) out.push_back({rec, "negative deductible"});
        if (p.limitation_days <= 0) out.push_back({rec, "nonpositive limitation period"});
    }

    std::unordered_set<std::string> claim_ids;
    for (const auto& c : claims) {
        const std::string rec = "claim " + c.claim_id;
        if (!claim_ids.insert(c.claim_id).second) out.push_back({rec, "duplicate claim id"});
        if (c.report_date < c.occurrence_date) {
            out.push_back({rec, "report date before occurrence date"});
        }
        if (c.settlement_date && *c.settlement_date < c.report_date) {
            out.push_back({rec, "settlement date before report date"});
        }
        if (c.settled && !c.settlement_date) {
            out.push_back({rec, "settled claim without settlement date"});
        }
        if (c.paid_to_date < 0) out.push_back({rec, "negative paid amount"});

        const auto it = by_id.find(c.policy_id);
        if (it == by_id.end()) {
            out.push_back({rec, "unknown policy '" + c.policy_id + "'"});
            continue;
        }
        const PolicyRecord& p = *it->second;
        const Date last = std::min(p.end_date, reporting_date);
        if (c.occurrence_date < p.start_date || last < c.occurrence_date) {
            out.push_back({rec, "occurrence outside [start, min(end, reporting date)]"});
        }
        if (day_number(c.report_date) - day_number(c.occurrence_date) > p.limitation_days) {
            out.push_back({rec, "reported after the limitation period"});
        }
        if (c.settled && c.paid_to_date < p.deductible) {
            out.push_back({rec, "settled claim below the deductible"});
        }
    }
    return out;
}

}  // namespace qedflow

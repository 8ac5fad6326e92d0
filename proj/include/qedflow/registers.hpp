#ifndef QEDFLOW_REGISTERS_HPP
#define QEDFLOW_REGISTERS_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qedflow/dates.hpp"

namespace qedflow {

inline constexpr long kDefaultLimitationDays = 1095;

// One row of the policy register.
struct PolicyRecord {
    std::string policy_id;
    Date start_date;
    Date end_date;  // exclusive
    double deductible = 0.0;
    long limitation_days = kDefaultLimitationDays;
    std::size_t row = 0;  // 1-based data row in the source file
};

// One row of the claims register, as known at the reporting date.
struct ClaimRecord {
    std::string policy_id;
    std::string claim_id;
    Date occurrence_date;
    Date report_date;
    std::optional<Date> settlement_date;
    double paid_to_date = 0.0;
    bool settled = false;
    std::size_t row = 0;
};

struct Registers {
    std::vector<PolicyRecord> policies;
    std::vector<ClaimRecord> claims;
};

// Malformed input. The message names the source, row and column.
class RegisterError : public std::runtime_error {
public:
    RegisterError(std::string source, std::size_t row, std::string column, const std::string& what);

    const std::string& source() const { return source_; }
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::string source_;
    std::size_t row_;
    std::string column_;
};

std::vector<PolicyRecord> read_policies(std::istream& in, std::string_view source,
                                        long default_limitation_days = kDefaultLimitationDays);
std::vector<ClaimRecord> read_claims(std::istream& in, std::string_view source);

// Reads both registers and resolves every claim's policy_id against the
// policy register.
Registers parse_registers(const std::filesystem::path& policy_path,
                          const std::filesystem::path& claims_path,
                          long default_limitation_days = kDefaultLimitationDays);

void write_policies(std::ostream& out, std::span<const PolicyRecord> policies);
void write_claims(std::ostream& out, std::span<const ClaimRecord> claims);

struct Violation {
    std::string record;  // "policy <id>" or "claim <id>"
    std::string message;
};

// Checks the date orderings and cross references the sample construction
// relies on. An empty result means the registers are usable as of
// `reporting_date`.
std::vector<Violation> validate(std::span<const PolicyRecord> policies,
                                std::span<const ClaimRecord> claims, const Date& reporting_date);

}  // namespace qedflow

#endif  // QEDFLOW_REGISTERS_HPP

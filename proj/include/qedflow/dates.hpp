#ifndef QEDFLOW_DATES_HPP
#define QEDFLOW_DATES_HPP

#include <chrono>
#include <string>
#include <string_view>

namespace qedflow {

using Date = std::chrono::year_month_day;

// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument
// on malformed or nonexistent dates.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

// Days since 1970-01-01.
long day_number(const Date& date);
Date from_day_number(long days);

// Length of the exposure unit Δt used when slicing policies into
// observations. Month units follow the calendar (one unit per month).
enum class TimeUnit { Day, Month };

TimeUnit parse_time_unit(std::string_view text);
std::string_view to_string(TimeUnit unit);

// Ordinal of the unit containing `date`; differences of ordinals give
// elapsed whole units.
long unit_index(const Date& date, TimeUnit unit);

// Converts a limitation period in days to whole units (months are rounded
// to the nearest month of 365.25/12 days).
long days_to_units(long days, TimeUnit unit);

}  // namespace qedflow

#endif  // QEDFLOW_DATES_HPP

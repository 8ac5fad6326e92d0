#include "qedflow/dates.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace qedflow {

namespace {

int parse_field(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("malformed date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw std::invalid_argument("malformed date '" + std::string(text) +
                                    "' (expected YYYY-MM-DD)");
    }
    const int y = parse_field(text.substr(0, 4), text);
    const int m = parse_field(text.substr(5, 2), text);
    const int d = parse_field(text.substr(8, 2), text);
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw std::invalid_argument("nonexistent date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

long day_number(const Date& date) {
    return static_cast<long>(std::chrono::sys_days{date}.time_since_epoch().count());
}

Date from_day_number(long days) {
    return Date{std::chrono::sys_days{std::chrono::days{days}}};
}

TimeUnit parse_time_unit(std::string_view text) {
    if (text == "day") return TimeUnit::Day;
    if (text == "month") return TimeUnit::Month;
    throw std::invalid_argument("unknown time unit '" + std::string(text) +
                                "' (expected day or month)");
}

std::string_view to_string(TimeUnit unit) {
    return unit == TimeUnit::Day ? "day" : "month";
}

long unit_index(const Date& date, TimeUnit unit) {
    if (unit == TimeUnit::Day) return day_number(date);
    return static_cast<long>(static_cast<int>(date.year())) * 12 +
           static_cast<long>(static_cast<unsigned>(date.month())) - 1;
}

long days_to_units(long days, TimeUnit unit) {
    if (unit == TimeUnit::Day) return days;
    return std::lround(static_cast<double>(days) * 12.0 / 365.25);
}

}  // namespace qedflow

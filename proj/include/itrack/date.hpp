#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace itrack {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws itrack::Error on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// 1..4
int quarter_of(Date d);

/// Monday-to-Friday calendar between first and last, inclusive.
std::vector<Date> business_days(Date first, Date last);
/// `count` consecutive business days starting on or after `first`.
std::vector<Date> business_days(Date first, std::size_t count);

}  // namespace itrack

#include "itrack/date.hpp"

#include "itrack/types.hpp"

#include <charconv>
#include <cstdio>

namespace itrack {

namespace {

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("malformed date '" + std::string(whole) + "'");
    }
    return v;
}

bool is_weekday(std::chrono::sys_days d) {
    const std::chrono::weekday w{d};
    return w != std::chrono::Saturday && w != std::chrono::Sunday;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error("malformed date '" + std::string(text) + "'");
    }
    const int y = parse_int(text.substr(0, 4), text);
    const int m = parse_int(text.substr(5, 2), text);
    const int d = parse_int(text.substr(8, 2), text);
    const Date out{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                   std::chrono::day{static_cast<unsigned>(d)}};
    if (!out.ok()) throw Error("invalid calendar date '" + std::string(text) + "'");
    return out;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

int quarter_of(Date d) { return (static_cast<int>(static_cast<unsigned>(d.month())) - 1) / 3 + 1; }

std::vector<Date> business_days(Date first, Date last) {
    std::vector<Date> out;
    for (std::chrono::sys_days d{first}; d <= std::chrono::sys_days{last}; d += std::chrono::days{1}) {
        if (is_weekday(d)) out.emplace_back(d);
    }
    return out;
}

std::vector<Date> business_days(Date first, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    for (std::chrono::sys_days d{first}; out.size() < count; d += std::chrono::days{1}) {
        if (is_weekday(d)) out.emplace_back(d);
    }
    return out;
}

}  // namespace itrack

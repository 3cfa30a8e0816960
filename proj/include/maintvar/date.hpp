#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace maintvar {

/// Calendar date at daily resolution, stored as days since 1970-01-01.
///
/// Civil-calendar conversions follow the classic days-from-civil algorithm,
/// exact over the proleptic Gregorian calendar.
struct Date {
    std::int32_t serial = 0;

    constexpr auto operator<=>(const Date&) const = default;

    static constexpr Date from_ymd(int y, unsigned m, unsigned d) {
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return Date{static_cast<std::int32_t>(era * 146097 + static_cast<int>(doe) - 719468)};
    }

    struct Ymd {
        int year;
        unsigned month;
        unsigned day;
    };

    constexpr Ymd to_ymd() const {
        std::int64_t z = serial + 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Ymd{y + (m <= 2), m, d};
    }

    Date next_day() const { return Date{serial + 1}; }

    std::string to_string() const {
        const Ymd ymd = to_ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", ymd.year, ymd.month, ymd.day);
        return buf;
    }
};

enum class DateFormat {
    Iso,           ///< YYYY-MM-DD
    DayMonthYear,  ///< DD/MM/YYYY
};

namespace detail {

inline bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

/// Parses a calendar date; returns nullopt on any malformation or
/// out-of-range component.
inline std::optional<Date> parse_date(std::string_view text, DateFormat format = DateFormat::Iso) {
    const char sep = format == DateFormat::Iso ? '-' : '/';
    const auto a = text.find(sep);
    if (a == std::string_view::npos) return std::nullopt;
    const auto b = text.find(sep, a + 1);
    if (b == std::string_view::npos || text.find(sep, b + 1) != std::string_view::npos)
        return std::nullopt;

    unsigned f0 = 0, f1 = 0, f2 = 0;
    if (!detail::parse_uint(text.substr(0, a), f0) ||
        !detail::parse_uint(text.substr(a + 1, b - a - 1), f1) ||
        !detail::parse_uint(text.substr(b + 1), f2))
        return std::nullopt;

    unsigned year = 0, month = 0, day = 0;
    if (format == DateFormat::Iso) {
        year = f0, month = f1, day = f2;
    } else {
        day = f0, month = f1, year = f2;
    }
    if (year < 1000 || year > 9999 || month < 1 || month > 12 || day < 1 || day > 31)
        return std::nullopt;

    const Date date = Date::from_ymd(static_cast<int>(year), month, day);
    const Date::Ymd back = date.to_ymd();
    if (back.year != static_cast<int>(year) || back.month != month || back.day != day)
        return std::nullopt;  // rejects 31/02 and friends
    return date;
}

inline std::string format_date(Date date, DateFormat format) {
    if (format == DateFormat::Iso) return date.to_string();
    const Date::Ymd ymd = date.to_ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", ymd.day, ymd.month, ymd.year);
    return buf;
}

}  // namespace maintvar

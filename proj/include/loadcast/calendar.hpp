#pragma once

#include <cstdint>
#include <string>

namespace loadcast {

// Hours since 1970-01-01 00:00, timezone-naive local time.
using HourStamp = std::int64_t;

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
    friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

struct CivilDateTime {
    CivilDate date;
    int hour = 0;    // 0..23
    int minute = 0;  // 0..59
    int second = 0;  // 0..59
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
int days_in_year(int year);

// Days since 1970-01-01 (negative before).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t days);

// Monday = 0 ... Sunday = 6.
int weekday(const CivilDate& d);

// 0-based day of year (Jan 1 -> 0).
int day_of_year(const CivilDate& d);

inline HourStamp hour_stamp(const CivilDate& d, int hour) {
    return days_from_civil(d) * 24 + hour;
}
inline CivilDate date_of(HourStamp h) {
    std::int64_t days = h >= 0 ? h / 24 : (h - 23) / 24;
    return civil_from_days(days);
}
inline int hour_of_day(HourStamp h) {
    int r = static_cast<int>(h % 24);
    return r < 0 ? r + 24 : r;
}

// "YYYY-MM-DD". Throws DataError on malformed input.
CivilDate parse_date(const std::string& text);

// ISO-8601 without offset: "YYYY-MM-DD[T ]HH:MM[:SS]" or bare date.
CivilDateTime parse_datetime(const std::string& text);

std::string format_date(const CivilDate& d);
std::string format_hour(HourStamp h);  // "YYYY-MM-DDTHH:00"

}  // namespace loadcast

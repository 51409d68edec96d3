#include "loadcast/calendar.hpp"

#include <cstdio>

#include "loadcast/errors.hpp"

namespace loadcast {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

// Civil-date <-> day-count conversions after Howard Hinnant's algorithms.
std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    y -= d.month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned month = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (month <= 2)), static_cast<int>(month), static_cast<int>(day)};
}

int weekday(const CivilDate& d) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    std::int64_t days = days_from_civil(d);
    std::int64_t w = (days + 3) % 7;
    return static_cast<int>(w < 0 ? w + 7 : w);
}

int day_of_year(const CivilDate& d) {
    return static_cast<int>(days_from_civil(d) - days_from_civil({d.year, 1, 1}));
}

namespace {

bool valid_date(int y, int m, int d) {
    return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

}  // namespace

CivilDate parse_date(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3 || !valid_date(y, m, d)) {
        throw DataError("invalid date '" + text + "' (expected YYYY-MM-DD)");
    }
    return {y, m, d};
}

CivilDateTime parse_datetime(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0, tail = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%c", &y, &mo, &d, &sep, &h, &mi, &s, &tail);
    if (n == 3) return {parse_date(text), 0, 0, 0};
    bool ok = (n == 6 || n == 7) && (sep == 'T' || sep == ' ') && valid_date(y, mo, d) &&
              h >= 0 && h < 24 && mi >= 0 && mi < 60 && s >= 0 && s < 60;
    if (!ok) {
        throw DataError("invalid timestamp '" + text + "' (expected ISO-8601 without offset)");
    }
    return {{y, mo, d}, h, mi, s};
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string format_hour(HourStamp h) {
    char buf[24];
    CivilDate d = date_of(h);
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00", d.year, d.month, d.day, hour_of_day(h));
    return buf;
}

}  // namespace loadcast

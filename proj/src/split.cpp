#include "loadcast/split.hpp"

#include "loadcast/errors.hpp"

namespace loadcast {

namespace {

// First day of the month `offset` months before (year, month).
CivilDate shift_months(int year, int month, int offset_back) {
    int index = year * 12 + (month - 1) - offset_back;
    int y = index / 12;
    int m = index % 12;
    if (m < 0) {
        m += 12;
        --y;
    }
    return {y, m + 1, 1};
}

}  // namespace

HourRange quarter_range(Quarter q, int year) {
    int first_month = (static_cast<int>(q) - 1) * 3 + 1;
    CivilDate start{year, first_month, 1};
    CivilDate end = shift_months(year, first_month, -3);
    return {hour_stamp(start, 0), hour_stamp(end, 0)};
}

DataSplit make_split(const HourlyGrid& coverage, Quarter test_quarter, int test_year,
                     int train_months) {
    if (train_months < 1) throw DataError("train_months must be at least 1");

    DataSplit split;
    split.test_quarter = test_quarter;
    split.test_year = test_year;
    split.train_months = train_months;
    split.test = quarter_range(test_quarter, test_year);

    int first_month = (static_cast<int>(test_quarter) - 1) * 3 + 1;
    CivilDate train_start = shift_months(test_year, first_month, train_months);
    split.train = {hour_stamp(train_start, 0), split.test.start};

    if (coverage.start > split.train.start || coverage.end() < split.test.end) {
        // Report how much history is missing in whole months for a readable error.
        double missing_hours = 0.0;
        if (coverage.start > split.train.start) {
            missing_hours += static_cast<double>(coverage.start - split.train.start);
        }
        if (coverage.end() < split.test.end) {
            missing_hours += static_cast<double>(split.test.end - coverage.end());
        }
        double missing_months = missing_hours / (30.4375 * 24.0);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", missing_months);
        throw DataError("series covers " + format_hour(coverage.start) + " .. " +
                        format_hour(coverage.end()) + " but the split needs " +
                        format_hour(split.train.start) + " .. " + format_hour(split.test.end) +
                        " (about " + buf + " months missing)");
    }
    return split;
}

}  // namespace loadcast

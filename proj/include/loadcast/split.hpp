#pragma once

#include "loadcast/series.hpp"

namespace loadcast {

// Calendar range of one quarter, [start, end) in hours.
HourRange quarter_range(Quarter q, int year);

// Test set = the named quarter; training = the train_months calendar months
// immediately preceding it (no gap, no overlap). The coverage grid is checked
// against the requested range and the error names the missing months.
DataSplit make_split(const HourlyGrid& coverage, Quarter test_quarter, int test_year,
                     int train_months);

inline DataSplit make_split(const LoadSeries& series, Quarter test_quarter, int test_year,
                            int train_months) {
    return make_split(series.grid(), test_quarter, test_year, train_months);
}

}  // namespace loadcast

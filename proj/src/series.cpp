#include "loadcast/series.hpp"

#include "loadcast/errors.hpp"

namespace loadcast {

double LoadSeries::total_kwh() const {
    // dt = 1 h, so kW per hour contributes the same number in kWh.
    double sum = 0.0;
    for (double v : values_kw) sum += v;
    return sum;
}

LoadSeries aggregate_members(const std::vector<const LoadSeries*>& members, const std::string& id) {
    if (members.empty()) throw DataError("cannot aggregate an empty member list");
    const HourlyGrid grid = members.front()->grid();
    for (const LoadSeries* m : members) {
        if (m->start != grid.start || m->values_kw.size() != grid.size) {
            throw DataError("member series '" + m->id + "' does not share the community grid");
        }
    }
    LoadSeries out;
    out.id = id;
    out.start = grid.start;
    out.values_kw.assign(grid.size, 0.0);
    // Fixed member order keeps the summation order (and thus the result) exact
    // and reproducible.
    for (const LoadSeries* m : members) {
        for (std::size_t i = 0; i < grid.size; ++i) out.values_kw[i] += m->values_kw[i];
    }
    return out;
}

}  // namespace loadcast

#include "loadcast/tariff.hpp"

#include <cmath>

#include "loadcast/errors.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

PriceSeries synthetic_spot(const SyntheticSpotSpec& spec, HourStamp start, std::size_t hours) {
    PriceSeries series;
    series.start = start;
    series.eur_per_kwh.reserve(hours);
    Rng rng(spec.seed);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < hours; ++i) {
        HourStamp h = start + static_cast<HourStamp>(i);
        double angle = two_pi * (static_cast<double>(hour_of_day(h)) - spec.phase_hours) / 24.0;
        double price = spec.base_eur_per_kwh + spec.amplitude * std::sin(angle);
        if (spec.noise_sd > 0.0) price += spec.noise_sd * rng.normal();
        series.eur_per_kwh.push_back(price);
    }
    return series;
}

PriceSeries build_tariff(const PriceSeries& spot, double network_fee_eur_per_kwh,
                         double tax_rate) {
    if (network_fee_eur_per_kwh < 0.0) throw DataError("network fee must be non-negative");
    if (tax_rate < 0.0) throw DataError("tax rate must be non-negative");
    PriceSeries tariff;
    tariff.start = spot.start;
    tariff.eur_per_kwh.reserve(spot.eur_per_kwh.size());
    for (double p : spot.eur_per_kwh) {
        if (!std::isfinite(p)) throw DataError("spot price must be finite");
        tariff.eur_per_kwh.push_back((p + network_fee_eur_per_kwh) * (1.0 + tax_rate));
    }
    return tariff;
}

PriceSeries build_tariff(const SyntheticSpotSpec& spec, HourStamp start, std::size_t hours,
                         double network_fee_eur_per_kwh, double tax_rate) {
    return build_tariff(synthetic_spot(spec, start, hours), network_fee_eur_per_kwh, tax_rate);
}

}  // namespace loadcast

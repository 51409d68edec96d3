#pragma once

#include <cstdint>

#include "loadcast/series.hpp"

namespace loadcast {

// Day-ahead-style synthetic spot index for runs without a real price feed:
// base + amplitude * sin(2*pi*(hour_of_day - phase)/24) + seeded noise.
struct SyntheticSpotSpec {
    double base_eur_per_kwh = 0.10;
    double amplitude = 0.05;
    double phase_hours = 9.0;
    double noise_sd = 0.005;
    std::uint64_t seed = 0;
};

PriceSeries synthetic_spot(const SyntheticSpotSpec& spec, HourStamp start, std::size_t hours);

// Retail tariff: pi = (spot + network_fee) * (1 + tax_rate).
PriceSeries build_tariff(const PriceSeries& spot, double network_fee_eur_per_kwh,
                         double tax_rate);

PriceSeries build_tariff(const SyntheticSpotSpec& spec, HourStamp start, std::size_t hours,
                         double network_fee_eur_per_kwh, double tax_rate);

}  // namespace loadcast

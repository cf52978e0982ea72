#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tvws/geo.hpp"

namespace tvws {

inline constexpr double kChannelWidthMhz = 8.0;

/// One 8 MHz slot of the UHF band plan.
struct Channel {
    int index = 0;        // 1-based
    double low_mhz = 0.0;
    double high_mhz = 0.0;

    double center_mhz() const { return 0.5 * (low_mhz + high_mhz); }
};

/// Regulatory parameters of the service area. Defaults describe the Indian
/// UHF band-IV plan: fifteen 8 MHz channels in 470-590 MHz, a -114 dBm
/// protection threshold, 30 dBm secondary power cap, 48 h schedules.
struct RegulatoryConfig {
    double protection_threshold_dbm = -114.0;
    int channel_count = 15;
    double band_low_mhz = 470.0;
    double band_high_mhz = 590.0;
    double max_secondary_eirp_dbm = 30.0;
    int schedule_horizon_hours = 48;
    double location_accuracy_m = 50.0;
    Polygon regulatory_boundary;

    void validate() const {
        if (channel_count <= 0) throw std::invalid_argument("channel_count must be positive");
        if (!std::isfinite(band_low_mhz) || !std::isfinite(band_high_mhz) ||
            !std::isfinite(protection_threshold_dbm) || !std::isfinite(max_secondary_eirp_dbm) ||
            !std::isfinite(location_accuracy_m))
            throw std::invalid_argument("regulatory config has non-finite fields");
        if (std::abs(channel_count * kChannelWidthMhz - (band_high_mhz - band_low_mhz)) > 1e-9)
            throw std::invalid_argument("band width must equal channel_count * 8 MHz");
        if (schedule_horizon_hours <= 0)
            throw std::invalid_argument("schedule horizon must be positive");
    }

    Channel channel(int index) const {
        if (index < 1 || index > channel_count)
            throw std::out_of_range("channel index out of range");
        const double low = band_low_mhz + kChannelWidthMhz * (index - 1);
        return Channel{index, low, low + kChannelWidthMhz};
    }

    std::vector<Channel> channels() const {
        std::vector<Channel> out;
        out.reserve(static_cast<std::size_t>(channel_count));
        for (int i = 1; i <= channel_count; ++i) out.push_back(channel(i));
        return out;
    }
};

}  // namespace tvws

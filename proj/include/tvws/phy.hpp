#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace tvws {

/// Spectral-efficiency envelope of a white-space PHY. Throughput is modeled
/// as Shannon capacity clamped to the [se_min, se_max] envelope and to the
/// standard's advertised cap per 8 MHz channel.
struct PhyProfile {
    std::string name;
    double se_min_bps_hz = 0.0;
    double se_max_bps_hz = 0.0;
    double max_throughput_mbps_per_8mhz = 0.0;
    double min_snr_db = 0.0;  // below this the link does not close

    void validate() const {
        if (!(se_min_bps_hz > 0.0) || !(se_min_bps_hz <= se_max_bps_hz))
            throw std::invalid_argument("phy profile needs 0 < se_min <= se_max");
        if (!(max_throughput_mbps_per_8mhz <= se_max_bps_hz * 8.0))
            throw std::invalid_argument("phy cap exceeds se_max * 8 MHz");
        if (!std::isfinite(min_snr_db))
            throw std::invalid_argument("min_snr_db must be finite");
    }
};

// Closure floors are the SNRs where Shannon capacity meets se_min:
// 10 log10(2^se_min - 1).
inline PhyProfile phy_802_11af() {
    return PhyProfile{"802.11af", 0.3, 4.5, 35.6, -6.36};
}

inline PhyProfile phy_802_22() {
    return PhyProfile{"802.22", 0.6, 3.1, 19.0, -2.88};
}

inline std::optional<PhyProfile> phy_profile_by_name(const std::string& name) {
    if (name == "802.11af") return phy_802_11af();
    if (name == "802.22") return phy_802_22();
    return std::nullopt;
}

/// SNR -> deliverable rate over the given bandwidth, in Mbps.
inline double link_throughput_mbps(double snr_db, double bandwidth_mhz, const PhyProfile& profile) {
    if (!(bandwidth_mhz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    if (!std::isfinite(snr_db) || snr_db < profile.min_snr_db) return 0.0;
    const double snr_linear = std::pow(10.0, snr_db / 10.0);
    const double se = std::clamp(std::log2(1.0 + snr_linear), profile.se_min_bps_hz, profile.se_max_bps_hz);
    const double cap = profile.max_throughput_mbps_per_8mhz * bandwidth_mhz / 8.0;
    return std::min(se * bandwidth_mhz, cap);
}

}  // namespace tvws

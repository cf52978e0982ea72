#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/channels.hpp"
#include "tvws/geo.hpp"
#include "tvws/propagation.hpp"
#include "tvws/towers.hpp"
#include "tvws/util.hpp"

namespace tvws {

struct BoundaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Interferer {
    std::string tower_id;
    double predicted_dbm = 0.0;
};

struct ChannelDecision {
    int channel_index = 0;
    bool available = false;
    double max_eirp_dbm = 0.0;            // meaningful only when available
    std::optional<Interferer> dominant;   // set only when unavailable
};

struct AvailabilityResult {
    GeoPoint location;
    std::vector<ChannelDecision> entries;  // exactly channel_count, index ascending

    int available_count() const {
        int n = 0;
        for (const auto& e : entries) n += e.available ? 1 : 0;
        return n;
    }
};

struct BoundingBox {
    double lat_min = 0.0, lon_min = 0.0, lat_max = 0.0, lon_max = 0.0;

    void validate() const {
        if (!(lat_min < lat_max) || !(lon_min < lon_max))
            throw std::invalid_argument("degenerate bounding box");
    }
};

struct GridStats {
    struct Point {
        GeoPoint location;
        int available_count = 0;
    };

    BoundingBox bbox;
    double resolution_deg = 0.0;
    int channel_count = 0;
    std::vector<Point> points;  // in-boundary points only, row-major sweep order

    int min_count() const {
        int m = 0;
        bool first = true;
        for (const auto& p : points) {
            if (first || p.available_count < m) m = p.available_count;
            first = false;
        }
        return points.empty() ? 0 : m;
    }

    double mean_count() const {
        if (points.empty()) return 0.0;
        double s = 0.0;
        for (const auto& p : points) s += p.available_count;
        return s / static_cast<double>(points.size());
    }

    /// fraction_at_least()[k] = share of in-boundary points with >= k channels.
    std::vector<double> fraction_at_least() const {
        std::vector<double> out(static_cast<std::size_t>(channel_count) + 1, 0.0);
        if (points.empty()) return out;
        for (const auto& p : points)
            for (int k = 0; k <= p.available_count; ++k) out[static_cast<std::size_t>(k)] += 1.0;
        for (auto& v : out) v /= static_cast<double>(points.size());
        return out;
    }

    void write_csv(std::ostream& os) const {
        os << "lat_deg,lon_deg,available_count\n";
        char buf[96];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d\n", p.location.lat_deg,
                          p.location.lon_deg, p.available_count);
            os << buf;
        }
    }

    nlohmann::ordered_json summary_json() const {
        nlohmann::ordered_json j;
        j["bbox"] = {{"latMin", bbox.lat_min}, {"lonMin", bbox.lon_min},
                     {"latMax", bbox.lat_max}, {"lonMax", bbox.lon_max}};
        j["resolutionDeg"] = resolution_deg;
        j["channelCount"] = channel_count;
        j["inBoundaryPoints"] = points.size();
        j["minCount"] = min_count();
        j["meanCount"] = mean_count();
        j["fractionAtLeast"] = fraction_at_least();
        return j;
    }

    std::uint64_t digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        char buf[96];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof(buf), "%.9f|%.9f|%d\n", p.location.lat_deg,
                          p.location.lon_deg, p.available_count);
            h = fnv1a64(buf, h);
        }
        return h;
    }
};

/// Protection-rule evaluator. A channel is available at a point iff no
/// co-channel tower is predicted above the protection threshold into a
/// 0 dBi isotropic reference antenna. Per-channel scan cutoffs are
/// precomputed from the strongest ERP and tallest mast on that channel;
/// when even those never fall under the threshold the scan stays unbounded.
class AvailabilityEngine {
public:
    AvailabilityEngine(const TowerDataset& ds, RegulatoryConfig cfg, PathLossParams plp)
        : ds_(&ds), cfg_(std::move(cfg)), plp_(plp) {
        cfg_.validate();
        plp_.validate();
        compute_cutoffs();
    }

    const RegulatoryConfig& config() const { return cfg_; }
    const TowerDataset& dataset() const { return *ds_; }

    bool in_coverage(const GeoPoint& p) const {
        return cfg_.regulatory_boundary.empty() || cfg_.regulatory_boundary.contains(p);
    }

    double predicted_dbm(const TowerRecord& t, const GeoPoint& p, double f_mhz) const {
        PathLossParams q = plp_;
        q.tx_height_m = t.antenna_height_m;
        const double d = haversine_km(t.location, p);
        return received_power_dbm(t.erp_dbm, 0.0, path_loss_db(d, f_mhz, q).loss_db);
    }

    std::pair<bool, std::optional<Interferer>> channel_available(const Channel& c,
                                                                 const GeoPoint& p) const {
        if (!in_coverage(p)) throw BoundaryError("point outside regulatory boundary");
        const double radius =
            cutoff_km_[static_cast<std::size_t>(c.index)].value_or(std::numeric_limits<double>::infinity());
        std::optional<Interferer> strongest;
        ds_->for_each_on_channel_within(c.index, p, radius, [&](const TowerRecord& t, double) {
            const double rx = predicted_dbm(t, p, c.center_mhz());
            if (!strongest || rx > strongest->predicted_dbm ||
                (rx == strongest->predicted_dbm && t.tower_id < strongest->tower_id))
                strongest = Interferer{t.tower_id, rx};
        });
        const bool available =
            !strongest || strongest->predicted_dbm <= cfg_.protection_threshold_dbm;
        if (available) return {true, std::nullopt};
        return {false, strongest};
    }

    AvailabilityResult available_channels(const GeoPoint& p) const {
        if (!in_coverage(p)) throw BoundaryError("point outside regulatory boundary");
        AvailabilityResult res;
        res.location = p;
        res.entries.reserve(static_cast<std::size_t>(cfg_.channel_count));
        for (int i = 1; i <= cfg_.channel_count; ++i) {
            const auto [ok, dom] = channel_available(cfg_.channel(i), p);
            ChannelDecision d;
            d.channel_index = i;
            d.available = ok;
            d.max_eirp_dbm = ok ? cfg_.max_secondary_eirp_dbm
                                : std::numeric_limits<double>::quiet_NaN();
            d.dominant = dom;
            res.entries.push_back(std::move(d));
        }
        return res;
    }

    /// Row-major sweep (latitude rows south to north, longitude west to
    /// east); points outside the boundary are skipped.
    GridStats availability_grid(const BoundingBox& bbox, double resolution_deg) const {
        bbox.validate();
        if (!(resolution_deg > 0.0)) throw std::invalid_argument("resolution must be positive");
        GridStats gs;
        gs.bbox = bbox;
        gs.resolution_deg = resolution_deg;
        gs.channel_count = cfg_.channel_count;
        const int nlat =
            static_cast<int>(std::floor((bbox.lat_max - bbox.lat_min) / resolution_deg + 1e-9)) + 1;
        const int nlon =
            static_cast<int>(std::floor((bbox.lon_max - bbox.lon_min) / resolution_deg + 1e-9)) + 1;
        for (int i = 0; i < nlat; ++i) {
            const double lat = bbox.lat_min + i * resolution_deg;
            for (int j = 0; j < nlon; ++j) {
                const double lon = bbox.lon_min + j * resolution_deg;
                const GeoPoint p{lat, lon};
                if (!in_coverage(p)) continue;
                gs.points.push_back({p, available_channels(p).available_count()});
            }
        }
        return gs;
    }

    std::optional<double> cutoff_km(int channel_index) const {
        return cutoff_km_.at(static_cast<std::size_t>(channel_index));
    }

private:
    // Upper envelope of both models so the cutoff bisection sees a
    // monotone non-increasing received power regardless of the sub-1 km
    // free-space fallback.
    double envelope_rx_dbm(double erp, double d_km, double f_mhz, double height_m) const {
        PathLossParams q = plp_;
        q.tx_height_m = height_m;
        double rx = erp - free_space_path_loss_db(d_km, f_mhz, q.min_distance_km);
        if (plp_.model == PathLossModel::HataOpen)
            rx = std::max(rx, erp - hata_open_path_loss_db(d_km, f_mhz, q).loss_db);
        return rx;
    }

    void compute_cutoffs() {
        const std::size_t n = static_cast<std::size_t>(cfg_.channel_count) + 1;
        cutoff_km_.assign(n, std::optional<double>(0.0));
        std::vector<double> max_erp(n, -std::numeric_limits<double>::infinity());
        std::vector<double> max_height(n, 0.0);
        for (const auto& t : ds_->records()) {
            if (t.channel_index < 1 || t.channel_index > cfg_.channel_count) continue;
            auto ci = static_cast<std::size_t>(t.channel_index);
            max_erp[ci] = std::max(max_erp[ci], t.erp_dbm);
            max_height[ci] = std::max(max_height[ci], t.antenna_height_m);
        }
        const double max_geo_km = kPi * kEarthRadiusKm + 1.0;
        for (int c = 1; c <= cfg_.channel_count; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            if (!std::isfinite(max_erp[ci])) continue;  // channel unused in dataset
            const double f = cfg_.channel(c).center_mhz();
            auto above = [&](double d) {
                return envelope_rx_dbm(max_erp[ci], d, f, max_height[ci]) >
                       cfg_.protection_threshold_dbm;
            };
            if (above(max_geo_km)) {
                cutoff_km_[ci] = std::nullopt;  // unbounded scan
                continue;
            }
            if (!above(plp_.min_distance_km)) {
                cutoff_km_[ci] = 0.0;
                continue;
            }
            double lo = plp_.min_distance_km, hi = max_geo_km;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (above(mid) ? lo : hi) = mid;
            }
            cutoff_km_[ci] = hi + 0.1;  // pad the upper side
        }
    }

    const TowerDataset* ds_;
    RegulatoryConfig cfg_;
    PathLossParams plp_;
    std::vector<std::optional<double>> cutoff_km_;
};

inline std::pair<bool, std::optional<Interferer>> channel_available(
    const TowerDataset& ds, const Channel& c, const GeoPoint& p, const RegulatoryConfig& cfg,
    const PathLossParams& plp) {
    return AvailabilityEngine(ds, cfg, plp).channel_available(c, p);
}

inline AvailabilityResult available_channels(const TowerDataset& ds, const GeoPoint& p,
                                             const RegulatoryConfig& cfg,
                                             const PathLossParams& plp) {
    return AvailabilityEngine(ds, cfg, plp).available_channels(p);
}

inline GridStats availability_grid(const TowerDataset& ds, const BoundingBox& bbox,
                                   double resolution_deg, const RegulatoryConfig& cfg,
                                   const PathLossParams& plp) {
    return AvailabilityEngine(ds, cfg, plp).availability_grid(bbox, resolution_deg);
}

inline nlohmann::ordered_json availability_to_json(const AvailabilityResult& res) {
    nlohmann::ordered_json j;
    j["location"] = {{"lat", res.location.lat_deg}, {"lon", res.location.lon_deg}};
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : res.entries) {
        nlohmann::ordered_json c;
        c["channel"] = e.channel_index;
        c["available"] = e.available;
        if (e.available) {
            c["maxEirpDbm"] = e.max_eirp_dbm;
        } else if (e.dominant) {
            c["interferer"] = {{"towerId", e.dominant->tower_id},
                               {"predictedDbm", e.dominant->predicted_dbm}};
        }
        arr.push_back(std::move(c));
    }
    j["channels"] = std::move(arr);
    return j;
}

}  // namespace tvws

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tvws/geo.hpp"
#include "tvws/propagation.hpp"
#include "tvws/util.hpp"

namespace tvws {

struct TowerRecord {
    std::string tower_id;
    GeoPoint location;
    int channel_index = 0;
    double erp_dbm = 0.0;
    double antenna_height_m = 0.0;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-row validation failures collected during ingestion.
struct IngestReport {
    struct Reject {
        int line = 0;
        std::string reason;
    };
    std::vector<Reject> rejects;

    std::string to_text() const {
        std::ostringstream os;
        for (const auto& r : rejects) os << "line " << r.line << ": " << r.reason << "\n";
        return os.str();
    }
};

/// Immutable transmitter registry with a per-channel spatial index over
/// 0.5 degree lat/lon cells. Index results are checked against linear scans
/// in the test suite; the index is a lookup accelerator, never the source
/// of truth for correctness.
class TowerDataset {
public:
    static constexpr double kCellDeg = 0.5;

    TowerDataset() = default;

    explicit TowerDataset(std::vector<TowerRecord> records, int max_channel = 15)
        : records_(std::move(records)), max_channel_(max_channel) {
        std::unordered_set<std::string> seen;
        for (const auto& t : records_) {
            validate_record(t, max_channel_);
            if (!seen.insert(t.tower_id).second)
                throw IngestError("duplicate tower_id: " + t.tower_id);
        }
        build_index();
    }

    const std::vector<TowerRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    int max_channel() const { return max_channel_; }

    /// Co-channel towers with haversine distance <= radius_km, sorted by
    /// distance ascending, ties by tower_id.
    std::vector<TowerRecord> on_channel_within(int channel_index, const GeoPoint& center,
                                               double radius_km) const {
        std::vector<TowerRecord> out;
        for_each_on_channel_within(channel_index, center, radius_km,
                                   [&](const TowerRecord& t, double) { out.push_back(t); });
        std::sort(out.begin(), out.end(), [&](const TowerRecord& a, const TowerRecord& b) {
            const double da = haversine_km(a.location, center);
            const double db = haversine_km(b.location, center);
            if (da != db) return da < db;
            return a.tower_id < b.tower_id;
        });
        return out;
    }

    /// Visits co-channel towers within radius_km (no radius cap when
    /// radius_km is not finite). Visit order is unspecified.
    template <typename Fn>
    void for_each_on_channel_within(int channel_index, const GeoPoint& center, double radius_km,
                                    Fn&& fn) const {
        require_valid(center);
        if (channel_index < 1 || channel_index > max_channel_) return;
        if (std::isfinite(radius_km) && radius_km < 0.0)
            throw std::invalid_argument("radius must be non-negative");
        const auto it = index_.find(channel_index);
        if (it == index_.end()) return;
        const auto& cells = it->second;

        auto visit_cell = [&](std::int64_t key) {
            const auto cit = cells.find(key);
            if (cit == cells.end()) return;
            for (std::size_t idx : cit->second) {
                const double d = haversine_km(records_[idx].location, center);
                if (d <= radius_km) fn(records_[idx], d);
            }
        };

        if (!std::isfinite(radius_km)) {
            for (const auto& [key, idxs] : cells)
                for (std::size_t idx : idxs) fn(records_[idx], haversine_km(records_[idx].location, center));
            return;
        }

        const double dlat_deg = radius_km / 111.0;  // slightly tight km/deg; padded below
        const int row_lo = cell_coord(std::max(center.lat_deg - dlat_deg, -90.0)) - 1;
        const int row_hi = cell_coord(std::min(center.lat_deg + dlat_deg, 90.0)) + 1;
        constexpr int kLonCells = static_cast<int>(360.0 / kCellDeg);
        for (int row = row_lo; row <= row_hi; ++row) {
            // widest longitude span needed anywhere in this row
            const double lat_edge_a = std::abs(row * kCellDeg);
            const double lat_edge_b = std::abs((row + 1) * kCellDeg);
            const double max_abs_lat = std::min(std::max(lat_edge_a, lat_edge_b), 89.9);
            const double cos_lat = std::cos(deg2rad(max_abs_lat));
            double dlon_deg = 180.0;
            if (cos_lat > 1e-6) dlon_deg = std::min(radius_km / (111.0 * cos_lat), 180.0);
            if (dlon_deg >= 180.0) {
                for (int col = -kLonCells / 2; col < kLonCells / 2; ++col)
                    visit_cell(cell_key(row, col));
                continue;
            }
            const int col_lo = cell_coord(center.lon_deg - dlon_deg) - 1;
            const int col_hi = cell_coord(center.lon_deg + dlon_deg) + 1;
            for (int col = col_lo; col <= col_hi; ++col) {
                int wrapped = col;
                while (wrapped < -kLonCells / 2) wrapped += kLonCells;
                while (wrapped >= kLonCells / 2) wrapped -= kLonCells;
                visit_cell(cell_key(row, wrapped));
            }
        }
    }

    /// Order-sensitive content digest; identical files ingest to identical digests.
    std::uint64_t digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& t : records_) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s|%.9f|%.9f|%d|%.6f|%.6f\n", t.tower_id.c_str(),
                          t.location.lat_deg, t.location.lon_deg, t.channel_index, t.erp_dbm,
                          t.antenna_height_m);
            h = fnv1a64(buf, h);
        }
        return h;
    }

    static void validate_record(const TowerRecord& t, int max_channel) {
        if (t.tower_id.empty()) throw IngestError("empty tower_id");
        if (!t.location.valid()) throw IngestError("invalid location for " + t.tower_id);
        if (t.channel_index < 1 || t.channel_index > max_channel)
            throw IngestError("channel_index out of range for " + t.tower_id);
        if (!std::isfinite(t.erp_dbm)) throw IngestError("non-finite erp_dbm for " + t.tower_id);
        if (!(t.antenna_height_m > 0.0)) throw IngestError("non-positive height for " + t.tower_id);
    }

private:
    static int cell_coord(double deg) { return static_cast<int>(std::floor(deg / kCellDeg)); }
    static std::int64_t cell_key(int row, int col) {
        return (static_cast<std::int64_t>(row) << 32) ^ (static_cast<std::uint32_t>(col));
    }

    void build_index() {
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& t = records_[i];
            const auto key = cell_key(cell_coord(t.location.lat_deg), cell_coord(t.location.lon_deg));
            index_[t.channel_index][key].push_back(i);
        }
    }

    std::vector<TowerRecord> records_;
    int max_channel_ = 15;
    std::unordered_map<int, std::unordered_map<std::int64_t, std::vector<std::size_t>>> index_;
};

struct IngestResult {
    TowerDataset dataset;
    IngestReport report;
};

inline const char* kTowerCsvHeader = "tower_id,lat_deg,lon_deg,channel_index,erp_dbm,antenna_height_m";

/// Loads the documented CSV schema. Invalid rows are collected into the
/// rejects report with their line numbers; a missing file, a wrong header
/// or a duplicate tower_id aborts the whole ingest.
inline IngestResult ingest_csv(const std::string& path, int max_channel = 15) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open tower file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IngestError("empty tower file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        auto cols = split_csv_line(line);
        auto want = split_csv_line(kTowerCsvHeader);
        if (cols != want) throw IngestError("malformed header in " + path);
    }

    IngestResult result;
    std::vector<TowerRecord> records;
    std::unordered_set<std::string> seen;
    int line_no = 1;

    auto parse_double = [](const std::string& s, double& out) {
        std::size_t pos = 0;
        try {
            out = std::stod(s, &pos);
        } catch (...) {
            return false;
        }
        return pos == s.size() && std::isfinite(out);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cols = split_csv_line(line);
        if (cols.size() != 6) {
            result.report.rejects.push_back({line_no, "expected 6 columns, got " +
                                                          std::to_string(cols.size())});
            continue;
        }
        TowerRecord t;
        t.tower_id = cols[0];
        double lat, lon, erp, height;
        double chv;
        if (!parse_double(cols[1], lat) || !parse_double(cols[2], lon)) {
            result.report.rejects.push_back({line_no, "unparseable coordinates"});
            continue;
        }
        if (!parse_double(cols[3], chv) || chv != std::floor(chv)) {
            result.report.rejects.push_back({line_no, "unparseable channel_index"});
            continue;
        }
        if (!parse_double(cols[4], erp) || !parse_double(cols[5], height)) {
            result.report.rejects.push_back({line_no, "unparseable erp or height"});
            continue;
        }
        t.location = GeoPoint{lat, lon};
        t.channel_index = static_cast<int>(chv);
        t.erp_dbm = erp;
        t.antenna_height_m = height;
        try {
            TowerDataset::validate_record(t, max_channel);
        } catch (const IngestError& e) {
            result.report.rejects.push_back({line_no, e.what()});
            continue;
        }
        if (!seen.insert(t.tower_id).second)
            throw IngestError("duplicate tower_id at line " + std::to_string(line_no) + ": " +
                              t.tower_id);
        records.push_back(std::move(t));
    }
    result.dataset = TowerDataset(std::move(records), max_channel);
    return result;
}

/// Largest distance at which the tower is still received at or above
/// rx_threshold_dbm into a 0 dBi antenna, searched over
/// [min_distance_km, 200 km] by bisection to 10 m. Returns 0 when the
/// threshold is never reached, and the window edge when it is met
/// everywhere. Uses the tower's own mast height for the transmit side.
inline double coverage_radius_km(const TowerRecord& t, double rx_threshold_dbm,
                                 const PathLossParams& p) {
    if (!std::isfinite(rx_threshold_dbm)) throw std::invalid_argument("threshold must be finite");
    PathLossParams q = p;
    q.tx_height_m = t.antenna_height_m;
    const double f = 470.0 + 8.0 * (t.channel_index - 1) + 4.0;  // channel centre
    auto reaches = [&](double d) {
        return received_power_dbm(t.erp_dbm, 0.0, path_loss_db(d, f, q).loss_db) >=
               rx_threshold_dbm;
    };
    double lo = q.min_distance_km;
    double hi = 200.0;
    if (!reaches(lo)) return 0.0;
    if (reaches(hi)) return hi;
    while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        (reaches(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace tvws

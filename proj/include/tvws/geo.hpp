#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tvws {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    bool valid() const {
        return std::isfinite(lat_deg) && std::isfinite(lon_deg) &&
               lat_deg >= -90.0 && lat_deg <= 90.0 &&
               lon_deg >= -180.0 && lon_deg <= 180.0;
    }
};

inline void require_valid(const GeoPoint& p) {
    if (!p.valid()) throw std::invalid_argument("geo point out of range");
}

/// Great-circle distance on a sphere of radius 6371 km.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    require_valid(a);
    require_valid(b);
    const double lat1 = deg2rad(a.lat_deg);
    const double lat2 = deg2rad(b.lat_deg);
    const double dlat = deg2rad(b.lat_deg - a.lat_deg);
    const double dlon = deg2rad(b.lon_deg - a.lon_deg);
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

/// Closed, non-self-intersecting polygon over lat/lon vertices. The closing
/// edge from the last vertex back to the first is implicit.
class Polygon {
public:
    Polygon() = default;

    explicit Polygon(std::vector<GeoPoint> vertices) : vertices_(std::move(vertices)) {
        if (vertices_.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
        for (const auto& v : vertices_) require_valid(v);
        if (self_intersects()) throw std::invalid_argument("polygon is self-intersecting");
    }

    const std::vector<GeoPoint>& vertices() const { return vertices_; }
    bool empty() const { return vertices_.empty(); }

    // Even-odd ray cast in plate-carree coordinates. Adequate for the
    // regional polygons this toolkit deals with; not meridian-wrapping.
    bool contains(const GeoPoint& p) const {
        require_valid(p);
        bool inside = false;
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const double yi = vertices_[i].lat_deg, xi = vertices_[i].lon_deg;
            const double yj = vertices_[j].lat_deg, xj = vertices_[j].lon_deg;
            if ((xi > p.lon_deg) != (xj > p.lon_deg)) {
                const double t = (p.lon_deg - xi) / (xj - xi);
                if (p.lat_deg < yi + t * (yj - yi)) inside = !inside;
            }
        }
        return inside;
    }

private:
    static bool segments_cross(const GeoPoint& a, const GeoPoint& b,
                               const GeoPoint& c, const GeoPoint& d) {
        auto orient = [](const GeoPoint& p, const GeoPoint& q, const GeoPoint& r) {
            const double v = (q.lon_deg - p.lon_deg) * (r.lat_deg - p.lat_deg) -
                             (q.lat_deg - p.lat_deg) * (r.lon_deg - p.lon_deg);
            return (v > 0.0) - (v < 0.0);
        };
        const int o1 = orient(a, b, c), o2 = orient(a, b, d);
        const int o3 = orient(c, d, a), o4 = orient(c, d, b);
        return o1 != o2 && o3 != o4;
    }

    bool self_intersects() const {
        const std::size_t n = vertices_.size();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // skip edges sharing a vertex (adjacent, incl. the wrap pair)
                if (j == i || j == (i + 1) % n || (j + 1) % n == i) continue;
                if (segments_cross(vertices_[i], vertices_[(i + 1) % n],
                                   vertices_[j], vertices_[(j + 1) % n]))
                    return true;
            }
        }
        return false;
    }

    std::vector<GeoPoint> vertices_;
};

}  // namespace tvws

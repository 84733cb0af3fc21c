#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qepi {

inline constexpr double kEarthRadiusKm = 6371.0;

inline void check_lat_lon(double lat, double lon) {
    if (!(lat >= -90.0 && lat <= 90.0)) throw std::invalid_argument("latitude out of [-90, 90]");
    if (!(lon >= -180.0 && lon <= 180.0)) throw std::invalid_argument("longitude out of [-180, 180]");
}

// Great-circle distance on a sphere of radius 6371 km.
inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    check_lat_lon(lat1, lon1);
    check_lat_lon(lat2, lon2);
    if (lat1 == lat2 && lon1 == lon2) return 0.0;
    constexpr double deg = std::numbers::pi / 180.0;
    double phi1 = lat1 * deg, phi2 = lat2 * deg;
    double dphi = (lat2 - lat1) * deg;
    double dlmb = (lon2 - lon1) * deg;
    double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlmb / 2.0);
    double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace qepi

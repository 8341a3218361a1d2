#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cityscale/grid.hpp"

namespace cityscale {

inline constexpr double kEarthRadiusM = 6371000.0;

/// Great-circle distance in meters (haversine, spherical Earth).
template <typename Scalar = double>
Scalar haversine_m(Scalar lat1_deg, Scalar lon1_deg, Scalar lat2_deg, Scalar lon2_deg) {
    constexpr Scalar to_rad = std::numbers::pi_v<Scalar> / Scalar(180);
    const Scalar phi1 = lat1_deg * to_rad, phi2 = lat2_deg * to_rad;
    const Scalar dphi = (lat2_deg - lat1_deg) * to_rad;
    const Scalar dlambda = (lon2_deg - lon1_deg) * to_rad;
    const Scalar s1 = std::sin(dphi / 2), s2 = std::sin(dlambda / 2);
    const Scalar a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return Scalar(2) * Scalar(kEarthRadiusM) * std::asin(std::sqrt(std::min(Scalar(1), a)));
}

inline double haversine_m(const LatLon& a, const LatLon& b) {
    return haversine_m<double>(a.lat, a.lon, b.lat, b.lon);
}

}  // namespace cityscale

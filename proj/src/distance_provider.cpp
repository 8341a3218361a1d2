#include "cityscale/distance_provider.hpp"

#include "cityscale/geodesy.hpp"

namespace cityscale {

Eigen::MatrixXd DistanceProvider::materialize(const std::vector<std::string>& ids) const {
    const auto n = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            auto d = distance(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
            m(i, j) = m(j, i) = d ? *d : DistanceMatrix::absent();
        }
    }
    return m;
}

std::optional<double> MatrixDistanceProvider::distance(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    return matrix_.at(a, b);
}

std::optional<double> HaversineDistanceProvider::distance(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    auto pa = locations_.find(a), pb = locations_.find(b);
    if (pa == locations_.end() || pb == locations_.end()) return std::nullopt;
    return haversine_m(pa->second, pb->second);
}

GraphDistanceProvider::GraphDistanceProvider(const RoadGraph& graph, const std::vector<RoutePoint>& points,
                                             unsigned threads)
    : matrix_(points.size() >= 2 ? bulk_distances(points, graph, threads) : DistanceMatrix{}) {}

std::optional<double> GraphDistanceProvider::distance(const std::string& a, const std::string& b) const {
    if (a == b) return 0.0;
    return matrix_.at(a, b);
}

}  // namespace cityscale

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "cityscale/distance_matrix.hpp"
#include "cityscale/grid.hpp"
#include "cityscale/routing.hpp"

namespace cityscale {

/// d(i, j) in meters between representative points, or nullopt when the
/// pair is unknown. Identical ids are always at distance 0.
class DistanceProvider {
public:
    virtual ~DistanceProvider() = default;
    virtual std::optional<double> distance(const std::string& a, const std::string& b) const = 0;

    /// Dense |ids| x |ids| matrix with NaN for unknown pairs.
    Eigen::MatrixXd materialize(const std::vector<std::string>& ids) const;
};

class MatrixDistanceProvider final : public DistanceProvider {
public:
    explicit MatrixDistanceProvider(DistanceMatrix matrix) : matrix_(std::move(matrix)) {}
    std::optional<double> distance(const std::string& a, const std::string& b) const override;
    const DistanceMatrix& matrix() const { return matrix_; }

private:
    DistanceMatrix matrix_;
};

class HaversineDistanceProvider final : public DistanceProvider {
public:
    explicit HaversineDistanceProvider(std::unordered_map<std::string, LatLon> locations)
        : locations_(std::move(locations)) {}
    std::optional<double> distance(const std::string& a, const std::string& b) const override;

private:
    std::unordered_map<std::string, LatLon> locations_;
};

/// Road-network distances between the given points, precomputed with
/// bulk_distances at construction.
class GraphDistanceProvider final : public DistanceProvider {
public:
    GraphDistanceProvider(const RoadGraph& graph, const std::vector<RoutePoint>& points, unsigned threads = 1);
    std::optional<double> distance(const std::string& a, const std::string& b) const override;

private:
    DistanceMatrix matrix_;
};

}  // namespace cityscale

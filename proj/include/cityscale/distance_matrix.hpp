#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace cityscale {

/// Dense symmetric pairwise distances in meters between named points.
/// Absent entries (unknown or unreachable pairs) are stored as NaN.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<std::string> point_ids);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& point_ids() const { return ids_; }
    const Eigen::MatrixXd& values() const { return d_; }

    std::optional<std::size_t> index_of(const std::string& id) const;

    bool has(std::size_t i, std::size_t j) const { return !std::isnan(d_(i, j)); }
    std::optional<double> at(std::size_t i, std::size_t j) const {
        return has(i, j) ? std::optional<double>(d_(i, j)) : std::nullopt;
    }
    std::optional<double> at(const std::string& a, const std::string& b) const;

    // Sets both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double meters);

    static constexpr double absent() { return std::numeric_limits<double>::quiet_NaN(); }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    Eigen::MatrixXd d_;
};

}  // namespace cityscale

#include "cityscale/distance_matrix.hpp"

#include <fmt/format.h>

#include "cityscale/error.hpp"

namespace cityscale {

DistanceMatrix::DistanceMatrix(std::vector<std::string> point_ids)
    : ids_(std::move(point_ids)),
      d_(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ids_.size()),
                                   static_cast<Eigen::Index>(ids_.size()), absent())) {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i], i).second) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate point id '{}'", ids_[i]));
        }
    }
    d_.diagonal().setZero();
}

std::optional<std::size_t> DistanceMatrix::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> DistanceMatrix::at(const std::string& a, const std::string& b) const {
    auto i = index_of(a), j = index_of(b);
    if (!i || !j) return std::nullopt;
    return at(*i, *j);
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double meters) {
    if (meters < 0) {
        throw Error(ErrorCode::NegativeDistance,
                    fmt::format("d({}, {}) = {}", ids_[i], ids_[j], meters));
    }
    if (i == j) return;
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    d_(a, b) = meters;
    d_(b, a) = meters;
}

}  // namespace cityscale

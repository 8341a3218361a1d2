#pragma once

// Small descriptive-statistics helpers over Eigen vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Core>

#include "cityscale/error.hpp"

namespace cityscale::stats {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Linear-interpolation quantile of already sorted data (the median of an
/// even-sized sample is the midpoint of the two central values).
template <typename Derived>
typename Derived::Scalar sorted_quantile(const Eigen::DenseBase<Derived>& sorted, double p) {
    using Scalar = typename Derived::Scalar;
    const auto n = sorted.size();
    if (n == 0) throw Error(ErrorCode::EmptySamples, "quantile of empty sample");
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(h));
    const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
    const Scalar frac = static_cast<Scalar>(h - static_cast<double>(lo));
    return sorted(lo) + frac * (sorted(hi) - sorted(lo));
}

/// Nearest-rank percentile: the smallest sample value with at least a
/// fraction `p` of the samples at or below it.
template <typename Derived>
typename Derived::Scalar sorted_nearest_rank(const Eigen::DenseBase<Derived>& sorted, double p) {
    const auto n = sorted.size();
    if (n == 0) throw Error(ErrorCode::EmptySamples, "percentile of empty sample");
    auto rank = static_cast<Eigen::Index>(std::ceil(p * static_cast<double>(n) - 1e-12));
    rank = std::clamp<Eigen::Index>(rank, 1, n);
    return sorted(rank - 1);
}

template <typename Derived>
Vector<typename Derived::Scalar> sorted_copy(const Eigen::DenseBase<Derived>& v) {
    Vector<typename Derived::Scalar> s = v;
    std::sort(s.data(), s.data() + s.size());
    return s;
}

template <typename Scalar>
struct Summary {
    std::size_t n = 0;
    Scalar mean{};
    Scalar geometric_mean{};  // NaN unless every value is positive
    Scalar median{};
    Scalar q1{};
    Scalar q3{};
    Scalar min{};
    Scalar max{};
};

template <typename Derived>
Summary<typename Derived::Scalar> summarize(const Eigen::DenseBase<Derived>& values) {
    using Scalar = typename Derived::Scalar;
    if (values.size() == 0) throw Error(ErrorCode::EmptySamples, "summary of empty sample");
    const auto s = sorted_copy(values);
    Summary<Scalar> out;
    out.n = static_cast<std::size_t>(s.size());
    out.mean = s.mean();
    out.geometric_mean = s.minCoeff() > Scalar(0) ? std::exp(s.array().log().mean())
                                                  : std::numeric_limits<Scalar>::quiet_NaN();
    out.median = sorted_quantile(s, 0.5);
    out.q1 = sorted_quantile(s, 0.25);
    out.q3 = sorted_quantile(s, 0.75);
    out.min = s(0);
    out.max = s(s.size() - 1);
    return out;
}

}  // namespace cityscale::stats

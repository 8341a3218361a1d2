#pragma once

// Within-city density distributions (Gaussian KDE) and the share-growth
// regression. Header-only; templated on the scalar type.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>

#include "cityscale/error.hpp"
#include "cityscale/statistics.hpp"

namespace cityscale {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Divides both samples by the base-year maximum.
template <typename Scalar>
std::pair<VectorX<Scalar>, VectorX<Scalar>> normalize_city_samples(const VectorX<Scalar>& base,
                                                                   const VectorX<Scalar>& comp) {
    if (base.size() == 0) throw Error(ErrorCode::EmptyBaseYear, "base-year sample is empty");
    const Scalar peak = base.maxCoeff();
    if (!(peak > Scalar(0))) throw Error(ErrorCode::ZeroPeak, "base-year maximum is not positive");
    return {base / peak, comp / peak};
}

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5). A zero spread falls back to the
/// standard deviation, then |x_0|, then 1.
template <typename Scalar>
Scalar silverman_bandwidth(const VectorX<Scalar>& samples) {
    const auto n = samples.size();
    if (n == 0) throw Error(ErrorCode::EmptySamples, "bandwidth of empty sample");
    Scalar sd = 0;
    if (n > 1) {
        sd = std::sqrt((samples.array() - samples.mean()).square().sum() / static_cast<Scalar>(n - 1));
    }
    const auto sorted = stats::sorted_copy(samples);
    const Scalar iqr = stats::sorted_quantile(sorted, 0.75) - stats::sorted_quantile(sorted, 0.25);
    Scalar spread = std::min(sd, iqr / Scalar(1.34));
    if (!(spread > 0)) spread = sd;
    if (!(spread > 0)) spread = std::abs(samples(0));
    if (!(spread > 0)) spread = 1;
    return Scalar(0.9) * spread * std::pow(static_cast<Scalar>(n), Scalar(-0.2));
}

template <typename Scalar>
struct KdeCurve {
    VectorX<Scalar> grid_points;
    VectorX<Scalar> densities;
    Scalar bandwidth{};

    /// Trapezoidal integral over the evaluation range.
    Scalar integral() const {
        const auto m = grid_points.size();
        if (m < 2) return Scalar(0);
        Scalar total = 0;
        for (Eigen::Index i = 1; i < m; ++i) {
            total += (grid_points(i) - grid_points(i - 1)) * (densities(i) + densities(i - 1)) / Scalar(2);
        }
        return total;
    }
};

struct KdeOptions {
    int points = 512;
    double padding_bandwidths = 5.0;
};

template <typename Scalar>
Scalar standard_normal_pdf(Scalar z) {
    return std::exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Gaussian kernel density estimate evaluated on a uniform grid spanning
/// [min - 5h, max + 5h]. Bandwidth defaults to Silverman's rule.
template <typename Scalar>
KdeCurve<Scalar> gaussian_kde(const VectorX<Scalar>& samples, std::optional<Scalar> bandwidth = std::nullopt,
                              const KdeOptions& options = {}) {
    if (samples.size() == 0) throw Error(ErrorCode::EmptySamples, "KDE needs at least one sample");
    if (bandwidth && !(*bandwidth > 0)) {
        throw Error(ErrorCode::NonpositiveBandwidth, fmt::format("bandwidth {}", static_cast<double>(*bandwidth)));
    }
    if (options.points < 2) throw Error(ErrorCode::InvalidArgument, "KDE needs at least two grid points");

    KdeCurve<Scalar> curve;
    curve.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    const Scalar h = curve.bandwidth;
    const Scalar pad = static_cast<Scalar>(options.padding_bandwidths) * h;
    const Scalar lo = samples.minCoeff() - pad;
    const Scalar hi = samples.maxCoeff() + pad;

    const Eigen::Index m = options.points;
    curve.grid_points = VectorX<Scalar>::LinSpaced(m, lo, hi);
    curve.densities.resize(m);
    const Scalar norm = Scalar(1) / (static_cast<Scalar>(samples.size()) * h);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar x = curve.grid_points(i);
        Scalar sum = 0;
        for (Eigen::Index k = 0; k < samples.size(); ++k) sum += standard_normal_pdf((x - samples(k)) / h);
        curve.densities(i) = norm * sum;
    }
    return curve;
}

template <typename Scalar>
struct OlsFit {
    Scalar slope{};
    Scalar intercept{};
    Scalar r_squared{};
    std::size_t n = 0;
};

/// Simple least-squares line y = slope * x + intercept, from centered sums.
template <typename Scalar>
OlsFit<Scalar> fit_ols(const VectorX<Scalar>& x, const VectorX<Scalar>& y) {
    if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y differ in length");
    if (x.size() < 2) throw Error(ErrorCode::FewerThanTwoPoints, fmt::format("{} points", x.size()));

    const Scalar xbar = x.mean();
    const Scalar ybar = y.mean();
    const auto dx = (x.array() - xbar).eval();
    const auto dy = (y.array() - ybar).eval();
    const Scalar sxx = dx.square().sum();
    if (!(sxx > 0)) throw Error(ErrorCode::DegenerateRegressor, "all x values are equal");

    OlsFit<Scalar> fit;
    fit.n = static_cast<std::size_t>(x.size());
    fit.slope = (dx * dy).sum() / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    const Scalar ss_tot = dy.square().sum();
    const Scalar ss_res = (y.array() - (fit.slope * x.array() + fit.intercept)).square().sum();
    fit.r_squared = ss_tot > 0 ? std::clamp(Scalar(1) - ss_res / ss_tot, Scalar(0), Scalar(1)) : Scalar(0);
    return fit;
}

struct GrowthPoint {
    int city = 0;
    double log_share_comp = 0.0;  // x
    double log_share_ratio = 0.0; // y
};

struct GrowthRegression {
    OlsFit<double> fit;
    std::vector<GrowthPoint> points;
};

/// Regresses log(comp/base) on log(comp), natural logarithms, over cities
/// keyed identically in both maps.
inline GrowthRegression fit_growth_regression(const std::map<int, double>& shares_base,
                                              const std::map<int, double>& shares_comp) {
    if (shares_base.size() != shares_comp.size()) {
        throw Error(ErrorCode::InvalidArgument, "share maps cover different city sets");
    }
    GrowthRegression out;
    for (const auto& [city, base] : shares_base) {
        auto it = shares_comp.find(city);
        if (it == shares_comp.end()) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("city {} missing from comparison shares", city));
        }
        if (!(base > 0) || !(it->second > 0)) {
            throw Error(ErrorCode::NonpositiveShare, fmt::format("city {}", city));
        }
        out.points.push_back({city, std::log(it->second), std::log(it->second / base)});
    }
    const auto n = static_cast<Eigen::Index>(out.points.size());
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = out.points[static_cast<std::size_t>(i)].log_share_comp;
        y(i) = out.points[static_cast<std::size_t>(i)].log_share_ratio;
    }
    out.fit = fit_ols<double>(x, y);
    return out;
}

}  // namespace cityscale

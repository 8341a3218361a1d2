#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "cityscale/error.hpp"
#include "cityscale/spacing.hpp"
#include "oracles.hpp"

using namespace cityscale;

namespace {

using Dense = std::vector<std::vector<double>>;

std::string pid(std::size_t i) { return "p" + std::to_string(i); }

MatrixDistanceProvider provider(const Dense& d) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < d.size(); ++i) ids.push_back(pid(i));
    DistanceMatrix m(ids);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) m.set(i, j, d[i][j]);
    return MatrixDistanceProvider(std::move(m));
}

// City i sits at point i with population decreasing in i.
std::vector<CityPoint> cities(std::size_t n, Year year = 1970) {
    std::vector<CityPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({static_cast<int>(i + 1), pid(i), static_cast<Population>(1000000 - 1000 * i), year});
    }
    return out;
}

Dense random_points_metric(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0, 100000);
    std::vector<std::pair<double, double>> p(n);
    for (auto& q : p) q = {u(rng), u(rng)};
    Dense d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(p[i].first - p[j].first, p[i].second - p[j].second);
    return d;
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::ParseError;
}

}  // namespace

TEST(SpacingIndex, TwoCities) {
    auto p = provider({{0, 1234}, {1234, 0}});
    EXPECT_EQ(spacing_index(cities(2), p), 1234.0);
}

TEST(SpacingIndex, Collinear) {
    // points at 0, 1, 3: nearest 1, 1, 2
    auto p = provider({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}});
    EXPECT_NEAR(spacing_index(cities(3), p), 4.0 / 3.0, 1e-15);
}

TEST(SpacingIndex, SharedPointContributesZero) {
    auto p = provider({{0, 5}, {5, 0}});
    auto c = cities(3);
    c[2].point_id = pid(0);
    EXPECT_NEAR(spacing_index(c, p), 5.0 / 3.0, 1e-15);
}

TEST(SpacingIndex, MatchesDirectDefinitionAndInvariances) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        auto d = random_points_metric(rng, n);
        auto c = cities(n);
        std::vector<int> members(n);
        std::iota(members.begin(), members.end(), 0);
        const double s = spacing_index(c, provider(d));
        EXPECT_NEAR(s, oracle::spacing_direct(d, members), 1e-9 * s);

        std::shuffle(c.begin(), c.end(), rng);
        EXPECT_NEAR(spacing_index(c, provider(d)), s, 1e-9 * s);

        Dense scaled = d;
        for (auto& row : scaled)
            for (auto& v : row) v *= 2.5;
        EXPECT_NEAR(spacing_index(c, provider(scaled)), 2.5 * s, 1e-9 * s);

        double lo = 1e300, hi = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) lo = std::min(lo, d[i][j]), hi = std::max(hi, d[i][j]);
        EXPECT_GE(s, lo - 1e-9);
        EXPECT_LE(s, hi + 1e-9);
    }
}

TEST(TopRSet, OrdersByPopulationThenId) {
    std::vector<CityPoint> c{{4, "a", 500, 0}, {2, "b", 900, 0}, {3, "c", 500, 0}, {1, "d", 100, 0}};
    auto top = top_r_set(c, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].city_id, 2);
    EXPECT_EQ(top[1].city_id, 3);
    EXPECT_EQ(top[2].city_id, 4);
    EXPECT_EQ(top_r_set(c, 4).size(), 4u);
    EXPECT_EQ(code_of([&] { top_r_set(c, 5); }), ErrorCode::RankExceedsCount);
}

TEST(TopRSet, MatchesStableSortOracle) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<Population> pop(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<CityPoint> c;
        for (int i = 1; i <= 15; ++i) c.push_back({i, pid(i), pop(rng), 0});
        std::shuffle(c.begin(), c.end(), rng);
        auto ref = c;
        std::sort(ref.begin(), ref.end(), [](auto& a, auto& b) { return a.city_id < b.city_id; });
        std::stable_sort(ref.begin(), ref.end(), [](auto& a, auto& b) { return a.population > b.population; });
        const std::size_t r = 1 + rng() % 15;
        auto top = top_r_set(c, r);
        for (std::size_t k = 0; k < r; ++k) EXPECT_EQ(top[k].city_id, ref[k].city_id);
    }
}

TEST(SpacingRatio, SameSetIsOne) {
    std::mt19937_64 rng(6);
    auto d = random_points_metric(rng, 12);
    auto curve = spacing_ratio_curve(cities(12), cities(12, 2015), {2, 12}, provider(d));
    ASSERT_EQ(curve.size(), 11u);
    for (const auto& p : curve) EXPECT_EQ(p.ratio, 1.0);
}

TEST(SpacingRatio, DoubledDistances) {
    // Comparison cities at points 10..19 are a copy of 0..9 scaled by 2.
    std::mt19937_64 rng(7);
    auto small = random_points_metric(rng, 10);
    Dense d(20, std::vector<double>(20, 1e9));
    for (std::size_t i = 0; i < 20; ++i) d[i][i] = 0;
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            d[i][j] = small[i][j];
            d[10 + i][10 + j] = 2 * small[i][j];
        }
    auto base = cities(10);
    std::vector<CityPoint> comp;
    for (std::size_t i = 0; i < 10; ++i) comp.push_back({base[i].city_id, pid(10 + i), base[i].population, 2015});
    for (const auto& p : spacing_ratio_curve(base, comp, {2, 10}, provider(d))) EXPECT_NEAR(p.ratio, 2.0, 1e-12);
}

TEST(SpacingRatio, Errors) {
    auto p = provider({{0, 1, 3}, {1, 0, 2}, {3, 2, 0}});
    EXPECT_EQ(code_of([&] { spacing_ratio_curve(cities(3), cities(3), {1, 3}, p); }), ErrorCode::TooFewCities);
    EXPECT_EQ(code_of([&] { spacing_ratio_curve(cities(3), cities(3), {2, 4}, p); }), ErrorCode::RankExceedsCount);
    EXPECT_EQ(code_of([&] { spacing_index(cities(1), p); }), ErrorCode::TooFewCities);

    DistanceMatrix partial({pid(0), pid(1), pid(2)});
    partial.set(0, 1, 5.0);
    MatrixDistanceProvider mp(partial);
    EXPECT_EQ(code_of([&] { spacing_index(cities(3), mp); }), ErrorCode::MissingDistance);
    EXPECT_EQ(code_of([&] { counterfactual_bands(cities(2), cities(3), {2, 3}, {}, mp); }), ErrorCode::PoolTooSmall);
}

TEST(Counterfactual, PoolEqualToBaseGivesObservedRatio) {
    std::mt19937_64 rng(8);
    auto d = random_points_metric(rng, 6);
    auto bands = counterfactual_bands(cities(6), cities(6), {6, 6}, {200, 1, 1}, provider(d));
    ASSERT_EQ(bands.size(), 1u);
    EXPECT_NEAR(bands[0].mean, 1.0, 1e-12);
    EXPECT_NEAR(bands[0].p01, 1.0, 1e-12);
    EXPECT_NEAR(bands[0].p99, 1.0, 1e-12);
}

TEST(Counterfactual, DeterministicAcrossThreadCounts) {
    std::mt19937_64 rng(9);
    auto d = random_points_metric(rng, 30);
    auto p = provider(d);
    auto a = counterfactual_bands(cities(30), cities(20), {3, 20}, {500, 77, 1}, p);
    auto b = counterfactual_bands(cities(30), cities(20), {3, 20}, {500, 77, 1}, p);
    auto c = counterfactual_bands(cities(30), cities(20), {3, 20}, {500, 77, 4}, p);
    auto other = counterfactual_bands(cities(30), cities(20), {3, 20}, {500, 78, 1}, p);
    ASSERT_EQ(a.size(), 18u);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].mean, b[k].mean);
        EXPECT_EQ(a[k].p01, c[k].p01);
        EXPECT_EQ(a[k].p99, c[k].p99);
        EXPECT_EQ(a[k].mean, c[k].mean);
        EXPECT_LE(a[k].p01, a[k].p99);
        differs = differs || a[k].mean != other[k].mean;
    }
    EXPECT_TRUE(differs);
}

TEST(Counterfactual, MeanMatchesSubsetEnumeration) {
    std::mt19937_64 rng(10);
    auto d = random_points_metric(rng, 6);
    auto base = cities(6);
    const double denom = spacing_index(top_r_set(base, 3), provider(d));
    double sum = 0, sum2 = 0;
    int count = 0;
    oracle::for_each_subset(6, 3, [&](const std::vector<int>& s) {
        const double v = oracle::spacing_direct(d, s) / denom;
        sum += v;
        sum2 += v * v;
        ++count;
    });
    ASSERT_EQ(count, 20);
    const double mean = sum / count;
    const double sd = std::sqrt(sum2 / count - mean * mean);
    const std::size_t draws = 100000;
    auto bands = counterfactual_bands(base, base, {3, 3}, {draws, 42, 4}, provider(d));
    EXPECT_LE(std::abs(bands[0].mean - mean), 3 * sd / std::sqrt(static_cast<double>(draws)));
}

TEST(SpacingAnalysis, JoinsCurveAndBands) {
    std::mt19937_64 rng(11);
    auto d = random_points_metric(rng, 15);
    auto p = provider(d);
    auto out = spacing_analysis(cities(10), cities(12, 2015), cities(15), {2, 10}, {100, 5, 2}, p);
    auto curve = spacing_ratio_curve(cities(10), cities(12, 2015), {2, 10}, p);
    ASSERT_EQ(out.size(), curve.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        EXPECT_EQ(out[k].ratio, curve[k].ratio);
        EXPECT_EQ(out[k].draws, 100u);
        EXPECT_EQ(out[k].seed, 5u);
        EXPECT_GT(out[k].d_base, 0);
    }
}

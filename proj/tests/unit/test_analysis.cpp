#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mtswarm/analysis.hpp"
#include "mtswarm/behavior.hpp"

using namespace mtswarm;
using Eigen::MatrixXd;

namespace {

const SimBox kBox{40.0};

void add_rod(std::vector<Vec2>& out, Vec2 lead, double angle, std::size_t n = 5) {
    const Vec2 back{-std::cos(angle), -std::sin(angle)};
    for (std::size_t i = 0; i < n; ++i) out.push_back(kBox.wrap(lead + static_cast<double>(i) * back));
}

// One run at one temperature, every tile of every frame given value(frame, tile) on atom 0.
ActivationTable table(const std::string& run, double temp, std::uint32_t frames, std::size_t atoms,
                      double (*value)(std::uint32_t, std::uint32_t)) {
    ActivationTable t;
    t.meta = tile_manifest(run, temp, frames);
    t.C = MatrixXd::Zero(static_cast<Eigen::Index>(atoms), static_cast<Eigen::Index>(t.meta.size()));
    t.objective = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.meta.size()));
    for (std::size_t j = 0; j < t.meta.size(); ++j)
        t.C(0, static_cast<Eigen::Index>(j)) = value(t.meta[j].frame, t.meta[j].tile);
    return t;
}

}  // namespace

TEST_CASE("quantiles") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == 2.5);
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK_THROWS(quantile_sorted(std::vector<double>{}, 0.5));
}

TEST_CASE("spearman") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(spearman(x, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
    // ties: ranks of y are 1.5, 1.5, 3, 4, 5
    const std::vector<double> y{0, 0, 1, 2, 3};
    CHECK(spearman(x, y) == doctest::Approx(0.9746794344808963));
    CHECK(std::isnan(spearman(x, std::vector<double>{1, 1, 1, 1, 1})));
    CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("activation box statistics") {
    SUBCASE("constant activation") {
        const auto t = table("T200", 200.0, 60, 2, [](std::uint32_t, std::uint32_t) { return 0.7; });
        const auto s = activation_boxplot_stats(t, 50);
        REQUIRE(s.size() == 2);
        CHECK(s[0].q1 == doctest::Approx(0.7));
        CHECK(s[0].median == doctest::Approx(0.7));
        CHECK(s[0].q3 == doctest::Approx(0.7));
        CHECK(s[0].n == 90);
        CHECK(s[0].outliers.empty());
        CHECK(s[1].median == 0.0);
    }
    SUBCASE("two-value stream has median one half") {
        const auto t = table("T200", 200.0, 10, 1, [](std::uint32_t f, std::uint32_t) { return f % 2 == 0 ? 0.0 : 1.0; });
        const auto s = activation_boxplot_stats(t, 0);
        CHECK(s[0].median == doctest::Approx(0.5));
        CHECK(s[0].mean == doctest::Approx(0.5));
    }
    SUBCASE("the first frames are excluded") {
        const auto t = table("T200", 200.0, 60, 1, [](std::uint32_t f, std::uint32_t) { return f < 50 ? 100.0 : 1.0; });
        const auto s = activation_boxplot_stats(t, 50);
        CHECK(s[0].hi == 1.0);
        CHECK_THROWS(activation_boxplot_stats(t, 60));
    }
    SUBCASE("outliers beyond 1.5 IQR") {
        const auto t = table("T300", 300.0, 2, 1, [](std::uint32_t f, std::uint32_t k) {
            return f == 1 && k == 8 ? 50.0 : static_cast<double>(k % 3);
        });
        const auto s = activation_boxplot_stats(t, 0);
        REQUIRE(s[0].outliers.size() == 1);
        CHECK(s[0].outliers[0] == 50.0);
        CHECK(s[0].hi == 2.0);
    }
}

TEST_CASE("temporal activation map") {
    SUBCASE("single nonzero tile averages to v/9") {
        const auto t = table("T200", 200.0, 3, 1, [](std::uint32_t f, std::uint32_t k) { return f == 1 && k == 4 ? 9.0 : 0.0; });
        const auto m = temporal_activation_map(t);
        REQUIRE(m.rows() == 3);
        CHECK(m(0, 0) == 0.0);
        CHECK(m(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("a ramp stays linear") {
        const auto t = table("T200", 200.0, 8, 1, [](std::uint32_t f, std::uint32_t k) { return 2.0 * f + (k % 2 ? 1.0 : -1.0) * 0.0; });
        const auto m = temporal_activation_map(t);
        for (Eigen::Index f = 0; f < 8; ++f) CHECK(m(f, 0) == doctest::Approx(2.0 * static_cast<double>(f)));
    }
    SUBCASE("mixed runs are rejected") {
        auto t = table("T200", 200.0, 1, 1, [](std::uint32_t, std::uint32_t) { return 1.0; });
        t.meta[3].run = "T225";
        CHECK_THROWS_AS(temporal_activation_map(t), std::invalid_argument);
    }
}

TEST_CASE("atom exemplars") {
    FeatureMatrix fm;
    fm.dim = 3;
    fm.meta = tile_manifest("T200", 200.0, 1);
    fm.values.resize(9 * 3, 0.0f);
    for (std::size_t r = 0; r < 9; ++r) fm.values[r * 3 + (r < 6 ? 0 : 1)] = 1.0f + static_cast<float>(r);
    Dictionary d;
    d.atoms = MatrixXd::Zero(3, 3);
    d.atoms(1, 0) = 1.0;  // matches rows 6..8
    d.atoms(2, 1) = 1.0;  // orthogonal to everything
    d.atoms(0, 2) = -1.0;
    const auto ex = atom_exemplars(d, fm, 2);
    REQUIRE(ex.size() == 3);
    CHECK(ex[0][0].row == 6);
    CHECK(ex[0][0].similarity == doctest::Approx(1.0));
    REQUIRE(ex[1].size() == 2);
    CHECK(ex[1][0].similarity <= 0.0);
    CHECK(ex[1][0].row == 0);
    CHECK(ex[2][0].similarity == doctest::Approx(0.0));
    CHECK_THROWS(atom_exemplars(d, fm, 0));
}

TEST_CASE("order parameters") {
    std::vector<Vec2> s;
    add_rod(s, {10, 10}, 0.3);
    add_rod(s, {20, 20}, 0.3);
    CHECK(polar_order(FrameView{s, 5, kBox}) == doctest::Approx(1.0));
    std::vector<Vec2> anti;
    add_rod(anti, {10, 10}, 0.0);
    add_rod(anti, {20, 20}, M_PI);
    CHECK(polar_order(FrameView{anti, 5, kBox}) == doctest::Approx(0.0).scale(1.0));
    CHECK(nematic_order(FrameView{anti, 5, kBox}) == doctest::Approx(1.0));
    CHECK_THROWS(polar_order(FrameView{{}, 5, kBox}));
}

TEST_CASE("cluster statistics") {
    SUBCASE("isolated filaments") {
        std::vector<Vec2> s;
        for (int i = 0; i < 4; ++i) add_rod(s, {5.0 + 9.0 * i, 20.0}, M_PI / 2);
        const auto c = cluster_stats(FrameView{s, 5, kBox});
        CHECK(c.n_clusters == 4);
        CHECK(c.largest_fraction == doctest::Approx(0.25));
    }
    SUBCASE("hand-built groups of 5, 3 and 2") {
        std::vector<Vec2> s;
        const std::array<std::pair<int, double>, 3> groups{{{5, 3.0}, {3, 17.0}, {2, 31.0}}};
        for (const auto& [size, y] : groups)
            for (int i = 0; i < size; ++i) add_rod(s, {10.0, y + 1.0 * i}, 0.05);
        const auto c = cluster_stats(FrameView{s, 5, kBox});
        CHECK(c.n_clusters == 3);
        CHECK(c.size_histogram == std::map<std::size_t, std::size_t>{{2, 1}, {3, 1}, {5, 1}});
        CHECK(c.largest_fraction == doctest::Approx(0.5));
        CHECK(c.labels[7] == 5);
    }
    SUBCASE("close but crossed filaments are not linked") {
        std::vector<Vec2> s;
        add_rod(s, {10, 10}, 0.0);
        add_rod(s, {8, 11}, M_PI / 2);
        CHECK(cluster_stats(FrameView{s, 5, kBox}).n_clusters == 2);
    }
}

TEST_CASE("behavior labels") {
    CHECK(classify_behavior(1.0, 0.0) == BehaviorLabel::strong_swarming);
    CHECK(classify_behavior(0.3, 0.1) == BehaviorLabel::partial_swarming);
    CHECK(classify_behavior(0.05, 0.1) == BehaviorLabel::disorder);
    CHECK(classify_behavior(0.05, 0.5) == BehaviorLabel::partial_swarming);
    CHECK(to_string(BehaviorLabel::strong_swarming) == "strong_swarming");
    const std::vector<FrameBehavior> series{{0.6, 0.2}, {0.02, 0.05}};
    const auto labels = classify_behavior(series);
    CHECK(labels == std::vector<BehaviorLabel>{BehaviorLabel::strong_swarming, BehaviorLabel::disorder});
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tvws/geo.hpp"

using namespace tvws;

TEST_CASE("haversine identity and fixed points", "[geo]") {
    const GeoPoint p{19.69, 72.77};
    CHECK(haversine_km(p, p) == 0.0);

    // one degree of longitude along the equator: 2*pi*R/360
    CHECK_THAT(haversine_km({0, 0}, {0, 1}), Catch::Matchers::WithinAbs(111.19492664455873, 0.01));

    // value frozen from an independent script
    const double d = haversine_km({19.69, 72.77}, {19.74, 72.80});
    CHECK_THAT(d, Catch::Matchers::WithinRel(6.385320068086908, 1e-6));
}

TEST_CASE("haversine rejects out-of-range points", "[geo]") {
    CHECK_THROWS_AS(haversine_km({91.0, 0.0}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(haversine_km({0.0, 0.0}, {0.0, 181.0}), std::invalid_argument);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(haversine_km({nan, 0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("haversine symmetry and triangle inequality", "[geo]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lat(-89.0, 89.0);
    std::uniform_real_distribution<double> lon(-180.0, 180.0);
    for (int i = 0; i < 1000; ++i) {
        const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
        const double ab = haversine_km(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == haversine_km(b, a));
        CHECK(ab <= haversine_km(a, c) + haversine_km(c, b) + 1e-6);
    }
}

TEST_CASE("polygon containment", "[geo]") {
    const Polygon box({{19.35, 72.45}, {19.35, 73.15}, {20.05, 73.15}, {20.05, 72.45}});
    CHECK(box.contains({19.69, 72.77}));
    CHECK_FALSE(box.contains({21.5, 75.0}));
    CHECK_FALSE(box.contains({19.69, 73.50}));

    // concave polygon: the notch is outside
    const Polygon notch({{0, 0}, {0, 10}, {10, 10}, {10, 6}, {4, 6}, {4, 4}, {10, 4}, {10, 0}});
    CHECK(notch.contains({2.0, 5.0}));
    CHECK_FALSE(notch.contains({7.0, 5.0}));
    CHECK(notch.contains({7.0, 2.0}));
}

TEST_CASE("polygon validation", "[geo]") {
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}}), std::invalid_argument);
    // bowtie self-intersection
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Polygon({{0, 0}, {95, 1}, {1, 0}}), std::invalid_argument);
}

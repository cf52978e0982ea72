#include <catch2/catch_amalgamated.hpp>

#include "tvws/channels.hpp"

using namespace tvws;

TEST_CASE("channel arithmetic partitions the band exactly", "[channels]") {
    const RegulatoryConfig cfg;
    cfg.validate();
    double expected_low = 470.0;
    for (int i = 1; i <= 15; ++i) {
        const Channel c = cfg.channel(i);
        CHECK(c.index == i);
        CHECK(c.low_mhz == expected_low);
        CHECK(c.high_mhz - c.low_mhz == 8.0);
        CHECK(c.low_mhz == 470.0 + 8.0 * (i - 1));
        expected_low = c.high_mhz;  // no gaps, no overlaps
    }
    CHECK(expected_low == 590.0);
    CHECK(cfg.channel(1).center_mhz() == 474.0);
    CHECK(cfg.channels().size() == 15);
}

TEST_CASE("channel index bounds", "[channels]") {
    const RegulatoryConfig cfg;
    CHECK_THROWS_AS(cfg.channel(0), std::out_of_range);
    CHECK_THROWS_AS(cfg.channel(16), std::out_of_range);
}

TEST_CASE("regulatory config invariants", "[channels]") {
    RegulatoryConfig cfg;
    cfg.band_high_mhz = 600.0;  // 15 * 8 != 130
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    RegulatoryConfig ok;
    ok.channel_count = 5;
    ok.band_low_mhz = 470.0;
    ok.band_high_mhz = 510.0;
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.channel(5).high_mhz == 510.0);

    RegulatoryConfig bad;
    bad.protection_threshold_dbm = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

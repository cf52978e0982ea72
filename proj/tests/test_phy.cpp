#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tvws/phy.hpp"

using namespace tvws;

TEST_CASE("profile envelopes saturate at the advertised caps", "[phy]") {
    CHECK(link_throughput_mbps(60.0, 8.0, phy_802_11af()) == 35.6);
    CHECK(link_throughput_mbps(60.0, 8.0, phy_802_22()) == 19.0);
}

TEST_CASE("no link closure below the SNR floor", "[phy]") {
    const auto af = phy_802_11af();
    CHECK(link_throughput_mbps(af.min_snr_db - 0.1, 8.0, af) == 0.0);
    CHECK(link_throughput_mbps(-40.0, 8.0, af) == 0.0);
    CHECK(link_throughput_mbps(af.min_snr_db, 8.0, af) > 0.0);
}

TEST_CASE("throughput respects the SE envelope at low SNR", "[phy]") {
    const auto af = phy_802_11af();
    // just above the floor the envelope pins SE to se_min
    const double thr = link_throughput_mbps(af.min_snr_db + 0.01, 8.0, af);
    CHECK_THAT(thr, Catch::Matchers::WithinAbs(af.se_min_bps_hz * 8.0, 0.05));
}

TEST_CASE("throughput is monotone in SNR and bandwidth, and capped", "[phy]") {
    const auto profiles = {phy_802_11af(), phy_802_22()};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> snr(-20.0, 70.0);
    std::uniform_real_distribution<double> bw(1.0, 40.0);
    for (const auto& prof : profiles) {
        prof.validate();
        for (int i = 0; i < 2000; ++i) {
            const double s = snr(rng), b = bw(rng);
            const double t = link_throughput_mbps(s, b, prof);
            CHECK(t >= 0.0);
            CHECK(t <= prof.max_throughput_mbps_per_8mhz * b / 8.0 + 1e-12);
            CHECK(link_throughput_mbps(s + 3.0, b, prof) >= t);
            CHECK(link_throughput_mbps(s, b + 2.0, prof) >= t);
        }
    }
}

TEST_CASE("profile validation", "[phy]") {
    PhyProfile bad{"x", 2.0, 1.0, 8.0, -5.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    PhyProfile cap{"x", 0.5, 2.0, 17.0, -5.0};  // cap 17 > 2*8
    CHECK_THROWS_AS(cap.validate(), std::invalid_argument);
    CHECK(phy_profile_by_name("802.11af"));
    CHECK(phy_profile_by_name("802.22"));
    CHECK_FALSE(phy_profile_by_name("802.11n"));
    CHECK_THROWS_AS(link_throughput_mbps(10.0, 0.0, phy_802_11af()), std::invalid_argument);
}

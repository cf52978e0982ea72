#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tvws/propagation.hpp"

using namespace tvws;
using Catch::Matchers::WithinAbs;

TEST_CASE("free-space path loss reference points", "[propagation]") {
    CHECK_THAT(free_space_path_loss_db(1.0, 1.0), WithinAbs(32.44, 1e-12));
    CHECK_THAT(free_space_path_loss_db(1.0, 500.0), WithinAbs(86.42, 0.01));
    CHECK_THAT(free_space_path_loss_db(10.0, 500.0), WithinAbs(106.42, 0.01));
}

TEST_CASE("free-space loss is monotone in distance and frequency", "[propagation]") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(0.02, 100.0);
    std::uniform_real_distribution<double> f(100.0, 1000.0);
    for (int i = 0; i < 500; ++i) {
        const double d1 = d(rng), d2 = d1 + 0.5, f1 = f(rng), f2 = f1 + 10.0;
        CHECK(free_space_path_loss_db(d2, f1) > free_space_path_loss_db(d1, f1));
        CHECK(free_space_path_loss_db(d1, f2) > free_space_path_loss_db(d1, f1));
    }
}

TEST_CASE("free-space loss clamps to the minimum distance", "[propagation]") {
    CHECK(free_space_path_loss_db(0.0, 500.0, 0.01) == free_space_path_loss_db(0.01, 500.0, 0.01));
    CHECK_THROWS_AS(free_space_path_loss_db(1.0, -5.0), std::invalid_argument);
    CHECK_THROWS_AS(free_space_path_loss_db(std::numeric_limits<double>::quiet_NaN(), 500.0),
                    std::invalid_argument);
}

TEST_CASE("hata open-area values from the oracle script", "[propagation]") {
    PathLossParams p;
    p.tx_height_m = 30.0;
    p.rx_height_m = 5.0;
    const auto a = hata_open_path_loss_db(6.7, 500.0, p);
    CHECK_THAT(a.loss_db, WithinAbs(114.61816490255808, 0.1));
    CHECK_THAT(a.loss_db, WithinAbs(114.6, 0.5));
    CHECK_FALSE(a.clamped);

    const auto b = hata_open_path_loss_db(2.3, 500.0, p);
    CHECK_THAT(b.loss_db, WithinAbs(98.26160996852417, 0.1));
    CHECK_FALSE(b.clamped);

    CHECK(hata_open_path_loss_db(2.0, 500.0, p).loss_db >
          hata_open_path_loss_db(1.0, 500.0, p).loss_db);
}

TEST_CASE("hata clamps out-of-validity inputs and reports it", "[propagation]") {
    PathLossParams p;
    p.tx_height_m = 30.0;
    p.rx_height_m = 5.0;

    const auto below = hata_open_path_loss_db(0.4, 500.0, p);
    CHECK(below.clamped);
    CHECK(below.loss_db == hata_open_path_loss_db(1.0, 500.0, p).loss_db);

    const auto beyond = hata_open_path_loss_db(120.0, 500.0, p);
    CHECK(beyond.clamped);
    CHECK(beyond.loss_db == hata_open_path_loss_db(20.0, 500.0, p).loss_db);

    CHECK(hata_open_path_loss_db(5.0, 90.0, p).clamped);   // f below 150
    CHECK(hata_open_path_loss_db(5.0, 2000.0, p).clamped); // f above 1500

    PathLossParams tall = p;
    tall.tx_height_m = 500.0;
    CHECK(hata_open_path_loss_db(5.0, 500.0, tall).clamped);
    PathLossParams low = p;
    low.rx_height_m = 0.5;
    CHECK(hata_open_path_loss_db(5.0, 500.0, low).clamped);

    // monotone over the validity window
    double prev = hata_open_path_loss_db(1.0, 500.0, p).loss_db;
    for (double d = 1.5; d <= 20.0; d += 0.5) {
        const double cur = hata_open_path_loss_db(d, 500.0, p).loss_db;
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("model dispatch falls back to free space under 1 km", "[propagation]") {
    PathLossParams p;
    p.model = PathLossModel::HataOpen;
    const auto near = path_loss_db(0.6, 500.0, p);
    CHECK(near.loss_db == free_space_path_loss_db(0.6, 500.0, p.min_distance_km));
    const auto far = path_loss_db(6.7, 500.0, p);
    CHECK(far.loss_db == hata_open_path_loss_db(6.7, 500.0, p).loss_db);

    PathLossParams fs = p;
    fs.model = PathLossModel::FreeSpace;
    CHECK(path_loss_db(6.7, 500.0, fs).loss_db == free_space_path_loss_db(6.7, 500.0, fs.min_distance_km));
}

TEST_CASE("received power budget", "[propagation]") {
    CHECK_THAT(received_power_dbm(50.0, 0.0, free_space_path_loss_db(10.0, 500.0)),
               WithinAbs(-56.42, 0.01));
    CHECK(received_power_dbm(23.5, 6.0, 0.0) == 29.5);

    PathLossParams p;
    p.tx_height_m = 30.0;
    p.rx_height_m = 5.0;
    const double rx =
        received_power_dbm(27.0 + 8.0, 8.0, hata_open_path_loss_db(6.7, 500.0, p).loss_db);
    CHECK_THAT(rx, WithinAbs(-71.6, 1.0));

    CHECK_THROWS_AS(received_power_dbm(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("noise floor", "[propagation]") {
    CHECK_THAT(noise_floor_dbm(5.0), WithinAbs(-101.0103, 1e-3));
    CHECK_THAT(noise_floor_dbm(8.0), WithinAbs(-98.9691, 1e-3));
    CHECK_THAT(noise_floor_dbm(20.0), WithinAbs(-94.9897, 1e-3));
    CHECK_THROWS_AS(noise_floor_dbm(0.0), std::invalid_argument);
}

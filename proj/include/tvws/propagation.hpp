#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvws {

enum class PathLossModel { FreeSpace, HataOpen };

struct PathLossParams {
    PathLossModel model = PathLossModel::HataOpen;
    double tx_height_m = 30.0;
    double rx_height_m = 5.0;
    double min_distance_km = 0.01;  // clamp floor for the free-space model

    void validate() const {
        if (!(tx_height_m > 0.0) || !(rx_height_m > 0.0))
            throw std::invalid_argument("antenna heights must be positive");
        if (!(min_distance_km > 0.0))
            throw std::invalid_argument("min_distance_km must be positive");
    }
};

struct PathLossResult {
    double loss_db = 0.0;
    bool clamped = false;  // any input was pulled into the model's validity window
};

/// Free-space path loss: 32.44 + 20 log10(d_km) + 20 log10(f_mhz).
inline double free_space_path_loss_db(double d_km, double f_mhz, double min_distance_km = 0.01) {
    if (!std::isfinite(d_km) || !std::isfinite(f_mhz) || f_mhz <= 0.0)
        throw std::invalid_argument("free-space path loss needs finite d and positive f");
    const double d = std::max(d_km, min_distance_km);
    return 32.44 + 20.0 * std::log10(d) + 20.0 * std::log10(f_mhz);
}

/// Hata open-area loss. The urban term uses the small/medium-city mobile
/// antenna correction; the open-area offset is
/// -4.78 (log10 f)^2 + 18.33 log10 f - 40.94.
/// Inputs outside the model's validity windows (d in [1,20] km, f in
/// [150,1500] MHz, hb in [30,200] m, hm in [1,10] m) are clamped and the
/// clamp is reported in the result.
inline PathLossResult hata_open_path_loss_db(double d_km, double f_mhz, const PathLossParams& p) {
    if (!std::isfinite(d_km) || !std::isfinite(f_mhz))
        throw std::invalid_argument("hata path loss needs finite inputs");
    p.validate();
    PathLossResult r;
    auto clamp_tracked = [&r](double v, double lo, double hi) {
        const double c = std::clamp(v, lo, hi);
        if (c != v) r.clamped = true;
        return c;
    };
    const double d = clamp_tracked(d_km, 1.0, 20.0);
    const double f = clamp_tracked(f_mhz, 150.0, 1500.0);
    const double hb = clamp_tracked(p.tx_height_m, 30.0, 200.0);
    const double hm = clamp_tracked(p.rx_height_m, 1.0, 10.0);

    const double lf = std::log10(f);
    const double a_hm = (1.1 * lf - 0.7) * hm - (1.56 * lf - 0.8);
    const double l_urban = 69.55 + 26.16 * lf - 13.82 * std::log10(hb) - a_hm +
                           (44.9 - 6.55 * std::log10(hb)) * std::log10(d);
    r.loss_db = l_urban - 4.78 * lf * lf + 18.33 * lf - 40.94;
    return r;
}

/// Model dispatch. With HataOpen selected, sub-kilometre distances fall back
/// to free space instead of the clamped 1 km Hata floor.
inline PathLossResult path_loss_db(double d_km, double f_mhz, const PathLossParams& p) {
    if (p.model == PathLossModel::FreeSpace || d_km < 1.0) {
        return PathLossResult{free_space_path_loss_db(d_km, f_mhz, p.min_distance_km), false};
    }
    return hata_open_path_loss_db(d_km, f_mhz, p);
}

inline double received_power_dbm(double tx_eirp_dbm, double rx_gain_dbi, double loss_db) {
    if (!std::isfinite(tx_eirp_dbm) || !std::isfinite(rx_gain_dbi) || !std::isfinite(loss_db))
        throw std::invalid_argument("link budget needs finite inputs");
    return tx_eirp_dbm + rx_gain_dbi - loss_db;
}

/// Thermal noise floor: -174 dBm/Hz + 10 log10(B) + 6 dB receiver noise figure.
inline double noise_floor_dbm(double bandwidth_mhz) {
    if (!(bandwidth_mhz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + 6.0;
}

}  // namespace tvws

#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/channels.hpp"
#include "tvws/geo.hpp"
#include "tvws/propagation.hpp"

namespace tvws {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline PathLossModel path_loss_model_from_string(const std::string& s) {
    if (s == "free-space") return PathLossModel::FreeSpace;
    if (s == "hata-open") return PathLossModel::HataOpen;
    throw ConfigError("unknown path loss model: " + s);
}

inline RegulatoryConfig regulatory_from_json(const nlohmann::json& j) {
    RegulatoryConfig cfg;
    cfg.protection_threshold_dbm = j.value("protectionThresholdDbm", cfg.protection_threshold_dbm);
    cfg.channel_count = j.value("channelCount", cfg.channel_count);
    cfg.band_low_mhz = j.value("bandLowMhz", cfg.band_low_mhz);
    cfg.band_high_mhz = j.value("bandHighMhz", cfg.band_high_mhz);
    cfg.max_secondary_eirp_dbm = j.value("maxSecondaryEirpDbm", cfg.max_secondary_eirp_dbm);
    cfg.schedule_horizon_hours = j.value("scheduleHorizonHours", cfg.schedule_horizon_hours);
    cfg.location_accuracy_m = j.value("locationAccuracyM", cfg.location_accuracy_m);
    if (j.contains("boundary")) {
        std::vector<GeoPoint> pts;
        for (const auto& v : j.at("boundary"))
            pts.push_back(GeoPoint{v.at(0).get<double>(), v.at(1).get<double>()});
        cfg.regulatory_boundary = Polygon(std::move(pts));
    }
    cfg.validate();
    return cfg;
}

inline PathLossParams path_loss_from_json(const nlohmann::json& j) {
    PathLossParams p;
    p.model = path_loss_model_from_string(j.value("model", std::string("hata-open")));
    p.tx_height_m = j.value("txHeightM", p.tx_height_m);
    p.rx_height_m = j.value("rxHeightM", p.rx_height_m);
    p.min_distance_km = j.value("minDistanceKm", p.min_distance_km);
    p.validate();
    return p;
}

/// Service-level configuration: regulatory parameters, path-loss model,
/// transmitter registry path, bind address, durable log location.
struct ServiceConfig {
    RegulatoryConfig regulatory;
    PathLossParams path_loss;
    std::string towers_csv;
    std::string bind_host = "127.0.0.1";
    int bind_port = 8054;
    std::string log_file;

    static ServiceConfig from_json(const nlohmann::json& j) {
        ServiceConfig sc;
        if (j.contains("regulatory")) sc.regulatory = regulatory_from_json(j.at("regulatory"));
        if (j.contains("pathLoss")) sc.path_loss = path_loss_from_json(j.at("pathLoss"));
        sc.towers_csv = j.value("towersCsv", std::string());
        sc.log_file = j.value("logFile", std::string());
        if (j.contains("bind")) {
            const auto bind = j.at("bind").get<std::string>();
            const auto colon = bind.rfind(':');
            if (colon == std::string::npos) throw ConfigError("bind must be host:port");
            sc.bind_host = bind.substr(0, colon);
            try {
                sc.bind_port = std::stoi(bind.substr(colon + 1));
            } catch (...) {
                throw ConfigError("bind must be host:port");
            }
        }
        return sc;
    }

    static ServiceConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid config JSON in " + path + ": " + e.what());
        }
        return from_json(j);
    }
};

}  // namespace tvws

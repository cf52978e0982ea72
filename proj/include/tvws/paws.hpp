#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tvws/availability.hpp"
#include "tvws/channels.hpp"
#include "tvws/geo.hpp"
#include "tvws/propagation.hpp"
#include "tvws/towers.hpp"
#include "tvws/util.hpp"

namespace tvws {

enum class ErrorCode { OUTSIDE_COVERAGE, NOT_REGISTERED, UNAVAILABLE_SPECTRUM, INVALID_REQUEST };

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::OUTSIDE_COVERAGE: return "OUTSIDE_COVERAGE";
        case ErrorCode::NOT_REGISTERED: return "NOT_REGISTERED";
        case ErrorCode::UNAVAILABLE_SPECTRUM: return "UNAVAILABLE_SPECTRUM";
        default: return "INVALID_REQUEST";
    }
}

struct PawsError {
    ErrorCode code;
    std::string message;
};

enum class DeviceState { Unknown, Initialized, Registered };

inline const char* to_string(DeviceState s) {
    switch (s) {
        case DeviceState::Initialized: return "INITIALIZED";
        case DeviceState::Registered: return "REGISTERED";
        default: return "UNKNOWN";
    }
}

struct DeviceDescriptor {
    std::string manufacturer;
    std::string model;
    std::string device_type = "fixed";
};

struct DeviceRecord {
    std::string device_id;
    DeviceState state = DeviceState::Unknown;
    GeoPoint last_location;
    double location_accuracy_m = 0.0;
    DeviceDescriptor descriptor;
    std::string owner_name;
    std::string owner_contact;
};

struct SpectrumGrant {
    int channel_index = 0;
    double max_eirp_dbm = 0.0;
    std::int64_t valid_from = 0;
    std::int64_t valid_to = 0;
};

struct SpectrumSchedule {
    std::string device_id;
    std::vector<SpectrumGrant> grants;  // channel index ascending
};

struct UseRecord {
    std::string device_id;
    int channel_index = 0;
    double eirp_dbm = 0.0;
    GeoPoint location;
    std::int64_t reported_at = 0;
    std::int64_t grant_valid_to = 0;  // expiry of the grant the use was reported under
};

struct InitResponse {
    std::string device_id;
    DeviceState state = DeviceState::Initialized;
    double max_location_change_m = 0.0;
    int schedule_horizon_hours = 0;
    double max_eirp_dbm = 0.0;
};

struct RegisterResponse {
    std::string device_id;
};

struct SpectrumResponse {
    std::string device_id;
    SpectrumSchedule schedule;
};

struct NotifyResponse {
    std::string device_id;
};

template <typename T>
using PawsOutcome = std::variant<T, PawsError>;

/// Write-ahead JSON-lines log. Every record is flushed and fsync'd before
/// append() returns, so an acknowledged request is always recoverable.
class AppendLog {
public:
    AppendLog() = default;

    explicit AppendLog(const std::string& path) : path_(path) {
        fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (fd_ < 0) throw std::runtime_error("cannot open log file: " + path);
        const off_t end = ::lseek(fd_, 0, SEEK_END);
        offset_ = end < 0 ? 0 : static_cast<std::uint64_t>(end);
    }

    AppendLog(const AppendLog&) = delete;
    AppendLog& operator=(const AppendLog&) = delete;

    AppendLog(AppendLog&& other) noexcept { *this = std::move(other); }
    AppendLog& operator=(AppendLog&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            offset_ = other.offset_;
            path_ = std::move(other.path_);
            other.fd_ = -1;
        }
        return *this;
    }

    ~AppendLog() { close(); }

    bool is_open() const { return fd_ >= 0; }
    std::uint64_t offset() const { return offset_; }
    const std::string& path() const { return path_; }

    /// Returns the byte offset after the durably written record.
    std::uint64_t append(const nlohmann::json& record) {
        if (fd_ < 0) throw std::runtime_error("log is not open");
        std::string line = record.dump();
        line.push_back('\n');
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            const ssize_t n = ::write(fd_, p, left);
            if (n < 0) throw std::runtime_error("log write failed");
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0) throw std::runtime_error("log fsync failed");
        offset_ += line.size();
        return offset_;
    }

    struct ReplayResult {
        std::vector<nlohmann::json> events;
        int skipped_lines = 0;
    };

    /// Reads back a log, tolerating a torn trailing record.
    static ReplayResult read_events(const std::string& path) {
        ReplayResult r;
        std::ifstream in(path);
        if (!in) return r;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                ++r.skipped_lines;
                continue;
            }
            r.events.push_back(std::move(j));
        }
        return r;
    }

private:
    void close() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

    int fd_ = -1;
    std::uint64_t offset_ = 0;
    std::string path_;
};

/// Geolocation database front end: device lifecycle state machine,
/// 48-hour spectrum schedules, spectrum-use notifications. All mutations
/// are serialized through a single writer and persisted to the append-only
/// log before they are acknowledged.
class PawsService {
public:
    using Clock = std::function<std::int64_t()>;

    PawsService(const TowerDataset& ds, RegulatoryConfig cfg, PathLossParams plp, Clock clock,
                std::string log_path = {})
        : engine_(ds, std::move(cfg), plp), clock_(std::move(clock)) {
        if (!log_path.empty()) {
            replay_file(log_path);
            log_ = AppendLog(log_path);
        }
    }

    const AvailabilityEngine& engine() const { return engine_; }
    const RegulatoryConfig& config() const { return engine_.config(); }

    // ------------------------------------------------------------ queries --

    DeviceState device_state(const std::string& device_id) const {
        std::shared_lock lk(mu_);
        auto it = devices_.find(device_id);
        return it == devices_.end() ? DeviceState::Unknown : it->second.state;
    }

    std::optional<DeviceRecord> device(const std::string& device_id) const {
        std::shared_lock lk(mu_);
        auto it = devices_.find(device_id);
        if (it == devices_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<SpectrumSchedule> schedule_for(const std::string& device_id) const {
        std::shared_lock lk(mu_);
        auto it = schedules_.find(device_id);
        if (it == schedules_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<UseRecord> use_records() const {
        std::shared_lock lk(mu_);
        return uses_;
    }

    /// Spectrum uses whose grant is still unexpired at `now`; the live view
    /// the coexistence allocator reads.
    std::vector<UseRecord> active_uses(std::int64_t now) const {
        std::shared_lock lk(mu_);
        std::vector<UseRecord> out;
        for (const auto& u : uses_)
            if (u.grant_valid_to >= now) out.push_back(u);
        return out;
    }

    std::size_t device_count() const {
        std::shared_lock lk(mu_);
        return devices_.size();
    }

    /// Digest of the externally observable state (devices, schedules, uses).
    std::uint64_t snapshot_digest() const {
        std::shared_lock lk(mu_);
        std::uint64_t h = 0xcbf29ce484222325ULL;
        std::map<std::string, const DeviceRecord*> devs;
        for (const auto& [id, d] : devices_) devs[id] = &d;
        char buf[256];
        for (const auto& [id, d] : devs) {
            std::snprintf(buf, sizeof(buf), "D|%s|%s|%.7f|%.7f|%.3f|%s|%s\n", id.c_str(),
                          to_string(d->state), d->last_location.lat_deg, d->last_location.lon_deg,
                          d->location_accuracy_m, d->owner_name.c_str(), d->owner_contact.c_str());
            h = fnv1a64(buf, h);
            auto sit = schedules_.find(id);
            if (sit != schedules_.end()) {
                for (const auto& g : sit->second.grants) {
                    std::snprintf(buf, sizeof(buf), "G|%s|%d|%.3f|%lld|%lld\n", id.c_str(),
                                  g.channel_index, g.max_eirp_dbm,
                                  static_cast<long long>(g.valid_from),
                                  static_cast<long long>(g.valid_to));
                    h = fnv1a64(buf, h);
                }
            }
        }
        for (const auto& u : uses_) {
            std::snprintf(buf, sizeof(buf), "U|%s|%d|%.3f|%lld\n", u.device_id.c_str(),
                          u.channel_index, u.eirp_dbm, static_cast<long long>(u.reported_at));
            h = fnv1a64(buf, h);
        }
        return h;
    }

    // ----------------------------------------------------------- handlers --

    PawsOutcome<InitResponse> handle_init(const std::string& device_id,
                                          const DeviceDescriptor& descriptor,
                                          const GeoPoint& location, double accuracy_m) {
        std::unique_lock lk(mu_);
        if (device_id.empty()) return PawsError{ErrorCode::INVALID_REQUEST, "deviceId is required"};
        if (descriptor.device_type != "fixed")
            return PawsError{ErrorCode::INVALID_REQUEST,
                             "only fixed device types are served by this database"};
        if (!location.valid())
            return PawsError{ErrorCode::INVALID_REQUEST, "location out of range"};
        if (!engine_.in_coverage(location))
            return PawsError{ErrorCode::OUTSIDE_COVERAGE,
                             "device location is outside the regulatory domain"};
        if (!std::isfinite(accuracy_m) || accuracy_m < 0.0 ||
            accuracy_m > config().location_accuracy_m) {
            std::ostringstream os;
            os << "location accuracy must be within " << config().location_accuracy_m << " m";
            return PawsError{ErrorCode::INVALID_REQUEST, os.str()};
        }

        nlohmann::json ev{{"event", "init"},
                          {"deviceId", device_id},
                          {"manufacturer", descriptor.manufacturer},
                          {"model", descriptor.model},
                          {"deviceType", descriptor.device_type},
                          {"lat", location.lat_deg},
                          {"lon", location.lon_deg},
                          {"accuracyM", accuracy_m},
                          {"ts", clock_()}};
        persist(ev);
        apply_event(ev);

        InitResponse r;
        r.device_id = device_id;
        r.state = devices_.at(device_id).state;
        r.max_location_change_m = config().location_accuracy_m;
        r.schedule_horizon_hours = config().schedule_horizon_hours;
        r.max_eirp_dbm = config().max_secondary_eirp_dbm;
        return r;
    }

    PawsOutcome<RegisterResponse> handle_register(const std::string& device_id,
                                                  const std::string& owner_name,
                                                  const std::string& owner_contact,
                                                  const GeoPoint& location) {
        std::unique_lock lk(mu_);
        auto it = devices_.find(device_id);
        if (it == devices_.end() || it->second.state == DeviceState::Unknown)
            return PawsError{ErrorCode::INVALID_REQUEST,
                             "device must be initialized before registration"};
        if (!location.valid())
            return PawsError{ErrorCode::INVALID_REQUEST, "location out of range"};
        if (!engine_.in_coverage(location))
            return PawsError{ErrorCode::OUTSIDE_COVERAGE,
                             "device location is outside the regulatory domain"};

        nlohmann::json ev{{"event", "register"}, {"deviceId", device_id},
                          {"ownerName", owner_name}, {"ownerContact", owner_contact},
                          {"lat", location.lat_deg}, {"lon", location.lon_deg},
                          {"ts", clock_()}};
        persist(ev);
        apply_event(ev);
        return RegisterResponse{device_id};
    }

    PawsOutcome<SpectrumResponse> handle_avail_spectrum(const std::string& device_id,
                                                        const GeoPoint& location) {
        std::unique_lock lk(mu_);
        auto it = devices_.find(device_id);
        if (it == devices_.end() || it->second.state != DeviceState::Registered)
            return PawsError{ErrorCode::NOT_REGISTERED,
                             "spectrum queries require an initialized and registered device"};
        if (!location.valid())
            return PawsError{ErrorCode::INVALID_REQUEST, "location out of range"};
        if (!engine_.in_coverage(location))
            return PawsError{ErrorCode::OUTSIDE_COVERAGE,
                             "query location is outside the regulatory domain"};

        const auto avail = engine_.available_channels(location);
        std::vector<int> channels;
        for (const auto& e : avail.entries)
            if (e.available) channels.push_back(e.channel_index);
        if (channels.empty())
            return PawsError{ErrorCode::UNAVAILABLE_SPECTRUM,
                             "no channels available at the device location"};

        const std::int64_t now = clock_();
        const std::int64_t until = now + 3600LL * config().schedule_horizon_hours;
        nlohmann::json ev{{"event", "grant"},     {"deviceId", device_id},
                          {"channels", channels}, {"maxEirpDbm", config().max_secondary_eirp_dbm},
                          {"validFrom", now},     {"validTo", until},
                          {"lat", location.lat_deg}, {"lon", location.lon_deg},
                          {"ts", now}};
        persist(ev);
        apply_event(ev);

        SpectrumResponse r;
        r.device_id = device_id;
        r.schedule = schedules_.at(device_id);
        return r;
    }

    PawsOutcome<NotifyResponse> handle_notify(const std::string& device_id, int channel_index,
                                              double eirp_dbm, const GeoPoint& location) {
        std::unique_lock lk(mu_);
        auto it = devices_.find(device_id);
        if (it == devices_.end() || it->second.state != DeviceState::Registered)
            return PawsError{ErrorCode::INVALID_REQUEST, "device is not registered"};
        if (!location.valid() || !std::isfinite(eirp_dbm))
            return PawsError{ErrorCode::INVALID_REQUEST, "malformed notification"};
        auto sit = schedules_.find(device_id);
        const std::int64_t now = clock_();
        const SpectrumGrant* grant = nullptr;
        if (sit != schedules_.end()) {
            for (const auto& g : sit->second.grants)
                if (g.channel_index == channel_index) grant = &g;
        }
        if (grant == nullptr)
            return PawsError{ErrorCode::INVALID_REQUEST, "channel was never granted to device"};
        if (now < grant->valid_from || now > grant->valid_to)
            return PawsError{ErrorCode::INVALID_REQUEST, "grant has expired"};
        if (eirp_dbm > grant->max_eirp_dbm)
            return PawsError{ErrorCode::INVALID_REQUEST, "reported power exceeds the grant"};

        nlohmann::json ev{{"event", "notify"},      {"deviceId", device_id},
                          {"channel", channel_index}, {"eirpDbm", eirp_dbm},
                          {"lat", location.lat_deg},  {"lon", location.lon_deg},
                          {"grantValidTo", grant->valid_to}, {"ts", now}};
        persist(ev);
        apply_event(ev);
        return NotifyResponse{device_id};
    }

    // ------------------------------------------------------ JSON envelope --

    /// Request envelope: {"method": ..., "id": ..., "params": {...}}.
    /// Every outcome is either a result object or one of the four error
    /// codes; the envelope never produces anything else.
    nlohmann::ordered_json handle_envelope(const nlohmann::json& req) {
        nlohmann::json id = nlohmann::json();
        if (req.is_object() && req.contains("id")) id = req.at("id");
        if (!req.is_object() || !req.contains("method") || !req.at("method").is_string())
            return error_envelope(id, {ErrorCode::INVALID_REQUEST, "missing method"});
        const std::string method = req.at("method").get<std::string>();
        const nlohmann::json params =
            req.contains("params") && req.at("params").is_object() ? req.at("params")
                                                                   : nlohmann::json::object();
        try {
            if (method == "init") return envelope_init(id, params);
            if (method == "register") return envelope_register(id, params);
            if (method == "getSpectrum") return envelope_get_spectrum(id, params);
            if (method == "notifySpectrumUse") return envelope_notify(id, params);
        } catch (const nlohmann::json::exception&) {
            return error_envelope(id, {ErrorCode::INVALID_REQUEST, "malformed parameters"});
        }
        return error_envelope(id, {ErrorCode::INVALID_REQUEST, "unknown method: " + method});
    }

    nlohmann::ordered_json handle_envelope_text(const std::string& body) {
        auto req = nlohmann::json::parse(body, nullptr, false);
        if (req.is_discarded())
            return error_envelope(nlohmann::json(), {ErrorCode::INVALID_REQUEST, "invalid JSON"});
        return handle_envelope(req);
    }

private:
    // ---------------------------------------------------------- internals --

    void persist(const nlohmann::json& ev) {
        if (log_.is_open()) log_.append(ev);
    }

    void apply_event(const nlohmann::json& ev) {
        const std::string type = ev.value("event", "");
        const std::string id = ev.value("deviceId", "");
        if (type == "init") {
            DeviceRecord& d = devices_[id];
            d.device_id = id;
            d.descriptor = DeviceDescriptor{ev.value("manufacturer", ""), ev.value("model", ""),
                                            ev.value("deviceType", "fixed")};
            d.last_location = GeoPoint{ev.value("lat", 0.0), ev.value("lon", 0.0)};
            d.location_accuracy_m = ev.value("accuracyM", 0.0);
            if (d.state == DeviceState::Unknown) d.state = DeviceState::Initialized;
        } else if (type == "register") {
            auto it = devices_.find(id);
            if (it == devices_.end()) return;  // tolerated on replay of a pruned log
            it->second.state = DeviceState::Registered;
            it->second.owner_name = ev.value("ownerName", "");
            it->second.owner_contact = ev.value("ownerContact", "");
            it->second.last_location = GeoPoint{ev.value("lat", 0.0), ev.value("lon", 0.0)};
        } else if (type == "grant") {
            SpectrumSchedule s;
            s.device_id = id;
            for (const auto& c : ev.value("channels", std::vector<int>{}))
                s.grants.push_back(SpectrumGrant{c, ev.value("maxEirpDbm", 0.0),
                                                 ev.value("validFrom", std::int64_t{0}),
                                                 ev.value("validTo", std::int64_t{0})});
            schedules_[id] = std::move(s);
        } else if (type == "notify") {
            UseRecord u;
            u.device_id = id;
            u.channel_index = ev.value("channel", 0);
            u.eirp_dbm = ev.value("eirpDbm", 0.0);
            u.location = GeoPoint{ev.value("lat", 0.0), ev.value("lon", 0.0)};
            u.reported_at = ev.value("ts", std::int64_t{0});
            u.grant_valid_to = ev.value("grantValidTo", std::int64_t{0});
            uses_.push_back(std::move(u));
        }
    }

    void replay_file(const std::string& path) {
        auto replay = AppendLog::read_events(path);
        for (const auto& ev : replay.events) apply_event(ev);
        replayed_events_ = replay.events.size();
        replay_skipped_ = replay.skipped_lines;
    }

    // envelope adapters -----------------------------------------------------

    static GeoPoint location_from(const nlohmann::json& params) {
        const auto& loc = params.at("location");
        return GeoPoint{loc.at("lat").get<double>(), loc.at("lon").get<double>()};
    }

    nlohmann::ordered_json error_envelope(const nlohmann::json& id, const PawsError& e) const {
        nlohmann::ordered_json out;
        out["id"] = id;
        out["error"] = {{"code", to_string(e.code)}, {"message", e.message}};
        return out;
    }

    nlohmann::ordered_json result_envelope(const nlohmann::json& id,
                                           nlohmann::ordered_json result) const {
        nlohmann::ordered_json out;
        out["id"] = id;
        out["result"] = std::move(result);
        return out;
    }

    nlohmann::ordered_json envelope_init(const nlohmann::json& id, const nlohmann::json& params) {
        DeviceDescriptor d;
        if (params.contains("descriptor")) {
            const auto& dj = params.at("descriptor");
            d.manufacturer = dj.value("manufacturer", "");
            d.model = dj.value("model", "");
            d.device_type = dj.value("deviceType", "fixed");
        }
        auto out = handle_init(params.value("deviceId", ""), d, location_from(params),
                               params.value("accuracyM", 0.0));
        if (auto* err = std::get_if<PawsError>(&out)) return error_envelope(id, *err);
        const auto& r = std::get<InitResponse>(out);
        nlohmann::ordered_json res;
        res["deviceId"] = r.device_id;
        res["state"] = to_string(r.state);
        res["ruleset"] = {{"maxLocationChangeM", r.max_location_change_m},
                          {"scheduleHorizonHours", r.schedule_horizon_hours},
                          {"maxEirpDbm", r.max_eirp_dbm}};
        return result_envelope(id, std::move(res));
    }

    nlohmann::ordered_json envelope_register(const nlohmann::json& id,
                                             const nlohmann::json& params) {
        std::string owner_name, owner_contact;
        if (params.contains("owner")) {
            owner_name = params.at("owner").value("name", "");
            owner_contact = params.at("owner").value("contact", "");
        }
        auto out = handle_register(params.value("deviceId", ""), owner_name, owner_contact,
                                   location_from(params));
        if (auto* err = std::get_if<PawsError>(&out)) return error_envelope(id, *err);
        const auto& r = std::get<RegisterResponse>(out);
        nlohmann::ordered_json res;
        res["deviceId"] = r.device_id;
        res["state"] = "REGISTERED";
        return result_envelope(id, std::move(res));
    }

    nlohmann::ordered_json envelope_get_spectrum(const nlohmann::json& id,
                                                 const nlohmann::json& params) {
        auto out = handle_avail_spectrum(params.value("deviceId", ""), location_from(params));
        if (auto* err = std::get_if<PawsError>(&out)) return error_envelope(id, *err);
        const auto& r = std::get<SpectrumResponse>(out);
        nlohmann::ordered_json res;
        res["deviceId"] = r.device_id;
        auto sched = nlohmann::ordered_json::array();
        for (const auto& g : r.schedule.grants) {
            sched.push_back({{"channel", g.channel_index},
                             {"maxEirpDbm", g.max_eirp_dbm},
                             {"validFrom", iso8601_utc(g.valid_from)},
                             {"validTo", iso8601_utc(g.valid_to)}});
        }
        res["schedule"] = std::move(sched);
        return result_envelope(id, std::move(res));
    }

    nlohmann::ordered_json envelope_notify(const nlohmann::json& id,
                                           const nlohmann::json& params) {
        auto out = handle_notify(params.value("deviceId", ""), params.value("channel", 0),
                                 params.value("eirpDbm", 0.0), location_from(params));
        if (auto* err = std::get_if<PawsError>(&out)) return error_envelope(id, *err);
        const auto& r = std::get<NotifyResponse>(out);
        nlohmann::ordered_json res;
        res["deviceId"] = r.device_id;
        res["status"] = "ACKNOWLEDGED";
        return result_envelope(id, std::move(res));
    }

    AvailabilityEngine engine_;
    Clock clock_;
    AppendLog log_;
    mutable std::shared_mutex mu_;
    std::map<std::string, DeviceRecord> devices_;
    std::map<std::string, SpectrumSchedule> schedules_;
    std::vector<UseRecord> uses_;
    std::size_t replayed_events_ = 0;
    int replay_skipped_ = 0;

public:
    std::size_t replayed_events() const { return replayed_events_; }
    int replay_skipped_lines() const { return replay_skipped_; }
};

}  // namespace tvws

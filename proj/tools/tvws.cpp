// tvws -- command line front end for the white-space toolkit:
// transmitter ingestion, availability queries, grid statistics, the PAWS
// service, link allocation and mesh planning.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvws/allocator.hpp"
#include "tvws/availability.hpp"
#include "tvws/config.hpp"
#include "tvws/paws.hpp"
#include "tvws/paws_http.hpp"
#include "tvws/planner.hpp"
#include "tvws/towers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsage = 2;
constexpr const char* kConfigEnvVar = "TVWS_CONFIG";

struct CommonOpts {
    std::string config_path;
    std::string towers_path;
    std::string out_path;
};

// Paths inside a config file are resolved against the config's directory.
std::string resolve_against(const std::string& base_file, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_file).parent_path() / p).string();
}

tvws::ServiceConfig load_config(CommonOpts& opts) {
    if (opts.config_path.empty()) {
        if (const char* env = std::getenv(kConfigEnvVar)) opts.config_path = env;
    }
    if (opts.config_path.empty()) return tvws::ServiceConfig{};
    auto sc = tvws::ServiceConfig::from_file(opts.config_path);
    sc.towers_csv = resolve_against(opts.config_path, sc.towers_csv);
    sc.log_file = resolve_against(opts.config_path, sc.log_file);
    return sc;
}

tvws::TowerDataset load_towers(const CommonOpts& opts, const tvws::ServiceConfig& sc,
                               tvws::IngestReport* report = nullptr) {
    const std::string path = !opts.towers_path.empty() ? opts.towers_path : sc.towers_csv;
    if (path.empty())
        throw tvws::ConfigError("no tower dataset: pass --towers or set towersCsv in the config");
    auto result = tvws::ingest_csv(path, sc.regulatory.channel_count);
    if (report) *report = result.report;
    if (!result.report.rejects.empty())
        std::cerr << "warning: " << result.report.rejects.size() << " rejected rows in " << path
                  << "\n";
    return std::move(result.dataset);
}

void write_output(const CommonOpts& opts, const std::string& content) {
    if (opts.out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(opts.out_path);
    if (!out) throw std::runtime_error("cannot write output file: " + opts.out_path);
    out << content;
}

int cmd_ingest(const CommonOpts& opts_in, const std::string& rejects_path, bool coverage,
               double coverage_threshold_dbm) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    tvws::IngestReport report;
    auto ds = load_towers(opts, sc, &report);
    std::ostringstream os;
    os << "loaded " << ds.size() << " towers, rejected " << report.rejects.size() << " rows\n";
    os << "digest " << tvws::to_hex(ds.digest()) << "\n";
    if (coverage) {
        char buf[64];
        for (const auto& t : ds.records()) {
            const double r = tvws::coverage_radius_km(t, coverage_threshold_dbm, sc.path_loss);
            std::snprintf(buf, sizeof(buf), "%.2f", r);
            os << t.tower_id << " channel " << t.channel_index << " coverage_km " << buf << "\n";
        }
    }
    write_output(opts, os.str());
    if (!rejects_path.empty()) {
        std::ofstream out(rejects_path);
        if (!out) throw std::runtime_error("cannot write rejects file: " + rejects_path);
        out << report.to_text();
    }
    return kExitOk;
}

int cmd_avail(const CommonOpts& opts_in, double lat, double lon, const std::string& format) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    auto ds = load_towers(opts, sc);
    tvws::AvailabilityEngine engine(ds, sc.regulatory, sc.path_loss);
    const auto res = engine.available_channels(tvws::GeoPoint{lat, lon});
    if (format == "json") {
        write_output(opts, tvws::availability_to_json(res).dump(2) + "\n");
        return kExitOk;
    }
    std::ostringstream os;
    os << "available channels: " << res.available_count() << " of " << res.entries.size() << "\n";
    char buf[128];
    for (const auto& e : res.entries) {
        if (e.available) {
            std::snprintf(buf, sizeof(buf), "channel %2d: available, max EIRP %.1f dBm\n",
                          e.channel_index, e.max_eirp_dbm);
        } else if (e.dominant) {
            std::snprintf(buf, sizeof(buf), "channel %2d: occupied by %s (%.2f dBm predicted)\n",
                          e.channel_index, e.dominant->tower_id.c_str(),
                          e.dominant->predicted_dbm);
        } else {
            std::snprintf(buf, sizeof(buf), "channel %2d: occupied\n", e.channel_index);
        }
        os << buf;
    }
    write_output(opts, os.str());
    return kExitOk;
}

int cmd_grid(const CommonOpts& opts_in, const std::vector<double>& bbox, double resolution,
             const std::string& format) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    auto ds = load_towers(opts, sc);
    tvws::AvailabilityEngine engine(ds, sc.regulatory, sc.path_loss);
    tvws::BoundingBox bb{bbox[0], bbox[1], bbox[2], bbox[3]};
    const auto stats = engine.availability_grid(bb, resolution);
    if (format == "csv") {
        std::ostringstream os;
        stats.write_csv(os);
        write_output(opts, os.str());
    } else {
        write_output(opts, stats.summary_json().dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_serve(const CommonOpts& opts_in, const std::string& bind_override,
              const std::string& log_override) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    auto ds = load_towers(opts, sc);
    std::string host = sc.bind_host;
    int port = sc.bind_port;
    if (!bind_override.empty()) {
        const auto colon = bind_override.rfind(':');
        if (colon == std::string::npos)
            throw tvws::ConfigError("--bind must be host:port");
        host = bind_override.substr(0, colon);
        port = std::stoi(bind_override.substr(colon + 1));
    }
    std::string log_file = !log_override.empty() ? log_override : sc.log_file;
    tvws::PawsService service(
        ds, sc.regulatory, sc.path_loss, [] { return static_cast<std::int64_t>(std::time(nullptr)); },
        log_file);
    if (service.replayed_events() > 0)
        std::cerr << "replayed " << service.replayed_events() << " events from " << log_file
                  << "\n";
    tvws::PawsHttpServer server(service);
    const int bound = server.bind(host, port);
    std::cerr << "paws database listening on " << host << ":" << bound << " (POST /paws)\n";
    server.listen_after_bind();
    return kExitOk;
}

int cmd_plan(const CommonOpts& opts_in, const std::string& scenario_path,
             const std::string& format) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    auto ds = load_towers(opts, sc);
    std::ifstream in(scenario_path);
    if (!in) throw tvws::PlanError("cannot open scenario file: " + scenario_path);
    nlohmann::json j;
    in >> j;
    const auto scenario = tvws::Scenario::from_json(j);
    tvws::AvailabilityEngine engine(ds, sc.regulatory, sc.path_loss);
    const auto report = tvws::plan_scenario(scenario, engine, sc.path_loss);
    if (format == "csv") {
        std::ostringstream os;
        tvws::plan_report_to_csv(report, os);
        write_output(opts, os.str());
    } else {
        write_output(opts, tvws::plan_report_to_json(report).dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_allocate(const CommonOpts& opts_in, const std::string& requests_path, double radius_km) {
    CommonOpts opts = opts_in;
    auto sc = load_config(opts);
    auto ds = load_towers(opts, sc);
    std::ifstream in(requests_path);
    if (!in) throw std::runtime_error("cannot open requests file: " + requests_path);
    nlohmann::json j;
    in >> j;
    std::vector<tvws::LinkRequest> requests;
    for (const auto& rj : j.at("requests")) {
        tvws::LinkRequest r;
        r.link_id = rj.at("id").get<std::string>();
        r.endpoint_a = tvws::GeoPoint{rj.at("a").at("lat").get<double>(),
                                      rj.at("a").at("lon").get<double>()};
        r.endpoint_b = tvws::GeoPoint{rj.at("b").at("lat").get<double>(),
                                      rj.at("b").at("lon").get<double>()};
        r.requested_bandwidth_mhz = rj.value("bandwidthMhz", 8.0);
        r.operator_id = rj.value("operator", "");
        requests.push_back(std::move(r));
    }
    if (radius_km <= 0.0) radius_km = j.value("interferenceRadiusKm", 10.0);

    tvws::AvailabilityEngine engine(ds, sc.regulatory, sc.path_loss);
    std::map<std::string, std::set<int>> availability;
    for (const auto& r : requests) {
        std::set<int> both;
        auto collect = [&engine](const tvws::GeoPoint& p) {
            std::set<int> s;
            for (const auto& e : engine.available_channels(p).entries)
                if (e.available) s.insert(e.channel_index);
            return s;
        };
        auto sa = collect(r.endpoint_a);
        auto sb = collect(r.endpoint_b);
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::inserter(both, both.begin()));
        availability[r.link_id] = std::move(both);
    }
    auto graph = tvws::build_conflict_graph(std::move(requests), radius_km);
    auto assignment = tvws::assign_channels(graph, availability, sc.regulatory);
    write_output(opts, tvws::assignment_to_json(graph, assignment, radius_km).dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TV white space middle-mile toolkit"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto add_common = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("--config", opts.config_path,
                        "service config JSON (or set " + std::string(kConfigEnvVar) + ")");
        cmd->add_option("--towers", opts.towers_path, "tower CSV, overrides the config");
        if (with_out) cmd->add_option("--out", opts.out_path, "write results to a file");
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load and validate a tower CSV");
    std::string rejects_path;
    bool coverage = false;
    double coverage_threshold = -84.0;
    add_common(ingest);
    ingest->add_option("--rejects", rejects_path, "write the rejects report to a file");
    ingest->add_flag("--coverage", coverage, "print per-tower coverage radius");
    ingest->add_option("--coverage-threshold-dbm", coverage_threshold,
                       "reception threshold for --coverage");

    // avail
    auto* avail = app.add_subcommand("avail", "channel availability at a point");
    double lat = 0.0, lon = 0.0;
    std::string avail_format = "text";
    add_common(avail);
    avail->add_option("--lat", lat, "latitude in degrees")->required();
    avail->add_option("--lon", lon, "longitude in degrees")->required();
    avail->add_option("--format", avail_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    // grid
    auto* grid = app.add_subcommand("grid", "availability statistics over a grid");
    std::vector<double> bbox;
    double resolution = 0.0;
    std::string grid_format = "json";
    add_common(grid);
    grid->add_option("--bbox", bbox, "lat_min lon_min lat_max lon_max")->expected(4)->required();
    grid->add_option("--resolution", resolution, "grid step in degrees")->required();
    grid->add_option("--format", grid_format, "json summary or csv points")
        ->check(CLI::IsMember({"json", "csv"}));

    // serve
    auto* serve = app.add_subcommand("serve", "run the PAWS database service");
    std::string bind_override, log_override;
    add_common(serve, false);
    serve->add_option("--bind", bind_override, "host:port, overrides the config");
    serve->add_option("--log", log_override, "durable log file, overrides the config");

    // plan
    auto* plan = app.add_subcommand("plan", "plan a backhaul mesh from a scenario file");
    std::string scenario_path;
    std::string plan_format = "json";
    add_common(plan);
    plan->add_option("--scenario", scenario_path, "scenario JSON")->required();
    plan->add_option("--format", plan_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // allocate
    auto* allocate = app.add_subcommand("allocate", "assign channels to link requests");
    std::string requests_path;
    double radius_km = 0.0;
    add_common(allocate);
    allocate->add_option("--requests", requests_path, "link requests JSON")->required();
    allocate->add_option("--radius-km", radius_km, "interference radius, overrides the file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(ingest))
            return cmd_ingest(opts, rejects_path, coverage, coverage_threshold);
        if (app.got_subcommand(avail)) return cmd_avail(opts, lat, lon, avail_format);
        if (app.got_subcommand(grid)) return cmd_grid(opts, bbox, resolution, grid_format);
        if (app.got_subcommand(serve)) return cmd_serve(opts, bind_override, log_override);
        if (app.got_subcommand(plan)) return cmd_plan(opts, scenario_path, plan_format);
        if (app.got_subcommand(allocate)) return cmd_allocate(opts, requests_path, radius_km);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomainError;
    }
    return kExitUsage;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/allocator.hpp"
#include "tvws/availability.hpp"
#include "tvws/channels.hpp"
#include "tvws/geo.hpp"
#include "tvws/phy.hpp"
#include "tvws/propagation.hpp"

namespace tvws {

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NodeRole { PoP, BaseStation, Client };

inline const char* to_string(NodeRole r) {
    switch (r) {
        case NodeRole::PoP: return "pop";
        case NodeRole::BaseStation: return "base-station";
        default: return "client";
    }
}

inline NodeRole node_role_from_string(const std::string& s) {
    if (s == "pop") return NodeRole::PoP;
    if (s == "base-station") return NodeRole::BaseStation;
    if (s == "client") return NodeRole::Client;
    throw PlanError("unknown node role: " + s);
}

struct NodeSpec {
    std::string node_id;
    NodeRole role = NodeRole::Client;
    GeoPoint location;
    double antenna_height_m = 5.0;
    double antenna_gain_dbi = 8.0;
    double tx_power_dbm = 27.0;
    double bandwidth_mhz = 8.0;  // bandwidth of this node's uplink
};

struct LinkPlan {
    std::string link_id;
    std::string from_node;  // parent, toward the PoP
    std::string to_node;    // child
    double distance_km = 0.0;
    std::vector<int> channels;  // empty until (or unless) assigned
    double bandwidth_mhz = 8.0;
    double predicted_snr_db = 0.0;
    double predicted_throughput_mbps = 0.0;
    int hop_depth = 1;
    std::string unassigned_reason;  // empty when a channel block was assigned
};

struct Topology {
    std::vector<NodeSpec> nodes;  // sorted by node id
    std::vector<LinkPlan> links;  // sorted by link id
    std::vector<std::pair<std::string, std::string>> unreachable;  // (node id, reason)
};

/// Worst-direction link budget between two nodes: the weaker transmitter,
/// both antenna gains, tall end as the base-station side of the path-loss
/// model.
inline double predict_link_snr_db(const NodeSpec& a, const NodeSpec& b, double f_mhz,
                                  double bandwidth_mhz, const PathLossParams& plp) {
    PathLossParams q = plp;
    q.tx_height_m = std::max(a.antenna_height_m, b.antenna_height_m);
    q.rx_height_m = std::min(a.antenna_height_m, b.antenna_height_m);
    const double d = haversine_km(a.location, b.location);
    const double loss = path_loss_db(d, f_mhz, q).loss_db;
    const double tx = std::min(a.tx_power_dbm, b.tx_power_dbm);
    return received_power_dbm(tx + a.antenna_gain_dbi, b.antenna_gain_dbi, loss) -
           noise_floor_dbm(bandwidth_mhz);
}

/// Shortest-path tree rooted at the single PoP over the feasibility graph:
/// node pairs within max_link_km whose predicted SNR (at the band-centre
/// reference frequency) clears the profile's closure floor. Edge weight is
/// distance; ties prefer the lexicographically smaller parent.
inline Topology build_topology(std::vector<NodeSpec> nodes, double max_link_km,
                               const PathLossParams& plp, const PhyProfile& profile,
                               double ref_f_mhz = 530.0) {
    if (!(max_link_km > 0.0)) throw PlanError("max_link_km must be positive");
    profile.validate();
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.node_id < b.node_id; });
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].node_id == nodes[i - 1].node_id)
            throw PlanError("duplicate node id: " + nodes[i].node_id);

    std::size_t pop_idx = nodes.size();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].role == NodeRole::PoP) {
            if (pop_idx != nodes.size()) throw PlanError("plan must have exactly one PoP");
            pop_idx = i;
        }
    }
    if (pop_idx == nodes.size()) throw PlanError("plan must have exactly one PoP");

    const std::size_t n = nodes.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = haversine_km(nodes[i].location, nodes[j].location);
            if (d > max_link_km) continue;
            const double bw = std::max(nodes[i].bandwidth_mhz, nodes[j].bandwidth_mhz);
            const double snr = predict_link_snr_db(nodes[i], nodes[j], ref_f_mhz, bw, plp);
            if (snr < profile.min_snr_db) continue;
            adj[i].push_back({j, d});
            adj[j].push_back({i, d});
        }
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<std::size_t> parent(n, n);
    dist[pop_idx] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, pop_idx});
    std::vector<bool> done(n, false);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = true;
        for (auto [v, w] : adj[u]) {
            const double alt = d + w;
            if (alt < dist[v] ||
                (alt == dist[v] && parent[v] < n && nodes[u].node_id < nodes[parent[v]].node_id)) {
                dist[v] = alt;
                parent[v] = u;
                pq.push({alt, v});
            }
        }
    }

    Topology topo;
    topo.nodes = nodes;
    std::vector<int> depth(n, 0);
    // children in id order; parents are always finalized before children here
    for (std::size_t v = 0; v < n; ++v) {
        if (v == pop_idx) continue;
        if (!std::isfinite(dist[v])) {
            topo.unreachable.emplace_back(nodes[v].node_id, "no feasible path to the PoP");
            continue;
        }
    }
    // depths via repeated passes (tree is shallow; n is small)
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t v = 0; v < n; ++v) {
            if (v == pop_idx || parent[v] == n || !std::isfinite(dist[v])) continue;
            const int want = depth[parent[v]] + 1;
            if (depth[v] != want) {
                depth[v] = want;
                changed = true;
            }
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (v == pop_idx || !std::isfinite(dist[v]) || parent[v] == n) continue;
        LinkPlan lp;
        lp.from_node = nodes[parent[v]].node_id;
        lp.to_node = nodes[v].node_id;
        lp.link_id = lp.from_node + "--" + lp.to_node;
        lp.distance_km = haversine_km(nodes[parent[v]].location, nodes[v].location);
        lp.bandwidth_mhz = nodes[v].bandwidth_mhz;
        lp.hop_depth = depth[v];
        topo.links.push_back(std::move(lp));
    }
    std::sort(topo.links.begin(), topo.links.end(),
              [](const LinkPlan& a, const LinkPlan& b) { return a.link_id < b.link_id; });
    std::sort(topo.unreachable.begin(), topo.unreachable.end());
    return topo;
}

struct NodeThroughput {
    std::string node_id;
    double bottleneck_mbps = 0.0;
    std::vector<std::string> path;  // node ids from the PoP outward
};

struct PlanReport {
    std::string name;
    std::string profile_name;
    std::vector<NodeSpec> nodes;
    std::vector<LinkPlan> links;
    std::vector<NodeThroughput> node_throughputs;
    std::vector<std::pair<std::string, std::string>> unreachable;
    Assignment assignment;
};

/// Fills per-link SNR/throughput from the link budget and the assigned
/// channel block, then folds per-node bottlenecks along the tree.
inline PlanReport evaluate_plan(const Topology& topo, const Assignment& assignment,
                                const RegulatoryConfig& cfg, const PathLossParams& plp,
                                const PhyProfile& profile) {
    profile.validate();
    std::map<std::string, const NodeSpec*> node_by_id;
    for (const auto& nd : topo.nodes) {
        if (nd.tx_power_dbm > cfg.max_secondary_eirp_dbm)
            throw PlanError("node " + nd.node_id + " exceeds the regulatory power cap");
        node_by_id[nd.node_id] = &nd;
    }
    std::map<std::string, std::vector<int>> assigned;
    for (const auto& la : assignment.assigned) assigned[la.link_id] = la.channels;
    std::map<std::string, std::string> unassigned_reason;
    for (const auto& [id, reason] : assignment.unassigned) unassigned_reason[id] = reason;

    PlanReport rep;
    rep.profile_name = profile.name;
    rep.nodes = topo.nodes;
    rep.unreachable = topo.unreachable;
    rep.assignment = assignment;

    const double ref_f = 0.5 * (cfg.band_low_mhz + cfg.band_high_mhz);
    std::map<std::string, const LinkPlan*> uplink_of;  // child -> link
    for (const auto& l : topo.links) {
        LinkPlan lp = l;
        const NodeSpec& a = *node_by_id.at(lp.from_node);
        const NodeSpec& b = *node_by_id.at(lp.to_node);
        auto it = assigned.find(lp.link_id);
        double f = ref_f;
        if (it != assigned.end() && !it->second.empty()) {
            lp.channels = it->second;
            f = 0.5 * (cfg.channel(lp.channels.front()).low_mhz +
                       cfg.channel(lp.channels.back()).high_mhz);
        }
        lp.predicted_snr_db = predict_link_snr_db(a, b, f, lp.bandwidth_mhz, plp);
        if (lp.channels.empty()) {
            auto rit = unassigned_reason.find(lp.link_id);
            lp.unassigned_reason =
                rit != unassigned_reason.end() ? rit->second : "no channel assignment";
            lp.predicted_throughput_mbps = 0.0;
        } else {
            lp.predicted_throughput_mbps =
                link_throughput_mbps(lp.predicted_snr_db, lp.bandwidth_mhz, profile);
        }
        rep.links.push_back(lp);
    }
    for (const auto& l : rep.links) uplink_of[l.to_node] = &l;

    for (const auto& nd : rep.nodes) {
        if (nd.role == NodeRole::PoP || !uplink_of.count(nd.node_id)) continue;
        NodeThroughput nt;
        nt.node_id = nd.node_id;
        nt.bottleneck_mbps = std::numeric_limits<double>::infinity();
        std::vector<std::string> rev;
        std::string cur = nd.node_id;
        while (uplink_of.count(cur)) {
            const LinkPlan* l = uplink_of.at(cur);
            nt.bottleneck_mbps = std::min(nt.bottleneck_mbps, l->predicted_throughput_mbps);
            rev.push_back(cur);
            cur = l->from_node;
        }
        rev.push_back(cur);  // the PoP
        nt.path.assign(rev.rbegin(), rev.rend());
        if (!std::isfinite(nt.bottleneck_mbps)) nt.bottleneck_mbps = 0.0;
        rep.node_throughputs.push_back(std::move(nt));
    }
    return rep;
}

inline nlohmann::ordered_json plan_report_to_json(const PlanReport& rep) {
    nlohmann::ordered_json j;
    j["name"] = rep.name;
    j["profile"] = rep.profile_name;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& nd : rep.nodes) {
        nodes.push_back({{"id", nd.node_id},
                         {"role", to_string(nd.role)},
                         {"lat", nd.location.lat_deg},
                         {"lon", nd.location.lon_deg},
                         {"heightM", nd.antenna_height_m},
                         {"gainDbi", nd.antenna_gain_dbi},
                         {"txPowerDbm", nd.tx_power_dbm},
                         {"bandwidthMhz", nd.bandwidth_mhz}});
    }
    j["nodes"] = std::move(nodes);
    auto links = nlohmann::ordered_json::array();
    for (const auto& l : rep.links) {
        nlohmann::ordered_json lj{{"id", l.link_id},
                                  {"from", l.from_node},
                                  {"to", l.to_node},
                                  {"distanceKm", l.distance_km},
                                  {"channels", l.channels},
                                  {"bandwidthMhz", l.bandwidth_mhz},
                                  {"snrDb", l.predicted_snr_db},
                                  {"throughputMbps", l.predicted_throughput_mbps},
                                  {"hopDepth", l.hop_depth}};
        if (!l.unassigned_reason.empty()) lj["unassignedReason"] = l.unassigned_reason;
        links.push_back(std::move(lj));
    }
    j["links"] = std::move(links);
    auto nts = nlohmann::ordered_json::array();
    for (const auto& nt : rep.node_throughputs)
        nts.push_back({{"node", nt.node_id},
                       {"bottleneckMbps", nt.bottleneck_mbps},
                       {"path", nt.path}});
    j["nodeThroughput"] = std::move(nts);
    auto unreach = nlohmann::ordered_json::array();
    for (const auto& [id, reason] : rep.unreachable)
        unreach.push_back({{"node", id}, {"reason", reason}});
    j["unreachable"] = std::move(unreach);
    auto un = nlohmann::ordered_json::array();
    for (const auto& [id, reason] : rep.assignment.unassigned)
        un.push_back({{"id", id}, {"reason", reason}});
    j["unassignedLinks"] = std::move(un);
    return j;
}

inline void plan_report_to_csv(const PlanReport& rep, std::ostream& os) {
    os << "link_id,from,to,distance_km,channels,bandwidth_mhz,snr_db,throughput_mbps,hop_depth\n";
    char buf[128];
    for (const auto& l : rep.links) {
        std::string chs;
        for (std::size_t i = 0; i < l.channels.size(); ++i) {
            if (i) chs += ';';
            chs += std::to_string(l.channels[i]);
        }
        std::snprintf(buf, sizeof(buf), ",%.4f,%s,%.1f,%.3f,%.3f,%d\n", l.distance_km,
                      chs.c_str(), l.bandwidth_mhz, l.predicted_snr_db,
                      l.predicted_throughput_mbps, l.hop_depth);
        os << l.link_id << ',' << l.from_node << ',' << l.to_node << buf;
    }
}

/// Scenario file: nodes plus planning parameters.
struct Scenario {
    std::string name;
    std::string profile_name = "802.11af";
    double max_link_km = 8.0;
    double interference_radius_km = 10.0;
    std::vector<NodeSpec> nodes;

    static Scenario from_json(const nlohmann::json& j) {
        Scenario s;
        s.name = j.value("name", "");
        s.profile_name = j.value("profile", "802.11af");
        s.max_link_km = j.value("maxLinkKm", 8.0);
        s.interference_radius_km = j.value("interferenceRadiusKm", 10.0);
        if (!j.contains("nodes") || !j.at("nodes").is_array())
            throw PlanError("scenario needs a nodes array");
        for (const auto& nj : j.at("nodes")) {
            NodeSpec nd;
            nd.node_id = nj.at("id").get<std::string>();
            nd.role = node_role_from_string(nj.at("role").get<std::string>());
            nd.location = GeoPoint{nj.at("lat").get<double>(), nj.at("lon").get<double>()};
            nd.antenna_height_m = nj.value("heightM", nd.role == NodeRole::Client ? 5.0 : 30.0);
            nd.antenna_gain_dbi = nj.value("gainDbi", 8.0);
            nd.tx_power_dbm = nj.value("txPowerDbm", 27.0);
            nd.bandwidth_mhz = nj.value("bandwidthMhz", 8.0);
            s.nodes.push_back(std::move(nd));
        }
        return s;
    }
};

/// Full pipeline: topology, per-link availability at both endpoints,
/// conflict graph, channel assignment, link evaluation.
inline PlanReport plan_scenario(const Scenario& sc, const AvailabilityEngine& engine,
                                const PathLossParams& plp) {
    auto profile = phy_profile_by_name(sc.profile_name);
    if (!profile) throw PlanError("unknown phy profile: " + sc.profile_name);
    const auto& cfg = engine.config();
    const double ref_f = 0.5 * (cfg.band_low_mhz + cfg.band_high_mhz);
    Topology topo = build_topology(sc.nodes, sc.max_link_km, plp, *profile, ref_f);

    std::map<std::string, const NodeSpec*> node_by_id;
    for (const auto& nd : topo.nodes) node_by_id[nd.node_id] = &nd;

    auto available_set = [&](const GeoPoint& p) {
        std::set<int> out;
        for (const auto& e : engine.available_channels(p).entries)
            if (e.available) out.insert(e.channel_index);
        return out;
    };

    std::vector<LinkRequest> requests;
    std::map<std::string, std::set<int>> link_availability;
    for (const auto& l : topo.links) {
        LinkRequest r;
        r.link_id = l.link_id;
        r.endpoint_a = node_by_id.at(l.from_node)->location;
        r.endpoint_b = node_by_id.at(l.to_node)->location;
        r.requested_bandwidth_mhz = l.bandwidth_mhz;
        r.operator_id = sc.name;
        requests.push_back(r);
        auto av_a = available_set(r.endpoint_a);
        auto av_b = available_set(r.endpoint_b);
        std::set<int> both;
        std::set_intersection(av_a.begin(), av_a.end(), av_b.begin(), av_b.end(),
                              std::inserter(both, both.begin()));
        link_availability[l.link_id] = std::move(both);
    }

    ConflictGraph graph = build_conflict_graph(std::move(requests), sc.interference_radius_km);
    Assignment assignment = assign_channels(graph, link_availability, cfg);
    PlanReport rep = evaluate_plan(topo, assignment, cfg, plp, *profile);
    rep.name = sc.name;
    return rep;
}

}  // namespace tvws

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvws/channels.hpp"
#include "tvws/geo.hpp"

namespace tvws {

struct LinkRequest {
    std::string link_id;
    GeoPoint endpoint_a;
    GeoPoint endpoint_b;
    double requested_bandwidth_mhz = 8.0;
    std::string operator_id;

    void validate() const {
        if (link_id.empty()) throw std::invalid_argument("link request needs an id");
        require_valid(endpoint_a);
        require_valid(endpoint_b);
        if (endpoint_a.lat_deg == endpoint_b.lat_deg && endpoint_a.lon_deg == endpoint_b.lon_deg)
            throw std::invalid_argument("link endpoints must be distinct: " + link_id);
        const double bw = requested_bandwidth_mhz;
        if (bw != 5.0 && bw != 8.0 && bw != 10.0 && bw != 20.0)
            throw std::invalid_argument("bandwidth must be one of 5, 8, 10, 20 MHz: " + link_id);
    }

    /// 8 MHz channels needed to carry the requested bandwidth.
    int channel_span() const {
        return static_cast<int>((requested_bandwidth_mhz + kChannelWidthMhz - 1.0) /
                                kChannelWidthMhz);
    }
};

/// Links as vertices, potential mutual interference as undirected edges.
/// Vertices are kept sorted by link id.
class ConflictGraph {
public:
    ConflictGraph() = default;

    explicit ConflictGraph(std::vector<LinkRequest> requests)
        : requests_(std::move(requests)), adj_(requests_.size()) {
        for (const auto& r : requests_) r.validate();
        std::sort(requests_.begin(), requests_.end(),
                  [](const LinkRequest& a, const LinkRequest& b) { return a.link_id < b.link_id; });
        for (std::size_t i = 1; i < requests_.size(); ++i)
            if (requests_[i].link_id == requests_[i - 1].link_id)
                throw std::invalid_argument("duplicate link id: " + requests_[i].link_id);
    }

    void add_edge(std::size_t i, std::size_t j) {
        if (i == j) return;
        adj_[i].insert(j);
        adj_[j].insert(i);
    }

    const std::vector<LinkRequest>& requests() const { return requests_; }
    const std::set<std::size_t>& neighbors(std::size_t i) const { return adj_.at(i); }
    std::size_t degree(std::size_t i) const { return adj_.at(i).size(); }
    std::size_t size() const { return requests_.size(); }

    bool has_edge(std::size_t i, std::size_t j) const { return adj_.at(i).count(j) > 0; }

    std::size_t max_degree() const {
        std::size_t d = 0;
        for (std::size_t i = 0; i < size(); ++i) d = std::max(d, degree(i));
        return d;
    }

private:
    std::vector<LinkRequest> requests_;
    std::vector<std::set<std::size_t>> adj_;
};

/// Two links conflict when any pair of their endpoints is closer than the
/// interference radius.
inline ConflictGraph build_conflict_graph(std::vector<LinkRequest> requests,
                                          double interference_radius_km) {
    if (!(interference_radius_km > 0.0))
        throw std::invalid_argument("interference radius must be positive");
    ConflictGraph g(std::move(requests));
    const auto& reqs = g.requests();
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        for (std::size_t j = i + 1; j < reqs.size(); ++j) {
            const double d = std::min(
                std::min(haversine_km(reqs[i].endpoint_a, reqs[j].endpoint_a),
                         haversine_km(reqs[i].endpoint_a, reqs[j].endpoint_b)),
                std::min(haversine_km(reqs[i].endpoint_b, reqs[j].endpoint_a),
                         haversine_km(reqs[i].endpoint_b, reqs[j].endpoint_b)));
            if (d < interference_radius_km) g.add_edge(i, j);
        }
    }
    return g;
}

struct LinkAssignment {
    std::string link_id;
    std::vector<int> channels;  // contiguous, ascending
    double eirp_dbm = 0.0;
};

struct Assignment {
    std::vector<LinkAssignment> assigned;                       // by link id
    std::vector<std::pair<std::string, std::string>> unassigned;  // (link id, reason)
};

/// Greedy colouring in order of decreasing conflict degree (ties by link id
/// ascending). Each link takes the lowest-index contiguous block of
/// channels that is available at both of its endpoints and unused by
/// already-coloured neighbours. Links that cannot be placed are reported
/// with a reason; infeasibility is data, not failure.
inline Assignment assign_channels(const ConflictGraph& g,
                                  const std::map<std::string, std::set<int>>& availability,
                                  const RegulatoryConfig& cfg) {
    const auto& reqs = g.requests();
    std::vector<std::size_t> order(reqs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
        return reqs[a].link_id < reqs[b].link_id;
    });

    std::vector<std::vector<int>> chosen(reqs.size());
    Assignment out;
    for (std::size_t v : order) {
        const auto& req = reqs[v];
        const int span = req.channel_span();
        auto ait = availability.find(req.link_id);
        const std::set<int> avail = ait == availability.end() ? std::set<int>{} : ait->second;

        std::set<int> taken;
        for (std::size_t u : g.neighbors(v))
            taken.insert(chosen[u].begin(), chosen[u].end());

        bool any_block_available = false;
        std::vector<int> placed;
        for (int s = 1; s + span - 1 <= cfg.channel_count && placed.empty(); ++s) {
            bool block_ok = true, block_free = true;
            for (int c = s; c < s + span; ++c) {
                if (!avail.count(c)) block_ok = false;
                if (taken.count(c)) block_free = false;
            }
            if (!block_ok) continue;
            any_block_available = true;
            if (!block_free) continue;
            placed.resize(static_cast<std::size_t>(span));
            for (int c = 0; c < span; ++c) placed[static_cast<std::size_t>(c)] = s + c;
        }

        if (placed.empty()) {
            const char* reason = !any_block_available
                                     ? "no channel block available at both endpoints"
                                     : "all available channel blocks held by conflicting links";
            out.unassigned.emplace_back(req.link_id, reason);
            continue;
        }
        chosen[v] = placed;
        out.assigned.push_back({req.link_id, std::move(placed), cfg.max_secondary_eirp_dbm});
    }

    std::sort(out.assigned.begin(), out.assigned.end(),
              [](const LinkAssignment& a, const LinkAssignment& b) { return a.link_id < b.link_id; });
    std::sort(out.unassigned.begin(), out.unassigned.end());
    return out;
}

/// Checks the proper-colouring invariant: no edge joins two links whose
/// channel sets intersect.
inline bool is_proper_coloring(const ConflictGraph& g, const Assignment& a) {
    std::map<std::string, std::set<int>> by_id;
    for (const auto& la : a.assigned) by_id[la.link_id] = {la.channels.begin(), la.channels.end()};
    const auto& reqs = g.requests();
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j : g.neighbors(i)) {
            if (j <= i) continue;
            auto ai = by_id.find(reqs[i].link_id);
            auto aj = by_id.find(reqs[j].link_id);
            if (ai == by_id.end() || aj == by_id.end()) continue;
            for (int c : ai->second)
                if (aj->second.count(c)) return false;
        }
    }
    return true;
}

inline nlohmann::ordered_json assignment_to_json(const ConflictGraph& g, const Assignment& a,
                                                 double interference_radius_km) {
    nlohmann::ordered_json j;
    j["interferenceRadiusKm"] = interference_radius_km;
    auto edges = nlohmann::ordered_json::array();
    const auto& reqs = g.requests();
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t k : g.neighbors(i))
            if (i < k) edges.push_back({reqs[i].link_id, reqs[k].link_id});
    j["edges"] = std::move(edges);
    auto assigned = nlohmann::ordered_json::array();
    for (const auto& la : a.assigned) {
        assigned.push_back({{"id", la.link_id}, {"channels", la.channels},
                            {"eirpDbm", la.eirp_dbm}});
    }
    j["assigned"] = std::move(assigned);
    auto un = nlohmann::ordered_json::array();
    for (const auto& [id, reason] : a.unassigned) un.push_back({{"id", id}, {"reason", reason}});
    j["unassigned"] = std::move(un);
    return j;
}

}  // namespace tvws

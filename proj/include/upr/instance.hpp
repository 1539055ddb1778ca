#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace upr {

using NodeId = int;
using ArcId = int;

struct NodeData {
    int storage = 0;  // b_v, active packets a node may hold
};

struct ArcData {
    NodeId tail = 0;
    NodeId head = 0;
    int transit = 0;     // tau_a
    int throughput = 1;  // u_a, simultaneous departures
};

struct Commodity {
    int id = 0;
    NodeId origin = 0;
    NodeId dest = 0;
};

struct InstanceMeta {
    std::string generator;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();
};

/// Flat network plus packet set and horizon. Immutable once constructed;
/// adjacency lists are built by the constructor.
class Instance {
public:
    Instance() = default;
    Instance(std::vector<NodeData> nodes, std::vector<ArcData> arcs,
             std::vector<Commodity> commodities, int horizon, InstanceMeta meta = {});

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_arcs() const { return static_cast<int>(arcs_.size()); }
    int num_commodities() const { return static_cast<int>(commodities_.size()); }
    int horizon() const { return horizon_; }

    const std::vector<NodeData>& nodes() const { return nodes_; }
    const std::vector<ArcData>& arcs() const { return arcs_; }
    const std::vector<Commodity>& commodities() const { return commodities_; }
    const InstanceMeta& meta() const { return meta_; }

    const NodeData& node(NodeId v) const { return nodes_.at(v); }
    const ArcData& arc(ArcId a) const { return arcs_.at(a); }
    const Commodity& commodity(int k) const { return commodities_.at(k); }

    const std::vector<ArcId>& out_arcs(NodeId v) const { return out_.at(v); }
    const std::vector<ArcId>& in_arcs(NodeId v) const { return in_.at(v); }

    bool is_valid_node(NodeId v) const { return v >= 0 && v < num_nodes(); }

    /// True when commodity index k is active at v, i.e. v is neither its origin nor its destination.
    bool is_active(int k, NodeId v) const {
        const auto& c = commodities_[k];
        return c.origin != v && c.dest != v;
    }

    bool all_transits_positive() const;

    Instance with_horizon(int horizon) const;
    Instance with_meta(InstanceMeta meta) const;

private:
    std::vector<NodeData> nodes_;
    std::vector<ArcData> arcs_;
    std::vector<Commodity> commodities_;
    int horizon_ = 1;
    InstanceMeta meta_;
    std::vector<std::vector<ArcId>> out_;
    std::vector<std::vector<ArcId>> in_;
};

enum class InstanceIssue {
    bad_node_reference,
    self_loop,
    negative_transit,
    nonpositive_throughput,
    negative_storage,
    bad_horizon,
    trivial_commodity,
    duplicate_commodity_id,
    destination_unreachable,
    horizon_below_shortest_path,
};

struct InstanceViolation {
    InstanceIssue issue;
    std::string message;
};

std::string to_string(InstanceIssue issue);

/// Structural checks. An empty result means the instance passed.
std::vector<InstanceViolation> validate(const Instance& inst);

/// Ids of the commodities that count toward storage at v.
std::vector<int> active_commodities(const Instance& inst, NodeId v);

struct PathLength {
    int transit = 0;
    int hops = 0;
};

/// Minimum total transit of a directed s-t path (ties broken by fewer hops);
/// nullopt when t is unreachable.
std::optional<PathLength> shortest_transit(const Instance& inst, NodeId s, NodeId t);

/// Arcs of a path attaining shortest_transit, in travel order.
std::optional<std::vector<ArcId>> shortest_path_arcs(const Instance& inst, NodeId s, NodeId t);

/// Minimum hop count of a directed s-t path, independent of transit times.
std::optional<int> min_hops(const Instance& inst, NodeId s, NodeId t);

/// Transit distances from every node to `target` (reverse Dijkstra). Unreachable nodes get -1.
std::vector<int> transit_to(const Instance& inst, NodeId target);

/// Transit distances from `source` to every node. Unreachable nodes get -1.
std::vector<int> transit_from(const Instance& inst, NodeId source);

struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// |A| * k / sum of throughputs, reduced.
Ratio capacity_ratio(const Instance& inst);

nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& doc);
Instance read_instance(const std::string& path);
void write_instance(const Instance& inst, const std::string& path);
std::string dump_instance(const Instance& inst);

}  // namespace upr

#include "upr/instance.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace upr {

Instance::Instance(std::vector<NodeData> nodes, std::vector<ArcData> arcs,
                   std::vector<Commodity> commodities, int horizon, InstanceMeta meta)
    : nodes_(std::move(nodes)),
      arcs_(std::move(arcs)),
      commodities_(std::move(commodities)),
      horizon_(horizon),
      meta_(std::move(meta)),
      out_(nodes_.size()),
      in_(nodes_.size()) {
    for (ArcId a = 0; a < num_arcs(); ++a) {
        const auto& arc = arcs_[a];
        // Dangling references are reported by validate(); keep them out of adjacency.
        if (!is_valid_node(arc.tail) || !is_valid_node(arc.head)) continue;
        out_[arc.tail].push_back(a);
        in_[arc.head].push_back(a);
    }
}

bool Instance::all_transits_positive() const {
    return std::all_of(arcs_.begin(), arcs_.end(), [](const ArcData& a) { return a.transit >= 1; });
}

Instance Instance::with_horizon(int horizon) const {
    return Instance(nodes_, arcs_, commodities_, horizon, meta_);
}

Instance Instance::with_meta(InstanceMeta meta) const {
    return Instance(nodes_, arcs_, commodities_, horizon_, std::move(meta));
}

std::string to_string(InstanceIssue issue) {
    switch (issue) {
        case InstanceIssue::bad_node_reference: return "bad node reference";
        case InstanceIssue::self_loop: return "self loop";
        case InstanceIssue::negative_transit: return "negative transit";
        case InstanceIssue::nonpositive_throughput: return "nonpositive throughput";
        case InstanceIssue::negative_storage: return "negative storage";
        case InstanceIssue::bad_horizon: return "bad horizon";
        case InstanceIssue::trivial_commodity: return "origin equals destination";
        case InstanceIssue::duplicate_commodity_id: return "duplicate commodity id";
        case InstanceIssue::destination_unreachable: return "destination unreachable";
        case InstanceIssue::horizon_below_shortest_path: return "horizon below shortest path";
    }
    return "unknown";
}

std::vector<InstanceViolation> validate(const Instance& inst) {
    std::vector<InstanceViolation> out;
    auto report = [&out](InstanceIssue issue, std::string detail) {
        out.push_back({issue, to_string(issue) + ": " + std::move(detail)});
    };

    if (inst.horizon() < 1) report(InstanceIssue::bad_horizon, "T = " + std::to_string(inst.horizon()));
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        if (inst.node(v).storage < 0)
            report(InstanceIssue::negative_storage, "node " + std::to_string(v));
    }
    bool arcs_ok = true;
    for (ArcId a = 0; a < inst.num_arcs(); ++a) {
        const auto& arc = inst.arc(a);
        const auto name = "arc " + std::to_string(a);
        if (!inst.is_valid_node(arc.tail) || !inst.is_valid_node(arc.head)) {
            report(InstanceIssue::bad_node_reference, name);
            arcs_ok = false;
            continue;
        }
        if (arc.tail == arc.head) report(InstanceIssue::self_loop, name);
        if (arc.transit < 0) {
            report(InstanceIssue::negative_transit, name);
            arcs_ok = false;
        }
        if (arc.throughput < 1) report(InstanceIssue::nonpositive_throughput, name);
    }

    std::set<int> ids;
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& c = inst.commodity(k);
        const auto name = "commodity " + std::to_string(c.id);
        if (!ids.insert(c.id).second) report(InstanceIssue::duplicate_commodity_id, name);
        if (!inst.is_valid_node(c.origin) || !inst.is_valid_node(c.dest)) {
            report(InstanceIssue::bad_node_reference, name);
            continue;
        }
        if (c.origin == c.dest) {
            report(InstanceIssue::trivial_commodity, name);
            continue;
        }
        if (!arcs_ok) continue;
        const auto len = shortest_transit(inst, c.origin, c.dest);
        if (!len) {
            report(InstanceIssue::destination_unreachable, name);
        } else if (len->transit > inst.horizon()) {
            report(InstanceIssue::horizon_below_shortest_path,
                   name + " needs " + std::to_string(len->transit) + " > T = " +
                       std::to_string(inst.horizon()));
        }
    }
    return out;
}

std::vector<int> active_commodities(const Instance& inst, NodeId v) {
    if (!inst.is_valid_node(v)) throw std::out_of_range("invalid node id " + std::to_string(v));
    std::vector<int> ids;
    for (int k = 0; k < inst.num_commodities(); ++k) {
        if (inst.is_active(k, v)) ids.push_back(inst.commodity(k).id);
    }
    return ids;
}

namespace {

// Lexicographic (transit, hops) Dijkstra; `reverse` walks arcs backwards.
std::vector<PathLength> dijkstra(const Instance& inst, NodeId root, bool reverse,
                                 std::vector<ArcId>* pred = nullptr) {
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<PathLength> dist(inst.num_nodes(), PathLength{kInf, kInf});
    if (pred) pred->assign(inst.num_nodes(), -1);
    using Entry = std::tuple<int, int, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[root] = {0, 0};
    heap.emplace(0, 0, root);
    while (!heap.empty()) {
        auto [d, h, v] = heap.top();
        heap.pop();
        if (d != dist[v].transit || h != dist[v].hops) continue;
        const auto& arcs = reverse ? inst.in_arcs(v) : inst.out_arcs(v);
        for (ArcId a : arcs) {
            const auto& arc = inst.arc(a);
            NodeId w = reverse ? arc.tail : arc.head;
            PathLength cand{d + arc.transit, h + 1};
            if (std::tie(cand.transit, cand.hops) < std::tie(dist[w].transit, dist[w].hops)) {
                dist[w] = cand;
                if (pred) (*pred)[w] = a;
                heap.emplace(cand.transit, cand.hops, w);
            }
        }
    }
    return dist;
}

std::vector<int> transit_only(const std::vector<PathLength>& dist) {
    std::vector<int> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out[i] = dist[i].transit == std::numeric_limits<int>::max() ? -1 : dist[i].transit;
    }
    return out;
}

}  // namespace

std::optional<PathLength> shortest_transit(const Instance& inst, NodeId s, NodeId t) {
    if (!inst.is_valid_node(s) || !inst.is_valid_node(t)) return std::nullopt;
    const auto dist = dijkstra(inst, s, false);
    if (dist[t].transit == std::numeric_limits<int>::max()) return std::nullopt;
    return dist[t];
}

std::optional<std::vector<ArcId>> shortest_path_arcs(const Instance& inst, NodeId s, NodeId t) {
    if (!inst.is_valid_node(s) || !inst.is_valid_node(t)) return std::nullopt;
    std::vector<ArcId> pred;
    const auto dist = dijkstra(inst, s, false, &pred);
    if (dist[t].transit == std::numeric_limits<int>::max()) return std::nullopt;
    std::vector<ArcId> path;
    for (NodeId v = t; v != s; v = inst.arc(pred[v]).tail) path.push_back(pred[v]);
    std::reverse(path.begin(), path.end());
    return path;
}

std::optional<int> min_hops(const Instance& inst, NodeId s, NodeId t) {
    if (!inst.is_valid_node(s) || !inst.is_valid_node(t)) return std::nullopt;
    std::vector<int> hops(inst.num_nodes(), -1);
    std::queue<NodeId> frontier;
    hops[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop();
        for (ArcId a : inst.out_arcs(v)) {
            NodeId w = inst.arc(a).head;
            if (hops[w] < 0) {
                hops[w] = hops[v] + 1;
                frontier.push(w);
            }
        }
    }
    if (hops[t] < 0) return std::nullopt;
    return hops[t];
}

std::vector<int> transit_to(const Instance& inst, NodeId target) {
    return transit_only(dijkstra(inst, target, true));
}

std::vector<int> transit_from(const Instance& inst, NodeId source) {
    return transit_only(dijkstra(inst, source, false));
}

Ratio capacity_ratio(const Instance& inst) {
    if (inst.num_arcs() == 0) throw std::invalid_argument("capacity ratio of an empty arc set");
    std::int64_t total = 0;
    for (const auto& arc : inst.arcs()) total += arc.throughput;
    if (total <= 0) throw std::invalid_argument("capacity ratio with nonpositive total throughput");
    std::int64_t num = static_cast<std::int64_t>(inst.num_arcs()) * inst.num_commodities();
    std::int64_t g = std::gcd(num, total);
    if (g == 0) g = 1;
    return {num / g, total / g};
}

nlohmann::json to_json(const Instance& inst) {
    using nlohmann::json;
    json doc;
    json nodes = json::array();
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        nodes.push_back({{"id", v}, {"storage", inst.node(v).storage}});
    }
    json arcs = json::array();
    for (const auto& a : inst.arcs()) {
        arcs.push_back({{"tail", a.tail}, {"head", a.head}, {"transit", a.transit},
                        {"throughput", a.throughput}});
    }
    json commodities = json::array();
    for (const auto& c : inst.commodities()) {
        commodities.push_back({{"id", c.id}, {"origin", c.origin}, {"dest", c.dest}});
    }
    doc["nodes"] = std::move(nodes);
    doc["arcs"] = std::move(arcs);
    doc["commodities"] = std::move(commodities);
    doc["horizon"] = inst.horizon();
    doc["meta"] = {{"generator", inst.meta().generator},
                   {"seed", inst.meta().seed},
                   {"params", inst.meta().params}};
    return doc;
}

namespace {

int int_field(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key)) throw std::runtime_error(std::string("instance: missing field '") + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw std::runtime_error(std::string("instance: field '") + key + "' must be an integer");
    return v.get<int>();
}

}  // namespace

Instance instance_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::runtime_error("instance: document must be an object");
    const auto& jnodes = doc.at("nodes");
    std::vector<NodeData> nodes(jnodes.size());
    std::vector<bool> seen(jnodes.size(), false);
    for (const auto& jn : jnodes) {
        int id = int_field(jn, "id");
        if (id < 0 || id >= static_cast<int>(nodes.size()) || seen[id])
            throw std::runtime_error("instance: node ids must be dense 0..n-1");
        seen[id] = true;
        nodes[id].storage = int_field(jn, "storage");
    }
    std::vector<ArcData> arcs;
    for (const auto& ja : doc.at("arcs")) {
        arcs.push_back({int_field(ja, "tail"), int_field(ja, "head"), int_field(ja, "transit"),
                        int_field(ja, "throughput")});
    }
    std::vector<Commodity> commodities;
    for (const auto& jc : doc.at("commodities")) {
        commodities.push_back({int_field(jc, "id"), int_field(jc, "origin"), int_field(jc, "dest")});
    }
    InstanceMeta meta;
    if (doc.contains("meta")) {
        const auto& jm = doc.at("meta");
        meta.generator = jm.value("generator", std::string{});
        meta.seed = jm.value("seed", std::uint64_t{0});
        if (jm.contains("params")) meta.params = jm.at("params");
    }
    return Instance(std::move(nodes), std::move(arcs), std::move(commodities), int_field(doc, "horizon"),
                    std::move(meta));
}

std::string dump_instance(const Instance& inst) { return to_json(inst).dump(2) + "\n"; }

Instance read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path);
    return instance_from_json(nlohmann::json::parse(in));
}

void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file " + path);
    out << dump_instance(inst);
}

}  // namespace upr

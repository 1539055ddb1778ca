#include "upr/expand.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "upr/schedule.hpp"

namespace upr {

namespace {

const std::vector<int> kEmpty;

std::string node_str(NodeId v, int t) {
    return "(" + std::to_string(v) + "," + std::to_string(t) + ")";
}

}  // namespace

bool PartialNetwork::contains(NodeId v, int t) const { return node_index(v, t) >= 0; }

int PartialNetwork::node_index(NodeId v, int t) const {
    if (v < 0 || v >= num_base_nodes() || t < 0 || t > horizon_) return -1;
    return slot_[v * (horizon_ + 1) + t];
}

int PartialNetwork::next_time(NodeId v, int t) const {
    if (t >= horizon_) throw std::out_of_range("next_time: t = " + std::to_string(t) + " is not below T");
    const auto& ts = times_.at(v);
    return *std::upper_bound(ts.begin(), ts.end(), t);
}

int PartialNetwork::gap(NodeId v, int t) const { return next_time(v, t) - t; }

int PartialNetwork::gap_or_one(NodeId v, int t) const { return t >= horizon_ ? 1 : gap(v, t); }

int PartialNetwork::latest_at_or_before(NodeId v, int t) const {
    if (t < 0) throw std::out_of_range("latest_at_or_before: negative time");
    const auto& ts = times_.at(v);
    return *(std::upper_bound(ts.begin(), ts.end(), t) - 1);
}

int PartialNetwork::movement_index(ArcId a, int t) const {
    if (a < 0 || a >= num_arcs_ || t < 0 || t > horizon_) return -1;
    return move_slot_[a * (horizon_ + 1) + t];
}

int PartialNetwork::holdover_index(NodeId v, int t) const {
    if (v < 0 || v >= num_base_nodes() || t < 0 || t > horizon_) return -1;
    return hold_slot_[v * (horizon_ + 1) + t];
}

const std::vector<int>& PartialNetwork::movement_out(NodeId v, int t) const {
    int i = node_index(v, t);
    return i < 0 ? kEmpty : out_[i];
}

const std::vector<int>& PartialNetwork::movement_in(NodeId v, int t) const {
    int i = node_index(v, t);
    return i < 0 ? kEmpty : in_[i];
}

int PartialNetwork::holdover_in(NodeId v, int t) const {
    int i = node_index(v, t);
    return i < 0 ? -1 : hold_in_[i];
}

PartialNetwork build_arcs(const TimeSet& times, const Instance& inst, StorageRule rule) {
    const int T = inst.horizon();
    if (static_cast<int>(times.size()) != inst.num_nodes())
        throw std::invalid_argument("build_arcs: time set covers " + std::to_string(times.size()) +
                                    " nodes, instance has " + std::to_string(inst.num_nodes()));
    PartialNetwork net;
    net.horizon_ = T;
    net.num_arcs_ = inst.num_arcs();
    net.rule_ = rule;
    net.times_ = times;
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        auto& ts = net.times_[v];
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        if (ts.empty() || ts.front() != 0 || ts.back() != T)
            throw std::invalid_argument("build_arcs: node " + std::to_string(v) + " needs copies at 0 and T only within [0,T]");
    }

    net.slot_.assign(static_cast<std::size_t>(inst.num_nodes()) * (T + 1), -1);
    net.hold_slot_.assign(net.slot_.size(), -1);
    net.move_slot_.assign(static_cast<std::size_t>(inst.num_arcs()) * (T + 1), -1);
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        for (int t : net.times_[v]) {
            net.slot_[v * (T + 1) + t] = static_cast<int>(net.index_to_node_.size());
            net.index_to_node_.push_back({v, t});
        }
    }
    net.num_timed_nodes_ = static_cast<int>(net.index_to_node_.size());
    net.out_.assign(net.num_timed_nodes_, {});
    net.in_.assign(net.num_timed_nodes_, {});
    net.hold_in_.assign(net.num_timed_nodes_, -1);

    for (const auto& [v, t] : net.index_to_node_) {
        for (ArcId a : inst.out_arcs(v)) {
            const auto& arc = inst.arc(a);
            if (t + arc.transit > T) continue;
            int head_time = net.latest_at_or_before(arc.head, t + arc.transit);
            int idx = net.num_movement();
            net.movement_.push_back({{v, t}, {arc.head, head_time}, ArcKind::movement, a,
                                     arc.throughput * net.gap_or_one(v, t)});
            net.move_slot_[a * (T + 1) + t] = idx;
            net.out_[net.node_index(v, t)].push_back(idx);
            net.in_[net.node_index(arc.head, head_time)].push_back(idx);
        }
    }

    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        const auto& ts = net.times_[v];
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            int t = ts[i];
            int cap = rule == StorageRule::tight ? storage_bound_tight(net, inst, v, t)
                                                 : storage_bound_relaxed(net, inst, v, t);
            int idx = net.num_holdover();
            net.holdover_.push_back({{v, t}, {v, ts[i + 1]}, ArcKind::holdover, -1, cap});
            net.hold_slot_[v * (T + 1) + t] = idx;
            net.hold_in_[net.node_index(v, ts[i + 1])] = idx;
        }
    }
    return net;
}

TimeSet full_times(const Instance& inst) {
    std::vector<int> all(inst.horizon() + 1);
    for (int t = 0; t <= inst.horizon(); ++t) all[t] = t;
    return TimeSet(inst.num_nodes(), all);
}

TimeSet initial_times(const Instance& inst) {
    return TimeSet(inst.num_nodes(), std::vector<int>{0, inst.horizon()});
}

PartialNetwork full_expand(const Instance& inst, StorageRule rule) {
    return build_arcs(full_times(inst), inst, rule);
}

PartialNetwork initial_partial(const Instance& inst, StorageRule rule) {
    return build_arcs(initial_times(inst), inst, rule);
}

int insert_times(TimeSet& times, const std::vector<TimedNode>& nodes) {
    int added = 0;
    for (const auto& [v, t] : nodes) {
        auto& ts = times.at(v);
        if (t < 0 || (!ts.empty() && t > ts.back()))
            throw std::out_of_range("insert_times: " + node_str(v, t) + " outside [0,T]");
        auto it = std::lower_bound(ts.begin(), ts.end(), t);
        if (it != ts.end() && *it == t) continue;
        ts.insert(it, t);
        ++added;
    }
    return added;
}

TimeSet make_time_set(const Instance& inst, const std::vector<TimedNode>& extra) {
    TimeSet times = initial_times(inst);
    insert_times(times, extra);
    return times;
}

int count_timed_nodes(const TimeSet& times) {
    int n = 0;
    for (const auto& ts : times) n += static_cast<int>(ts.size());
    return n;
}

namespace {

void require_holdover_tail(const PartialNetwork& net, NodeId v, int t, const char* who) {
    if (!net.contains(v, t)) throw std::invalid_argument(std::string(who) + ": " + node_str(v, t) + " not included");
    if (t >= net.horizon()) throw std::invalid_argument(std::string(who) + ": no holdover leaves time T");
}

}  // namespace

std::vector<SlackTerm> slack_terms(const PartialNetwork& net, const Instance& inst, NodeId v, int t) {
    require_holdover_tail(net, v, t, "slack_terms");
    std::vector<SlackTerm> terms;
    for (ArcId a : inst.in_arcs(v)) {
        int dep = t - inst.arc(a).transit;
        if (dep >= 0) terms.push_back({a, dep});
    }
    for (int e : net.movement_in(v, t)) {
        const auto& arc = net.movement(e);
        terms.push_back({arc.base_arc, arc.from.time});
    }
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

int storage_slack(const PartialNetwork& net, const Instance& inst, NodeId v, int t) {
    int total = 0;
    for (const auto& term : slack_terms(net, inst, v, t)) {
        const auto& arc = inst.arc(term.arc);
        total += arc.throughput * (net.gap_or_one(arc.tail, term.depart) - 1);
    }
    return total;
}

int storage_bound_tight(const PartialNetwork& net, const Instance& inst, NodeId v, int t) {
    require_holdover_tail(net, v, t, "storage_bound_tight");
    int b = inst.node(v).storage;
    int slack = storage_slack(net, inst, v, t);
    return net.contains(v, t + 1) ? b + slack : 2 * b + slack;
}

int storage_bound_relaxed(const PartialNetwork& net, const Instance& inst, NodeId v, int t) {
    require_holdover_tail(net, v, t, "storage_bound_relaxed");
    return net.gap(v, t) * inst.node(v).storage + storage_slack(net, inst, v, t);
}

std::optional<int> storage_bound_cir_ob(const PartialNetwork& net, const Instance& inst, NodeId v, int t,
                                        int eps) {
    require_holdover_tail(net, v, t, "storage_bound_cir_ob");
    if (eps < 1) throw std::invalid_argument("storage_bound_cir_ob: eps must be positive");
    if (inst.num_arcs() == 0) throw std::invalid_argument("storage_bound_cir_ob: empty graph is not a star");
    // The hub is the endpoint shared by every arc.
    const auto& first = inst.arc(0);
    NodeId hub = -1;
    for (NodeId cand : {first.tail, first.head}) {
        bool ok = std::all_of(inst.arcs().begin(), inst.arcs().end(),
                              [cand](const ArcData& a) { return a.tail == cand || a.head == cand; });
        if (ok) {
            hub = cand;
            break;
        }
    }
    if (hub < 0) throw std::invalid_argument("storage_bound_cir_ob: graph is not a star");
    if (v == hub) throw std::invalid_argument("storage_bound_cir_ob: v is the hub, not a client");
    if (inst.in_arcs(v).size() != 1) throw std::invalid_argument("storage_bound_cir_ob: client needs one in-arc");
    if (inst.node(v).storage != 1) throw std::invalid_argument("storage_bound_cir_ob: client storage must be 1");

    const auto& in = inst.arc(inst.in_arcs(v).front());
    int pred = t - in.transit + eps;
    bool succ_here = t + eps <= net.horizon() && net.contains(v, t + eps);
    bool succ_pred = pred < 0 || net.contains(in.tail, pred);
    if (!succ_here) return 2 + storage_slack(net, inst, v, t);
    if (succ_pred) return 1;
    return std::nullopt;
}

NetworkFlow project_mu(const PartialNetwork& net, const Instance& inst, const Schedule& sched) {
    NetworkFlow flow = NetworkFlow::zeros(net, inst.num_commodities());
    const int T = net.horizon();
    auto hold_until = [&](std::vector<double>& hold, NodeId v, int from, int to) {
        while (from < to) {
            int h = net.holdover_index(v, from);
            if (h < 0) throw std::logic_error("project_mu: missing holdover at " + node_str(v, from));
            hold[h] = 1.0;
            from = net.holdover(h).to.time;
        }
    };
    for (const auto& traj : sched.trajectories) {
        const auto& c = inst.commodity(traj.commodity);
        auto& move = flow.move[traj.commodity];
        auto& hold = flow.hold[traj.commodity];
        NodeId at = c.origin;
        int now = 0;
        for (const auto& m : traj.moves) {
            const auto& arc = inst.arc(m.arc);
            if (arc.tail != at) throw std::logic_error("project_mu: trajectory is not contiguous");
            int depart = net.latest_at_or_before(at, m.depart);
            if (depart < now) throw std::logic_error("project_mu: mapped departure precedes arrival");
            hold_until(hold, at, now, depart);
            int e = net.movement_index(m.arc, depart);
            if (e < 0) throw std::logic_error("project_mu: no timed copy of arc " + std::to_string(m.arc));
            move[e] = 1.0;
            at = arc.head;
            now = net.movement(e).to.time;
        }
        if (at != c.dest) throw std::logic_error("project_mu: trajectory does not end at its destination");
        hold_until(hold, at, now, T);
    }
    return flow;
}

std::string dump_network(const PartialNetwork& net) {
    std::ostringstream out;
    out << "horizon " << net.horizon() << "\n";
    for (NodeId v = 0; v < net.num_base_nodes(); ++v) {
        out << "node " << v << " times";
        for (int t : net.times(v)) out << ' ' << t;
        out << "\n";
    }
    for (const auto& e : net.movement_arcs()) {
        out << "move " << e.base_arc << ' ' << node_str(e.from.node, e.from.time) << "->"
            << node_str(e.to.node, e.to.time) << " cap " << e.capacity << "\n";
    }
    for (const auto& e : net.holdover_arcs()) {
        out << "hold " << node_str(e.from.node, e.from.time) << "->" << node_str(e.to.node, e.to.time)
            << " cap " << e.capacity << "\n";
    }
    return out.str();
}

std::vector<std::string> check_properties(const PartialNetwork& net, const Instance& inst) {
    std::vector<std::string> bad;
    const int T = net.horizon();
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        if (!net.contains(v, 0) || !net.contains(v, T)) bad.push_back("P1 fails at node " + std::to_string(v));
    }
    for (int i = 0; i < net.num_timed_nodes(); ++i) {
        auto [v, t] = net.timed_node(i);
        for (ArcId a : inst.out_arcs(v)) {
            const auto& arc = inst.arc(a);
            if (t + arc.transit > T) continue;
            if (net.movement_index(a, t) < 0)
                bad.push_back("P3 fails: arc " + std::to_string(a) + " has no copy at " + node_str(v, t));
        }
    }
    for (const auto& e : net.movement_arcs()) {
        const auto& arc = inst.arc(e.base_arc);
        int due = e.from.time + arc.transit;
        if (e.to.time > due) bad.push_back("P2 fails on arc from " + node_str(e.from.node, e.from.time));
        for (int t2 = e.to.time + 1; t2 <= std::min(due, T); ++t2) {
            if (net.contains(e.to.node, t2)) {
                bad.push_back("P4 fails: " + node_str(e.to.node, t2) + " skipped");
                break;
            }
        }
        if (e.capacity != arc.throughput * net.gap_or_one(e.from.node, e.from.time))
            bad.push_back("arc capacity rule fails at " + node_str(e.from.node, e.from.time));
    }
    for (const auto& e : net.holdover_arcs()) {
        auto [v, t] = e.from;
        if (e.to.node != v || e.to.time != net.next_time(v, t))
            bad.push_back("holdover at " + node_str(v, t) + " does not reach the next copy");
        int want = net.storage_rule() == StorageRule::tight ? storage_bound_tight(net, inst, v, t)
                                                            : storage_bound_relaxed(net, inst, v, t);
        if (e.capacity != want) bad.push_back("storage rule fails at " + node_str(v, t));
    }
    return bad;
}

}  // namespace upr

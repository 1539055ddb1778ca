#include "upr/models.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

namespace upr {

namespace {

std::string tag(const char* head, std::initializer_list<int> parts) {
    std::string s = head;
    s += '[';
    bool first = true;
    for (int p : parts) {
        if (!first) s += ',';
        s += std::to_string(p);
        first = false;
    }
    s += ']';
    return s;
}

struct RowBuilder {
    std::vector<int> idx;
    std::vector<double> val;
    void add(int j, double v) {
        if (j < 0 || v == 0.0) return;
        idx.push_back(j);
        val.push_back(v);
    }
    bool empty() const { return idx.empty(); }
};

// Time-indexed model over horizon H where commodity k may use arcs with arc_ok[k][a] and hold at
// nodes with node_ok[k][v].
TimeIndexedModel build_time_indexed(const Instance& inst, int H, const std::vector<std::vector<char>>& arc_ok,
                                    const std::vector<std::vector<char>>& node_ok) {
    TimeIndexedModel m;
    m.horizon = H;
    m.num_arcs = inst.num_arcs();
    m.num_nodes = inst.num_nodes();
    const int K = inst.num_commodities();
    auto& mip = m.mip;
    mip.integral_objective = true;
    m.makespan_var = mip.add_var("Tbar", VarKind::continuous, 0.0, H, 1.0);
    m.move_var.assign(K, std::vector<int>(static_cast<std::size_t>(inst.num_arcs()) * (H + 1), -1));
    m.hold_var.assign(K, std::vector<int>(static_cast<std::size_t>(inst.num_nodes()) * (H + 1), -1));

    for (int k = 0; k < K; ++k) {
        for (ArcId a = 0; a < inst.num_arcs(); ++a) {
            if (!arc_ok[k][a]) continue;
            for (int t = 0; t + inst.arc(a).transit <= H; ++t)
                m.move_var[k][a * (H + 1) + t] = mip.add_var(tag("x", {k, a, t}), VarKind::binary, 0.0, 1.0);
        }
        for (NodeId v = 0; v < inst.num_nodes(); ++v) {
            if (!node_ok[k][v]) continue;
            for (int t = 0; t < H; ++t)
                m.hold_var[k][v * (H + 1) + t] = mip.add_var(tag("h", {k, v, t}), VarKind::binary, 0.0, 1.0);
        }
    }

    for (int k = 0; k < K; ++k) {
        const auto& c = inst.commodity(k);
        RowBuilder final_row;
        for (ArcId a = 0; a < inst.num_arcs(); ++a) {
            const auto& arc = inst.arc(a);
            for (int t = 0; t + arc.transit <= H; ++t) {
                int j = m.move(k, a, t);
                if (j < 0) continue;
                int arrive = t + arc.transit;
                if (arrive > 0) {
                    mip.add_row(tag("time", {k, a, t}), {j, m.makespan_var}, {double(arrive), -1.0}, Sense::le, 0.0);
                }
                if (arc.head == c.dest) final_row.add(j, arrive);
            }
        }
        if (!final_row.empty()) {
            final_row.add(m.makespan_var, -1.0);
            mip.add_row(tag("final", {k}), std::move(final_row.idx), std::move(final_row.val), Sense::le, 0.0);
        }
        for (NodeId v = 0; v < inst.num_nodes(); ++v) {
            if (!node_ok[k][v]) continue;
            for (int t = 0; t <= H; ++t) {
                RowBuilder row;
                for (ArcId a : inst.out_arcs(v)) row.add(m.move(k, a, t), 1.0);
                row.add(m.hold(k, v, t), 1.0);
                for (ArcId a : inst.in_arcs(v)) {
                    int dep = t - inst.arc(a).transit;
                    if (dep >= 0) row.add(m.move(k, a, dep), -1.0);
                }
                if (t > 0) row.add(m.hold(k, v, t - 1), -1.0);
                double rhs = (v == c.origin && t == 0) ? 1.0 : (v == c.dest && t == H) ? -1.0 : 0.0;
                if (row.empty() && rhs == 0.0) continue;
                mip.add_row(tag("flow", {k, v, t}), std::move(row.idx), std::move(row.val), Sense::eq, rhs);
            }
        }
    }

    for (ArcId a = 0; a < inst.num_arcs(); ++a) {
        for (int t = 0; t + inst.arc(a).transit <= H; ++t) {
            RowBuilder row;
            for (int k = 0; k < K; ++k) row.add(m.move(k, a, t), 1.0);
            if (row.empty()) continue;
            mip.add_row(tag("thr", {a, t}), std::move(row.idx), std::move(row.val), Sense::le, inst.arc(a).throughput);
        }
    }
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        for (int t = 0; t < H; ++t) {
            RowBuilder row;
            for (int k = 0; k < K; ++k) {
                if (inst.is_active(k, v)) row.add(m.hold(k, v, t), 1.0);
            }
            if (row.empty()) continue;
            mip.add_row(tag("sto", {v, t}), std::move(row.idx), std::move(row.val), Sense::le, inst.node(v).storage);
        }
    }
    return m;
}

bool reaches(const Instance& inst, const std::vector<char>& arc_ok, NodeId s, NodeId t) {
    std::vector<char> seen(inst.num_nodes(), 0);
    std::queue<NodeId> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        if (v == t) return true;
        for (ArcId a : inst.out_arcs(v)) {
            NodeId w = inst.arc(a).head;
            if (arc_ok[a] && !seen[w]) {
                seen[w] = 1;
                q.push(w);
            }
        }
    }
    return false;
}

}  // namespace

int TimeIndexedModel::move(int k, ArcId a, int t) const {
    if (t < 0 || t > horizon) return -1;
    return move_var[k][a * (horizon + 1) + t];
}

int TimeIndexedModel::hold(int k, NodeId v, int t) const {
    if (t < 0 || t >= horizon) return -1;
    return hold_var[k][v * (horizon + 1) + t];
}

TimeIndexedModel build_full(const Instance& inst) {
    const int K = inst.num_commodities();
    std::vector<std::vector<char>> arc_ok(K, std::vector<char>(inst.num_arcs(), 1));
    std::vector<std::vector<char>> node_ok(K, std::vector<char>(inst.num_nodes(), 1));
    return build_time_indexed(inst, inst.horizon(), arc_ok, node_ok);
}

TimeIndexedModel build_fixed_paths(const Instance& inst, const std::vector<std::vector<ArcId>>& arc_sets,
                                   int horizon) {
    const int K = inst.num_commodities();
    if (static_cast<int>(arc_sets.size()) != K)
        throw std::invalid_argument("build_fixed_paths: one arc set per commodity required");
    if (horizon < 1 || horizon > inst.horizon())
        throw std::invalid_argument("build_fixed_paths: horizon must lie in [1, T]");
    std::vector<std::vector<char>> arc_ok(K, std::vector<char>(inst.num_arcs(), 0));
    std::vector<std::vector<char>> node_ok(K, std::vector<char>(inst.num_nodes(), 0));
    for (int k = 0; k < K; ++k) {
        const auto& c = inst.commodity(k);
        node_ok[k][c.origin] = 1;
        node_ok[k][c.dest] = 1;
        for (ArcId a : arc_sets[k]) {
            arc_ok[k].at(a) = 1;
            node_ok[k][inst.arc(a).tail] = 1;
            node_ok[k][inst.arc(a).head] = 1;
        }
        if (!reaches(inst, arc_ok[k], c.origin, c.dest))
            throw std::invalid_argument("build_fixed_paths: arc set of commodity " + std::to_string(c.id) +
                                        " has no origin-destination path");
    }
    return build_time_indexed(inst, horizon, arc_ok, node_ok);
}

PartialModel build_partial(const PartialNetwork& net, const Instance& inst) {
    if (auto bad = check_properties(net, inst); !bad.empty())
        throw std::invalid_argument("build_partial: " + bad.front());
    PartialModel m;
    const int K = inst.num_commodities();
    const int T = net.horizon();
    auto& mip = m.mip;
    mip.integral_objective = true;
    m.makespan_var = mip.add_var("Tbar", VarKind::continuous, 0.0, T, 1.0);
    m.move_var.assign(K, std::vector<int>(net.num_movement(), -1));
    m.hold_var.assign(K, std::vector<int>(net.num_holdover(), -1));
    for (int k = 0; k < K; ++k) {
        for (int e = 0; e < net.num_movement(); ++e) {
            const auto& arc = net.movement(e);
            m.move_var[k][e] = mip.add_var(tag("x", {k, arc.base_arc, arc.from.time}), VarKind::binary, 0.0, 1.0);
        }
        for (int e = 0; e < net.num_holdover(); ++e) {
            const auto& arc = net.holdover(e);
            m.hold_var[k][e] = mip.add_var(tag("h", {k, arc.from.node, arc.from.time}), VarKind::binary, 0.0, 1.0);
        }
    }

    for (int k = 0; k < K; ++k) {
        const auto& c = inst.commodity(k);
        RowBuilder final_row;
        for (int e = 0; e < net.num_movement(); ++e) {
            const auto& arc = net.movement(e);
            int due = arc.from.time + inst.arc(arc.base_arc).transit;
            int j = m.move_var[k][e];
            if (due > 0) mip.add_row(tag("time", {k, arc.base_arc, arc.from.time}), {j, m.makespan_var},
                                     {double(due), -1.0}, Sense::le, 0.0);
            if (arc.to.node == c.dest) final_row.add(j, due);
        }
        if (!final_row.empty()) {
            final_row.add(m.makespan_var, -1.0);
            mip.add_row(tag("final", {k}), std::move(final_row.idx), std::move(final_row.val), Sense::le, 0.0);
        }
        for (int i = 0; i < net.num_timed_nodes(); ++i) {
            auto [v, t] = net.timed_node(i);
            RowBuilder row;
            for (int e : net.movement_out(v, t)) row.add(m.move_var[k][e], 1.0);
            if (int h = net.holdover_index(v, t); h >= 0) row.add(m.hold_var[k][h], 1.0);
            for (int e : net.movement_in(v, t)) row.add(m.move_var[k][e], -1.0);
            if (int h = net.holdover_in(v, t); h >= 0) row.add(m.hold_var[k][h], -1.0);
            double rhs = (v == c.origin && t == 0) ? 1.0 : (v == c.dest && t == T) ? -1.0 : 0.0;
            if (row.empty() && rhs == 0.0) continue;
            mip.add_row(tag("flow", {k, v, t}), std::move(row.idx), std::move(row.val), Sense::eq, rhs);
        }
    }
    for (int e = 0; e < net.num_movement(); ++e) {
        const auto& arc = net.movement(e);
        RowBuilder row;
        for (int k = 0; k < K; ++k) row.add(m.move_var[k][e], 1.0);
        if (row.empty()) continue;
        mip.add_row(tag("thr", {arc.base_arc, arc.from.time}), std::move(row.idx), std::move(row.val), Sense::le,
                    arc.capacity);
    }
    for (int e = 0; e < net.num_holdover(); ++e) {
        const auto& arc = net.holdover(e);
        RowBuilder row;
        for (int k = 0; k < K; ++k) {
            if (inst.is_active(k, arc.from.node)) row.add(m.hold_var[k][e], 1.0);
        }
        if (row.empty()) continue;
        mip.add_row(tag("sto", {arc.from.node, arc.from.time}), std::move(row.idx), std::move(row.val), Sense::le,
                    arc.capacity);
    }
    return m;
}

Schedule extract_schedule(const Instance& inst, const TimeIndexedModel& model, const std::vector<double>& x) {
    const int H = model.horizon;
    Schedule sched;
    sched.horizon = inst.horizon();
    std::vector<char> used(x.size(), 0);
    auto take = [&](int j) {
        if (j < 0 || used[j] || x.at(j) <= 0.5) return false;
        used[j] = 1;
        return true;
    };
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& c = inst.commodity(k);
        Trajectory traj{k, {}};
        NodeId v = c.origin;
        int t = 0;
        while (!(v == c.dest && t == H)) {
            bool moved = false;
            for (ArcId a : inst.out_arcs(v)) {
                if (take(model.move(k, a, t))) {
                    traj.moves.push_back({a, t, t + inst.arc(a).transit});
                    v = inst.arc(a).head;
                    t += inst.arc(a).transit;
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            if (take(model.hold(k, v, t))) {
                ++t;
                continue;
            }
            throw std::runtime_error("extract_schedule: commodity " + std::to_string(c.id) +
                                     " has no outgoing flow at (" + std::to_string(v) + "," + std::to_string(t) + ")");
        }
        sched.trajectories.push_back(std::move(traj));
    }
    return sched;
}

NetworkFlow extract_flow(const PartialModel& model, const std::vector<double>& x) {
    NetworkFlow f;
    for (const auto& row : model.move_var) {
        std::vector<double> vals;
        for (int j : row) vals.push_back(x.at(j));
        f.move.push_back(std::move(vals));
    }
    for (const auto& row : model.hold_var) {
        std::vector<double> vals;
        for (int j : row) vals.push_back(x.at(j));
        f.hold.push_back(std::move(vals));
    }
    return f;
}

std::vector<double> point_from_flow(const PartialModel& model, const NetworkFlow& flow, double makespan) {
    std::vector<double> x(model.mip.num_vars(), 0.0);
    x[model.makespan_var] = makespan;
    for (std::size_t k = 0; k < model.move_var.size(); ++k) {
        for (std::size_t e = 0; e < model.move_var[k].size(); ++e) x[model.move_var[k][e]] = flow.move[k][e];
        for (std::size_t e = 0; e < model.hold_var[k].size(); ++e) x[model.hold_var[k][e]] = flow.hold[k][e];
    }
    return x;
}

std::vector<double> point_from_schedule(const Instance& inst, const TimeIndexedModel& model, const Schedule& sched) {
    std::vector<double> x(model.mip.num_vars(), 0.0);
    x[model.makespan_var] = makespan(sched);
    auto set = [&](int j) {
        if (j < 0) throw std::invalid_argument("point_from_schedule: schedule uses a variable the model lacks");
        x[j] = 1.0;
    };
    for (const auto& traj : sched.trajectories) {
        const auto& c = inst.commodity(traj.commodity);
        NodeId v = c.origin;
        int t = 0;
        for (const auto& mv : traj.moves) {
            for (; t < mv.depart; ++t) set(model.hold(traj.commodity, v, t));
            set(model.move(traj.commodity, mv.arc, mv.depart));
            v = inst.arc(mv.arc).head;
            t = mv.arrive;
        }
        for (; t < model.horizon; ++t) set(model.hold(traj.commodity, v, t));
    }
    return x;
}

}  // namespace upr

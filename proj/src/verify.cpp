#include "upr/verify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace upr {

std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::flow: return "flow";
        case ViolationKind::throughput: return "throughput";
        case ViolationKind::storage: return "storage";
        case ViolationKind::timing: return "timing";
        case ViolationKind::endpoint: return "endpoint";
    }
    return "flow";
}

bool VerifyReport::has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
}

std::vector<ViolationKind> VerifyReport::kinds() const {
    std::vector<ViolationKind> out;
    for (auto k : {ViolationKind::flow, ViolationKind::throughput, ViolationKind::storage, ViolationKind::timing,
                   ViolationKind::endpoint}) {
        if (has(k)) out.push_back(k);
    }
    return out;
}

VerifyReport check_schedule(const Instance& inst, const Schedule& sched) {
    VerifyReport rep;
    const int T = inst.horizon();
    const int K = inst.num_commodities();
    auto add = [&](ViolationKind kind, int k, NodeId v, ArcId a, int t, double measured, double allowed,
                   std::string msg) { rep.violations.push_back({kind, k, v, a, t, measured, allowed, std::move(msg)}); };

    std::vector<int> seen(K, 0);
    for (const auto& traj : sched.trajectories) {
        if (traj.commodity < 0 || traj.commodity >= K)
            throw std::invalid_argument("check_schedule: unknown commodity index " + std::to_string(traj.commodity));
        ++seen[traj.commodity];
        for (const auto& m : traj.moves) {
            if (m.arc < 0 || m.arc >= inst.num_arcs())
                throw std::invalid_argument("check_schedule: unknown arc " + std::to_string(m.arc));
        }
    }
    for (int k = 0; k < K; ++k) {
        if (seen[k] != 1)
            add(ViolationKind::endpoint, k, -1, -1, 0, seen[k], 1, "commodity has " + std::to_string(seen[k]) + " trajectories");
    }

    std::map<std::pair<ArcId, int>, int> departures;
    std::map<std::pair<NodeId, int>, int> stored;
    for (const auto& traj : sched.trajectories) {
        const int k = traj.commodity;
        const auto& c = inst.commodity(k);
        const auto& moves = traj.moves;
        if (moves.empty()) {
            add(ViolationKind::endpoint, k, c.origin, -1, 0, 0, 1, "packet never leaves its origin");
            continue;
        }
        if (inst.arc(moves.front().arc).tail != c.origin)
            add(ViolationKind::endpoint, k, inst.arc(moves.front().arc).tail, moves.front().arc, moves.front().depart,
                0, 0, "first move does not leave the origin");
        if (inst.arc(moves.back().arc).head != c.dest)
            add(ViolationKind::endpoint, k, inst.arc(moves.back().arc).head, moves.back().arc, moves.back().arrive, 0,
                0, "last move does not reach the destination");
        for (std::size_t i = 0; i < moves.size(); ++i) {
            const auto& m = moves[i];
            const auto& arc = inst.arc(m.arc);
            if (m.arrive != m.depart + arc.transit)
                add(ViolationKind::timing, k, -1, m.arc, m.depart, m.arrive - m.depart, arc.transit,
                    "arrival does not match transit time");
            if (m.depart < 0 || m.arrive > T || m.arrive < 0)
                add(ViolationKind::timing, k, -1, m.arc, m.depart, m.arrive, T, "move outside [0, T]");
            ++departures[{m.arc, m.depart}];
            if (i == 0) continue;
            const auto& prev = moves[i - 1];
            NodeId at = inst.arc(prev.arc).head;
            if (arc.tail != at) {
                add(ViolationKind::flow, k, arc.tail, m.arc, m.depart, 0, 0, "move does not start where the last ended");
                continue;
            }
            if (m.depart < prev.arrive) {
                add(ViolationKind::flow, k, at, m.arc, m.depart, m.depart, prev.arrive, "departs before arriving");
                continue;
            }
            if (inst.is_active(k, at)) {
                for (int t = prev.arrive; t < m.depart; ++t) ++stored[{at, t}];
            }
        }
    }
    for (const auto& [key, count] : departures) {
        const auto& arc = inst.arc(key.first);
        if (count > arc.throughput)
            add(ViolationKind::throughput, -1, arc.tail, key.first, key.second, count, arc.throughput,
                "simultaneous departures exceed throughput");
    }
    for (const auto& [key, count] : stored) {
        int b = inst.node(key.first).storage;
        if (count > b)
            add(ViolationKind::storage, -1, key.first, -1, key.second, count, b, "active packets exceed storage");
    }
    rep.makespan = makespan(sched);
    return rep;
}

std::string format_report(const Instance& inst, const VerifyReport& report) {
    std::ostringstream out;
    if (report.ok()) {
        out << "feasible makespan " << report.makespan << "\n";
        return out.str();
    }
    out << report.violations.size() << " violation(s)\n";
    for (const auto& v : report.violations) {
        out << to_string(v.kind);
        if (v.commodity >= 0) out << " packet " << inst.commodity(v.commodity).id;
        if (v.arc >= 0) out << " arc " << v.arc;
        if (v.node >= 0) out << " node " << v.node;
        out << " t=" << v.time << " measured " << v.measured << " allowed " << v.allowed << ": " << v.message << "\n";
    }
    return out.str();
}

namespace {

struct Trip {
    std::vector<Move> moves;
    std::vector<std::pair<NodeId, int>> waits;  // active storage steps (v, t)
    int arrival = 0;
};

class BruteForce {
public:
    BruteForce(const Instance& inst, long long cap) : inst_(inst), cap_(cap) {}

    std::optional<Schedule> solve_at(int horizon) {
        horizon_ = horizon;
        const int K = inst_.num_commodities();
        trips_.assign(K, {});
        for (int k = 0; k < K; ++k) {
            std::vector<Move> moves;
            std::vector<std::pair<NodeId, int>> waits;
            std::vector<std::pair<NodeId, int>> path{{inst_.commodity(k).origin, 0}};
            enumerate(k, inst_.commodity(k).origin, 0, moves, waits, path);
            if (trips_[k].empty()) return std::nullopt;
        }
        order_.resize(K);
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](int a, int b) {
                             const auto& x = inst_.commodity(a);
                             const auto& y = inst_.commodity(b);
                             return std::tuple(trips_[a].size(), x.origin, x.dest) <
                                    std::tuple(trips_[b].size(), y.origin, y.dest);
                         });
        chosen_.assign(K, -1);
        departures_.clear();
        stored_.clear();
        if (!assign(0)) return std::nullopt;
        Schedule s;
        s.horizon = inst_.horizon();
        for (int k = 0; k < K; ++k) s.trajectories.push_back({k, trips_[k][chosen_[k]].moves});
        return s;
    }

private:
    void tick() {
        if (++expansions_ > cap_) throw std::length_error("brute_force_optimum: node-expansion cap exceeded");
    }

    void enumerate(int k, NodeId v, int t, std::vector<Move>& moves, std::vector<std::pair<NodeId, int>>& waits,
                   std::vector<std::pair<NodeId, int>>& path) {
        tick();
        const auto& c = inst_.commodity(k);
        if (v == c.dest) {
            trips_[k].push_back({moves, waits, t});
            return;
        }
        for (ArcId a : inst_.out_arcs(v)) {
            const auto& arc = inst_.arc(a);
            int arrive = t + arc.transit;
            if (arrive > horizon_) continue;
            std::pair<NodeId, int> next{arc.head, arrive};
            if (std::find(path.begin(), path.end(), next) != path.end()) continue;
            moves.push_back({a, t, arrive});
            path.push_back(next);
            enumerate(k, arc.head, arrive, moves, waits, path);
            path.pop_back();
            moves.pop_back();
        }
        // Wait one step; an active packet cannot wait where storage is zero.
        bool active = inst_.is_active(k, v);
        if (t + 1 <= horizon_ && !(active && inst_.node(v).storage == 0)) {
            if (active) waits.emplace_back(v, t);
            path.emplace_back(v, t + 1);
            enumerate(k, v, t + 1, moves, waits, path);
            path.pop_back();
            if (active) waits.pop_back();
        }
    }

    bool fits(const Trip& trip) const {
        for (const auto& m : trip.moves) {
            auto it = departures_.find({m.arc, m.depart});
            int used = it == departures_.end() ? 0 : it->second;
            if (used + 1 > inst_.arc(m.arc).throughput) return false;
        }
        for (const auto& w : trip.waits) {
            auto it = stored_.find(w);
            int used = it == stored_.end() ? 0 : it->second;
            if (used + 1 > inst_.node(w.first).storage) return false;
        }
        return true;
    }

    void apply(const Trip& trip, int delta) {
        for (const auto& m : trip.moves) departures_[{m.arc, m.depart}] += delta;
        for (const auto& w : trip.waits) stored_[w] += delta;
    }

    bool same_pair(int a, int b) const {
        const auto& x = inst_.commodity(a);
        const auto& y = inst_.commodity(b);
        return x.origin == y.origin && x.dest == y.dest;
    }

    bool assign(std::size_t depth) {
        if (depth == order_.size()) return true;
        int k = order_[depth];
        // Identical packets take non-decreasing trip indices.
        int first = 0;
        if (depth > 0 && same_pair(order_[depth - 1], k)) first = chosen_[order_[depth - 1]];
        for (int i = first; i < static_cast<int>(trips_[k].size()); ++i) {
            tick();
            const auto& trip = trips_[k][i];
            if (!fits(trip)) continue;
            apply(trip, +1);
            chosen_[k] = i;
            if (assign(depth + 1)) return true;
            apply(trip, -1);
        }
        chosen_[k] = -1;
        return false;
    }

    const Instance& inst_;
    long long cap_;
    long long expansions_ = 0;
    int horizon_ = 0;
    std::vector<std::vector<Trip>> trips_;
    std::vector<int> order_;
    std::vector<int> chosen_;
    std::map<std::pair<ArcId, int>, int> departures_;
    std::map<std::pair<NodeId, int>, int> stored_;
};

}  // namespace

std::optional<int> brute_force_optimum(const Instance& inst, const BruteLimits& limits, Schedule* witness) {
    if (inst.num_nodes() > limits.max_nodes || inst.num_commodities() > limits.max_commodities ||
        inst.horizon() > limits.max_horizon)
        throw std::length_error("brute_force_optimum: instance exceeds the tiny limits");
    int lower = 0;
    for (const auto& c : inst.commodities()) {
        auto d = shortest_transit(inst, c.origin, c.dest);
        if (!d) return std::nullopt;
        lower = std::max(lower, d->transit);
    }
    BruteForce search(inst, limits.max_expansions);
    for (int m = std::max(lower, 0); m <= inst.horizon(); ++m) {
        auto found = search.solve_at(m);
        if (!found) continue;
        auto rep = check_schedule(inst, *found);
        if (!rep.ok()) throw std::logic_error("brute_force_optimum: assignment failed the schedule check");
        if (witness) *witness = *found;
        return rep.makespan;
    }
    return std::nullopt;
}

}  // namespace upr

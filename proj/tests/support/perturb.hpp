#pragma once

// Single-constraint perturbations of a feasible schedule. Each returns nullopt when its
// precondition does not hold for the given schedule.

#include <map>
#include <optional>
#include <utility>

#include "upr/gen.hpp"
#include "upr/instance.hpp"
#include "upr/schedule.hpp"
#include "upr/verify.hpp"

namespace perturb {

struct Case {
    upr::Instance instance;
    upr::Schedule schedule;
};

inline std::map<std::pair<upr::ArcId, int>, int> departures(const upr::Schedule& s) {
    std::map<std::pair<upr::ArcId, int>, int> d;
    for (const auto& tr : s.trajectories)
        for (const auto& m : tr.moves) ++d[{m.arc, m.depart}];
    return d;
}

inline int pick(upr::Rng& rng, int n) { return static_cast<int>(rng.uniform(0, n - 1)); }

// Last move leaves one step before the packet arrives, on an arc with spare throughput then.
inline std::optional<Case> flow(const upr::Instance& inst, upr::Schedule s, upr::Rng& rng) {
    auto dep = departures(s);
    std::vector<int> ok;
    for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        const auto& mv = s.trajectories[i].moves;
        if (mv.size() < 2) continue;
        const auto& last = mv.back();
        int t = mv[mv.size() - 2].arrive - 1;
        if (t < 0) continue;
        if (dep[{last.arc, t}] + 1 > inst.arc(last.arc).throughput) continue;
        ok.push_back(static_cast<int>(i));
    }
    if (ok.empty()) return std::nullopt;
    auto& mv = s.trajectories[ok[pick(rng, static_cast<int>(ok.size()))]].moves;
    auto& last = mv.back();
    last.depart = mv[mv.size() - 2].arrive - 1;
    last.arrive = last.depart + inst.arc(last.arc).transit;
    return Case{inst, s};
}

// Arrival of the last move shifted by one.
inline std::optional<Case> timing(const upr::Instance& inst, upr::Schedule s, upr::Rng& rng) {
    std::vector<int> ok;
    for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        if (!s.trajectories[i].moves.empty()) ok.push_back(static_cast<int>(i));
    }
    if (ok.empty()) return std::nullopt;
    auto& last = s.trajectories[ok[pick(rng, static_cast<int>(ok.size()))]].moves.back();
    last.arrive += pick(rng, 2) ? 1 : -1;
    return Case{inst, s};
}

// First or last move dropped, leaving a walk that starts or ends at the wrong node.
inline std::optional<Case> endpoint(const upr::Instance& inst, upr::Schedule s, upr::Rng& rng) {
    std::vector<std::pair<int, bool>> ok;
    for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        const auto& tr = s.trajectories[i];
        const auto& c = inst.commodity(tr.commodity);
        if (tr.moves.size() < 2) continue;
        if (inst.arc(tr.moves[1].arc).tail != c.origin) ok.emplace_back(static_cast<int>(i), true);
        if (inst.arc(tr.moves[tr.moves.size() - 2].arc).head != c.dest) ok.emplace_back(static_cast<int>(i), false);
    }
    if (ok.empty()) return std::nullopt;
    auto [i, front] = ok[pick(rng, static_cast<int>(ok.size()))];
    auto& mv = s.trajectories[i].moves;
    if (front)
        mv.erase(mv.begin());
    else
        mv.pop_back();
    return Case{inst, s};
}

// Extra packets copying a trajectory that never waits, one more than its tightest arc can take.
inline std::optional<Case> throughput(const upr::Instance& inst, upr::Schedule s, upr::Rng& rng) {
    auto dep = departures(s);
    std::vector<int> ok;
    for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        const auto& mv = s.trajectories[i].moves;
        if (mv.empty()) continue;
        bool waits = false;
        for (std::size_t j = 1; j < mv.size(); ++j) waits = waits || mv[j].depart != mv[j - 1].arrive;
        if (!waits) ok.push_back(static_cast<int>(i));
    }
    if (ok.empty()) return std::nullopt;
    const auto tr = s.trajectories[ok[pick(rng, static_cast<int>(ok.size()))]];
    int slack = 1 << 30;
    for (const auto& m : tr.moves) slack = std::min(slack, inst.arc(m.arc).throughput - dep[{m.arc, m.depart}]);
    const int copies = slack + 1;
    auto coms = inst.commodities();
    int next_id = 0;
    for (const auto& c : coms) next_id = std::max(next_id, c.id + 1);
    const auto& base = inst.commodity(tr.commodity);
    for (int j = 0; j < copies; ++j) {
        coms.push_back({next_id + j, base.origin, base.dest});
        s.trajectories.push_back({static_cast<int>(coms.size()) - 1, tr.moves});
    }
    upr::Instance bigger(inst.nodes(), inst.arcs(), coms, inst.horizon(), inst.meta());
    return Case{bigger, s};
}

// Storage at the busiest waiting node cut to one below its peak.
inline std::optional<Case> storage(const upr::Instance& inst, upr::Schedule s, upr::Rng&) {
    std::map<upr::NodeId, int> peak;
    std::map<std::pair<upr::NodeId, int>, int> held;
    for (const auto& tr : s.trajectories) {
        for (std::size_t j = 1; j < tr.moves.size(); ++j) {
            upr::NodeId v = inst.arc(tr.moves[j - 1].arc).head;
            if (!inst.is_active(tr.commodity, v)) continue;
            for (int t = tr.moves[j - 1].arrive; t < tr.moves[j].depart; ++t) peak[v] = std::max(peak[v], ++held[{v, t}]);
        }
    }
    if (peak.empty()) return std::nullopt;
    auto it = peak.begin();
    auto nodes = inst.nodes();
    nodes[it->first].storage = it->second - 1;
    upr::Instance smaller(nodes, inst.arcs(), inst.commodities(), inst.horizon(), inst.meta());
    return Case{smaller, s};
}

inline std::optional<Case> apply(upr::ViolationKind kind, const upr::Instance& inst, const upr::Schedule& s,
                                 upr::Rng& rng) {
    switch (kind) {
        case upr::ViolationKind::flow: return flow(inst, s, rng);
        case upr::ViolationKind::timing: return timing(inst, s, rng);
        case upr::ViolationKind::endpoint: return endpoint(inst, s, rng);
        case upr::ViolationKind::throughput: return throughput(inst, s, rng);
        case upr::ViolationKind::storage: return storage(inst, s, rng);
    }
    return std::nullopt;
}

}  // namespace perturb

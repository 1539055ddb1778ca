#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "upr/expand.hpp"
#include "upr/instance.hpp"

namespace upr {

/// One traversal of a base arc: leave the tail at `depart`, reach the head at `arrive`.
struct Move {
    ArcId arc = -1;
    int depart = 0;
    int arrive = 0;
    friend bool operator==(const Move&, const Move&) = default;
};

/// Packet walk in the full network; waiting between moves is implicit.
struct Trajectory {
    int commodity = 0;  // index into Instance::commodities()
    std::vector<Move> moves;
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct Schedule {
    int horizon = 0;
    std::vector<Trajectory> trajectories;  // one per commodity, in commodity order
    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Latest movement arrival over all packets (0 when no packet moves).
int makespan(const Schedule& sched);

/// Per-commodity arc values over a partial network's movement and holdover arcs.
struct NetworkFlow {
    std::vector<std::vector<double>> move;  // [k][movement index]
    std::vector<std::vector<double>> hold;  // [k][holdover index]

    static NetworkFlow zeros(const PartialNetwork& net, int num_commodities);
    int num_commodities() const { return static_cast<int>(move.size()); }
    double move_total(int e) const;
    double hold_total(int e) const;
    /// Sum over commodities active at the holdover's node.
    double hold_active(const PartialNetwork& net, const Instance& inst, int e) const;
};

/// Visit list of a trajectory: (node, arrival, departure); the destination departs at the horizon.
struct Visit {
    NodeId node = 0;
    int arrival = 0;
    int departure = 0;
};

std::vector<Visit> visits(const Instance& inst, const Trajectory& traj, int horizon);

/// Solution document: {"horizon", "makespan",
/// "commodities":[{"id", "visits":[[node,arr,dep],...], "arcs":[...]}]}.
nlohmann::json solution_to_json(const Instance& inst, const Schedule& sched);
/// Rebuilds moves from a visit list. The optional "arcs" list pins parallel arcs; without it
/// the first base arc whose transit matches the hop is used.
Schedule solution_from_json(const Instance& inst, const nlohmann::json& doc);
void write_solution(const Instance& inst, const Schedule& sched, const std::string& path);
Schedule read_solution(const Instance& inst, const std::string& path);

}  // namespace upr

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upr/instance.hpp"

namespace upr {

struct TimedNode {
    NodeId node = 0;
    int time = 0;
    friend bool operator==(const TimedNode&, const TimedNode&) = default;
    friend auto operator<=>(const TimedNode&, const TimedNode&) = default;
};

enum class ArcKind { movement, holdover };

struct TimedArc {
    TimedNode from;
    TimedNode to;
    ArcKind kind = ArcKind::movement;
    ArcId base_arc = -1;  // -1 for holdovers
    int capacity = 0;     // u'_e or b'_e
};

enum class StorageRule { tight, relaxed };

/// Per-node sorted lists of included times. Every list must contain 0 and T.
using TimeSet = std::vector<std::vector<int>>;

/// A partially time-expanded network D_S. Built by build_arcs; immutable afterwards.
class PartialNetwork {
public:
    PartialNetwork() = default;

    int horizon() const { return horizon_; }
    int num_base_nodes() const { return static_cast<int>(times_.size()); }
    const TimeSet& times() const { return times_; }
    const std::vector<int>& times(NodeId v) const { return times_.at(v); }
    StorageRule storage_rule() const { return rule_; }

    int num_timed_nodes() const { return num_timed_nodes_; }
    int num_timed_arcs() const { return num_movement() + num_holdover(); }
    int num_movement() const { return static_cast<int>(movement_.size()); }
    int num_holdover() const { return static_cast<int>(holdover_.size()); }
    const std::vector<TimedArc>& movement_arcs() const { return movement_; }
    const std::vector<TimedArc>& holdover_arcs() const { return holdover_; }
    const TimedArc& movement(int i) const { return movement_.at(i); }
    const TimedArc& holdover(int i) const { return holdover_.at(i); }

    bool contains(NodeId v, int t) const;
    /// Dense index of (v,t) among included timed nodes, -1 when absent.
    int node_index(NodeId v, int t) const;
    TimedNode timed_node(int index) const { return index_to_node_.at(index); }

    /// n_S(v,t); throws std::out_of_range when t >= T.
    int next_time(NodeId v, int t) const;
    /// m_S(v,t) = n_S(v,t) - t; throws when t >= T.
    int gap(NodeId v, int t) const;
    /// m_S(v,t) with the convention m = 1 for t >= T.
    int gap_or_one(NodeId v, int t) const;
    /// max{t' <= t : (v,t') included}; t must be >= 0.
    int latest_at_or_before(NodeId v, int t) const;

    /// Movement arc index of base arc a departing at t, -1 when absent.
    int movement_index(ArcId a, int t) const;
    /// Holdover arc index leaving (v,t), -1 when absent.
    int holdover_index(NodeId v, int t) const;

    const std::vector<int>& movement_out(NodeId v, int t) const;
    const std::vector<int>& movement_in(NodeId v, int t) const;
    /// Holdover entering (v,t), -1 when t is the first copy.
    int holdover_in(NodeId v, int t) const;

    friend PartialNetwork build_arcs(const TimeSet& times, const Instance& inst, StorageRule rule);

private:
    int horizon_ = 0;
    int num_arcs_ = 0;
    StorageRule rule_ = StorageRule::tight;
    TimeSet times_;
    int num_timed_nodes_ = 0;
    std::vector<int> slot_;  // (v*(T+1)+t) -> timed-node index or -1
    std::vector<TimedNode> index_to_node_;
    std::vector<int> move_slot_;  // (a*(T+1)+t) -> movement index or -1
    std::vector<int> hold_slot_;  // (v*(T+1)+t) -> holdover index or -1
    std::vector<TimedArc> movement_;
    std::vector<TimedArc> holdover_;
    std::vector<std::vector<int>> out_;  // by timed-node index
    std::vector<std::vector<int>> in_;
    std::vector<int> hold_in_;
};

/// Movement arcs per P3/P4 with u' = u * m_S(v,t); holdovers between consecutive copies with
/// capacity from the chosen storage rule. Throws std::invalid_argument when P1 fails.
PartialNetwork build_arcs(const TimeSet& times, const Instance& inst,
                          StorageRule rule = StorageRule::tight);

PartialNetwork full_expand(const Instance& inst, StorageRule rule = StorageRule::tight);
TimeSet full_times(const Instance& inst);
TimeSet initial_times(const Instance& inst);
PartialNetwork initial_partial(const Instance& inst, StorageRule rule = StorageRule::tight);

/// Normalises a list of timed nodes plus 0 and T into a TimeSet.
TimeSet make_time_set(const Instance& inst, const std::vector<TimedNode>& extra);
/// Adds nodes to a copy of `times`; returns how many were new.
int insert_times(TimeSet& times, const std::vector<TimedNode>& nodes);
int count_timed_nodes(const TimeSet& times);

/// One term of U_e: a base in-arc of v and a departure time at its tail.
struct SlackTerm {
    ArcId arc = -1;
    int depart = 0;
    friend bool operator==(const SlackTerm&, const SlackTerm&) = default;
    friend auto operator<=>(const SlackTerm&, const SlackTerm&) = default;
};

/// De-duplicated union of N_T^-(v,t) and N_S^-(v,t), keyed by (arc, departure).
std::vector<SlackTerm> slack_terms(const PartialNetwork& net, const Instance& inst, NodeId v, int t);

/// U_e for the holdover leaving (v,t).
int storage_slack(const PartialNetwork& net, const Instance& inst, NodeId v, int t);
/// b_v + U_e if (v,t+1) included, else 2 b_v + U_e.
int storage_bound_tight(const PartialNetwork& net, const Instance& inst, NodeId v, int t);
/// m_S(v,t) * b_v + U_e.
int storage_bound_relaxed(const PartialNetwork& net, const Instance& inst, NodeId v, int t);

/// Yard-capacity bound for a star with unit-storage clients. nullopt marks the
/// case the bound leaves unconstrained ((v,t+eps) included, predecessor copy absent).
std::optional<int> storage_bound_cir_ob(const PartialNetwork& net, const Instance& inst, NodeId v, int t,
                                        int eps = 1);

struct Schedule;
struct NetworkFlow;

/// Image of a full-network schedule under mu, as 0/1 values on the partial network's arcs.
/// Holdovers are filled between consecutive mapped positions and up to T at the destination.
NetworkFlow project_mu(const PartialNetwork& net, const Instance& inst, const Schedule& sched);

/// Structured text listing of timed nodes and arcs, stable across runs.
std::string dump_network(const PartialNetwork& net);

/// Checks P1-P4 and the capacity rules; returns human-readable failures.
std::vector<std::string> check_properties(const PartialNetwork& net, const Instance& inst);

}  // namespace upr

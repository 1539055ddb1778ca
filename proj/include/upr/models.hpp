#pragma once

#include <vector>

#include "upr/expand.hpp"
#include "upr/instance.hpp"
#include "upr/mip.hpp"
#include "upr/schedule.hpp"

namespace upr {

/// Model over a fully time-indexed network (the full IP or the fixed-path upper-bound IP).
struct TimeIndexedModel {
    MipModel mip;
    int horizon = 0;
    int makespan_var = -1;
    int num_arcs = 0;
    int num_nodes = 0;
    std::vector<std::vector<int>> move_var;  // [k][a*(horizon+1)+t], -1 when absent
    std::vector<std::vector<int>> hold_var;  // [k][v*(horizon+1)+t], -1 when absent

    int move(int k, ArcId a, int t) const;
    int hold(int k, NodeId v, int t) const;
};

/// Model over a partially time-expanded network.
struct PartialModel {
    MipModel mip;
    int makespan_var = -1;
    std::vector<std::vector<int>> move_var;  // [k][movement index]
    std::vector<std::vector<int>> hold_var;  // [k][holdover index]
};

/// Time-indexed IP over the full network with the final-arrival strengthening row.
TimeIndexedModel build_full(const Instance& inst);

/// Lower-bound IP over D_S with true-length timing rows and relaxed capacities.
/// Throws std::invalid_argument when the network violates P1-P4 or the capacity rules.
PartialModel build_partial(const PartialNetwork& net, const Instance& inst);

/// Fixed-path IP: commodity k may use only the base arcs in arc_sets[k] (and hold at their
/// endpoints) within horizon T'. Original capacities. Throws when an arc set has no origin-destination path.
TimeIndexedModel build_fixed_paths(const Instance& inst, const std::vector<std::vector<ArcId>>& arc_sets,
                                   int horizon);

/// Walks each commodity from (s_k,0) along arcs with value > 0.5.
Schedule extract_schedule(const Instance& inst, const TimeIndexedModel& model, const std::vector<double>& x);

NetworkFlow extract_flow(const PartialModel& model, const std::vector<double>& x);

/// Variable vector for a partial model from arc values and a makespan value.
std::vector<double> point_from_flow(const PartialModel& model, const NetworkFlow& flow, double makespan);

/// Variable vector for a full model from a schedule; makespan variable set to the schedule's makespan.
std::vector<double> point_from_schedule(const Instance& inst, const TimeIndexedModel& model, const Schedule& sched);

}  // namespace upr

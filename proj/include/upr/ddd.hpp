#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "upr/expand.hpp"
#include "upr/instance.hpp"
#include "upr/mip.hpp"
#include "upr/models.hpp"
#include "upr/schedule.hpp"

namespace upr {

/// Support threshold for fractional (phase-1) solutions.
inline constexpr double kSupportTol = 1e-6;

/// What the refinement rules see in one partial solution.
/// Arc counts are support arcs violating each rule. Node counts per rule are distinct timed
/// nodes outside N_S that the rule asks for; `*_raw` counts every request before de-duplication.
/// A node requested by two rules appears under both; `added` is the union.
struct ViolationCounts {
    int short_arcs = 0;
    int throughput_arcs = 0;
    int storage_arcs = 0;
    int nodes_short_raw = 0;
    int nodes_throughput_raw = 0;
    int nodes_storage_raw = 0;
    int nodes_short = 0;
    int nodes_throughput = 0;
    int nodes_storage = 0;
    /// Nodes the storage rule would add when reading predecessors from N_S^- instead of N_T^-,
    /// that the N_T^- reading (plus the other rules) does not add.
    int storage_alt_extra = 0;
    std::vector<TimedNode> added;

    bool any() const { return short_arcs + throughput_arcs + storage_arcs > 0; }
};

ViolationCounts classify_violations(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow);

/// Time set after one refinement step. Throws std::logic_error when no new timed node results.
TimeSet augment(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow);

/// Full-network schedule read directly off an integral partial solution with no violations.
Schedule schedule_from_partial(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow);

/// Base arcs usable by each commodity: support arcs on some source-sink path of its support.
std::vector<std::vector<ArcId>> support_arc_sets(const PartialNetwork& net, const Instance& inst,
                                                 const NetworkFlow& flow);

/// Latest t + tau over support movement arcs.
int final_arrival(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow);

/// ceil((1 + alpha) * value), clamped to [1, T].
int ub_horizon(double value, double alpha, int horizon);

struct UbResult {
    int ub = 0;
    int horizon = 0;  // T'
    SolveStatus status = SolveStatus::error;
    std::optional<Schedule> schedule;
};

/// Fixed-path upper bound over the support of `flow` with horizon T' = ub_horizon(value, alpha).
UbResult compute_ub(const Instance& inst, const PartialNetwork& net, const NetworkFlow& flow, double value,
                    double alpha, int current_ub, SolverBackend& backend, const SolveParams& params);

struct RunRecord {
    int iteration = 0;
    int phase = 0;  // 0 single-phase, 1 or 2 for the two-phase variant
    int lb = 0;
    int ub = 0;
    double gap = 1.0;
    double relaxation_value = 0.0;  // objective of the partial model (an LP value in phase 1)
    int timed_nodes = 0;
    int timed_arcs = 0;
    int ub_horizon = 0;
    bool ub_solved = false;
    bool has_schedule = false;
    ViolationCounts violations;
    double wall_s = 0.0;
};

struct DddOptions {
    std::string backend;  // empty selects default_backend_name()
    double rel_gap = 0.01;
    double time_limit_s = std::numeric_limits<double>::infinity();
    int threads = 1;
    std::uint64_t seed = 0;
    int ub_every = 1;
    StorageRule storage_rule = StorageRule::tight;
    int max_iterations = 0;  // 0 means no cap
    std::optional<TimeSet> initial_times;
    std::function<void(const RunRecord&)> on_iteration;
};

enum class DddStatus { optimal, infeasible, time_limit, iteration_limit, error };
std::string to_string(DddStatus s);

struct DddResult {
    DddStatus status = DddStatus::error;
    std::optional<Schedule> schedule;
    int ub = 0;
    int lb = 0;
    std::vector<RunRecord> records;
    TimeSet final_times;
    std::string message;

    int iterations() const { return static_cast<int>(records.size()); }
    double gap() const { return ub > 0 ? double(ub - lb) / ub : 0.0; }
};

/// DDD main loop. `optimal` means gap <= alpha with a schedule in hand.
DddResult solve_ddd(const Instance& inst, double alpha, const DddOptions& opts = {});

/// Phase 1 runs the loop on LP relaxations; phase 2 resumes with integrality from its time set.
DddResult solve_two_phase(const Instance& inst, double alpha, const DddOptions& opts = {});

}  // namespace upr

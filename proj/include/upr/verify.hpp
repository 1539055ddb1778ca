#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upr/instance.hpp"
#include "upr/schedule.hpp"

namespace upr {

enum class ViolationKind { flow, throughput, storage, timing, endpoint };

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind = ViolationKind::flow;
    int commodity = -1;  // -1 for capacity violations
    NodeId node = -1;
    ArcId arc = -1;
    int time = 0;
    double measured = 0.0;
    double allowed = 0.0;
    std::string message;
};

struct VerifyReport {
    std::vector<Violation> violations;
    int makespan = 0;

    bool ok() const { return violations.empty(); }
    bool has(ViolationKind k) const;
    /// Distinct kinds present, in enum order.
    std::vector<ViolationKind> kinds() const;
};

/// Feasibility in the full network with original capacities. A packet occupies storage at v
/// during [arrival, next departure) for each intermediate stop; nothing is counted before its
/// first move or after its last. Throws std::invalid_argument for unknown arcs or commodities.
VerifyReport check_schedule(const Instance& inst, const Schedule& sched);

std::string format_report(const Instance& inst, const VerifyReport& report);

struct BruteLimits {
    int max_nodes = 6;
    int max_commodities = 8;
    int max_horizon = 10;
    long long max_expansions = 20'000'000;
};

/// Exact minimum makespan by iterative deepening over per-packet trajectory assignments,
/// nullopt when no schedule fits the horizon. Throws std::length_error past the limits.
std::optional<int> brute_force_optimum(const Instance& inst, const BruteLimits& limits = {},
                                       Schedule* witness = nullptr);

}  // namespace upr

#include "upr/ddd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

namespace upr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Requests {
    std::set<TimedNode> short_nodes, thr_nodes, sto_nodes, alt_nodes;
};

}  // namespace

ViolationCounts classify_violations(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow) {
    ViolationCounts c;
    Requests req;
    auto request = [&](std::set<TimedNode>& bucket, int& raw, NodeId v, int t) {
        if (net.contains(v, t)) return;
        ++raw;
        bucket.insert({v, t});
    };

    for (int e = 0; e < net.num_movement(); ++e) {
        const auto& arc = net.movement(e);
        double total = flow.move_total(e);
        if (total <= kSupportTol) continue;
        const auto& base = inst.arc(arc.base_arc);
        int due = arc.from.time + base.transit;
        if (arc.to.time < due) {
            ++c.short_arcs;
            request(req.short_nodes, c.nodes_short_raw, arc.to.node, due);
        }
        if (total > base.throughput + kSupportTol) {
            ++c.throughput_arcs;
            request(req.thr_nodes, c.nodes_throughput_raw, arc.from.node, arc.from.time + 1);
        }
    }
    for (int e = 0; e < net.num_holdover(); ++e) {
        const auto& arc = net.holdover(e);
        NodeId v = arc.from.node;
        int t = arc.from.time;
        if (flow.hold_active(net, inst, e) <= inst.node(v).storage + kSupportTol) continue;
        ++c.storage_arcs;
        for (ArcId a : inst.in_arcs(v)) {
            int pred = t - inst.arc(a).transit;
            NodeId z = inst.arc(a).tail;
            if (pred >= 0 && net.gap_or_one(z, pred) > 1) request(req.sto_nodes, c.nodes_storage_raw, z, pred + 1);
        }
        request(req.sto_nodes, c.nodes_storage_raw, v, t + 1);
        for (int in : net.movement_in(v, t)) {
            const auto& f = net.movement(in);
            if (net.gap_or_one(f.from.node, f.from.time) > 1 && !net.contains(f.from.node, f.from.time + 1))
                req.alt_nodes.insert({f.from.node, f.from.time + 1});
        }
    }

    c.nodes_short = static_cast<int>(req.short_nodes.size());
    c.nodes_throughput = static_cast<int>(req.thr_nodes.size());
    c.nodes_storage = static_cast<int>(req.sto_nodes.size());
    std::set<TimedNode> all = req.short_nodes;
    all.insert(req.thr_nodes.begin(), req.thr_nodes.end());
    all.insert(req.sto_nodes.begin(), req.sto_nodes.end());
    for (const auto& n : req.alt_nodes) {
        if (!all.count(n)) ++c.storage_alt_extra;
    }
    c.added.assign(all.begin(), all.end());
    return c;
}

TimeSet augment(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow) {
    auto c = classify_violations(net, inst, flow);
    TimeSet times = net.times();
    if (insert_times(times, c.added) == 0) throw std::logic_error("augment: no new timed node for this solution");
    return times;
}

Schedule schedule_from_partial(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow) {
    const int T = net.horizon();
    Schedule sched;
    sched.horizon = inst.horizon();
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& c = inst.commodity(k);
        std::vector<char> used_move(net.num_movement(), 0);
        Trajectory traj{k, {}};
        NodeId v = c.origin;
        int t = 0;
        int guard = net.num_timed_arcs() + 1;
        while (!(v == c.dest && t == T)) {
            if (--guard < 0) throw std::logic_error("schedule_from_partial: walk does not reach the sink");
            int next = -1;
            for (int e : net.movement_out(v, t)) {
                if (!used_move[e] && flow.move[k][e] > 0.5) {
                    next = e;
                    break;
                }
            }
            if (next >= 0) {
                used_move[next] = 1;
                const auto& arc = net.movement(next);
                int arrive = t + inst.arc(arc.base_arc).transit;
                if (arc.to.time != arrive)
                    throw std::logic_error("schedule_from_partial: support contains a short arc");
                traj.moves.push_back({arc.base_arc, t, arrive});
                v = arc.to.node;
                t = arrive;
                continue;
            }
            int h = net.holdover_index(v, t);
            if (h < 0 || flow.hold[k][h] <= 0.5)
                throw std::logic_error("schedule_from_partial: flow leaves no arc at a visited timed node");
            t = net.holdover(h).to.time;
        }
        sched.trajectories.push_back(std::move(traj));
    }
    return sched;
}

std::vector<std::vector<ArcId>> support_arc_sets(const PartialNetwork& net, const Instance& inst,
                                                 const NetworkFlow& flow) {
    const int n = net.num_timed_nodes();
    const int T = net.horizon();
    std::vector<std::vector<ArcId>> sets;
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& c = inst.commodity(k);
        // Support adjacency over timed-node indices.
        std::vector<std::vector<int>> fwd(n), bwd(n);
        auto link = [&](const TimedNode& a, const TimedNode& b) {
            int i = net.node_index(a.node, a.time), j = net.node_index(b.node, b.time);
            fwd[i].push_back(j);
            bwd[j].push_back(i);
        };
        for (int e = 0; e < net.num_movement(); ++e) {
            if (flow.move[k][e] > kSupportTol) link(net.movement(e).from, net.movement(e).to);
        }
        for (int e = 0; e < net.num_holdover(); ++e) {
            if (flow.hold[k][e] > kSupportTol) link(net.holdover(e).from, net.holdover(e).to);
        }
        auto sweep = [&](int start, const std::vector<std::vector<int>>& adj) {
            std::vector<char> seen(n, 0);
            std::vector<int> stack{start};
            seen[start] = 1;
            while (!stack.empty()) {
                int i = stack.back();
                stack.pop_back();
                for (int j : adj[i]) {
                    if (!seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
            return seen;
        };
        auto from_source = sweep(net.node_index(c.origin, 0), fwd);
        auto to_sink = sweep(net.node_index(c.dest, T), bwd);
        std::vector<ArcId> arcs;
        for (int e = 0; e < net.num_movement(); ++e) {
            if (flow.move[k][e] <= kSupportTol) continue;
            const auto& arc = net.movement(e);
            if (from_source[net.node_index(arc.from.node, arc.from.time)] &&
                to_sink[net.node_index(arc.to.node, arc.to.time)])
                arcs.push_back(arc.base_arc);
        }
        std::sort(arcs.begin(), arcs.end());
        arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
        sets.push_back(std::move(arcs));
    }
    return sets;
}

int final_arrival(const PartialNetwork& net, const Instance& inst, const NetworkFlow& flow) {
    int best = 0;
    for (int e = 0; e < net.num_movement(); ++e) {
        if (flow.move_total(e) < kSupportTol) continue;
        const auto& arc = net.movement(e);
        best = std::max(best, arc.from.time + inst.arc(arc.base_arc).transit);
    }
    return best;
}

int ub_horizon(double value, double alpha, int horizon) {
    int h = static_cast<int>(std::ceil((1.0 + alpha) * value - 1e-9));
    return std::clamp(h, 1, horizon);
}

UbResult compute_ub(const Instance& inst, const PartialNetwork& net, const NetworkFlow& flow, double value,
                    double alpha, int current_ub, SolverBackend& backend, const SolveParams& params) {
    UbResult out;
    out.ub = current_ub;
    out.horizon = ub_horizon(value, alpha, inst.horizon());
    auto model = build_fixed_paths(inst, support_arc_sets(net, inst, flow), out.horizon);
    SolveParams p = params;
    p.relax_integrality = false;
    auto res = backend.solve(model.mip, p);
    out.status = res.status;
    if (!res.has_solution()) return out;
    auto sched = extract_schedule(inst, model, res.x);
    sched.horizon = inst.horizon();
    out.ub = std::min(out.ub, makespan(sched));
    out.schedule = std::move(sched);
    return out;
}

std::string to_string(DddStatus s) {
    switch (s) {
        case DddStatus::optimal: return "optimal";
        case DddStatus::infeasible: return "infeasible";
        case DddStatus::time_limit: return "time_limit";
        case DddStatus::iteration_limit: return "iteration_limit";
        case DddStatus::error: return "error";
    }
    return "error";
}

namespace {

struct LoopState {
    TimeSet times;
    int lb = 0;
    int ub = 0;
    std::optional<Schedule> best;
    std::vector<RunRecord> records;
};

double gap_of(int lb, int ub) { return ub > 0 ? double(ub - lb) / ub : 0.0; }

bool closed(const LoopState& s, double alpha) { return s.best && gap_of(s.lb, s.ub) <= alpha + 1e-12; }

void offer(LoopState& s, Schedule sched) {
    int value = makespan(sched);
    if (!s.best || value < s.ub) {
        s.ub = value;
        s.best = std::move(sched);
    }
}

// Runs DDD iterations from s.times. relax selects phase-1 behaviour; `stalled` reports that the
// relaxation asked for no new timed node.
DddStatus run_loop(const Instance& inst, double alpha, const DddOptions& opts, int phase, bool relax,
                   LoopState& s, SolverBackend& backend, Clock::time_point start, std::string& message,
                   bool& stalled) {
    stalled = false;
    const double budget = opts.time_limit_s;
    int iter_in_phase = 0;
    while (true) {
        if (opts.max_iterations > 0 && static_cast<int>(s.records.size()) >= opts.max_iterations)
            return DddStatus::iteration_limit;
        double left = budget - seconds_since(start);
        if (left <= 0) return DddStatus::time_limit;
        auto iter_start = Clock::now();
        ++iter_in_phase;

        RunRecord rec;
        rec.iteration = static_cast<int>(s.records.size()) + 1;
        rec.phase = phase;
        auto net = build_arcs(s.times, inst, opts.storage_rule);
        rec.timed_nodes = net.num_timed_nodes();
        rec.timed_arcs = net.num_timed_arcs();

        auto model = build_partial(net, inst);
        SolveParams p;
        p.rel_gap = opts.rel_gap;
        p.threads = opts.threads;
        p.seed = opts.seed;
        p.relax_integrality = relax;
        p.time_limit_s = left;
        auto res = backend.solve(model.mip, p);
        if (res.status == SolveStatus::infeasible) return DddStatus::infeasible;
        if (res.status == SolveStatus::error) {
            message = "partial model: " + res.message;
            return DddStatus::error;
        }
        if (!res.has_solution()) return DddStatus::time_limit;
        if (res.status != SolveStatus::optimal) return DddStatus::time_limit;

        auto flow = extract_flow(model, res.x);
        rec.relaxation_value = res.objective;
        double bound = relax ? res.objective : std::max(res.bound, -1.0);
        s.lb = std::max(s.lb, static_cast<int>(std::ceil(bound - 1e-6)));
        rec.violations = classify_violations(net, inst, flow);

        bool convertible = !relax && !rec.violations.any();
        if (convertible) {
            // The support is already a full-network schedule of value <= T-hat.
            offer(s, schedule_from_partial(net, inst, flow));
        } else if (opts.ub_every <= 1 || iter_in_phase % opts.ub_every == 0 || rec.violations.added.empty()) {
            double value = relax ? final_arrival(net, inst, flow) : res.objective;
            SolveParams up = p;
            up.time_limit_s = budget - seconds_since(start);
            if (up.time_limit_s > 0) {
                auto ub = compute_ub(inst, net, flow, value, alpha, s.ub, backend, up);
                rec.ub_solved = true;
                rec.ub_horizon = ub.horizon;
                if (ub.status == SolveStatus::error) {
                    message = "fixed-path model failed";
                    return DddStatus::error;
                }
                if (ub.schedule) offer(s, std::move(*ub.schedule));
            }
        }
        rec.lb = s.lb;
        rec.ub = s.ub;
        rec.gap = gap_of(s.lb, s.ub);
        rec.has_schedule = s.best.has_value();

        bool done = closed(s, alpha);
        int fresh = 0;
        if (!done) fresh = insert_times(s.times, rec.violations.added);
        rec.wall_s = seconds_since(iter_start);
        s.records.push_back(rec);
        if (opts.on_iteration) opts.on_iteration(s.records.back());
        if (done) return DddStatus::optimal;
        if (fresh == 0) {
            // In the integer loop this means the remaining gap is backend tolerance.
            stalled = true;
            if (relax || s.best) return DddStatus::optimal;
            message = "refinement stalled without a schedule";
            return DddStatus::error;
        }
    }
}

DddResult finish(DddStatus status, LoopState& s, std::string message) {
    DddResult r;
    r.status = status;
    r.schedule = std::move(s.best);
    r.ub = s.ub;
    r.lb = s.lb;
    r.records = std::move(s.records);
    r.final_times = std::move(s.times);
    r.message = std::move(message);
    return r;
}

LoopState initial_state(const Instance& inst, const DddOptions& opts) {
    LoopState s;
    s.times = opts.initial_times ? *opts.initial_times : initial_times(inst);
    s.ub = inst.horizon();
    return s;
}

}  // namespace

DddResult solve_ddd(const Instance& inst, double alpha, const DddOptions& opts) {
    if (alpha < 0) throw std::invalid_argument("solve_ddd: alpha must be nonnegative");
    auto start = Clock::now();
    auto backend = make_backend(opts.backend.empty() ? default_backend_name() : opts.backend);
    auto s = initial_state(inst, opts);
    std::string message;
    bool stalled = false;
    auto status = run_loop(inst, alpha, opts, 0, false, s, *backend, start, message, stalled);
    return finish(status, s, std::move(message));
}

DddResult solve_two_phase(const Instance& inst, double alpha, const DddOptions& opts) {
    if (alpha < 0) throw std::invalid_argument("solve_two_phase: alpha must be nonnegative");
    auto start = Clock::now();
    auto backend = make_backend(opts.backend.empty() ? default_backend_name() : opts.backend);
    auto s = initial_state(inst, opts);
    std::string message;
    bool stalled = false;
    auto status = run_loop(inst, alpha, opts, 1, true, s, *backend, start, message, stalled);
    if (status == DddStatus::optimal && stalled)
        status = run_loop(inst, alpha, opts, 2, false, s, *backend, start, message, stalled);
    return finish(status, s, std::move(message));
}

}  // namespace upr

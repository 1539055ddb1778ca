#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "upr/ddd.hpp"
#include "upr/gen.hpp"
#include "upr/verify.hpp"

using namespace upr;

namespace {

bool contains(const std::vector<TimedNode>& v, TimedNode n) { return std::find(v.begin(), v.end(), n) != v.end(); }

DddOptions exact() {
    DddOptions o;
    o.backend = "bnb";
    o.rel_gap = 0.0;
    return o;
}

// Four nodes, three packets converging on a unit-throughput arc.
Instance congested() {
    return fx::make({1, 1, 1, 0}, {{0, 2, 1, 1}, {1, 2, 1, 1}, {2, 3, 1, 1}, {0, 1, 1, 2}, {1, 3, 2, 1}},
                    {{0, 3}, {1, 3}, {0, 3}}, 8);
}

}  // namespace

TEST_CASE("short-arc rule") {
    auto inst = fx::make({0, 0}, {{0, 1, 3, 1}}, {{0, 1}}, 5);
    auto net = initial_partial(inst);
    auto flow = NetworkFlow::zeros(net, 1);
    flow.move[0][net.movement_index(0, 0)] = 1.0;
    auto c = classify_violations(net, inst, flow);
    CHECK(c.short_arcs == 1);
    CHECK(contains(c.added, {1, 3}));
    CHECK(count_timed_nodes(augment(net, inst, flow)) == net.num_timed_nodes() + 1);
}

TEST_CASE("throughput rule") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 2}}, {{0, 1}, {0, 1}, {0, 1}}, 8);
    auto net = build_arcs(TimeSet{{0, 4, 8}, {0, 5, 8}}, inst);
    auto flow = NetworkFlow::zeros(net, 3);
    int e = net.movement_index(0, 4);
    REQUIRE(e >= 0);
    for (int k = 0; k < 3; ++k) flow.move[k][e] = 1.0;
    auto c = classify_violations(net, inst, flow);
    CHECK(c.throughput_arcs == 1);
    CHECK(c.short_arcs == 0);
    CHECK(c.added == std::vector<TimedNode>{{0, 5}});
}

TEST_CASE("storage rule adds the successor of the long-gap predecessor and (v,t+1)") {
    // a(0) -> v(2), c(1) -> v(2), v -> z(3); b_v = 0. Predecessor gaps at time 3: a has 1, c has 4.
    auto inst = fx::make({0, 0, 0, 0}, {{0, 2, 1, 1}, {1, 2, 1, 1}, {2, 3, 1, 1}}, {{0, 3}}, 8);
    TimeSet times{{0, 3, 4, 8}, {0, 3, 7, 8}, {0, 4, 8}, {0, 8}};
    auto net = build_arcs(times, inst);
    auto flow = NetworkFlow::zeros(net, 1);
    int h = net.holdover_index(2, 4);
    REQUIRE(h >= 0);
    flow.hold[0][h] = 1.0;
    auto c = classify_violations(net, inst, flow);
    CHECK(c.storage_arcs == 1);
    CHECK(c.added == std::vector<TimedNode>{{1, 4}, {2, 5}});
    // At most in-degree + 1 nodes per storage correction.
    CHECK(c.nodes_storage <= static_cast<int>(inst.in_arcs(2).size()) + 1);
}

TEST_CASE("packets at their endpoints never trip the storage rule") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 1}}, 4);
    auto net = full_expand(inst);
    auto flow = NetworkFlow::zeros(net, 1);
    for (int t = 0; t < 4; ++t) flow.hold[0][net.holdover_index(0, t)] = 1.0;
    CHECK_FALSE(classify_violations(net, inst, flow).any());
}

TEST_CASE("a projected feasible schedule is convertible") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TinyParams p;
        p.seed = seed;
        auto inst = gen_tiny(p);
        auto sched = greedy_schedule(inst);
        REQUIRE(check_schedule(inst, sched).ok());
        auto net = full_expand(inst);
        auto flow = project_mu(net, inst, sched);
        auto c = classify_violations(net, inst, flow);
        CHECK_FALSE(c.any());
        CHECK(c.added.empty());
        auto back = schedule_from_partial(net, inst, flow);
        CHECK(check_schedule(inst, back).ok());
        CHECK(makespan(back) == makespan(sched));
        CHECK_THROWS_AS(augment(net, inst, flow), std::logic_error);
    }
}

TEST_CASE("ub_horizon") {
    CHECK(ub_horizon(7.0, 0.0, 10) == 7);
    CHECK(ub_horizon(7.0, 0.1, 10) == 8);
    CHECK(ub_horizon(7.0, 1.0, 10) == 10);
    CHECK(ub_horizon(0.0, 0.0, 10) == 1);
}

TEST_CASE("compute_ub on a conflict the relaxation hides") {
    // Two packets on a unit arc of length 2; with copies {0,T} both may leave at 0.
    auto inst = fx::make({0, 0}, {{0, 1, 2, 1}}, {{0, 1}, {0, 1}}, 4);
    auto net = initial_partial(inst);
    auto flow = NetworkFlow::zeros(net, 2);
    int e = net.movement_index(0, 0);
    for (int k = 0; k < 2; ++k) {
        flow.move[k][e] = 1.0;
        flow.hold[k][net.holdover_index(1, 0)] = 1.0;
    }
    auto backend = make_backend("bnb");
    SolveParams p;
    p.rel_gap = 0.0;
    auto res = compute_ub(inst, net, flow, 2.0, 0.0, 4, *backend, p);
    CHECK(res.horizon == 2);
    CHECK(res.status == SolveStatus::infeasible);
    CHECK(res.ub == 4);
    CHECK_FALSE(res.schedule.has_value());
}

TEST_CASE("compute_ub echoes a schedule that already fits") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 6);
    auto sched = greedy_schedule(inst);
    auto net = full_expand(inst);
    auto flow = project_mu(net, inst, sched);
    auto backend = make_backend("bnb");
    SolveParams p;
    p.rel_gap = 0.0;
    auto res = compute_ub(inst, net, flow, 2.0, 0.0, 6, *backend, p);
    CHECK(res.ub == 2);
    REQUIRE(res.schedule.has_value());
    CHECK(res.schedule->trajectories == sched.trajectories);
}

TEST_CASE("solve_ddd stops at once when the first solution converts") {
    auto inst = fx::make({0, 0}, {{0, 1, 4, 1}}, {{0, 1}}, 4);
    auto res = solve_ddd(inst, 0.0, exact());
    CHECK(res.status == DddStatus::optimal);
    CHECK(res.iterations() == 1);
    CHECK(res.ub == 4);
}

TEST_CASE("solve_ddd on the congested fixture matches brute force") {
    auto inst = congested();
    REQUIRE(validate(inst).empty());
    auto res = solve_ddd(inst, 0.0, exact());
    auto bf = brute_force_optimum(inst);
    REQUIRE(bf.has_value());
    CHECK(res.status == DddStatus::optimal);
    REQUIRE(res.schedule.has_value());
    CHECK(makespan(*res.schedule) == *bf);
    CHECK(check_schedule(inst, *res.schedule).ok());
    for (const auto& r : res.records) {
        for (const auto& n : r.violations.added) CHECK(n.time <= *bf);
    }
    CHECK(res.records.front().violations.storage_arcs == 0);
}

TEST_CASE("solve_ddd reports infeasibility") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 2}, {1, 2, 1, 1}}, {{0, 2}, {0, 2}}, 2);
    CHECK(solve_ddd(inst, 0.0, exact()).status == DddStatus::infeasible);
}

TEST_CASE("alpha above zero stops within the gap") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        TinyParams p;
        p.seed = seed;
        p.k = 4;
        auto inst = gen_tiny(p);
        auto res = solve_ddd(inst, 0.25, exact());
        REQUIRE(res.status == DddStatus::optimal);
        CHECK(res.gap() <= 0.25 + 1e-12);
        CHECK(res.lb <= *brute_force_optimum(inst));
    }
}

TEST_CASE("two-phase agrees with single phase and its LP values never drop") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        TinyParams p;
        p.seed = seed;
        auto inst = gen_tiny(p);
        auto one = solve_ddd(inst, 0.0, exact());
        auto two = solve_two_phase(inst, 0.0, exact());
        REQUIRE(one.status == DddStatus::optimal);
        REQUIRE(two.status == DddStatus::optimal);
        CHECK(makespan(*one.schedule) == makespan(*two.schedule));
        double last = -1.0;
        for (const auto& r : two.records) {
            if (r.phase != 1) continue;
            CHECK(r.relaxation_value >= last - 1e-6);
            last = r.relaxation_value;
            for (const auto& n : r.violations.added) CHECK(n.time <= inst.horizon());
        }
    }
}

TEST_CASE("iteration callback sees every record") {
    auto inst = congested();
    int seen = 0;
    auto opts = exact();
    opts.on_iteration = [&](const RunRecord&) { ++seen; };
    auto res = solve_ddd(inst, 0.0, opts);
    CHECK(seen == res.iterations());
}

#include <doctest.h>

#include "fixtures.hpp"
#include "upr/expand.hpp"
#include "upr/gen.hpp"
#include "upr/schedule.hpp"

using namespace upr;

namespace {

TimeSet times_at(const Instance& inst, NodeId v, std::vector<int> ts) {
    TimeSet times(inst.num_nodes(), std::vector<int>{0, inst.horizon()});
    times[v] = std::move(ts);
    return times;
}

}  // namespace

TEST_CASE("full_expand counts") {
    auto one = fx::make({1}, {}, {}, 3);
    auto net = full_expand(one);
    CHECK(net.num_timed_nodes() == 4);
    CHECK(net.num_holdover() == 3);
    CHECK(net.num_movement() == 0);

    auto arc = fx::make({0, 0}, {{0, 1, 2, 1}}, {{0, 1}}, 3);
    auto full = full_expand(arc);
    REQUIRE(full.num_movement() == 2);
    CHECK(full.movement_index(0, 0) >= 0);
    CHECK(full.movement_index(0, 1) >= 0);
    CHECK(full.movement_index(0, 2) == -1);
}

TEST_CASE("full network has unit gaps, zero slack and original capacities") {
    TinyParams p;
    p.seed = 4;
    auto inst = gen_tiny(p);
    auto net = full_expand(inst);
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        for (int t = 0; t < inst.horizon(); ++t) {
            CHECK(net.next_time(v, t) == t + 1);
            CHECK(net.gap(v, t) == 1);
            CHECK(storage_slack(net, inst, v, t) == 0);
            CHECK(storage_bound_tight(net, inst, v, t) == inst.node(v).storage);
            CHECK(storage_bound_relaxed(net, inst, v, t) == inst.node(v).storage);
        }
    }
    for (const auto& e : net.movement_arcs()) {
        CHECK(e.capacity == inst.arc(e.base_arc).throughput);
        CHECK(e.to.time == e.from.time + inst.arc(e.base_arc).transit);
    }
    CHECK(check_properties(net, inst).empty());
}

TEST_CASE("initial_partial") {
    GeographicParams p = GeographicParams::defaults(30, 20, 0.01, 2);
    auto inst = gen_geographic(p);
    auto net = initial_partial(inst);
    CHECK(net.num_timed_nodes() == 40);
    for (const auto& e : net.movement_arcs()) {
        CHECK(e.from.time == 0);
        int tau = inst.arc(e.base_arc).transit;
        CHECK(e.to.time == (tau < inst.horizon() ? 0 : inst.horizon()));
    }
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        int h = net.holdover_index(v, 0);
        REQUIRE(h >= 0);
        CHECK(net.holdover(h).capacity == 2 * inst.node(v).storage + storage_slack(net, inst, v, 0));
    }
}

TEST_CASE("next_time and gap on sparse copies") {
    auto inst = fx::make({1, 1}, {{0, 1, 1, 1}}, {{0, 1}}, 9);
    auto net = build_arcs(times_at(inst, 0, {0, 5, 9}), inst);
    CHECK(net.next_time(0, 0) == 5);
    CHECK(net.next_time(0, 6) == 9);
    CHECK(net.gap(0, 0) == 5);
    CHECK(net.gap(0, 6) == 3);
    CHECK(net.gap_or_one(0, 9) == 1);
    CHECK_THROWS_AS(net.next_time(0, 9), std::out_of_range);
}

TEST_CASE("storage_slack with a gap-4 predecessor") {
    // w -> v with u = 2, tau = 1. Copies of w at {0, 4, T}; holdover at (v,1) sees departure (w,0).
    auto inst = fx::make({0, 3}, {{0, 1, 1, 2}}, {{0, 1}}, 8);
    TimeSet times{{0, 4, 8}, {0, 1, 5, 8}};
    auto net = build_arcs(times, inst);
    CHECK(storage_slack(net, inst, 1, 1) == 2 * (4 - 1));
}

TEST_CASE("storage bounds by formula") {
    // b = 5 at v; in-arc u = 4 whose predecessor gap is 2 gives U = 4; m_S(v,0) = 2.
    auto inst = fx::make({0, 5}, {{0, 1, 1, 4}}, {{0, 1}}, 4);
    TimeSet times{{0, 2, 4}, {0, 2, 4}};
    auto net = build_arcs(times, inst);
    // (v,2): the full-network predecessor (w,1) has gap 1; the arc from (w,2) lands here with gap 2.
    REQUIRE(storage_slack(net, inst, 1, 2) == 4);
    CHECK(storage_bound_relaxed(net, inst, 1, 2) == 2 * 5 + 4);
    CHECK(storage_bound_tight(net, inst, 1, 2) == 2 * 5 + 4);

    auto bufferless = fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 1}}, 3);
    CHECK(storage_bound_tight(full_expand(bufferless), bufferless, 1, 1) == 0);
}

TEST_CASE("blocking fixture storage bounds") {
    auto fx = gen_appendix_a();
    auto net = build_arcs(fx.times, fx.instance);
    CHECK(storage_slack(net, fx.instance, fx.w, 2) == 0);
    CHECK(storage_bound_tight(net, fx.instance, fx.w, 2) == 40);
    CHECK(fx.tight_w2 == 40);
    REQUIRE(net.gap(fx.w, 2) == 3);
    CHECK(storage_bound_relaxed(net, fx.instance, fx.w, 2) == 60);
    CHECK(fx.relaxed_w2 == 60);
}

TEST_CASE("CIR-OB yard bound on a star") {
    // Hub 0, clients 1 and 2 with unit storage; arcs hub->client tau 1 and client->hub tau 1.
    auto inst = fx::make({2, 1, 1}, {{0, 1, 1, 1}, {1, 0, 1, 1}, {0, 2, 1, 1}, {2, 0, 1, 1}}, {{1, 2}}, 6);
    auto full = full_expand(inst);
    CHECK(storage_bound_cir_ob(full, inst, 1, 2) == 1);

    TimeSet sparse{{0, 1, 2, 3, 4, 5, 6}, {0, 2, 6}, {0, 6}};
    auto net = build_arcs(sparse, inst);
    REQUIRE(storage_slack(net, inst, 1, 2) == 0);
    CHECK(storage_bound_cir_ob(net, inst, 1, 2) == 2);

    // (v,t+1) present but (hub,t) absent: unconstrained.
    TimeSet open{{0, 6}, {0, 2, 3, 6}, {0, 6}};
    auto net2 = build_arcs(open, inst);
    CHECK_FALSE(storage_bound_cir_ob(net2, inst, 1, 2).has_value());
}

TEST_CASE("tight bound never exceeds CIR-OB on random stars") {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        Rng rng = Rng::stream(seed, 0);
        int clients = static_cast<int>(rng.uniform(2, 4));
        int T = static_cast<int>(rng.uniform(4, 9));
        std::vector<int> storage{static_cast<int>(rng.uniform(0, 3))};
        std::vector<ArcData> arcs;
        for (int c = 1; c <= clients; ++c) {
            storage.push_back(1);
            arcs.push_back({0, c, static_cast<int>(rng.uniform(1, 2)), static_cast<int>(rng.uniform(1, 3))});
            arcs.push_back({c, 0, static_cast<int>(rng.uniform(1, 2)), static_cast<int>(rng.uniform(1, 3))});
        }
        auto inst = fx::make(storage, arcs, {{1, 2}}, T);
        TimeSet times(inst.num_nodes());
        for (auto& ts : times) {
            ts = {0};
            for (int t = 1; t < T; ++t) {
                if (rng.uniform(0, 1)) ts.push_back(t);
            }
            ts.push_back(T);
        }
        auto net = build_arcs(times, inst);
        for (NodeId v = 1; v <= clients; ++v) {
            for (int t : net.times(v)) {
                if (t >= T) continue;
                auto cir = storage_bound_cir_ob(net, inst, v, t);
                if (cir) CHECK(storage_bound_tight(net, inst, v, t) <= *cir);
            }
        }
    }
}

TEST_CASE("build_arcs with two copies compresses movement") {
    auto inst = fx::make({0, 0}, {{0, 1, 2, 3}}, {{0, 1}}, 5);
    auto net = initial_partial(inst);
    int e = net.movement_index(0, 0);
    REQUIRE(e >= 0);
    CHECK(net.movement(e).to == TimedNode{1, 0});
    CHECK(net.movement(e).capacity == 3 * 5);
}

TEST_CASE("project_mu scenarios") {
    // u -> v, tau 1; the packet leaves u at 1 and reaches v at 2.
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 1}}, 3);
    Schedule sched{3, {{0, {{0, 1, 2}}}}};

    auto identity = project_mu(full_expand(inst), inst, sched);
    auto full = full_expand(inst);
    CHECK(identity.move[0][full.movement_index(0, 1)] == 1.0);

    // Scenario 1: (u,1) kept, (v,2) dropped.
    auto s1 = build_arcs(TimeSet{{0, 1, 3}, {0, 1, 3}}, inst);
    int e1 = s1.movement_index(0, 1);
    REQUIRE(e1 >= 0);
    CHECK(s1.movement(e1).to == TimedNode{1, 1});
    CHECK(project_mu(s1, inst, sched).move[0][e1] == 1.0);

    // Scenario 2: (u,1) dropped, so the packet leaves (u,0) and lands on (v,1).
    auto s2 = build_arcs(TimeSet{{0, 3}, {0, 1, 3}}, inst);
    int e2 = s2.movement_index(0, 0);
    REQUIRE(e2 >= 0);
    CHECK(s2.movement(e2).to == TimedNode{1, 1});
    CHECK(project_mu(s2, inst, sched).move[0][e2] == 1.0);
}

TEST_CASE("random time sets satisfy the structural properties") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        TinyParams p;
        p.n = 5;
        p.seed = seed;
        auto inst = gen_tiny(p);
        Rng rng = Rng::stream(seed, 9);
        std::vector<TimedNode> extra;
        for (NodeId v = 0; v < inst.num_nodes(); ++v) {
            for (int t = 1; t < inst.horizon(); ++t) {
                if (rng.uniform(0, 2) == 0) extra.push_back({v, t});
            }
        }
        for (auto rule : {StorageRule::tight, StorageRule::relaxed}) {
            auto net = build_arcs(make_time_set(inst, extra), inst, rule);
            CHECK(check_properties(net, inst).empty());
        }
    }
}

TEST_CASE("insert_times reports only new nodes") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 1}}, 4);
    auto times = initial_times(inst);
    CHECK(insert_times(times, {{0, 2}, {0, 2}, {1, 0}}) == 1);
    CHECK(count_timed_nodes(times) == 5);
}

#include <doctest.h>

#include <algorithm>
#include <functional>

#include "fixtures.hpp"
#include "upr/gen.hpp"
#include "upr/instance.hpp"

using namespace upr;

namespace {

bool has_issue(const std::vector<InstanceViolation>& v, InstanceIssue issue) {
    return std::any_of(v.begin(), v.end(), [&](const auto& x) { return x.issue == issue; });
}

// Minimum transit over all simple paths, by plain enumeration.
int enumerate_min_transit(const Instance& inst, NodeId s, NodeId t) {
    int best = -1;
    std::vector<bool> seen(inst.num_nodes(), false);
    std::function<void(NodeId, int)> walk = [&](NodeId v, int d) {
        if (v == t) {
            if (best < 0 || d < best) best = d;
            return;
        }
        seen[v] = true;
        for (ArcId a : inst.out_arcs(v)) {
            if (!seen[inst.arc(a).head]) walk(inst.arc(a).head, d + inst.arc(a).transit);
        }
        seen[v] = false;
    };
    walk(s, 0);
    return best;
}

}  // namespace

TEST_CASE("validate accepts a single-arc instance") {
    auto inst = fx::make({0, 0}, {{0, 1, 2, 1}}, {{0, 1}}, 3);
    CHECK(validate(inst).empty());
}

TEST_CASE("validate flags a horizon below the shortest path") {
    auto inst = fx::make({0, 0}, {{0, 1, 2, 1}}, {{0, 1}}, 1);
    CHECK(has_issue(validate(inst), InstanceIssue::horizon_below_shortest_path));
}

TEST_CASE("validate flags an unreachable destination") {
    auto inst = fx::make({0, 0}, {{0, 1, 2, 1}}, {{1, 0}}, 5);
    CHECK(has_issue(validate(inst), InstanceIssue::destination_unreachable));
}

TEST_CASE("validate flags malformed data") {
    CHECK(has_issue(validate(fx::make({0, 0}, {{0, 1, -1, 1}}, {{0, 1}}, 3)), InstanceIssue::negative_transit));
    CHECK(has_issue(validate(fx::make({0, 0}, {{0, 1, 1, 0}}, {{0, 1}}, 3)), InstanceIssue::nonpositive_throughput));
    CHECK(has_issue(validate(fx::make({-1, 0}, {{0, 1, 1, 1}}, {{0, 1}}, 3)), InstanceIssue::negative_storage));
    CHECK(has_issue(validate(fx::make({0, 0}, {{0, 0, 1, 1}, {0, 1, 1, 1}}, {{0, 1}}, 3)), InstanceIssue::self_loop));
    CHECK(has_issue(validate(fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 0}}, 3)), InstanceIssue::trivial_commodity));
}

TEST_CASE("active_commodities") {
    // Three packets 0->2, 0->2, 1->3 over a 4-node line.
    auto inst = fx::make({1, 1, 1, 1}, {{0, 1, 1, 1}, {1, 2, 1, 1}, {2, 3, 1, 1}}, {{0, 3}, {0, 3}, {0, 3}}, 5);
    CHECK(active_commodities(inst, 0).empty());
    CHECK(active_commodities(inst, 1) == std::vector<int>{0, 1, 2});

    auto mixed = fx::make({1, 1, 1, 1}, {{0, 1, 1, 1}, {1, 2, 1, 1}, {2, 3, 1, 1}}, {{0, 2}, {0, 3}, {1, 3}}, 5);
    CHECK(active_commodities(mixed, 2) == std::vector<int>{1, 2});
}

TEST_CASE("shortest_transit") {
    auto inst = fx::make({0, 0, 0, 0}, {{0, 3, 5, 1}, {0, 1, 3, 1}, {1, 3, 3, 1}, {0, 2, 4, 1}}, {{0, 3}}, 10);
    CHECK(shortest_transit(inst, 0, 0)->transit == 0);
    CHECK(shortest_transit(inst, 0, 2)->transit == 4);
    CHECK(shortest_transit(inst, 0, 3)->transit == 5);
    CHECK(shortest_transit(inst, 0, 3)->transit == enumerate_min_transit(inst, 0, 3));
    CHECK_FALSE(shortest_transit(inst, 3, 0).has_value());
}

TEST_CASE("shortest_transit agrees with path enumeration on tiny instances") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        TinyParams p;
        p.n = 5;
        p.extra_arcs = 4;
        p.max_transit = 3;
        p.seed = seed;
        auto inst = gen_tiny(p);
        for (NodeId s = 0; s < inst.num_nodes(); ++s) {
            for (NodeId t = 0; t < inst.num_nodes(); ++t) {
                auto d = shortest_transit(inst, s, t);
                int e = enumerate_min_transit(inst, s, t);
                REQUIRE(d.has_value() == (e >= 0));
                if (d) CHECK(d->transit == e);
                if (auto path = shortest_path_arcs(inst, s, t)) {
                    int sum = 0;
                    for (ArcId a : *path) sum += inst.arc(a).transit;
                    CHECK(sum == d->transit);
                }
            }
        }
    }
}

TEST_CASE("capacity_ratio") {
    auto a = fx::make({0, 0}, {{0, 1, 1, 1}, {1, 0, 1, 1}}, {{0, 1}}, 3);
    CHECK(capacity_ratio(a) == Ratio{1, 1});
    auto b = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 2}, {2, 0, 1, 3}}, {{0, 1}, {0, 2}, {1, 2}, {2, 0}}, 3);
    CHECK(capacity_ratio(b) == Ratio{2, 1});
}

TEST_CASE("instance JSON round trip") {
    TinyParams p;
    p.seed = 9;
    auto inst = gen_tiny(p);
    auto back = instance_from_json(to_json(inst));
    CHECK(dump_instance(back) == dump_instance(inst));
}

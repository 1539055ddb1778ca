#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <set>

#include "upr/expand.hpp"
#include "upr/gen.hpp"
#include "upr/verify.hpp"

using namespace upr;

TEST_CASE("rng streams are deterministic and independent") {
    auto a = Rng::stream(7, kStreamArcs);
    auto b = Rng::stream(7, kStreamArcs);
    auto c = Rng::stream(7, kStreamPairs);
    bool differ = false;
    for (int i = 0; i < 100; ++i) {
        auto x = a.next();
        CHECK(x == b.next());
        differ = differ || x != c.next();
    }
    CHECK(differ);
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        auto v = r.uniform(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("city table and haversine") {
    const auto& cities = city_table();
    REQUIRE(cities.size() == 20);
    CHECK(cities.front().name == "New York");
    CHECK(haversine_miles(cities[0], cities[0]) == doctest::Approx(0.0));
    // New York to Los Angeles is roughly 2,450 great-circle miles.
    CHECK(haversine_miles(cities[0], cities[1]) == doctest::Approx(2450).epsilon(0.02));
}

TEST_CASE("geographic defaults") {
    auto p = GeographicParams::defaults(30, 200);
    CHECK(p.alpha1 == 1);
    CHECK(p.alpha2 == 2);
    CHECK(p.beta1 == 0);
    CHECK(p.beta2 == 2);
    auto inst = gen_geographic(p);
    CHECK(validate(inst).empty());
    CHECK(inst.num_nodes() == 20);
    CHECK(inst.num_arcs() == 30);
    CHECK(inst.num_commodities() == 200);

    int longest = 0;
    for (NodeId s = 0; s < 20; ++s) {
        for (NodeId t = 0; t < 20; ++t) {
            if (s == t) continue;
            if (auto d = shortest_transit(inst, s, t)) longest = std::max(longest, d->transit);
        }
    }
    const auto& cities = city_table();
    for (const auto& a : inst.arcs()) {
        CHECK(a.transit == static_cast<int>(std::ceil(haversine_miles(cities[a.tail], cities[a.head]) / 100.0)));
        CHECK(a.throughput >= 1);
        CHECK(a.throughput <= 2);
    }
    for (const auto& n : inst.nodes()) CHECK(n.storage <= 2);
    for (const auto& c : inst.commodities()) {
        auto d = shortest_transit(inst, c.origin, c.dest);
        REQUIRE(d.has_value());
        CHECK(d->hops >= 3);
        CHECK(d->transit <= 0.9 * longest + 1e-9);
    }
    auto ratio = capacity_ratio(inst);
    CHECK(inst.meta().params["capacity_ratio"]["num"] == ratio.num);
    CHECK(inst.meta().params["capacity_ratio"]["den"] == ratio.den);
}

TEST_CASE("geographic horizon defaults to a feasible greedy makespan") {
    auto inst = gen_geographic(GeographicParams::defaults(45, 40, 0.01, 3));
    auto sched = greedy_schedule(inst);
    auto rep = check_schedule(inst, sched);
    CHECK(rep.ok());
    CHECK(inst.horizon() == rep.makespan);
}

TEST_CASE("generators are deterministic by seed") {
    auto g = GeographicParams::defaults(30, 20, 0.01, 5);
    CHECK(dump_instance(gen_geographic(g)) == dump_instance(gen_geographic(g)));
    GeometricParams q;
    q.k = 20;
    q.seed = 5;
    CHECK(dump_instance(gen_geometric(q)) == dump_instance(gen_geometric(q)));
    TinyParams t;
    t.seed = 5;
    CHECK(dump_instance(gen_tiny(t)) == dump_instance(gen_tiny(t)));
    TinyParams u = t;
    u.seed = 6;
    CHECK(dump_instance(gen_tiny(t)) != dump_instance(gen_tiny(u)));
}

TEST_CASE("geometric family is sparse") {
    GeometricParams p;
    p.k = 30;
    p.p = 3;
    p.q = {1};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        p.seed = seed;
        auto inst = gen_geometric(p);
        CHECK(validate(inst).empty());
        const auto& coords = inst.meta().params["coordinates"];
        for (NodeId v = 0; v < inst.num_nodes(); ++v) {
            int long_range = 0;
            for (ArcId a : inst.out_arcs(v)) {
                const auto& arc = inst.arc(a);
                int dx = std::abs(coords[arc.tail][0].get<int>() - coords[arc.head][0].get<int>());
                int dy = std::abs(coords[arc.tail][1].get<int>() - coords[arc.head][1].get<int>());
                CHECK(arc.transit == dx + dy);
                if (dx + dy > p.p) ++long_range;
            }
            CHECK(long_range <= 1);
        }
    }
    GeometricParams bad;
    bad.l = 3;
    bad.n = 10;
    CHECK_THROWS_AS(gen_geometric(bad), std::invalid_argument);
}

TEST_CASE("geometric long-range endpoints are uniform at r = 0") {
    // With no local arcs every node draws one long-range head uniformly from the other four.
    GeometricParams p;
    p.l = 50;
    p.n = 5;
    p.k = 1;
    p.p = 0;
    p.q = {1};
    p.r = 0.0;
    p.delta = 1;
    p.gamma = 1.0;
    std::array<int, 5> count{};
    const int draws = 2000;
    for (int s = 1; s <= draws; ++s) {
        p.seed = static_cast<std::uint64_t>(s);
        auto inst = gen_geometric(p);
        REQUIRE(inst.out_arcs(0).size() == 1);
        ++count[inst.arc(inst.out_arcs(0).front()).head];
    }
    CHECK(count[0] == 0);
    double chi2 = 0.0;
    const double expect = draws / 4.0;
    for (int w = 1; w < 5; ++w) chi2 += (count[w] - expect) * (count[w] - expect) / expect;
    // 0.999 quantile of chi-square with 3 degrees of freedom.
    CHECK(chi2 < 16.27);
}

TEST_CASE("tiny instances validate and stay inside the limits") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        TinyParams p;
        p.seed = seed;
        auto inst = gen_tiny(p);
        CHECK(validate(inst).empty());
        CHECK(inst.horizon() <= p.max_horizon);
        CHECK(inst.num_nodes() == p.n);
        CHECK(inst.num_commodities() == p.k);
    }
}

TEST_CASE("blocking fixture layout") {
    auto fx = gen_appendix_a();
    const auto& inst = fx.instance;
    CHECK(inst.num_commodities() == 50);
    CHECK(inst.node(fx.w).storage == 20);
    CHECK(inst.node(fx.v).storage == 20);
    CHECK(fx.times[fx.w] == std::vector<int>{0, 1, 2, 5});
    // Blocking: 50 packets must fit through (w,2) in the relaxation, which the tight bound forbids.
    CHECK(fx.tight_w2 < 50);
    CHECK(50 <= fx.relaxed_w2);
}

TEST_CASE("generate dispatches by family") {
    CHECK(generate("tiny", {{"seed", 3}}).num_nodes() == 4);
    CHECK(generate("geographic", {{"m", 30}, {"k", 20}}).num_arcs() == 30);
    CHECK(generate("appendix_a", nlohmann::json::object()).num_commodities() == 50);
    CHECK_THROWS_AS(generate("nope", nlohmann::json::object()), std::invalid_argument);
}

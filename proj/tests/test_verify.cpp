#include <doctest.h>

#include "fixtures.hpp"
#include "support/perturb.hpp"
#include "upr/models.hpp"
#include "upr/verify.hpp"

using namespace upr;

namespace {

Schedule full_incumbent(const Instance& inst) {
    auto model = build_full(inst);
    SolveParams p;
    p.rel_gap = 0.0;
    auto res = make_backend("bnb")->solve(model.mip, p);
    REQUIRE(res.status == SolveStatus::optimal);
    return extract_schedule(inst, model, res.x);
}

}  // namespace

TEST_CASE("simultaneous departures on a unit arc") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {{0, 1}, {0, 1}}, 3);
    Schedule s{3, {{0, {{0, 0, 1}}}, {1, {{0, 0, 1}}}}};
    auto rep = check_schedule(inst, s);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == ViolationKind::throughput);

    s.trajectories[1].moves[0] = {0, 1, 2};
    rep = check_schedule(inst, s);
    CHECK(rep.ok());
    CHECK(rep.makespan == 2);
}

TEST_CASE("parking at a bufferless intermediate node") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 4);
    Schedule s{4, {{0, {{0, 0, 1}, {1, 2, 3}}}}};
    auto rep = check_schedule(inst, s);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == ViolationKind::storage);
    CHECK(rep.violations[0].node == 1);
}

TEST_CASE("waiting at the origin or destination is free") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 4);
    Schedule s{4, {{0, {{0, 2, 3}, {1, 3, 4}}}}};
    CHECK(check_schedule(inst, s).ok());
}

TEST_CASE("structural violations") {
    auto inst = fx::make({1, 1, 1}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 4);
    CHECK(check_schedule(inst, Schedule{4, {{0, {{0, 0, 2}, {1, 2, 3}}}}}).kinds() ==
          std::vector<ViolationKind>{ViolationKind::timing});
    CHECK(check_schedule(inst, Schedule{4, {{0, {{0, 3, 4}, {1, 4, 5}}}}}).kinds() ==
          std::vector<ViolationKind>{ViolationKind::timing});
    CHECK(check_schedule(inst, Schedule{4, {{0, {{0, 1, 2}, {1, 0, 1}}}}}).kinds() ==
          std::vector<ViolationKind>{ViolationKind::flow});
    CHECK(check_schedule(inst, Schedule{4, {{0, {{0, 0, 1}}}}}).kinds() ==
          std::vector<ViolationKind>{ViolationKind::endpoint});
    CHECK(check_schedule(inst, Schedule{4, {}}).kinds() == std::vector<ViolationKind>{ViolationKind::endpoint});
    CHECK_THROWS_AS(check_schedule(inst, Schedule{4, {{0, {{7, 0, 1}}}}}), std::invalid_argument);
}

TEST_CASE("brute force on small fixtures") {
    auto one = fx::make({0, 0, 0}, {{0, 1, 2, 1}, {1, 2, 2, 1}, {0, 2, 5, 1}}, {{0, 2}}, 8);
    CHECK(brute_force_optimum(one) == 4);

    auto pair = fx::make({0, 5, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{1, 2}, {1, 2}}, 4);
    Schedule witness;
    CHECK(brute_force_optimum(pair, {}, &witness) == 2);
    CHECK(check_schedule(pair, witness).ok());

    auto stuck = fx::make({0, 0, 0}, {{0, 1, 1, 2}, {1, 2, 1, 1}}, {{0, 2}, {0, 2}}, 2);
    CHECK_FALSE(brute_force_optimum(stuck).has_value());
}

TEST_CASE("brute force refuses oversized input") {
    TinyParams p;
    p.n = 6;
    auto inst = gen_tiny(p);
    BruteLimits limits;
    limits.max_nodes = 5;
    CHECK_THROWS_AS(brute_force_optimum(inst, limits), std::length_error);
    limits = {};
    limits.max_expansions = 10;
    CHECK_THROWS_AS(brute_force_optimum(inst, limits), std::length_error);
}

TEST_CASE("brute force agrees with the full model") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        TinyParams p;
        p.seed = seed;
        auto inst = gen_tiny(p);
        auto s = full_incumbent(inst);
        CHECK(check_schedule(inst, s).ok());
        CHECK(brute_force_optimum(inst) == makespan(s));
    }
}

TEST_CASE("each perturbation yields exactly its own violation kind") {
    int made = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        TinyParams p;
        p.seed = seed;
        p.n = 5;
        p.k = 5;
        auto inst = gen_tiny(p);
        auto s = full_incumbent(inst);
        Rng rng = Rng::stream(seed, 21);
        for (auto kind : {ViolationKind::flow, ViolationKind::timing, ViolationKind::endpoint,
                          ViolationKind::throughput, ViolationKind::storage}) {
            auto c = perturb::apply(kind, inst, s, rng);
            if (!c) continue;
            ++made;
            CHECK(check_schedule(c->instance, c->schedule).kinds() == std::vector<ViolationKind>{kind});
        }
    }
    CHECK(made >= 60);
}

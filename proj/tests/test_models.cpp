#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "upr/expand.hpp"
#include "upr/gen.hpp"
#include "upr/models.hpp"
#include "upr/verify.hpp"

using namespace upr;

namespace {

SolveResult solve_exact(const MipModel& m, const std::string& backend = "bnb") {
    SolveParams p;
    p.rel_gap = 0.0;
    return make_backend(backend)->solve(m, p);
}

int full_optimum(const Instance& inst, const std::string& backend = "bnb") {
    auto res = solve_exact(build_full(inst).mip, backend);
    REQUIRE(res.status == SolveStatus::optimal);
    return static_cast<int>(std::lround(res.objective));
}

TinyParams tiny(std::uint64_t seed) {
    TinyParams p;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("build_full on a forced two-arc path") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 2);
    CHECK(full_optimum(inst) == 2);
}

TEST_CASE("build_full with two packets on a unit arc") {
    // Both start at m; one leaves at 0 and the other waits at its origin.
    auto inst = fx::make({0, 5, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{1, 2}, {1, 2}}, 2);
    CHECK(full_optimum(inst) == 2);
    CHECK(brute_force_optimum(inst) == 2);
}

TEST_CASE("build_full with a bufferless middle node") {
    // x -> m (u = 2), m -> t (u = 1), b_m = 0: the second packet must wait at x.
    auto tight = fx::make({0, 0, 0}, {{0, 1, 1, 2}, {1, 2, 1, 1}}, {{0, 2}, {0, 2}}, 2);
    CHECK(solve_exact(build_full(tight).mip).status == SolveStatus::infeasible);
    auto loose = tight.with_horizon(3);
    CHECK(full_optimum(loose) == 3);
    CHECK(brute_force_optimum(loose) == 3);
}

TEST_CASE("extracted full-model schedules pass the checker") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        auto inst = gen_tiny(tiny(seed));
        auto model = build_full(inst);
        auto res = solve_exact(model.mip);
        REQUIRE(res.status == SolveStatus::optimal);
        auto sched = extract_schedule(inst, model, res.x);
        auto rep = check_schedule(inst, sched);
        CHECK(rep.ok());
        CHECK(rep.makespan == std::lround(res.objective));
        // The schedule maps back to a feasible point of the same model.
        auto x = point_from_schedule(inst, model, sched);
        CHECK(model.mip.violated_rows(x).empty());
        CHECK(model.mip.bounds_ok(x));
    }
}

TEST_CASE("partial model at saturation matches the full model") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto inst = gen_tiny(tiny(seed));
        CHECK(canonical_form(build_partial(full_expand(inst), inst).mip) == canonical_form(build_full(inst).mip));
    }
}

TEST_CASE("partial models bound the full optimum from below") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        auto inst = gen_tiny(tiny(seed));
        int opt = full_optimum(inst);
        // Timing rows price each arc at its true length, so the last arc into a destination is paid in full.
        int lb_path = 0;
        for (const auto& c : inst.commodities()) {
            int last = inst.horizon();
            for (ArcId a : inst.in_arcs(c.dest)) last = std::min(last, inst.arc(a).transit);
            lb_path = std::max(lb_path, last);
        }

        auto initial = solve_exact(build_partial(initial_partial(inst), inst).mip);
        REQUIRE(initial.status == SolveStatus::optimal);
        CHECK(initial.objective >= lb_path - 1e-6);
        CHECK(initial.objective <= opt + 1e-6);

        Rng rng = Rng::stream(seed, 11);
        std::vector<TimedNode> extra;
        for (NodeId v = 0; v < inst.num_nodes(); ++v) {
            for (int t = 1; t < inst.horizon(); ++t) {
                if (rng.uniform(0, 1)) extra.push_back({v, t});
            }
        }
        auto res = solve_exact(build_partial(build_arcs(make_time_set(inst, extra), inst), inst).mip);
        REQUIRE(res.status == SolveStatus::optimal);
        CHECK(res.objective <= opt + 1e-6);
    }
}

TEST_CASE("fixed-path model on shortest paths") {
    auto inst = fx::make({0, 0, 0}, {{0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}}, 4);
    std::vector<std::vector<ArcId>> paths{*shortest_path_arcs(inst, 0, 2)};
    auto at_opt = build_fixed_paths(inst, paths, 2);
    auto res = solve_exact(at_opt.mip);
    REQUIRE(res.status == SolveStatus::optimal);
    CHECK(std::lround(res.objective) == 2);
    CHECK(check_schedule(inst, extract_schedule(inst, at_opt, res.x)).ok());

    auto below = build_fixed_paths(inst, paths, 1);
    CHECK(solve_exact(below.mip).status == SolveStatus::infeasible);
    CHECK_THROWS_AS(build_fixed_paths(inst, {{0}}, 2), std::invalid_argument);
}

TEST_CASE("pooled fixed-path arc sets contain the single-path region") {
    // Two routes s -> t: direct (tau 3) and via m (tau 1 + 1), both unit throughput.
    auto inst = fx::make({0, 0, 0}, {{0, 2, 3, 1}, {0, 1, 1, 1}, {1, 2, 1, 1}}, {{0, 2}, {0, 2}, {0, 2}}, 6);
    std::vector<std::vector<ArcId>> single(3, {1, 2});
    std::vector<std::vector<ArcId>> pooled(3, {0, 1, 2});
    auto a = solve_exact(build_fixed_paths(inst, single, 6).mip);
    auto b = solve_exact(build_fixed_paths(inst, pooled, 6).mip);
    REQUIRE(a.status == SolveStatus::optimal);
    REQUIRE(b.status == SolveStatus::optimal);
    CHECK(b.objective <= a.objective + 1e-6);

    // Every single-path solution is a pooled solution once mapped by name.
    auto ms = build_fixed_paths(inst, single, 6);
    auto mp = build_fixed_paths(inst, pooled, 6);
    auto xs = solve_exact(ms.mip).x;
    auto sched = extract_schedule(inst, ms, xs);
    auto xp = point_from_schedule(inst, mp, sched);
    CHECK(mp.mip.violated_rows(xp).empty());
}

TEST_CASE("backends agree on tiny full models") {
    auto names = available_backends();
    if (std::find(names.begin(), names.end(), "highs") == names.end()) return;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto inst = gen_tiny(tiny(seed));
        CHECK(full_optimum(inst, "bnb") == full_optimum(inst, "highs"));
    }
}

TEST_CASE("empty commodity set gives only the makespan column") {
    auto inst = fx::make({0, 0}, {{0, 1, 1, 1}}, {}, 3);
    auto model = build_full(inst);
    CHECK(model.mip.num_vars() == 1);
    CHECK(model.makespan_var == 0);
}

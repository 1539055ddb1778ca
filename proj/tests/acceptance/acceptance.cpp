// Acceptance checks: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/perturb.hpp"
#include "upr/bench.hpp"
#include "upr/ddd.hpp"
#include "upr/expand.hpp"
#include "upr/gen.hpp"
#include "upr/models.hpp"
#include "upr/verify.hpp"

using namespace upr;

namespace {

// Pinned tolerances.
constexpr double kIntegralTol = 1e-6;  // rounding a MIP objective to its integer makespan
constexpr double kLpDropTol = 1e-6;    // allowed decrease between consecutive phase-1 LP values
constexpr double kRowTol = 1e-9;       // row and bound slack when checking a projected point

// Instance counts.
constexpr int kSoundnessInstances = 100;
constexpr int kMuPairs = 500;
constexpr int kExactInstances = 40;
constexpr int kSaturationInstances = 20;
constexpr int kTwoPhaseInstances = 10;
constexpr int kOracleInstances = 50;
constexpr int kPerturbPerKind = 20;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Ctx {
    std::string backend;
    int geo_seeds = 3;
    double geo_time_limit = 300.0;
    int workers = 1;
};

SolveParams exact_params() {
    SolveParams p;
    p.rel_gap = 0.0;
    return p;
}

DddOptions exact_ddd(const Ctx& ctx) {
    DddOptions o;
    o.backend = ctx.backend;
    o.rel_gap = 0.0;
    return o;
}

// Optimal makespan of a model, nullopt when infeasible. Throws on anything else.
std::optional<int> optimum(SolverBackend& be, const MipModel& mip) {
    auto res = be.solve(mip, exact_params());
    if (res.status == SolveStatus::infeasible) return std::nullopt;
    if (res.status != SolveStatus::optimal) throw std::runtime_error("backend: " + to_string(res.status));
    double r = std::round(res.objective);
    if (std::abs(r - res.objective) > kIntegralTol) throw std::runtime_error("non-integral makespan");
    return static_cast<int>(r);
}

Instance tiny(std::uint64_t seed, int n, int k, int min_transit = 1) {
    TinyParams p;
    p.seed = seed;
    p.n = n;
    p.k = k;
    p.min_transit = min_transit;
    return gen_tiny(p);
}

std::string str(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string("none"); }

Outcome relaxation_soundness(const Ctx& ctx) {
    Outcome o;
    auto be = make_backend(ctx.backend);
    int iterations = 0, feasible = 0;
    for (int i = 1; i <= kSoundnessInstances; ++i) {
        auto inst = tiny(1000 + i, 5, 4);
        auto full = optimum(*be, build_full(inst).mip);
        if (full) ++feasible;
        auto res = solve_ddd(inst, 0.0, exact_ddd(ctx));
        // Replay the time sets the loop visited and solve each partial model afresh.
        TimeSet times = initial_times(inst);
        for (const auto& rec : res.records) {
            ++iterations;
            auto net = build_arcs(times, inst);
            if (net.num_timed_nodes() != rec.timed_nodes) {
                o.pass = false;
                o.detail = "replay diverged on seed " + std::to_string(1000 + i);
                return o;
            }
            auto part = optimum(*be, build_partial(net, inst).mip);
            bool ok = full ? (part && *part <= *full) : true;
            if (!ok) {
                o.pass = false;
                o.detail = "seed " + std::to_string(1000 + i) + " iteration " + std::to_string(rec.iteration) +
                           ": partial " + str(part) + " > full " + str(full);
                return o;
            }
            insert_times(times, rec.violations.added);
        }
    }
    o.detail = std::to_string(kSoundnessInstances) + " instances (" + std::to_string(feasible) + " feasible), " +
               std::to_string(iterations) + " iterations, partial optimum <= full optimum throughout";
    return o;
}

// Random time set: each interior copy kept with probability keep/4.
TimeSet random_times(const Instance& inst, Rng& rng, int keep) {
    std::vector<TimedNode> extra;
    for (NodeId v = 0; v < inst.num_nodes(); ++v)
        for (int t = 1; t < inst.horizon(); ++t)
            if (rng.uniform(0, 3) < keep) extra.push_back({v, t});
    return make_time_set(inst, extra);
}

Outcome mu_lemmas(const Ctx& ctx) {
    Outcome o;
    auto be = make_backend(ctx.backend);
    int pairs = 0, bad = 0;
    std::string first;
    for (std::uint64_t seed = 1; pairs < kMuPairs; ++seed) {
        auto inst = tiny(2000 + seed, 5, 5);
        std::vector<Schedule> scheds;
        auto model = build_full(inst);
        auto res = be->solve(model.mip, exact_params());
        if (res.has_solution()) scheds.push_back(extract_schedule(inst, model, res.x));
        auto greedy = greedy_schedule(inst);
        if (makespan(greedy) <= inst.horizon()) scheds.push_back(greedy);
        Rng rng = Rng::stream(seed, 31);
        for (const auto& s : scheds) {
            if (!check_schedule(inst, s).ok()) continue;
            for (int keep = 0; keep < 4; ++keep) {
                for (auto rule : {StorageRule::tight, StorageRule::relaxed}) {
                    auto net = build_arcs(random_times(inst, rng, keep), inst, rule);
                    ++pairs;
                    std::string why;
                    if (!check_properties(net, inst).empty()) why = "time set breaks P1-P4";
                    auto flow = project_mu(net, inst, s);
                    auto pm = build_partial(net, inst);
                    auto x = point_from_flow(pm, flow, makespan(s));
                    if (why.empty() && !pm.mip.violated_rows(x, kRowTol).empty())
                        why = "row " + pm.mip.row(pm.mip.violated_rows(x, kRowTol).front()).name + " violated";
                    if (why.empty() && !pm.mip.bounds_ok(x, kRowTol)) why = "bounds violated";
                    if (why.empty() && final_arrival(net, inst, flow) > makespan(s)) why = "makespan grew";
                    if (!why.empty()) {
                        ++bad;
                        if (first.empty()) first = " (first: seed " + std::to_string(2000 + seed) + ", " + why + ")";
                    }
                }
            }
        }
    }
    o.pass = bad == 0;
    o.detail = std::to_string(pairs) + " schedule/time-set pairs, " + std::to_string(bad) + " violations" + first;
    return o;
}

struct ExactRun {
    Instance inst;
    int t_star = 0;
    DddResult res;
};

std::vector<ExactRun> exact_runs(const Ctx& ctx, std::string& error) {
    static std::vector<ExactRun> cache;
    static std::string cached_error;
    static bool done = false;
    if (done) {
        error = cached_error;
        return cache;
    }
    done = true;
    auto be = make_backend(ctx.backend);
    for (int i = 1; i <= kExactInstances; ++i) {
        // Every fourth instance allows zero transit times.
        auto inst = tiny(3000 + i, 5, 4, i % 4 == 0 ? 0 : 1);
        auto bf = brute_force_optimum(inst);
        auto full = optimum(*be, build_full(inst).mip);
        auto res = solve_ddd(inst, 0.0, exact_ddd(ctx));
        std::optional<int> ddd;
        if (res.status == DddStatus::optimal && res.schedule) ddd = makespan(*res.schedule);
        if (bf != full || ddd != full) {
            if (cached_error.empty())
                cached_error = "seed " + std::to_string(3000 + i) + ": ddd " + str(ddd) + ", brute " + str(bf) +
                               ", full " + str(full);
            continue;
        }
        if (!full) continue;
        if (!check_schedule(inst, *res.schedule).ok() && cached_error.empty())
            cached_error = "seed " + std::to_string(3000 + i) + ": DDD schedule rejected by the checker";
        cache.push_back({inst, *full, std::move(res)});
    }
    error = cached_error;
    return cache;
}

Outcome ddd_exactness(const Ctx& ctx) {
    Outcome o;
    std::string err;
    auto runs = exact_runs(ctx, err);
    int over = 0, max_iter = 0;
    for (const auto& r : runs) {
        max_iter = std::max(max_iter, r.res.iterations());
        if (r.res.iterations() > r.inst.num_nodes() * r.t_star) ++over;
    }
    o.pass = err.empty() && static_cast<int>(runs.size()) >= 30 && over == 0;
    o.detail = std::to_string(runs.size()) + " feasible instances agree across DDD, brute force and the full model; " +
               "max iterations " + std::to_string(max_iter) + ", " + std::to_string(over) + " over |N| T*";
    if (!err.empty()) o.detail += "; mismatch: " + err;
    return o;
}

Outcome node_time_bound(const Ctx& ctx) {
    Outcome o;
    std::string err;
    auto runs = exact_runs(ctx, err);
    int added = 0, exceptions = 0, zero_tau = 0, alt_extra = 0;
    for (const auto& r : runs) {
        bool positive = r.inst.all_transits_positive();
        if (!positive) ++zero_tau;
        int limit = positive ? r.t_star : r.t_star + 1;
        for (const auto& rec : r.res.records) {
            alt_extra += rec.violations.storage_alt_extra;
            for (const auto& n : rec.violations.added) {
                ++added;
                if (n.time > limit) ++exceptions;
            }
        }
    }
    o.pass = !runs.empty() && exceptions == 0;
    o.detail = std::to_string(added) + " added timed nodes over " + std::to_string(runs.size()) + " runs (" +
               std::to_string(zero_tau) + " with zero transit), " + std::to_string(exceptions) + " exceptions; " +
               "storage-rule nodes only the in-network predecessor reading would add: " + std::to_string(alt_extra);
    return o;
}

Outcome blocking_storage(const Ctx&) {
    Outcome o;
    auto fx = gen_appendix_a();
    const int packets = fx.instance.num_commodities();
    auto net = build_arcs(fx.times, fx.instance);
    int tight = storage_bound_tight(net, fx.instance, fx.w, 2);
    int min_relaxed = std::numeric_limits<int>::max(), copies = 0;
    for (int t : net.times(fx.w)) {
        if (t >= net.horizon() || net.gap(fx.w, t) < 3) continue;
        ++copies;
        min_relaxed = std::min(min_relaxed, storage_bound_relaxed(net, fx.instance, fx.w, t));
    }
    o.pass = tight == 40 && copies > 0 && min_relaxed >= 60 && tight < packets && packets <= min_relaxed;
    o.detail = "tight at (w,2) = " + std::to_string(tight) + ", min relaxed over " + std::to_string(copies) +
               " copies with gap >= 3 = " + std::to_string(min_relaxed) + ", packets = " + std::to_string(packets);
    return o;
}

Outcome saturation(const Ctx&) {
    Outcome o;
    int equal = 0;
    for (int i = 1; i <= kSaturationInstances; ++i) {
        auto inst = tiny(4000 + i, 2 + i % 5, 1 + i % 8, i % 3 == 0 ? 0 : 1);
        auto a = canonical_form(build_partial(full_expand(inst), inst).mip);
        auto b = canonical_form(build_full(inst).mip);
        if (a == b) ++equal;
        else if (o.detail.empty()) o.detail = "first mismatch on seed " + std::to_string(4000 + i) + "; ";
    }
    o.pass = equal == kSaturationInstances;
    o.detail += std::to_string(equal) + "/" + std::to_string(kSaturationInstances) + " canonical forms equal";
    return o;
}

Outcome two_phase(const Ctx& ctx) {
    Outcome o;
    int agree = 0, drops = 0, lp_iters = 0;
    for (int i = 1; i <= kTwoPhaseInstances; ++i) {
        auto inst = tiny(5000 + i, 5, 5);
        auto one = solve_ddd(inst, 0.0, exact_ddd(ctx));
        auto two = solve_two_phase(inst, 0.0, exact_ddd(ctx));
        if (one.schedule && two.schedule && makespan(*one.schedule) == makespan(*two.schedule)) ++agree;
        else if (one.status == DddStatus::infeasible && two.status == DddStatus::infeasible) ++agree;
        double last = -std::numeric_limits<double>::infinity();
        for (const auto& r : two.records) {
            if (r.phase != 1) continue;
            ++lp_iters;
            if (r.relaxation_value < last - kLpDropTol) ++drops;
            last = r.relaxation_value;
        }
    }
    o.pass = agree == kTwoPhaseInstances && drops == 0;
    o.detail = std::to_string(agree) + "/" + std::to_string(kTwoPhaseInstances) + " makespans agree, " +
               std::to_string(lp_iters) + " phase-1 iterations, " + std::to_string(drops) + " LP decreases";
    return o;
}

Outcome trends(const Ctx& ctx) {
    Outcome o;
    BenchConfig cfg;
    std::vector<std::uint64_t> seeds;
    for (int s = 1; s <= ctx.geo_seeds; ++s) seeds.push_back(s);
    cfg.instances = geographic_matrix({30, 45, 60}, {20, 40, 60}, seeds);
    cfg.methods = {Method::ddd};
    cfg.ub_factors = {1.0, 1.5, 2.0};
    cfg.time_limit_s = ctx.geo_time_limit;
    cfg.tstar_time_limit_s = 2 * ctx.geo_time_limit;
    cfg.backend = ctx.backend;
    cfg.workers = ctx.workers;
    auto res = run_bench(cfg);
    if (!res.errors.empty()) {
        o.pass = false;
        o.detail = "errors: " + res.errors.front();
        return o;
    }
    std::map<std::string, std::map<double, std::pair<double, int>>> cell;
    int first_sto = 0, limits = 0;
    for (const auto& r : res.rows) {
        auto& acc = cell[r.group][r.ub_factor];
        acc.first += r.ns_ratio;
        ++acc.second;
        first_sto += r.first_iter_sto_viol;
        if (r.hit_limit()) ++limits;
    }
    int monotone = 0;
    std::ostringstream means;
    for (const auto& [group, by_factor] : cell) {
        std::vector<double> m;
        for (const auto& [f, acc] : by_factor) m.push_back(acc.first / acc.second);
        bool dec = m.size() == 3 && m[0] > m[1] && m[1] > m[2];
        if (dec) ++monotone;
        char buf[96];
        std::snprintf(buf, sizeof buf, " %s %.4f/%.4f/%.4f", group.c_str(), m.size() > 0 ? m[0] : 0.0,
                      m.size() > 1 ? m[1] : 0.0, m.size() > 2 ? m[2] : 0.0);
        means << buf;
    }
    o.pass = monotone == 9 && first_sto == 0;
    o.detail = std::to_string(monotone) + "/9 cells strictly decreasing, iteration-1 storage violations " +
               std::to_string(first_sto) + ", " + std::to_string(limits) + " runs at the time limit;" + means.str();
    return o;
}

Outcome oracle(const Ctx& ctx) {
    Outcome o;
    auto be = make_backend(ctx.backend);
    int agree = 0, accepted = 0, incumbents = 0;
    std::map<ViolationKind, int> made, exact;
    const std::vector<ViolationKind> kinds = {ViolationKind::flow, ViolationKind::throughput, ViolationKind::storage,
                                              ViolationKind::timing, ViolationKind::endpoint};
    auto enough = [&] {
        return std::all_of(kinds.begin(), kinds.end(), [&](auto k) { return made[k] >= kPerturbPerKind; });
    };
    for (int i = 1; i <= kOracleInstances || (!enough() && i <= 20 * kOracleInstances); ++i) {
        auto inst = tiny(6000 + i, 5, 5);
        auto model = build_full(inst);
        auto res = be->solve(model.mip, exact_params());
        std::optional<int> full;
        std::optional<Schedule> s;
        if (res.status == SolveStatus::optimal) {
            s = extract_schedule(inst, model, res.x);
            full = makespan(*s);
        }
        if (i <= kOracleInstances) {
            if (brute_force_optimum(inst) == full) ++agree;
            else if (o.detail.empty()) o.detail = "brute/full mismatch on seed " + std::to_string(6000 + i) + "; ";
        }
        if (!s) continue;
        ++incumbents;
        if (check_schedule(inst, *s).ok()) ++accepted;
        Rng rng = Rng::stream(6000 + i, 41);
        for (auto kind : kinds) {
            if (made[kind] >= kPerturbPerKind) continue;
            auto c = perturb::apply(kind, inst, *s, rng);
            if (!c) continue;
            ++made[kind];
            if (check_schedule(c->instance, c->schedule).kinds() == std::vector<ViolationKind>{kind}) ++exact[kind];
        }
    }
    int total = 0, total_exact = 0;
    for (auto k : kinds) {
        total += std::min(made[k], kPerturbPerKind);
        total_exact += exact[k];
    }
    o.pass = agree == kOracleInstances && accepted == incumbents && enough() && total_exact == total;
    o.detail += std::to_string(agree) + "/" + std::to_string(kOracleInstances) + " optima agree, " +
                std::to_string(accepted) + "/" + std::to_string(incumbents) + " incumbents accepted, " +
                std::to_string(total_exact) + "/" + std::to_string(total) + " perturbations flagged with their kind only";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> only;
    Ctx ctx;
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    app.add_option("--backend", ctx.backend, "Solver backend");
    app.add_option("--geo-seeds", ctx.geo_seeds, "Seeds per geographic cell");
    app.add_option("--geo-time-limit", ctx.geo_time_limit, "Seconds per geographic run");
    app.add_option("--workers", ctx.workers, "Parallel geographic runs");
    CLI11_PARSE(app, argc, argv);
    if (ctx.backend.empty()) ctx.backend = default_backend_name();

    const std::vector<std::pair<std::string, std::function<Outcome(const Ctx&)>>> criteria = {
        {"relaxation soundness", relaxation_soundness},
        {"mu-map lemmas", mu_lemmas},
        {"DDD exactness", ddd_exactness},
        {"node-time bound", node_time_bound},
        {"blocking storage arithmetic", blocking_storage},
        {"equivalence at saturation", saturation},
        {"two-phase consistency", two_phase},
        {"trend reproduction", trends},
        {"oracle agreement", oracle},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second(ctx);
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!out.pass) ++failed;
        std::printf("criterion %d %s: %s [%s] (%.1f s)\n", id, out.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

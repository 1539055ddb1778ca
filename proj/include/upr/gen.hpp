#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "upr/expand.hpp"
#include "upr/instance.hpp"
#include "upr/schedule.hpp"

namespace upr {

/// SplitMix64. Stream s of seed x starts from state mix(x + (s + 1) * 0x9E3779B97F4A7C15),
/// where mix is one SplitMix64 output step, so each generation stage draws from its own
/// sequence and changing the draws of one stage leaves the others untouched.
class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}
    static Rng stream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform integer in [lo, hi], unbiased by rejection.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);
    /// Uniform double in [0, 1) from the top 53 bits.
    double unit();

private:
    std::uint64_t state_;
};

enum GenStream : std::uint64_t {
    kStreamArcs = 0,
    kStreamThroughput = 1,
    kStreamStorage = 2,
    kStreamPairs = 3,
    kStreamPlacement = 4,
    kStreamTransit = 5,
};

struct City {
    std::string name;
    double latitude = 0.0;
    double longitude = 0.0;
};

/// Bundled table of the 20 most populous US cities.
const std::vector<City>& city_table();

double haversine_miles(const City& a, const City& b);

struct GeographicParams {
    int n = 20;
    int m = 30;
    int k = 200;
    int alpha1 = 1, alpha2 = 2;  // throughput bounds
    int beta1 = 0, beta2 = 2;    // storage bounds
    int delta = 3;
    double gamma = 0.9;
    int horizon = 0;  // 0 selects the greedy sequential makespan
    int max_graph_draws = 100;
    std::uint64_t seed = 1;

    /// Defaults for k: capacity bounds (1, ceil(frac k)) and (0, ceil(frac k)).
    static GeographicParams defaults(int m, int k, double frac = 0.01, std::uint64_t seed = 1);
};

struct GeometricParams {
    int l = 25;
    int n = 20;
    int k = 200;
    int p = 3;
    std::vector<int> q = {1};
    double r = 0.5;
    int alpha1 = 1, alpha2 = 2;
    int beta1 = 0, beta2 = 2;
    int delta = 3;
    double gamma = 0.9;
    int horizon = 0;
    int max_graph_draws = 100;
    std::uint64_t seed = 1;
};

struct TinyParams {
    int n = 4;
    int k = 3;
    int extra_arcs = 2;
    int min_transit = 1;
    int max_transit = 2;
    int max_throughput = 2;
    int max_storage = 1;
    int max_horizon = 10;
    int slack = 1;  // horizon = greedy makespan + slack, capped at max_horizon
    std::uint64_t seed = 1;
};

/// Throws std::runtime_error when no OD pair qualifies within the budgets.
Instance gen_geographic(const GeographicParams& params);
/// Throws std::invalid_argument when n > l^2, std::runtime_error when the budgets run out.
Instance gen_geometric(const GeometricParams& params);
Instance gen_tiny(const TinyParams& params);

struct AppendixAFixture {
    Instance instance;
    TimeSet times;
    NodeId s = 0, v = 1, w = 2, t = 3;
    int tight_w2 = 0;    // storage_bound_tight at (w,2)
    int relaxed_w2 = 0;  // storage_bound_relaxed at (w,2)
};

AppendixAFixture gen_appendix_a();

/// Packets in order, each on a shortest path without waiting after departure, leaving its
/// origin at the earliest time the path's arcs have spare throughput. Feasible for any
/// storage levels since nothing waits at an active node.
Schedule greedy_schedule(const Instance& inst);

/// Instance from a generator name and a JSON parameter object (used by the CLI).
Instance generate(const std::string& family, const nlohmann::json& params);

}  // namespace upr

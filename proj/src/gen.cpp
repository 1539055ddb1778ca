#include "upr/gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace upr {

namespace detail {
extern const char* const kCityTableCsv;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream) { return Rng(mix(seed + (stream + 1) * kGolden)); }

std::uint64_t Rng::next() {
    state_ += kGolden;
    return mix(state_);
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("Rng::uniform: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

const std::vector<City>& city_table() {
    static const std::vector<City> table = [] {
        std::vector<City> out;
        std::istringstream in(detail::kCityTableCsv);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            City c;
            std::string lat, lon;
            std::getline(ls, c.name, ',');
            std::getline(ls, lat, ',');
            std::getline(ls, lon, ',');
            c.latitude = std::stod(lat);
            c.longitude = std::stod(lon);
            out.push_back(c);
        }
        return out;
    }();
    return table;
}

double haversine_miles(const City& a, const City& b) {
    constexpr double kEarthMiles = 3958.8;
    constexpr double kRad = M_PI / 180.0;
    double dlat = (b.latitude - a.latitude) * kRad;
    double dlon = (b.longitude - a.longitude) * kRad;
    double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(a.latitude * kRad) * std::cos(b.latitude * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

GeographicParams GeographicParams::defaults(int m, int k, double frac, std::uint64_t seed) {
    GeographicParams p;
    p.m = m;
    p.k = k;
    int hi = static_cast<int>(std::ceil(frac * k - 1e-9));
    p.alpha1 = 1;
    p.alpha2 = std::max(1, hi);
    p.beta1 = 0;
    p.beta2 = hi;
    p.seed = seed;
    return p;
}

Schedule greedy_schedule(const Instance& inst) {
    Schedule sched;
    std::map<std::pair<ArcId, int>, int> used;
    int latest = 0;
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& c = inst.commodity(k);
        auto path = shortest_path_arcs(inst, c.origin, c.dest);
        if (!path) throw std::invalid_argument("greedy_schedule: commodity " + std::to_string(c.id) + " has no path");
        for (int d = 0;; ++d) {
            bool fits = true;
            int t = d;
            for (ArcId a : *path) {
                auto it = used.find({a, t});
                if (it != used.end() && it->second >= inst.arc(a).throughput) {
                    fits = false;
                    break;
                }
                t += inst.arc(a).transit;
            }
            if (!fits) continue;
            Trajectory traj{k, {}};
            t = d;
            for (ArcId a : *path) {
                ++used[{a, t}];
                traj.moves.push_back({a, t, t + inst.arc(a).transit});
                t += inst.arc(a).transit;
            }
            latest = std::max(latest, t);
            sched.trajectories.push_back(std::move(traj));
            break;
        }
    }
    sched.horizon = std::max(latest, 1);
    return sched;
}

namespace {

struct Pair {
    NodeId s, t;
};

// OD pairs per the shortest-path filter: >= delta arcs and transit <= gamma * max over reachable pairs.
std::vector<char> qualifying_pairs(const Instance& base, int delta, double gamma) {
    const int n = base.num_nodes();
    std::vector<std::vector<PathLength>> dist(n);
    int longest = 0;
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            auto d = s == t ? std::nullopt : shortest_transit(base, s, t);
            dist[s].push_back(d ? *d : PathLength{-1, -1});
            if (d) longest = std::max(longest, d->transit);
        }
    }
    std::vector<char> ok(static_cast<std::size_t>(n) * n, 0);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            const auto& d = dist[s][t];
            ok[s * n + t] = d.transit >= 0 && d.hops >= delta && d.transit <= gamma * longest + 1e-9;
        }
    }
    return ok;
}

std::vector<Pair> sample_pairs(int n, int k, const std::vector<char>& ok, Rng& rng) {
    std::vector<Pair> out;
    const long long budget = 1000LL * k;
    for (long long draw = 0; draw < budget && static_cast<int>(out.size()) < k; ++draw) {
        NodeId s = static_cast<NodeId>(rng.uniform(0, n - 1));
        NodeId t = static_cast<NodeId>(rng.uniform(0, n - 1));
        if (ok[s * n + t]) out.push_back({s, t});
    }
    if (static_cast<int>(out.size()) < k)
        throw std::runtime_error("OD sampling: only " + std::to_string(out.size()) + " of " + std::to_string(k) +
                                 " pairs qualified within the draw budget");
    return out;
}

// Capacities, commodities and horizon on top of a fixed arc list.
Instance finish_instance(int n, std::vector<ArcData> arcs, const std::vector<Pair>& pairs, int a1, int a2, int b1,
                         int b2, int horizon, std::uint64_t seed, InstanceMeta meta) {
    Rng thr = Rng::stream(seed, kStreamThroughput);
    for (auto& a : arcs) a.throughput = static_cast<int>(thr.uniform(a1, a2));
    Rng sto = Rng::stream(seed, kStreamStorage);
    std::vector<NodeData> nodes(n);
    for (auto& v : nodes) v.storage = static_cast<int>(sto.uniform(b1, b2));
    std::vector<Commodity> comms;
    for (std::size_t i = 0; i < pairs.size(); ++i) comms.push_back({static_cast<int>(i), pairs[i].s, pairs[i].t});
    Instance inst(std::move(nodes), std::move(arcs), std::move(comms), 1);
    int greedy = greedy_schedule(inst).horizon;
    int T = horizon > 0 ? horizon : greedy;
    meta.params["horizon_rule"] = horizon > 0 ? "given" : "greedy";
    meta.params["greedy_makespan"] = greedy;
    auto ratio = capacity_ratio(inst);
    meta.params["capacity_ratio"] = {{"num", ratio.num}, {"den", ratio.den}};
    return inst.with_horizon(T).with_meta(std::move(meta));
}

void check_bounds(int lo, int hi, const char* what) {
    if (lo > hi) throw std::invalid_argument(std::string(what) + ": lower bound exceeds upper bound");
}

}  // namespace

Instance gen_geographic(const GeographicParams& p) {
    const auto& cities = city_table();
    if (p.n < 2 || p.n > static_cast<int>(cities.size()))
        throw std::invalid_argument("gen_geographic: n must lie in [2, " + std::to_string(cities.size()) + "]");
    if (p.m < 1 || p.m > p.n * (p.n - 1)) throw std::invalid_argument("gen_geographic: m out of range");
    if (p.k < 0) throw std::invalid_argument("gen_geographic: k must be nonnegative");
    check_bounds(p.alpha1, p.alpha2, "throughput");
    check_bounds(p.beta1, p.beta2, "storage");
    if (p.alpha1 < 1 || p.beta1 < 0) throw std::invalid_argument("gen_geographic: capacity bounds out of range");

    Rng arc_rng = Rng::stream(p.seed, kStreamArcs);
    Rng pair_rng = Rng::stream(p.seed, kStreamPairs);
    for (int draw = 1; draw <= p.max_graph_draws; ++draw) {
        std::set<std::pair<int, int>> chosen;
        std::vector<ArcData> arcs;
        while (static_cast<int>(arcs.size()) < p.m) {
            int s = static_cast<int>(arc_rng.uniform(0, p.n - 1));
            int t = static_cast<int>(arc_rng.uniform(0, p.n - 1));
            if (s == t || !chosen.insert({s, t}).second) continue;
            int tau = static_cast<int>(std::ceil(haversine_miles(cities[s], cities[t]) / 100.0));
            arcs.push_back({s, t, std::max(tau, 1), 1});
        }
        Instance base(std::vector<NodeData>(p.n), arcs, {}, 1);
        auto ok = qualifying_pairs(base, p.delta, p.gamma);
        if (std::none_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) continue;
        auto pairs = sample_pairs(p.n, p.k, ok, pair_rng);
        InstanceMeta meta;
        meta.generator = "geographic";
        meta.seed = p.seed;
        meta.params = {{"n", p.n},         {"m", p.m},         {"k", p.k},         {"alpha1", p.alpha1},
                       {"alpha2", p.alpha2}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"delta", p.delta},
                       {"gamma", p.gamma}, {"gamma_length", "transit"}, {"graph_draws", draw}};
        return finish_instance(p.n, std::move(arcs), pairs, p.alpha1, p.alpha2, p.beta1, p.beta2, p.horizon, p.seed,
                               std::move(meta));
    }
    throw std::runtime_error("gen_geographic: no arc draw produced a qualifying OD pair");
}

Instance gen_geometric(const GeometricParams& p) {
    if (p.l < 1 || p.n < 2) throw std::invalid_argument("gen_geometric: need l >= 1 and n >= 2");
    if (static_cast<long long>(p.n) > static_cast<long long>(p.l) * p.l)
        throw std::invalid_argument("gen_geometric: n exceeds l^2 lattice points");
    if (p.q.empty() || std::any_of(p.q.begin(), p.q.end(), [](int q) { return q < 0; }))
        throw std::invalid_argument("gen_geometric: q-set must be nonempty and nonnegative");
    check_bounds(p.alpha1, p.alpha2, "throughput");
    check_bounds(p.beta1, p.beta2, "storage");

    Rng place_rng = Rng::stream(p.seed, kStreamPlacement);
    Rng arc_rng = Rng::stream(p.seed, kStreamArcs);
    Rng pair_rng = Rng::stream(p.seed, kStreamPairs);
    for (int draw = 1; draw <= p.max_graph_draws; ++draw) {
        std::set<std::pair<int, int>> taken;
        std::vector<std::pair<int, int>> pos;
        while (static_cast<int>(pos.size()) < p.n) {
            int x = static_cast<int>(place_rng.uniform(0, p.l - 1));
            int y = static_cast<int>(place_rng.uniform(0, p.l - 1));
            if (taken.insert({x, y}).second) pos.emplace_back(x, y);
        }
        auto l1 = [&](int a, int b) { return std::abs(pos[a].first - pos[b].first) + std::abs(pos[a].second - pos[b].second); };
        std::vector<ArcData> arcs;
        std::set<std::pair<int, int>> present;
        for (int v = 0; v < p.n; ++v) {
            for (int w = 0; w < p.n; ++w) {
                if (v != w && l1(v, w) <= p.p) {
                    arcs.push_back({v, w, l1(v, w), 1});
                    present.insert({v, w});
                }
            }
        }
        for (int v = 0; v < p.n; ++v) {
            int q = p.q[static_cast<std::size_t>(arc_rng.uniform(0, static_cast<std::int64_t>(p.q.size()) - 1))];
            std::vector<int> pool;
            for (int w = 0; w < p.n; ++w) {
                if (w != v && !present.count({v, w})) pool.push_back(w);
            }
            for (int j = 0; j < q && !pool.empty(); ++j) {
                double total = 0.0;
                for (int w : pool) total += std::pow(static_cast<double>(l1(v, w)), -p.r);
                double pick = arc_rng.unit() * total;
                std::size_t idx = 0;
                for (; idx + 1 < pool.size(); ++idx) {
                    pick -= std::pow(static_cast<double>(l1(v, pool[idx])), -p.r);
                    if (pick < 0) break;
                }
                int w = pool[idx];
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
                arcs.push_back({v, w, l1(v, w), 1});
                present.insert({v, w});
            }
        }
        Instance base(std::vector<NodeData>(p.n), arcs, {}, 1);
        auto ok = qualifying_pairs(base, p.delta, p.gamma);
        if (std::none_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) continue;
        auto pairs = sample_pairs(p.n, p.k, ok, pair_rng);
        InstanceMeta meta;
        meta.generator = "geometric";
        meta.seed = p.seed;
        nlohmann::json coords = nlohmann::json::array();
        for (auto [x, y] : pos) coords.push_back({x, y});
        meta.params = {{"l", p.l},           {"n", p.n},           {"k", p.k},         {"p", p.p},
                       {"q", p.q},           {"r", p.r},           {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
                       {"beta1", p.beta1},   {"beta2", p.beta2},   {"delta", p.delta}, {"gamma", p.gamma},
                       {"gamma_length", "transit"}, {"graph_draws", draw}, {"coordinates", coords}};
        return finish_instance(p.n, std::move(arcs), pairs, p.alpha1, p.alpha2, p.beta1, p.beta2, p.horizon, p.seed,
                               std::move(meta));
    }
    throw std::runtime_error("gen_geometric: no placement produced a qualifying OD pair");
}

Instance gen_tiny(const TinyParams& p) {
    if (p.n < 2 || p.n > 6 || p.k < 1 || p.k > 8 || p.max_horizon < 1 || p.max_horizon > 10)
        throw std::invalid_argument("gen_tiny: limits are 2 <= n <= 6, 1 <= k <= 8, T <= 10");
    if (p.min_transit < 0 || p.min_transit > p.max_transit || p.max_throughput < 1 || p.max_storage < 0)
        throw std::invalid_argument("gen_tiny: bad transit or capacity range");
    Rng arc_rng = Rng::stream(p.seed, kStreamArcs);
    Rng tau_rng = Rng::stream(p.seed, kStreamTransit);
    Rng pair_rng = Rng::stream(p.seed, kStreamPairs);
    for (int draw = 1; draw <= 1000; ++draw) {
        // Random Hamiltonian cycle keeps every pair reachable.
        std::vector<int> order(p.n);
        std::iota(order.begin(), order.end(), 0);
        for (int i = p.n - 1; i > 0; --i) std::swap(order[i], order[arc_rng.uniform(0, i)]);
        std::set<std::pair<int, int>> present;
        std::vector<ArcData> arcs;
        auto add = [&](int v, int w) {
            if (v == w || !present.insert({v, w}).second) return;
            arcs.push_back({v, w, static_cast<int>(tau_rng.uniform(p.min_transit, p.max_transit)), 1});
        };
        for (int i = 0; i < p.n; ++i) add(order[i], order[(i + 1) % p.n]);
        int extra = std::min(p.extra_arcs, p.n * (p.n - 1) - static_cast<int>(arcs.size()));
        while (extra > 0) {
            std::size_t before = arcs.size();
            add(static_cast<int>(arc_rng.uniform(0, p.n - 1)), static_cast<int>(arc_rng.uniform(0, p.n - 1)));
            if (arcs.size() > before) --extra;
        }
        std::vector<Pair> pairs;
        while (static_cast<int>(pairs.size()) < p.k) {
            NodeId s = static_cast<NodeId>(pair_rng.uniform(0, p.n - 1));
            NodeId t = static_cast<NodeId>(pair_rng.uniform(0, p.n - 1));
            if (s != t) pairs.push_back({s, t});
        }
        InstanceMeta meta;
        meta.generator = "tiny";
        meta.seed = p.seed;
        meta.params = {{"n", p.n},
                       {"k", p.k},
                       {"extra_arcs", p.extra_arcs},
                       {"min_transit", p.min_transit},
                       {"max_transit", p.max_transit},
                       {"max_throughput", p.max_throughput},
                       {"max_storage", p.max_storage},
                       {"max_horizon", p.max_horizon},
                       {"slack", p.slack},
                       {"draws", draw}};
        auto inst = finish_instance(p.n, std::move(arcs), pairs, 1, p.max_throughput, 0, p.max_storage, 0, p.seed,
                                    std::move(meta));
        int greedy = inst.horizon();
        if (greedy > p.max_horizon) continue;
        return inst.with_horizon(std::min(p.max_horizon, greedy + p.slack));
    }
    throw std::runtime_error("gen_tiny: no draw fits the horizon cap");
}

AppendixAFixture gen_appendix_a() {
    AppendixAFixture f;
    constexpr int kPackets = 50;
    constexpr int kT = 5;
    std::vector<NodeData> nodes = {{0}, {20}, {20}, {0}};
    std::vector<ArcData> arcs = {
        {f.s, f.v, 1, kPackets},
        {f.v, f.w, 1, kPackets},
        {f.v, f.w, 2, kPackets},
        {f.w, f.t, 1, kPackets},
    };
    std::vector<Commodity> comms;
    for (int i = 0; i < kPackets; ++i) comms.push_back({i, f.s, f.t});
    InstanceMeta meta;
    meta.generator = "appendix_a";
    meta.params = {{"packets", kPackets},
                   {"b_w", 20},
                   {"free_choices",
                    {{"b_v", 20}, {"throughput", kPackets}, {"transit_sv", 1}, {"transit_vw", {1, 2}},
                     {"transit_wt", 1}, {"horizon", kT}}}};
    f.instance = Instance(std::move(nodes), std::move(arcs), std::move(comms), kT, std::move(meta));
    f.times = full_times(f.instance);
    f.times[f.w] = {0, 1, 2, kT};
    auto net = build_arcs(f.times, f.instance, StorageRule::tight);
    f.tight_w2 = storage_bound_tight(net, f.instance, f.w, 2);
    f.relaxed_w2 = storage_bound_relaxed(net, f.instance, f.w, 2);
    return f;
}

Instance generate(const std::string& family, const nlohmann::json& j) {
    auto seed = j.value("seed", std::uint64_t{1});
    if (family == "geographic") {
        int k = j.value("k", 200);
        auto p = GeographicParams::defaults(j.value("m", 30), k, j.value("cap_frac", 0.01), seed);
        p.n = j.value("n", p.n);
        p.alpha1 = j.value("alpha1", p.alpha1);
        p.alpha2 = j.value("alpha2", p.alpha2);
        p.beta1 = j.value("beta1", p.beta1);
        p.beta2 = j.value("beta2", p.beta2);
        p.delta = j.value("delta", p.delta);
        p.gamma = j.value("gamma", p.gamma);
        p.horizon = j.value("horizon", p.horizon);
        return gen_geographic(p);
    }
    if (family == "geometric") {
        GeometricParams p;
        p.seed = seed;
        p.l = j.value("l", p.l);
        p.n = j.value("n", p.n);
        p.k = j.value("k", p.k);
        p.p = j.value("p", p.p);
        p.q = j.value("q", p.q);
        p.r = j.value("r", p.r);
        int hi = static_cast<int>(std::ceil(j.value("cap_frac", 0.01) * p.k - 1e-9));
        p.alpha2 = j.value("alpha2", std::max(1, hi));
        p.beta2 = j.value("beta2", hi);
        p.alpha1 = j.value("alpha1", p.alpha1);
        p.beta1 = j.value("beta1", p.beta1);
        p.delta = j.value("delta", p.delta);
        p.gamma = j.value("gamma", p.gamma);
        p.horizon = j.value("horizon", p.horizon);
        return gen_geometric(p);
    }
    if (family == "tiny") {
        TinyParams p;
        p.seed = seed;
        p.n = j.value("n", p.n);
        p.k = j.value("k", p.k);
        p.extra_arcs = j.value("extra_arcs", p.extra_arcs);
        p.min_transit = j.value("min_transit", p.min_transit);
        p.max_transit = j.value("max_transit", p.max_transit);
        p.max_throughput = j.value("max_throughput", p.max_throughput);
        p.max_storage = j.value("max_storage", p.max_storage);
        p.max_horizon = j.value("max_horizon", p.max_horizon);
        p.slack = j.value("slack", p.slack);
        return gen_tiny(p);
    }
    if (family == "appendix_a") return gen_appendix_a().instance;
    throw std::invalid_argument("unknown generator family: " + family);
}

}  // namespace upr

#include <doctest.h>

#include <sstream>

#include "upr/bench.hpp"
#include "upr/gen.hpp"

using namespace upr;

namespace {

ResultRow row(std::string inst, std::string method, double wall) {
    ResultRow r;
    r.instance = std::move(inst);
    r.group = "g";
    r.method = std::move(method);
    r.status = "optimal";
    r.wall_s = wall;
    r.makespan = 5;
    r.iters = 2;
    return r;
}

// Field `col` of the summary line for (method, factor 1).
double summary_field(const std::string& doc, const std::string& method, int col) {
    std::istringstream in(doc);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() > 1 && f[1] == method) return std::stod(f.at(col));
    }
    FAIL("method missing from summary");
    return 0.0;
}

}  // namespace

TEST_CASE("method names round trip") {
    for (auto m : {Method::full_ip, Method::ddd, Method::two_phase}) CHECK(method_from_string(to_string(m)) == m);
    CHECK(method_from_string("full_ip") == Method::full_ip);
    CHECK_THROWS(method_from_string("simplex"));
}

TEST_CASE("report ratios are per-instance means against DDD") {
    std::vector<ResultRow> same = {row("a", "ddd", 2.0), row("a", "full-ip", 2.0), row("b", "ddd", 4.0),
                                   row("b", "full-ip", 4.0)};
    auto docs = report(same);
    CHECK(summary_field(docs.at("summary.csv"), "full-ip", 5) == doctest::Approx(1.0));
    CHECK(summary_field(docs.at("summary.csv"), "ddd", 5) == doctest::Approx(1.0));

    // Ratios 10 and 0.1 average to 5.05; the ratio of mean times would be 1.
    std::vector<ResultRow> skew = {row("a", "ddd", 1.0), row("a", "full-ip", 10.0), row("b", "ddd", 10.0),
                                   row("b", "full-ip", 1.0)};
    docs = report(skew);
    CHECK(summary_field(docs.at("summary.csv"), "full-ip", 5) == doctest::Approx(5.05));
    CHECK(summary_field(docs.at("summary.csv"), "full-ip", 4) == doctest::Approx(5.5));
}

TEST_CASE("report marks cells with a time-limit hit") {
    auto slow = row("a", "full-ip", 9.0);
    slow.status = "time_limit";
    auto docs = report({row("a", "ddd", 1.0), slow});
    CHECK(docs.at("summary.csv").find(",*,") != std::string::npos);
    // Unsolved runs stay out of the cumulative curve.
    CHECK(docs.at("cumulative.csv").find("full-ip") == std::string::npos);
}

TEST_CASE("results CSV round trip") {
    auto r = row("geo_m30_k20_s1", "two-phase", 1.25);
    r.ub_factor = 1.5;
    r.ns_ratio = 0.375;
    r.sto_viol = 3;
    r.nodes_thr = 7;
    std::string text = std::string(kResultHeader) + "\n" + csv_line(r) + "\n";
    auto back = read_results_csv(text);
    REQUIRE(back.size() == 1);
    CHECK(back[0].instance == r.instance);
    CHECK(back[0].group == "geo_m30_k20");
    CHECK(back[0].method == r.method);
    CHECK(back[0].ub_factor == 1.5);
    CHECK(back[0].wall_s == doctest::Approx(1.25));
    CHECK(back[0].ns_ratio == doctest::Approx(0.375));
    CHECK(back[0].sto_viol == 3);
    CHECK(back[0].nodes_thr == 7);
    CHECK_THROWS(read_results_csv("wrong,header\n"));
}

TEST_CASE("run_bench on a tiny matrix") {
    BenchConfig cfg;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        TinyParams p;
        p.seed = seed;
        cfg.instances.push_back({"tiny_s" + std::to_string(seed), "tiny", gen_tiny(p)});
    }
    cfg.methods = {Method::full_ip, Method::ddd};
    cfg.rel_gap = 0.0;
    cfg.alpha = 0.0;
    cfg.backend = "bnb";
    cfg.workers = 2;
    auto res = run_bench(cfg);
    CHECK(res.errors.empty());
    REQUIRE(res.rows.size() == 3 * 2 * 3);
    for (const auto& r : res.rows) {
        CHECK(r.status == "optimal");
        int t_star = res.t_star.at(r.instance);
        CHECK(r.makespan == t_star);
        if (r.method == "ddd") {
            int n = cfg.instances.front().instance.num_nodes();
            CHECK(r.iters <= n * t_star);
            CHECK(r.first_iter_sto_viol == 0);
            CHECK(r.ns_ratio <= 1.0);
        }
    }
    CHECK(iteration_csv(res.rows).find("tiny_s1,ddd,") != std::string::npos);
}

#include "upr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "upr/gen.hpp"
#include "upr/models.hpp"

namespace upr {

std::string to_string(Method m) {
    switch (m) {
        case Method::full_ip: return "full-ip";
        case Method::ddd: return "ddd";
        case Method::two_phase: return "two-phase";
    }
    return "ddd";
}

Method method_from_string(const std::string& s) {
    if (s == "full-ip" || s == "full_ip") return Method::full_ip;
    if (s == "ddd") return Method::ddd;
    if (s == "two-phase" || s == "two_phase") return Method::two_phase;
    throw std::invalid_argument("unknown method: " + s);
}

std::vector<NamedInstance> geographic_matrix(const std::vector<int>& ms, const std::vector<int>& ks,
                                             const std::vector<std::uint64_t>& seeds, double cap_frac) {
    std::vector<NamedInstance> out;
    for (int m : ms) {
        for (int k : ks) {
            for (auto seed : seeds) {
                std::string group = "m" + std::to_string(m) + "_k" + std::to_string(k);
                out.push_back({"geo_" + group + "_s" + std::to_string(seed), group,
                               gen_geographic(GeographicParams::defaults(m, k, cap_frac, seed))});
            }
        }
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string group_of(const std::string& id) {
    auto pos = id.rfind("_s");
    return pos == std::string::npos ? id : id.substr(0, pos);
}

// Runs fn(i) for i in [0, n) on `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    std::atomic<int> next{0};
    auto body = [&] {
        for (int i = next++; i < n; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(workers, n); ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

ResultRow run_one(const BenchConfig& cfg, const NamedInstance& ni, Method method, double factor, int t_star) {
    ResultRow row;
    row.instance = ni.id;
    row.group = ni.group;
    row.method = to_string(method);
    row.ub_factor = factor;
    row.t_star = t_star;
    row.horizon = std::max(1, static_cast<int>(std::ceil(factor * t_star - 1e-9)));
    const Instance inst = ni.instance.with_horizon(row.horizon);
    const double n_t = static_cast<double>(inst.num_nodes()) * (row.horizon + 1);
    auto start = std::chrono::steady_clock::now();

    if (method == Method::full_ip) {
        auto backend = make_backend(cfg.backend.empty() ? default_backend_name() : cfg.backend);
        auto model = build_full(inst);
        SolveParams p;
        p.rel_gap = cfg.rel_gap;
        p.time_limit_s = cfg.time_limit_s;
        auto res = backend->solve(model.mip, p);
        row.status = res.status == SolveStatus::feasible ? "time_limit" : to_string(res.status);
        if (res.has_solution()) row.makespan = makespan(extract_schedule(inst, model, res.x));
        row.iters = 1;
        row.ns_ratio = 1.0;
    } else {
        DddOptions opts;
        opts.backend = cfg.backend;
        opts.rel_gap = cfg.rel_gap;
        opts.time_limit_s = cfg.time_limit_s;
        auto res = method == Method::ddd ? solve_ddd(inst, cfg.alpha, opts) : solve_two_phase(inst, cfg.alpha, opts);
        row.status = to_string(res.status);
        if (res.schedule) row.makespan = makespan(*res.schedule);
        row.iters = res.iterations();
        row.ns_ratio = count_timed_nodes(res.final_times) / n_t;
        for (const auto& r : res.records) {
            row.short_viol += r.violations.short_arcs;
            row.thr_viol += r.violations.throughput_arcs;
            row.sto_viol += r.violations.storage_arcs;
            row.nodes_short += r.violations.nodes_short;
            row.nodes_thr += r.violations.nodes_throughput;
            row.nodes_sto += r.violations.nodes_storage;
        }
        if (!res.records.empty()) row.first_iter_sto_viol = res.records.front().violations.storage_arcs;
        row.records = std::move(res.records);
    }
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

}  // namespace

std::string csv_line(const ResultRow& r) {
    std::ostringstream out;
    out << r.instance << ',' << r.method << ',' << fmt(r.ub_factor) << ',' << r.status << ',' << fmt(r.wall_s) << ','
        << r.makespan << ',' << r.iters << ',' << fmt(r.ns_ratio) << ',' << r.short_viol << ',' << r.thr_viol << ','
        << r.sto_viol << ',' << r.nodes_short << ',' << r.nodes_thr << ',' << r.nodes_sto;
    return out.str();
}

std::string iteration_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "instance,method,ub_factor,iteration,phase,lb,ub,gap,timed_nodes,timed_arcs,relaxation_value,short_viol,"
           "thr_viol,sto_viol,nodes_short,nodes_thr,nodes_sto,wall_s\n";
    for (const auto& row : rows) {
        for (const auto& r : row.records) {
            const auto& v = r.violations;
            out << row.instance << ',' << row.method << ',' << fmt(row.ub_factor) << ',' << r.iteration << ','
                << r.phase << ',' << r.lb << ',' << r.ub << ',' << fmt(r.gap) << ',' << r.timed_nodes << ','
                << r.timed_arcs << ',' << fmt(r.relaxation_value) << ',' << v.short_arcs << ',' << v.throughput_arcs
                << ',' << v.storage_arcs << ',' << v.nodes_short << ',' << v.nodes_throughput << ','
                << v.nodes_storage << ',' << fmt(r.wall_s) << '\n';
        }
    }
    return out.str();
}

BenchResult run_bench(const BenchConfig& cfg) {
    BenchResult out;
    std::mutex lock;
    const int n = static_cast<int>(cfg.instances.size());

    std::vector<int> t_star(n, -1);
    parallel_for(n, cfg.workers, [&](int i) {
        const auto& ni = cfg.instances[i];
        DddOptions opts;
        opts.backend = cfg.backend;
        opts.rel_gap = cfg.tstar_rel_gap;
        opts.time_limit_s = cfg.tstar_time_limit_s;
        std::string error;
        try {
            auto res = solve_ddd(ni.instance, 0.0, opts);
            if (res.status == DddStatus::optimal && res.schedule)
                t_star[i] = res.ub;
            else
                error = ni.id + ": T* solve ended " + to_string(res.status);
        } catch (const std::exception& e) {
            error = ni.id + ": " + e.what();
        }
        std::lock_guard<std::mutex> g(lock);
        if (!error.empty()) out.errors.push_back(error);
        else out.t_star[ni.id] = t_star[i];
        if (cfg.on_progress) cfg.on_progress(error.empty() ? ni.id + ": T* = " + std::to_string(t_star[i]) : error);
    });

    struct Task {
        int inst;
        Method method;
        double factor;
    };
    std::vector<Task> tasks;
    for (int i = 0; i < n; ++i) {
        if (t_star[i] < 0) continue;
        for (double f : cfg.ub_factors) {
            for (Method m : cfg.methods) tasks.push_back({i, m, f});
        }
    }
    std::vector<std::optional<ResultRow>> rows(tasks.size());
    std::ofstream stream;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        stream.open(std::filesystem::path(cfg.output_dir) / "results.csv");
        stream << kResultHeader << '\n';
    }
    parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int i) {
        const auto& task = tasks[i];
        const auto& ni = cfg.instances[task.inst];
        try {
            auto row = run_one(cfg, ni, task.method, task.factor, t_star[task.inst]);
            std::lock_guard<std::mutex> g(lock);
            if (stream.is_open()) stream << csv_line(row) << '\n' << std::flush;
            if (cfg.on_progress) cfg.on_progress(csv_line(row));
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> g(lock);
            out.errors.push_back(ni.id + " " + to_string(task.method) + ": " + e.what());
        }
    });
    for (auto& r : rows) {
        if (r) out.rows.push_back(std::move(*r));
    }
    if (!cfg.output_dir.empty()) {
        std::ofstream(std::filesystem::path(cfg.output_dir) / "iterations.csv") << iteration_csv(out.rows);
    }
    return out;
}

std::map<std::string, std::string> report(const std::vector<ResultRow>& rows) {
    std::map<std::string, std::string> docs;

    // (a) Mean runtime and mean per-instance runtime ratio against DDD.
    std::map<std::pair<std::string, double>, double> ddd_time;  // (instance, factor)
    for (const auto& r : rows) {
        if (r.method == "ddd") ddd_time[{r.instance, r.ub_factor}] = r.wall_s;
    }
    struct Acc {
        int count = 0, ratio_count = 0;
        double time = 0, ratio = 0, iters = 0, ns = 0;
        bool star = false;
    };
    std::map<std::tuple<std::string, std::string, double>, Acc> cells;
    for (const auto& r : rows) {
        auto& a = cells[{r.group.empty() ? group_of(r.instance) : r.group, r.method, r.ub_factor}];
        ++a.count;
        a.time += r.wall_s;
        a.iters += r.iters;
        a.ns += r.ns_ratio;
        a.star = a.star || r.hit_limit();
        auto it = ddd_time.find({r.instance, r.ub_factor});
        if (it != ddd_time.end() && it->second > 0) {
            a.ratio += r.wall_s / it->second;
            ++a.ratio_count;
        }
    }
    std::ostringstream sum;
    sum << "group,method,ub_factor,instances,mean_wall_s,mean_ratio_vs_ddd,limit_hit,mean_iters,mean_ns_ratio\n";
    for (const auto& [key, a] : cells) {
        const auto& [group, method, factor] = key;
        sum << group << ',' << method << ',' << fmt(factor) << ',' << a.count << ',' << fmt(a.time / a.count) << ','
            << (a.ratio_count ? fmt(a.ratio / a.ratio_count) : std::string("")) << ',' << (a.star ? "*" : "") << ','
            << fmt(a.iters / a.count) << ',' << fmt(a.ns / a.count) << '\n';
    }
    docs["summary.csv"] = sum.str();

    // (b) Instances solved within each observed time, per method and factor.
    std::map<std::pair<std::string, double>, std::vector<double>> solved;
    for (const auto& r : rows) {
        if (r.status == "optimal") solved[{r.method, r.ub_factor}].push_back(r.wall_s);
    }
    std::ostringstream cum;
    cum << "method,ub_factor,wall_s,solved\n";
    for (auto& [key, times] : solved) {
        std::sort(times.begin(), times.end());
        for (std::size_t i = 0; i < times.size(); ++i)
            cum << key.first << ',' << fmt(key.second) << ',' << fmt(times[i]) << ',' << i + 1 << '\n';
    }
    docs["cumulative.csv"] = cum.str();

    // (c) Share of each violation cause among violating support arcs and added nodes, per iteration.
    struct Causes {
        double arcs[3] = {0, 0, 0};
        double nodes[3] = {0, 0, 0};
        int runs = 0;
    };
    std::map<std::pair<std::string, int>, Causes> by_iter;
    for (const auto& r : rows) {
        for (const auto& rec : r.records) {
            auto& c = by_iter[{r.method, rec.iteration}];
            const auto& v = rec.violations;
            c.arcs[0] += v.short_arcs;
            c.arcs[1] += v.throughput_arcs;
            c.arcs[2] += v.storage_arcs;
            c.nodes[0] += v.nodes_short;
            c.nodes[1] += v.nodes_throughput;
            c.nodes[2] += v.nodes_storage;
            ++c.runs;
        }
    }
    std::ostringstream cs;
    cs << "method,iteration,runs,arcs_short,arcs_thr,arcs_sto,nodes_short,nodes_thr,nodes_sto\n";
    auto share = [](const double* x, int i) {
        double t = x[0] + x[1] + x[2];
        return t > 0 ? fmt(x[i] / t) : std::string("0");
    };
    for (const auto& [key, c] : by_iter) {
        cs << key.first << ',' << key.second << ',' << c.runs;
        for (int i = 0; i < 3; ++i) cs << ',' << share(c.arcs, i);
        for (int i = 0; i < 3; ++i) cs << ',' << share(c.nodes, i);
        cs << '\n';
    }
    docs["causes.csv"] = cs.str();
    return docs;
}

std::vector<ResultRow> read_results_csv(const std::string& text) {
    std::vector<ResultRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kResultHeader) throw std::runtime_error("results CSV: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 14) throw std::runtime_error("results CSV: bad row: " + line);
        ResultRow r;
        r.instance = f[0];
        r.group = group_of(f[0]);
        r.method = f[1];
        r.ub_factor = std::stod(f[2]);
        r.status = f[3];
        r.wall_s = std::stod(f[4]);
        r.makespan = std::stoi(f[5]);
        r.iters = std::stoi(f[6]);
        r.ns_ratio = std::stod(f[7]);
        r.short_viol = std::stoi(f[8]);
        r.thr_viol = std::stoi(f[9]);
        r.sto_viol = std::stoi(f[10]);
        r.nodes_short = std::stoi(f[11]);
        r.nodes_thr = std::stoi(f[12]);
        r.nodes_sto = std::stoi(f[13]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace upr

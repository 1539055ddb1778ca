// upr_cli: generate, solve, verify and benchmark packet-routing instances.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "upr/bench.hpp"
#include "upr/ddd.hpp"
#include "upr/gen.hpp"
#include "upr/instance.hpp"
#include "upr/models.hpp"
#include "upr/mps.hpp"
#include "upr/schedule.hpp"
#include "upr/verify.hpp"

namespace fs = std::filesystem;
using namespace upr;

namespace {

/// "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

/// Options not given on the command line take their value from the config file.
void apply_config(CLI::App& app, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : read_config(path)) {
        CLI::Option* opt = nullptr;
        try {
            opt = app.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            std::string dashed = key;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            try {
                opt = app.get_option("--" + dashed);
            } catch (const CLI::OptionNotFound&) {
                throw std::runtime_error("unknown config key: " + key);
            }
        }
        if (opt->count() == 0) {
            opt->clear();
            if (opt->get_expected_max() > 1) {
                std::istringstream ss(value);
                for (std::string item; ss >> item;) opt->add_result(item);
            } else {
                opt->add_result(value);
            }
            opt->run_callback();
        }
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

/// key=value pairs into a JSON object, numbers parsed where possible.
nlohmann::json params_json(const std::vector<std::string>& sets) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + s);
        std::string key = s.substr(0, eq), value = s.substr(eq + 1);
        try {
            j[key] = nlohmann::json::parse(value);
        } catch (const nlohmann::json::parse_error&) {
            j[key] = value;
        }
    }
    return j;
}

std::string run_log_csv(const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "iteration,phase,lb,ub,gap,relaxation_value,timed_nodes,timed_arcs,ub_horizon,short_viol,thr_viol,sto_viol,"
           "nodes_short,nodes_thr,nodes_sto,wall_s\n";
    for (const auto& r : records) {
        const auto& v = r.violations;
        out << r.iteration << ',' << r.phase << ',' << r.lb << ',' << r.ub << ',' << r.gap << ',' << r.relaxation_value
            << ',' << r.timed_nodes << ',' << r.timed_arcs << ',' << r.ub_horizon << ',' << v.short_arcs << ','
            << v.throughput_arcs << ',' << v.storage_arcs << ',' << v.nodes_short << ',' << v.nodes_throughput << ','
            << v.nodes_storage << ',' << r.wall_s << '\n';
    }
    return out.str();
}

std::vector<std::uint64_t> seed_range(const std::string& spec) {
    std::vector<std::uint64_t> out;
    std::istringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) {
        auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(std::stoull(part));
        } else {
            auto lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
            for (auto s = lo; s <= hi; ++s) out.push_back(s);
        }
    }
    return out;
}

int cmd_gen(const std::string& family, const std::vector<std::string>& sets, std::uint64_t seed,
            const std::string& out) {
    auto j = params_json(sets);
    if (!j.contains("seed")) j["seed"] = seed;
    auto inst = generate(family, j);
    if (out.empty() || out == "-")
        std::cout << dump_instance(inst) << '\n';
    else
        write_instance(inst, out);
    return 0;
}

struct SolveArgs {
    std::string instance;
    std::string method = "ddd";
    double alpha = 0.0;
    double time_limit = 300.0;
    double gap = 0.01;
    int ub = 0;
    int threads = 1;
    std::string backend;
    std::string storage_rule = "tight";
    std::string out;
    std::string log;
    std::string mps;
    std::string mps_format = "fixed";
};

int cmd_solve(const SolveArgs& a) {
    Instance inst = read_instance(a.instance);
    if (a.ub > 0) inst = inst.with_horizon(a.ub);
    if (auto issues = validate(inst); !issues.empty()) {
        for (const auto& i : issues) std::cerr << to_string(i.issue) << ": " << i.message << '\n';
        return 2;
    }
    if (!a.mps.empty()) {
        auto doc = export_model(build_full(inst).mip, mps_format_from_string(a.mps_format));
        write_text(a.mps, doc.text);
        if (!doc.name_map.empty()) write_text(a.mps + ".names", name_map_text(doc));
    }

    auto start = std::chrono::steady_clock::now();
    std::optional<Schedule> sched;
    std::string status;
    std::vector<RunRecord> records;
    const Method method = method_from_string(a.method);
    if (method == Method::full_ip) {
        auto backend = make_backend(a.backend.empty() ? default_backend_name() : a.backend);
        auto model = build_full(inst);
        SolveParams p;
        p.time_limit_s = a.time_limit;
        p.rel_gap = a.gap;
        p.threads = a.threads;
        auto res = backend->solve(model.mip, p);
        status = to_string(res.status);
        if (!res.message.empty()) std::cerr << res.message << '\n';
        if (res.has_solution()) sched = extract_schedule(inst, model, res.x);
    } else {
        DddOptions opts;
        opts.backend = a.backend;
        opts.rel_gap = a.gap;
        opts.time_limit_s = a.time_limit;
        opts.threads = a.threads;
        opts.storage_rule = a.storage_rule == "relaxed" ? StorageRule::relaxed : StorageRule::tight;
        opts.on_iteration = [](const RunRecord& r) {
            std::cerr << "iter " << r.iteration << " phase " << r.phase << " lb " << r.lb << " ub " << r.ub
                      << " nodes " << r.timed_nodes << '\n';
        };
        auto res = method == Method::ddd ? solve_ddd(inst, a.alpha, opts) : solve_two_phase(inst, a.alpha, opts);
        status = to_string(res.status);
        sched = res.schedule;
        records = std::move(res.records);
        if (!res.message.empty()) std::cerr << res.message << '\n';
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::cout << "status " << status << '\n';
    std::cout << "wall_s " << wall << '\n';
    if (sched) std::cout << "makespan " << makespan(*sched) << '\n';
    if (!a.log.empty()) write_text(a.log, run_log_csv(records));
    if (sched && !a.out.empty()) write_solution(inst, *sched, a.out);
    return sched ? 0 : 1;
}

int cmd_verify(const std::string& instance, const std::string& solution) {
    Instance inst = read_instance(instance);
    Schedule sched = read_solution(inst, solution);
    auto rep = check_schedule(inst, sched);
    std::cout << format_report(inst, rep);
    return rep.ok() ? 0 : 1;
}

struct BenchArgs {
    std::string family = "geographic";
    std::vector<int> ms = {30, 45, 60};
    std::vector<int> ks = {20, 40, 60};
    std::string seeds = "1";
    double cap_frac = 0.01;
    std::vector<std::string> sets;
    std::vector<std::string> files;
    std::vector<std::string> methods = {"full-ip", "ddd"};
    std::vector<double> factors = {1.0, 1.5, 2.0};
    double time_limit = 300.0;
    double gap = 0.01;
    double alpha = 0.01;
    double tstar_time_limit = 3600.0;
    int workers = 1;
    std::string backend;
    std::string out = "bench_out";
};

int cmd_bench(const BenchArgs& a) {
    BenchConfig cfg;
    if (!a.files.empty()) {
        for (const auto& f : a.files) cfg.instances.push_back({fs::path(f).stem().string(), "files", read_instance(f)});
    } else if (a.family == "geographic") {
        cfg.instances = geographic_matrix(a.ms, a.ks, seed_range(a.seeds), a.cap_frac);
    } else {
        for (auto seed : seed_range(a.seeds)) {
            auto j = params_json(a.sets);
            j["seed"] = seed;
            cfg.instances.push_back({a.family + "_s" + std::to_string(seed), a.family, generate(a.family, j)});
        }
    }
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(method_from_string(m));
    cfg.ub_factors = a.factors;
    cfg.time_limit_s = a.time_limit;
    cfg.rel_gap = a.gap;
    cfg.alpha = a.alpha;
    cfg.tstar_time_limit_s = a.tstar_time_limit;
    cfg.workers = a.workers;
    cfg.backend = a.backend;
    cfg.output_dir = a.out;
    cfg.on_progress = [](const std::string& line) { std::cerr << line << std::endl; };
    auto res = run_bench(cfg);
    for (const auto& e : res.errors) std::cerr << "error: " << e << '\n';
    for (const auto& [name, text] : report(res.rows)) write_text((fs::path(a.out) / name).string(), text);
    std::cout << res.rows.size() << " rows written to " << (fs::path(a.out) / "results.csv").string() << '\n';
    return res.errors.empty() ? 0 : 1;
}

int cmd_report(const std::string& results, const std::string& out) {
    auto rows = read_results_csv(read_text(results));
    for (const auto& [name, text] : report(rows)) {
        if (out.empty()) {
            std::cout << "== " << name << '\n' << text;
        } else {
            write_text((fs::path(out) / name).string(), text);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Packet routing with throughput and storage capacities"};
    app.require_subcommand(1);
    std::string config;

    auto* gen = app.add_subcommand("gen", "Generate an instance");
    std::string family = "tiny", gen_out;
    std::vector<std::string> gen_sets;
    std::uint64_t gen_seed = 1;
    gen->add_option("family", family, "tiny | geographic | geometric | appendix_a")->required();
    gen->add_option("--set", gen_sets, "Generator parameter key=value");
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("-o,--out", gen_out, "Output file (stdout when omitted)");
    gen->add_option("--config", config, "Key-value config file");

    auto* solve = app.add_subcommand("solve", "Solve an instance");
    SolveArgs sa;
    solve->add_option("instance", sa.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--method", sa.method, "full-ip | ddd | two-phase")
        ->check(CLI::IsMember({"full-ip", "ddd", "two-phase"}));
    solve->add_option("--alpha", sa.alpha, "DDD optimality gap");
    solve->add_option("--time-limit", sa.time_limit, "Seconds");
    solve->add_option("--gap", sa.gap, "Backend relative gap");
    solve->add_option("--ub", sa.ub, "Horizon T, overriding the instance");
    solve->add_option("--threads", sa.threads, "Backend threads");
    solve->add_option("--backend", sa.backend, "bnb | highs (default from SOLVER_BACKEND)");
    solve->add_option("--storage-rule", sa.storage_rule, "tight | relaxed")
        ->check(CLI::IsMember({"tight", "relaxed"}));
    solve->add_option("-o,--out", sa.out, "Solution JSON");
    solve->add_option("--log", sa.log, "Per-iteration CSV log");
    solve->add_option("--export-mps", sa.mps, "Write the full IP as MPS");
    solve->add_option("--mps-format", sa.mps_format, "fixed | free")->check(CLI::IsMember({"fixed", "free"}));
    solve->add_option("--config", config, "Key-value config file");

    auto* verify = app.add_subcommand("verify", "Check a solution against an instance");
    std::string v_inst, v_sol;
    verify->add_option("instance", v_inst, "Instance JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("solution", v_sol, "Solution JSON")->required()->check(CLI::ExistingFile);

    auto* bench = app.add_subcommand("bench", "Run the benchmark matrix");
    BenchArgs ba;
    bench->add_option("--family", ba.family, "geographic | geometric | tiny");
    bench->add_option("--m", ba.ms, "Arc counts (geographic)")->delimiter(',');
    bench->add_option("--k", ba.ks, "Packet counts (geographic)")->delimiter(',');
    bench->add_option("--seeds", ba.seeds, "Seeds, e.g. 1-3 or 1,4,7");
    bench->add_option("--cap-frac", ba.cap_frac, "Capacity upper bound as a fraction of k");
    bench->add_option("--set", ba.sets, "Generator parameter key=value (non-geographic)");
    bench->add_option("--instances", ba.files, "Instance files instead of a generator matrix");
    bench->add_option("--methods", ba.methods, "full-ip ddd two-phase")->delimiter(',');
    bench->add_option("--factors", ba.factors, "Horizon factors applied to T*")->delimiter(',');
    bench->add_option("--time-limit", ba.time_limit, "Seconds per row");
    bench->add_option("--gap", ba.gap, "Backend relative gap");
    bench->add_option("--alpha", ba.alpha, "DDD optimality gap");
    bench->add_option("--tstar-time-limit", ba.tstar_time_limit, "Seconds for the T* solve");
    bench->add_option("--workers", ba.workers, "Parallel rows");
    bench->add_option("--backend", ba.backend, "bnb | highs");
    bench->add_option("-o,--out", ba.out, "Output directory");
    bench->add_option("--config", config, "Key-value config file");

    auto* rep = app.add_subcommand("report", "Summaries from a results CSV");
    std::string r_results, r_out;
    rep->add_option("results", r_results, "results.csv")->required()->check(CLI::ExistingFile);
    rep->add_option("-o,--out", r_out, "Output directory (stdout when omitted)");

    try {
        app.parse(argc, argv);
        for (auto* sub : {gen, solve, bench}) {
            if (sub->parsed()) apply_config(*sub, config);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(family, gen_sets, gen_seed, gen_out);
        if (solve->parsed()) return cmd_solve(sa);
        if (verify->parsed()) return cmd_verify(v_inst, v_sol);
        if (bench->parsed()) return cmd_bench(ba);
        if (rep->parsed()) return cmd_report(r_results, r_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "upr/ddd.hpp"
#include "upr/instance.hpp"

namespace upr {

enum class Method { full_ip, ddd, two_phase };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct NamedInstance {
    std::string id;
    std::string group;  // cell label used by the report, e.g. "m30_k20"
    Instance instance;
};

struct BenchConfig {
    std::vector<NamedInstance> instances;
    std::vector<Method> methods = {Method::full_ip, Method::ddd};
    std::vector<double> ub_factors = {1.0, 1.5, 2.0};
    double time_limit_s = 300.0;
    double rel_gap = 0.01;
    double alpha = 0.01;
    /// Gap settings for the preliminary solve that fixes T*.
    double tstar_rel_gap = 0.0;
    double tstar_time_limit_s = 3600.0;
    int workers = 1;
    std::string backend;
    std::string output_dir;  // empty: nothing written
    /// Called under a lock with one line per finished T* solve and per finished row.
    std::function<void(const std::string&)> on_progress;
};

/// Geographic matrix: one instance per (m, k, seed) with capacity bounds (1, ceil(frac k)), (0, ceil(frac k)).
std::vector<NamedInstance> geographic_matrix(const std::vector<int>& ms, const std::vector<int>& ks,
                                             const std::vector<std::uint64_t>& seeds, double cap_frac = 0.01);

/// One row per (instance, method, ub_factor). Columns follow kResultHeader.
struct ResultRow {
    std::string instance;
    std::string group;
    std::string method;
    double ub_factor = 1.0;
    int horizon = 0;
    int t_star = 0;
    std::string status;
    double wall_s = 0.0;
    int makespan = -1;
    int iters = 0;
    double ns_ratio = 1.0;
    int short_viol = 0;
    int thr_viol = 0;
    int sto_viol = 0;
    int nodes_short = 0;
    int nodes_thr = 0;
    int nodes_sto = 0;
    int first_iter_sto_viol = 0;
    std::vector<RunRecord> records;

    bool hit_limit() const { return status == "time_limit"; }
};

inline constexpr const char* kResultHeader =
    "instance,method,ub_factor,status,wall_s,makespan,iters,ns_ratio,short_viol,thr_viol,sto_viol,nodes_short,"
    "nodes_thr,nodes_sto";

std::string csv_line(const ResultRow& row);
/// Per-iteration log: instance,method,ub_factor,iteration,phase,lb,ub,gap,timed_nodes,timed_arcs,
/// relaxation_value,short_viol,thr_viol,sto_viol,nodes_short,nodes_thr,nodes_sto,wall_s.
std::string iteration_csv(const std::vector<ResultRow>& rows);

struct BenchResult {
    std::vector<ResultRow> rows;
    std::map<std::string, int> t_star;  // by instance id
    std::vector<std::string> errors;
};

/// T* by exact DDD at each instance's own horizon, then the method x factor matrix.
BenchResult run_bench(const BenchConfig& cfg);

/// Report documents keyed by file name: summary.csv, cumulative.csv, causes.csv.
std::map<std::string, std::string> report(const std::vector<ResultRow>& rows);

/// Reads rows back from the results CSV (records are not restored).
std::vector<ResultRow> read_results_csv(const std::string& text);

}  // namespace upr

#include "upr/mip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>

#include "backends.hpp"

namespace upr {

int MipModel::add_var(std::string name, VarKind kind, double lb, double ub, double obj) {
    if (lb > ub) throw std::invalid_argument("add_var: empty bound interval for " + name);
    vars_.push_back({std::move(name), kind, lb, ub, obj});
    return num_vars() - 1;
}

int MipModel::add_row(std::string name, std::vector<int> idx, std::vector<double> val, Sense sense, double rhs) {
    if (idx.size() != val.size()) throw std::invalid_argument("add_row: index/value length mismatch in " + name);
    for (int j : idx) {
        if (j < 0 || j >= num_vars()) throw std::out_of_range("add_row: undeclared variable in " + name);
    }
    rows_.push_back({std::move(name), std::move(idx), std::move(val), sense, rhs});
    return num_rows() - 1;
}

int MipModel::num_binaries() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                          [](const Variable& v) { return v.kind == VarKind::binary; }));
}

int MipModel::num_nonzeros() const {
    int n = 0;
    for (const auto& r : rows_) n += static_cast<int>(r.idx.size());
    return n;
}

double MipModel::objective(const std::vector<double>& x) const {
    double s = 0.0;
    for (int j = 0; j < num_vars(); ++j) s += vars_[j].obj * x.at(j);
    return s;
}

double MipModel::row_violation(int i, const std::vector<double>& x) const {
    const auto& r = rows_.at(i);
    double act = 0.0;
    for (std::size_t p = 0; p < r.idx.size(); ++p) act += r.val[p] * x.at(r.idx[p]);
    switch (r.sense) {
        case Sense::le: return act - r.rhs;
        case Sense::ge: return r.rhs - act;
        case Sense::eq: return std::abs(act - r.rhs);
    }
    return 0.0;
}

std::vector<int> MipModel::violated_rows(const std::vector<double>& x, double tol) const {
    std::vector<int> bad;
    for (int i = 0; i < num_rows(); ++i) {
        if (row_violation(i, x) > tol) bad.push_back(i);
    }
    return bad;
}

bool MipModel::bounds_ok(const std::vector<double>& x, double tol) const {
    if (static_cast<int>(x.size()) != num_vars()) return false;
    for (int j = 0; j < num_vars(); ++j) {
        if (x[j] < vars_[j].lb - tol || x[j] > vars_[j].ub + tol) return false;
    }
    return true;
}

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const char* sense_str(Sense s) {
    switch (s) {
        case Sense::le: return "<=";
        case Sense::ge: return ">=";
        case Sense::eq: return "=";
    }
    return "?";
}

}  // namespace

std::vector<std::string> canonical_form(const MipModel& model) {
    std::vector<std::string> cols;
    for (const auto& v : model.vars()) {
        cols.push_back("col " + v.name + (v.kind == VarKind::binary ? " B " : " C ") + num(v.lb) + " " + num(v.ub) +
                       " " + num(v.obj));
    }
    std::sort(cols.begin(), cols.end());
    std::vector<std::string> rows;
    for (const auto& r : model.rows()) {
        std::map<std::string, double> entries;
        for (std::size_t p = 0; p < r.idx.size(); ++p) entries[model.var(r.idx[p]).name] += r.val[p];
        std::string line = "row " + r.name + " " + sense_str(r.sense) + " " + num(r.rhs) + " :";
        for (const auto& [name, coef] : entries) {
            if (coef != 0.0) line += " " + num(coef) + "*" + name;
        }
        rows.push_back(std::move(line));
    }
    std::sort(rows.begin(), rows.end());
    cols.insert(cols.end(), rows.begin(), rows.end());
    return cols;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::time_limit: return "time_limit";
        case SolveStatus::error: return "error";
    }
    return "unknown";
}

std::vector<std::string> available_backends() {
    std::vector<std::string> names{"bnb"};
#ifdef UPR_WITH_HIGHS
    names.push_back("highs");
#endif
    return names;
}

std::string default_backend_name() {
    if (const char* env = std::getenv("SOLVER_BACKEND"); env && *env) return env;
#ifdef UPR_WITH_HIGHS
    return "highs";
#else
    return "bnb";
#endif
}

std::unique_ptr<SolverBackend> make_backend(const std::string& name) {
    if (name == "bnb") return make_bnb_backend();
#ifdef UPR_WITH_HIGHS
    if (name == "highs") return make_highs_backend();
#endif
    throw std::invalid_argument("unknown or unavailable solver backend '" + name + "'");
}

}  // namespace upr

#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace upr {

enum class VarKind { binary, continuous };
enum class Sense { le, ge, eq };

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lb = 0.0;
    double ub = std::numeric_limits<double>::infinity();
    double obj = 0.0;
};

struct Row {
    std::string name;
    std::vector<int> idx;
    std::vector<double> val;
    Sense sense = Sense::le;
    double rhs = 0.0;
};

/// Minimisation model: objective sum(obj_j x_j) over variables with bounds, linear rows, and binaries.
class MipModel {
public:
    int add_var(std::string name, VarKind kind, double lb, double ub, double obj = 0.0);
    int add_row(std::string name, std::vector<int> idx, std::vector<double> val, Sense sense, double rhs);

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    int num_binaries() const;
    int num_nonzeros() const;
    const std::vector<Variable>& vars() const { return vars_; }
    const std::vector<Row>& rows() const { return rows_; }
    const Variable& var(int j) const { return vars_.at(j); }
    const Row& row(int i) const { return rows_.at(i); }
    Variable& var(int j) { return vars_.at(j); }

    /// Objective value is integral at every integer-feasible point; branch and bound may round its bound up.
    bool integral_objective = false;

    double objective(const std::vector<double>& x) const;
    /// Row activity minus rhs, signed so that a positive value is a violation.
    double row_violation(int i, const std::vector<double>& x) const;
    /// Rows violated by more than tol (bounds and integrality not checked).
    std::vector<int> violated_rows(const std::vector<double>& x, double tol = 1e-6) const;
    bool bounds_ok(const std::vector<double>& x, double tol = 1e-6) const;

private:
    std::vector<Variable> vars_;
    std::vector<Row> rows_;
};

/// Canonical text form: columns and rows sorted by name, row entries sorted by column name.
/// Two models are equal up to naming order iff their canonical forms match.
std::vector<std::string> canonical_form(const MipModel& model);

struct SolveParams {
    double time_limit_s = std::numeric_limits<double>::infinity();
    double rel_gap = 0.01;
    int threads = 1;
    bool relax_integrality = false;
    std::uint64_t seed = 0;
    bool verbose = false;
};

enum class SolveStatus { optimal, feasible, infeasible, time_limit, error };

std::string to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::error;
    double objective = std::numeric_limits<double>::infinity();
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<double> x;
    double wall_s = 0.0;
    long long nodes = 0;
    std::string message;

    bool has_solution() const { return status == SolveStatus::optimal || status == SolveStatus::feasible; }
};

class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve(const MipModel& model, const SolveParams& params) = 0;
};

/// "bnb" (bundled branch and bound) or "highs" (when compiled in).
std::unique_ptr<SolverBackend> make_backend(const std::string& name);
/// SOLVER_BACKEND if set, else highs when available, else bnb.
std::string default_backend_name();
std::vector<std::string> available_backends();

}  // namespace upr

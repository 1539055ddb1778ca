#include <chrono>
#include <cmath>

#include "Highs.h"
#include "backends.hpp"

namespace upr {

namespace {

class HighsBackend final : public SolverBackend {
public:
    std::string name() const override { return "highs"; }

    SolveResult solve(const MipModel& model, const SolveParams& params) override {
        auto start = std::chrono::steady_clock::now();
        const double inf = kHighsInf;
        HighsLp lp;
        lp.num_col_ = model.num_vars();
        lp.num_row_ = model.num_rows();
        lp.sense_ = ObjSense::kMinimize;
        bool any_integer = false;
        for (const auto& v : model.vars()) {
            lp.col_cost_.push_back(v.obj);
            lp.col_lower_.push_back(std::isinf(v.lb) ? -inf : v.lb);
            lp.col_upper_.push_back(std::isinf(v.ub) ? inf : v.ub);
            bool integer = v.kind == VarKind::binary && !params.relax_integrality;
            any_integer = any_integer || integer;
            lp.integrality_.push_back(integer ? HighsVarType::kInteger : HighsVarType::kContinuous);
        }
        if (!any_integer) lp.integrality_.clear();
        for (const auto& r : model.rows()) {
            lp.row_lower_.push_back(r.sense == Sense::le ? -inf : r.rhs);
            lp.row_upper_.push_back(r.sense == Sense::ge ? inf : r.rhs);
        }
        // Row-wise triplets transposed into column-wise storage.
        std::vector<HighsInt> count(model.num_vars() + 1, 0);
        for (const auto& r : model.rows()) {
            for (int j : r.idx) ++count[j + 1];
        }
        for (int j = 0; j < model.num_vars(); ++j) count[j + 1] += count[j];
        auto& a = lp.a_matrix_;
        a.format_ = MatrixFormat::kColwise;
        a.num_col_ = lp.num_col_;
        a.num_row_ = lp.num_row_;
        a.start_.assign(count.begin(), count.end());
        a.index_.resize(count.back());
        a.value_.resize(count.back());
        std::vector<HighsInt> fill(count.begin(), count.end() - 1);
        for (int i = 0; i < model.num_rows(); ++i) {
            const auto& r = model.row(i);
            for (std::size_t p = 0; p < r.idx.size(); ++p) {
                HighsInt slot = fill[r.idx[p]]++;
                a.index_[slot] = i;
                a.value_[slot] = r.val[p];
            }
        }

        Highs highs;
        highs.setOptionValue("output_flag", params.verbose);
        highs.setOptionValue("threads", static_cast<HighsInt>(std::max(1, params.threads)));
        highs.setOptionValue("random_seed", static_cast<HighsInt>(params.seed % 2147483647ULL));
        highs.setOptionValue("mip_rel_gap", params.rel_gap);
        if (std::isfinite(params.time_limit_s)) highs.setOptionValue("time_limit", std::max(0.0, params.time_limit_s));

        SolveResult res;
        if (highs.passModel(lp) == HighsStatus::kError) {
            res.status = SolveStatus::error;
            res.message = "passModel failed";
            return res;
        }
        highs.run();
        const auto status = highs.getModelStatus();
        const auto& info = highs.getInfo();
        bool has_x = info.primal_solution_status == kSolutionStatusFeasible;
        if (has_x) {
            res.x = highs.getSolution().col_value;
            res.objective = info.objective_function_value;
        }
        res.nodes = any_integer ? info.mip_node_count : 0;
        switch (status) {
            case HighsModelStatus::kOptimal:
                res.status = SolveStatus::optimal;
                res.bound = any_integer ? info.mip_dual_bound : res.objective;
                break;
            case HighsModelStatus::kInfeasible:
            case HighsModelStatus::kUnboundedOrInfeasible:
                res.status = SolveStatus::infeasible;
                res.x.clear();
                break;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kInterrupt:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kSolutionLimit:
                res.status = has_x ? SolveStatus::feasible : SolveStatus::time_limit;
                res.bound = any_integer ? info.mip_dual_bound : -std::numeric_limits<double>::infinity();
                break;
            default:
                res.status = SolveStatus::error;
                res.message = highs.modelStatusToString(status);
                break;
        }
        res.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return res;
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace upr

// Bundled exact backend: bounded dual simplex (sparse LU + product-form updates) inside a
// best-bound branch and bound over the binary variables.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "backends.hpp"

namespace upr {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-7;
constexpr double kDualTol = 1e-7;
constexpr double kPivotTol = 1e-7;
constexpr double kArtificialBound = 1e7;
constexpr int kRefactorEvery = 64;

enum : std::int8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2 };

enum class LpStatus { optimal, infeasible, iteration_limit, time_limit, numerical };

struct Eta {
    int row = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;  // off-pivot part of the FTRAN'd column
};

class DualSimplex {
public:
    DualSimplex(const MipModel& model, std::uint64_t seed) : n_(model.num_vars()), m_(model.num_rows()) {
        const int N = n_ + m_;
        std::vector<int> count(n_ + 1, 0);
        row_start_.assign(m_ + 1, 0);
        for (int i = 0; i < m_; ++i) {
            const auto& r = model.row(i);
            row_start_[i + 1] = row_start_[i] + static_cast<int>(r.idx.size());
            for (std::size_t p = 0; p < r.idx.size(); ++p) {
                row_col_.push_back(r.idx[p]);
                row_val_.push_back(r.val[p]);
                ++count[r.idx[p] + 1];
            }
        }
        for (int j = 0; j < n_; ++j) count[j + 1] += count[j];
        col_start_ = count;
        col_row_.resize(count.back());
        col_val_.resize(count.back());
        std::vector<int> fill(count.begin(), count.end() - 1);
        for (int i = 0; i < m_; ++i) {
            for (int p = row_start_[i]; p < row_start_[i + 1]; ++p) {
                int slot = fill[row_col_[p]]++;
                col_row_[slot] = i;
                col_val_[slot] = row_val_[p];
            }
        }
        cost_true_.assign(N, 0.0);
        for (int j = 0; j < n_; ++j) cost_true_[j] = model.var(j).obj;
        base_lb_.assign(N, 0.0);
        base_ub_.assign(N, 0.0);
        for (int j = 0; j < n_; ++j) {
            base_lb_[j] = std::isinf(model.var(j).lb) ? -kArtificialBound : model.var(j).lb;
            base_ub_[j] = std::isinf(model.var(j).ub) ? kArtificialBound : model.var(j).ub;
        }
        // Open row sides stay open for the simplex; the activity range implied by the column
        // box closes them for the Lagrangian bound.
        implied_lb_.assign(m_, 0.0);
        implied_ub_.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const auto& r = model.row(i);
            double lo = 0.0, hi = 0.0;
            for (std::size_t p = 0; p < r.idx.size(); ++p) {
                double a = r.val[p], l = base_lb_[r.idx[p]], u = base_ub_[r.idx[p]];
                lo += a > 0 ? a * l : a * u;
                hi += a > 0 ? a * u : a * l;
            }
            implied_lb_[i] = lo;
            implied_ub_[i] = hi;
            base_lb_[n_ + i] = r.sense == Sense::le ? -kInf : r.rhs;
            base_ub_[n_ + i] = r.sense == Sense::ge ? kInf : r.rhs;
        }
        rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
        perturb(1e-6);
        lb_ = base_lb_;
        ub_ = base_ub_;
        slack_basis();
    }

    int num_total() const { return n_ + m_; }
    const std::vector<double>& base_lb() const { return base_lb_; }
    const std::vector<double>& base_ub() const { return base_ub_; }

    void set_bounds(const std::vector<double>& lb, const std::vector<double>& ub) {
        lb_ = lb;
        ub_ = ub;
    }

    std::vector<std::int8_t> basis() const { return status_; }

    void set_basis(const std::vector<std::int8_t>& status) {
        status_ = status;
        head_.clear();
        for (int j = 0; j < num_total(); ++j) {
            if (status_[j] == kBasic) head_.push_back(j);
        }
        if (static_cast<int>(head_.size()) != m_) slack_basis();
    }

    /// Solves with perturbed costs, then re-optimises on the true costs from that basis.
    /// A cycling solve restarts from the slack basis with a larger perturbation.
    LpStatus solve_exact(Clock::time_point deadline, long long max_iter) {
        const auto start_basis = status_;
        LpStatus st = LpStatus::iteration_limit;
        double scale = 1e-6;
        for (int attempt = 0; attempt < 4; ++attempt) {
            st = solve(deadline, max_iter);
            if (st != LpStatus::iteration_limit && st != LpStatus::numerical) break;
            scale *= 10.0;
            perturb(scale);
            if (attempt == 0) {
                set_basis(start_basis);
            } else {
                slack_basis();
            }
        }
        if (st != LpStatus::optimal) return st;
        const auto perturbed = cost_;
        const auto basis = status_;
        cost_ = cost_true_;
        LpStatus clean = solve(deadline, max_iter / 4 + 100);
        cost_ = perturbed;
        if (clean == LpStatus::optimal || clean == LpStatus::infeasible) return clean;
        if (clean == LpStatus::time_limit) return clean;
        set_basis(basis);
        return solve(deadline, max_iter);
    }

    LpStatus solve(Clock::time_point deadline, long long max_iter) {
        if (!refactor()) return LpStatus::numerical;
        for (long long it = 0; it < max_iter; ++it) {
            if ((it & 63) == 0 && Clock::now() > deadline) return LpStatus::time_limit;
            if (static_cast<int>(etas_.size()) >= kRefactorEvery && !refactor()) return LpStatus::numerical;

            int r = -1;
            double worst = kPrimalTol;
            for (int p = 0; p < m_; ++p) {
                int j = head_[p];
                double inf = std::max(lb_[j] - x_[j], x_[j] - ub_[j]);
                if (inf > worst) {
                    worst = inf;
                    r = p;
                }
            }
            if (r < 0) return LpStatus::optimal;

            const int leave = head_[r];
            const bool below = x_[leave] < lb_[leave];
            const double target = below ? lb_[leave] : ub_[leave];

            std::vector<double> rho(m_, 0.0);
            rho[r] = 1.0;
            btran(rho);
            std::vector<double> alpha(num_total(), 0.0);
            for (int i = 0; i < m_; ++i) {
                if (std::abs(rho[i]) < 1e-12) continue;
                for (int p = row_start_[i]; p < row_start_[i + 1]; ++p) alpha[row_col_[p]] += rho[i] * row_val_[p];
                alpha[n_ + i] = -rho[i];
            }

            // Harris two-pass ratio test.
            auto eligible = [&](int j, double a) {
                if (status_[j] == kBasic || lb_[j] == ub_[j]) return false;
                if (below) return (status_[j] == kAtLower && a < -kPivotTol) || (status_[j] == kAtUpper && a > kPivotTol);
                return (status_[j] == kAtLower && a > kPivotTol) || (status_[j] == kAtUpper && a < -kPivotTol);
            };
            double tmax = kInf;
            for (int j = 0; j < num_total(); ++j) {
                if (!eligible(j, alpha[j])) continue;
                double slack = status_[j] == kAtLower ? d_[j] : -d_[j];
                tmax = std::min(tmax, (slack + kDualTol) / std::abs(alpha[j]));
            }
            if (tmax == kInf) return LpStatus::infeasible;
            tmax = std::max(tmax, 0.0);
            int q = -1;
            double best_alpha = 0.0;
            for (int j = 0; j < num_total(); ++j) {
                if (!eligible(j, alpha[j])) continue;
                double slack = status_[j] == kAtLower ? d_[j] : -d_[j];
                if (std::max(slack, 0.0) / std::abs(alpha[j]) <= tmax && std::abs(alpha[j]) > best_alpha) {
                    best_alpha = std::abs(alpha[j]);
                    q = j;
                }
            }
            double slack_q = status_[q] == kAtLower ? d_[q] : -d_[q];
            if (slack_q < 0.0) {
                // Shift the cost so the entering reduced cost is exactly zero; keeps the dual objective monotone.
                cost_[q] -= d_[q];
                d_[q] = 0.0;
                slack_q = 0.0;
            }
            double t = slack_q / std::abs(alpha[q]);

            std::vector<double> col(m_, 0.0);
            load_column(q, col);
            ftran(col);
            if (std::abs(col[r]) < kPivotTol || std::abs(col[r] - alpha[q]) > 1e-6 * (1.0 + std::abs(col[r]))) {
                if (etas_.empty()) return LpStatus::numerical;
                if (!refactor()) return LpStatus::numerical;
                continue;
            }

            double step = (x_[leave] - target) / col[r];
            for (int p = 0; p < m_; ++p) x_[head_[p]] -= col[p] * step;
            x_[q] += step;
            x_[leave] = target;

            for (int j = 0; j < num_total(); ++j) {
                if (status_[j] != kBasic) d_[j] += below ? t * alpha[j] : -t * alpha[j];
            }
            d_[leave] = below ? t : -t;
            d_[q] = 0.0;

            Eta eta;
            eta.row = r;
            eta.pivot = col[r];
            for (int p = 0; p < m_; ++p) {
                if (p != r && col[p] != 0.0) eta.entries.emplace_back(p, col[p]);
            }
            etas_.push_back(std::move(eta));
            status_[leave] = below ? kAtLower : kAtUpper;
            status_[q] = kBasic;
            head_[r] = q;
        }
        return LpStatus::iteration_limit;
    }

    std::vector<double> structural_values() const { return {x_.begin(), x_.begin() + n_}; }

    double true_objective() const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += cost_true_[j] * x_[j];
        return s;
    }

    /// Lagrangian bound min over the current box of c'x - y'(Ax - s) with y from the true costs.
    double lagrangian_bound() {
        std::vector<double> y(m_);
        for (int p = 0; p < m_; ++p) y[p] = cost_true_[head_[p]];
        btran(y);
        double bound = 0.0;
        auto add = [&](double dj, double lo, double hi) {
            if (std::abs(dj) < 1e-11) return;
            double at = dj > 0 ? lo : hi;
            if (std::isinf(at)) {
                bound = -kInf;
                return;
            }
            bound += dj * at;
        };
        for (int j = 0; j < n_; ++j) {
            double dj = cost_true_[j];
            for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) dj -= y[col_row_[p]] * col_val_[p];
            add(dj, lb_[j], ub_[j]);
        }
        for (int i = 0; i < m_; ++i)
            add(y[i], std::max(lb_[n_ + i], implied_lb_[i]), std::min(ub_[n_ + i], implied_ub_[i]));
        return bound;
    }

private:
    // Random cost perturbation against dual degeneracy; signs follow the initial nonbasic side.
    void perturb(double scale) {
        std::uniform_real_distribution<double> pert(scale, 2.0 * scale);
        cost_ = cost_true_;
        for (int j = 0; j < num_total(); ++j) {
            double e = pert(rng_) * (1.0 + std::abs(cost_true_[j]));
            cost_[j] += cost_true_[j] >= 0 ? e : -e;
        }
    }

    void slack_basis() {
        status_.assign(num_total(), kAtLower);
        head_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            status_[n_ + i] = kBasic;
            head_[i] = n_ + i;
        }
    }

    void load_column(int j, std::vector<double>& col) const {
        if (j < n_) {
            for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) col[col_row_[p]] = col_val_[p];
        } else {
            col[j - n_] = -1.0;
        }
    }

    bool factor() {
        std::vector<Eigen::Triplet<double>> trip;
        for (int p = 0; p < m_; ++p) {
            int j = head_[p];
            if (j < n_) {
                for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) trip.emplace_back(col_row_[q], p, col_val_[q]);
            } else {
                trip.emplace_back(j - n_, p, -1.0);
            }
        }
        Eigen::SparseMatrix<double> B(m_, m_);
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        lu_.compute(B);
        etas_.clear();
        return lu_.info() == Eigen::Success;
    }

    bool refactor() {
        if (m_ == 0) {
            etas_.clear();
            place_nonbasic();
            d_ = cost_;
            return true;
        }
        if (!factor()) {
            slack_basis();
            if (!factor()) return false;
        }
        place_nonbasic();
        // x_B = -B^{-1} N x_N
        std::vector<double> rhs(m_, 0.0);
        for (int j = 0; j < num_total(); ++j) {
            if (status_[j] == kBasic || x_[j] == 0.0) continue;
            if (j < n_) {
                for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[col_row_[p]] -= col_val_[p] * x_[j];
            } else {
                rhs[j - n_] += x_[j];
            }
        }
        ftran(rhs);
        for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
        // d = c - A'y with y = B^{-T} c_B
        std::vector<double> y(m_);
        for (int p = 0; p < m_; ++p) y[p] = cost_[head_[p]];
        btran(y);
        d_.assign(num_total(), 0.0);
        for (int j = 0; j < n_; ++j) {
            if (status_[j] == kBasic) continue;
            double dj = cost_[j];
            for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) dj -= y[col_row_[p]] * col_val_[p];
            d_[j] = dj;
        }
        for (int i = 0; i < m_; ++i) {
            if (status_[n_ + i] != kBasic) d_[n_ + i] = y[i];
        }
        // Restore dual feasibility: flip boxed variables, shift costs of the others.
        bool moved = false;
        for (int j = 0; j < num_total(); ++j) {
            if (status_[j] == kBasic || lb_[j] == ub_[j]) continue;
            bool wrong = (status_[j] == kAtLower && d_[j] < -kDualTol) || (status_[j] == kAtUpper && d_[j] > kDualTol);
            if (!wrong) continue;
            std::int8_t want = status_[j] == kAtLower ? kAtUpper : kAtLower;
            double to = want == kAtLower ? lb_[j] : ub_[j];
            if (std::isfinite(to)) {
                status_[j] = want;
                moved = true;
            } else {
                cost_[j] -= d_[j];
                d_[j] = 0.0;
            }
        }
        if (moved) return refactor_values_only();
        return true;
    }

    bool refactor_values_only() {
        place_nonbasic();
        std::vector<double> rhs(m_, 0.0);
        for (int j = 0; j < num_total(); ++j) {
            if (status_[j] == kBasic || x_[j] == 0.0) continue;
            if (j < n_) {
                for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) rhs[col_row_[p]] -= col_val_[p] * x_[j];
            } else {
                rhs[j - n_] += x_[j];
            }
        }
        ftran(rhs);
        for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
        return true;
    }

    void place_nonbasic() {
        x_.resize(num_total());
        for (int j = 0; j < num_total(); ++j) {
            if (status_[j] == kBasic) continue;
            if (lb_[j] == ub_[j]) {
                status_[j] = kAtLower;
                x_[j] = lb_[j];
                continue;
            }
            if (status_[j] == kAtLower && std::isinf(lb_[j])) status_[j] = kAtUpper;
            if (status_[j] == kAtUpper && std::isinf(ub_[j])) status_[j] = kAtLower;
            x_[j] = status_[j] == kAtLower ? lb_[j] : ub_[j];
        }
    }

    void ftran(std::vector<double>& v) const {
        if (m_ == 0) return;
        Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
        Eigen::VectorXd out = lu_.solve(mv);
        mv = out;
        for (const auto& eta : etas_) {
            double xr = v[eta.row] / eta.pivot;
            v[eta.row] = xr;
            if (xr == 0.0) continue;
            for (const auto& [i, val] : eta.entries) v[i] -= val * xr;
        }
    }

    void btran(std::vector<double>& v) const {
        if (m_ == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->row];
            for (const auto& [i, val] : it->entries) s -= val * v[i];
            v[it->row] = s / it->pivot;
        }
        Eigen::Map<Eigen::VectorXd> mv(v.data(), m_);
        Eigen::VectorXd out = lu_.transpose().solve(mv);
        mv = out;
    }

    int n_;
    int m_;
    std::vector<int> col_start_, col_row_, row_start_, row_col_;
    std::vector<double> col_val_, row_val_;
    std::vector<double> cost_true_, cost_;
    std::vector<double> base_lb_, base_ub_, lb_, ub_;
    std::vector<double> implied_lb_, implied_ub_;
    std::vector<std::int8_t> status_;
    std::vector<int> head_;
    std::vector<double> x_, d_;
    std::vector<Eta> etas_;
    std::mt19937_64 rng_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

struct Node {
    double bound = -kInf;
    int depth = 0;
    long long id = 0;
    std::vector<std::pair<int, double>> fix;  // (binary variable, fixed value)
    std::vector<std::int8_t> basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

class BnbBackend final : public SolverBackend {
public:
    std::string name() const override { return "bnb"; }

    SolveResult solve(const MipModel& model, const SolveParams& params) override {
        const auto start = Clock::now();
        const auto deadline = std::isfinite(params.time_limit_s)
                                  ? start + std::chrono::duration_cast<Clock::duration>(
                                                std::chrono::duration<double>(std::max(0.0, params.time_limit_s)))
                                  : Clock::time_point::max();
        SolveResult res;
        auto finish = [&](SolveStatus s) {
            res.status = s;
            res.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
            return res;
        };

        DualSimplex lp(model, params.seed);
        const long long max_iter = 50LL * (model.num_vars() + model.num_rows()) + 1000;
        std::vector<int> binaries;
        if (!params.relax_integrality) {
            for (int j = 0; j < model.num_vars(); ++j) {
                if (model.var(j).kind == VarKind::binary) binaries.push_back(j);
            }
        }
        const bool round_bound = model.integral_objective && !params.relax_integrality;
        auto node_bound = [&](double b) { return round_bound ? std::ceil(b - 1e-6) : b; };

        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        open.push(Node{-kInf, 0, 0, {}, lp.basis()});
        long long next_id = 1;
        double incumbent = kInf;
        std::vector<double> best_x;
        bool complete = true;

        auto gap_closed = [&](double bound) {
            if (incumbent == kInf) return false;
            if (bound >= incumbent - 1e-9) return true;
            return (incumbent - bound) <= params.rel_gap * std::max(std::abs(incumbent), 1e-9);
        };

        while (!open.empty()) {
            if (Clock::now() > deadline) {
                complete = false;
                break;
            }
            if (gap_closed(open.top().bound)) break;
            Node node = open.top();
            open.pop();
            ++res.nodes;

            std::vector<double> lb = lp.base_lb(), ub = lp.base_ub();
            for (const auto& [j, v] : node.fix) lb[j] = ub[j] = v;
            lp.set_bounds(lb, ub);
            lp.set_basis(node.basis);
            LpStatus st = lp.solve_exact(deadline, max_iter);
            if (st == LpStatus::time_limit) {
                complete = false;
                open.push(node);
                break;
            }
            if (st == LpStatus::infeasible) continue;
            if (st != LpStatus::optimal) {
                res.message = st == LpStatus::numerical ? "LP numerical failure at branch-and-bound node"
                                                        : "LP iteration limit at branch-and-bound node";
                return finish(SolveStatus::error);
            }
            std::vector<double> x = lp.structural_values();
            double bound = std::max(node.bound, node_bound(lp.lagrangian_bound()));

            if (params.relax_integrality) {
                res.x = x;
                res.objective = lp.true_objective();
                res.bound = std::min(bound, res.objective);
                return finish(SolveStatus::optimal);
            }
            if (gap_closed(bound)) continue;

            int branch = -1;
            double frac_best = 1e-6;
            for (int j : binaries) {
                double f = std::abs(x[j] - std::round(x[j]));
                if (f > frac_best) {
                    frac_best = f;
                    branch = j;
                }
            }
            if (branch < 0) {
                std::vector<double> cand = x;
                for (int j : binaries) cand[j] = std::round(cand[j]);
                if (!model.violated_rows(cand, 1e-6).empty() || !model.bounds_ok(cand)) cand = x;
                if (model.violated_rows(cand, 1e-5).empty()) {
                    double obj = model.objective(cand);
                    if (obj < incumbent) {
                        incumbent = obj;
                        best_x = std::move(cand);
                    }
                    continue;
                }
                // Numerically doubtful vertex: branch on the least settled binary anyway.
                for (int j : binaries) {
                    bool fixed = std::any_of(node.fix.begin(), node.fix.end(),
                                             [j](const auto& f) { return f.first == j; });
                    if (!fixed) {
                        branch = j;
                        break;
                    }
                }
                if (branch < 0) continue;
            }
            auto basis = lp.basis();
            for (double v : {std::round(x[branch]) >= 1.0 ? 1.0 : 0.0, std::round(x[branch]) >= 1.0 ? 0.0 : 1.0}) {
                Node child{bound, node.depth + 1, next_id++, node.fix, basis};
                child.fix.emplace_back(branch, v);
                open.push(std::move(child));
            }
        }

        double open_bound = open.empty() ? kInf : open.top().bound;
        res.bound = std::min(open_bound, incumbent);
        if (incumbent < kInf) {
            res.x = best_x;
            res.objective = incumbent;
            bool proven = open.empty() || gap_closed(open_bound);
            return finish(proven ? SolveStatus::optimal : SolveStatus::feasible);
        }
        if (complete && open.empty()) return finish(SolveStatus::infeasible);
        return finish(SolveStatus::time_limit);
    }
};

}  // namespace

std::unique_ptr<SolverBackend> make_bnb_backend() { return std::make_unique<BnbBackend>(); }

}  // namespace upr

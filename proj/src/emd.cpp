#include "netscope/emd.hpp"

#include "netscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netscope {

namespace {

// Primal network simplex for the uncapacitated transportation problem,
// following the spanning-tree bookkeeping (parent/thread/succ_num/last_succ)
// of the LEMON NetworkSimplex implementation with block-search pricing.
//
// Nodes 0..n-1 are supplies, n..n+m-1 are demands, node n+m is the artificial
// root. Arc e = i*m + j joins supply i to demand j; arcs arc_num_ + u connect
// node u to the root.
class TransportSimplex {
public:
    TransportSimplex(const Matrix& cost, const Vector& supply, const Vector& demand)
        : n_(static_cast<int>(supply.size())),
          m_(static_cast<int>(demand.size())),
          node_num_(n_ + m_),
          arc_num_(n_ * m_),
          all_arc_num_(arc_num_ + node_num_),
          root_(node_num_) {
        source_.resize(all_arc_num_);
        target_.resize(all_arc_num_);
        cost_.resize(all_arc_num_);
        flow_.assign(all_arc_num_, 0.0);
        state_.assign(all_arc_num_, kStateLower);

        const int nodes = node_num_ + 1;
        supply_.resize(nodes);
        pi_.resize(nodes);
        parent_.resize(nodes);
        pred_.resize(nodes);
        pred_dir_.resize(nodes);
        thread_.resize(nodes);
        rev_thread_.resize(nodes);
        succ_num_.resize(nodes);
        last_succ_.resize(nodes);

        // Costs are shifted to be non-negative; every feasible plan carries
        // the same total mass so the optimum is unchanged.
        min_cost_ = cost.minCoeff();
        double max_shifted = 0.0;
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < m_; ++j) {
                const int e = i * m_ + j;
                source_[e] = i;
                target_[e] = n_ + j;
                cost_[e] = cost(i, j) - min_cost_;
                max_shifted = std::max(max_shifted, cost_[e]);
            }
        }
        art_cost_ = (max_shifted + 1.0) * node_num_;

        for (int i = 0; i < n_; ++i) supply_[i] = supply(i);
        for (int j = 0; j < m_; ++j) supply_[n_ + j] = -demand(j);

        block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(arc_num_))));
        init_tree();
    }

    void run() {
        while (find_entering_arc()) {
            find_join_node();
            find_leaving_arc();
            change_flow();
            update_tree_structure();
            update_potential();
            ++pivots_;
        }
    }

    long pivots() const { return pivots_; }

    /// Mass left on artificial arcs; non-zero only when marginal totals differ.
    double artificial_mass() const {
        double s = 0.0;
        for (int e = arc_num_; e < all_arc_num_; ++e) s += flow_[e];
        return s;
    }

    void collect(SparsePlan& plan) const {
        plan.rows = n_;
        plan.cols = m_;
        plan.entries.clear();
        for (int u = 0; u < node_num_; ++u) {
            const int e = pred_[u];
            if (e < arc_num_ && flow_[e] > 0.0)
                plan.entries.push_back({source_[e], target_[e] - n_, flow_[e]});
        }
        std::sort(plan.entries.begin(), plan.entries.end(), [](const auto& a, const auto& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
    }

private:
    static constexpr signed char kStateTree = 0;
    static constexpr signed char kStateLower = 1;
    static constexpr signed char kDirUp = 1;
    static constexpr signed char kDirDown = -1;
    static constexpr double kEpsilon = 2.2204460492503131e-15;

    void init_tree() {
        parent_[root_] = -1;
        pred_[root_] = -1;
        thread_[root_] = 0;
        rev_thread_[0] = root_;
        succ_num_[root_] = node_num_ + 1;
        last_succ_[root_] = root_ - 1;
        supply_[root_] = 0.0;
        pi_[root_] = 0.0;

        for (int u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
            parent_[u] = root_;
            pred_[u] = e;
            thread_[u] = u + 1;
            rev_thread_[u + 1] = u;
            succ_num_[u] = 1;
            last_succ_[u] = u;
            state_[e] = kStateTree;
            if (supply_[u] >= 0.0) {
                pred_dir_[u] = kDirUp;
                pi_[u] = 0.0;
                source_[e] = u;
                target_[e] = root_;
                flow_[e] = supply_[u];
                cost_[e] = 0.0;
            } else {
                pred_dir_[u] = kDirDown;
                pi_[u] = art_cost_;
                source_[e] = root_;
                target_[e] = u;
                flow_[e] = -supply_[u];
                cost_[e] = art_cost_;
            }
        }
    }

    double reduced_cost(int e) const {
        return state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    }

    bool improving(int e, double c) const {
        const double scale = std::max({std::fabs(pi_[source_[e]]), std::fabs(pi_[target_[e]]),
                                       std::fabs(cost_[e])});
        return c < -kEpsilon * scale;
    }

    // Block search: scan blocks of arcs starting where the last search ended
    // and take the most negative reduced cost in the first block that has
    // one. Within a block, ties go to the lowest arc index.
    bool find_entering_arc() {
        double best = 0.0;
        int best_arc = -1;
        int cnt = block_size_;
        int e = next_arc_;
        for (int scanned = 0; scanned < arc_num_; ++scanned) {
            if (state_[e] != kStateTree) {
                const double c = reduced_cost(e);
                if (c < best && improving(e, c)) {
                    best = c;
                    best_arc = e;
                }
            }
            if (++e == arc_num_) e = 0;
            if (--cnt == 0) {
                if (best_arc >= 0) break;
                cnt = block_size_;
            }
        }
        if (best_arc < 0) return false;
        in_arc_ = best_arc;
        next_arc_ = e;
        return true;
    }

    void find_join_node() {
        int u = source_[in_arc_];
        int v = target_[in_arc_];
        while (u != v) {
            if (succ_num_[u] < succ_num_[v])
                u = parent_[u];
            else
                v = parent_[v];
        }
        join_ = u;
    }

    void find_leaving_arc() {
        // Non-tree arcs are always at their lower bound: flow is pushed from
        // source to target along the entering arc.
        const int first = source_[in_arc_];
        const int second = target_[in_arc_];
        constexpr double inf = std::numeric_limits<double>::infinity();
        delta_ = inf;
        int result = 0;
        for (int u = first; u != join_; u = parent_[u]) {
            const double d = pred_dir_[u] == kDirUp ? flow_[pred_[u]] : inf;
            if (d < delta_) {
                delta_ = d;
                u_out_ = u;
                result = 1;
            }
        }
        for (int u = second; u != join_; u = parent_[u]) {
            const double d = pred_dir_[u] == kDirDown ? flow_[pred_[u]] : inf;
            if (d <= delta_) {
                delta_ = d;
                u_out_ = u;
                result = 2;
            }
        }
        if (result == 1) {
            u_in_ = first;
            v_in_ = second;
        } else {
            u_in_ = second;
            v_in_ = first;
        }
    }

    void change_flow() {
        if (delta_ > 0.0) {
            const double val = delta_;
            flow_[in_arc_] += val;
            for (int u = source_[in_arc_]; u != join_; u = parent_[u])
                flow_[pred_[u]] -= pred_dir_[u] * val;
            for (int u = target_[in_arc_]; u != join_; u = parent_[u])
                flow_[pred_[u]] += pred_dir_[u] * val;
        }
        state_[in_arc_] = kStateTree;
        const int out_arc = pred_[u_out_];
        state_[out_arc] = kStateLower;
        flow_[out_arc] = 0.0;
    }

    void update_tree_structure() {
        const int old_rev_thread = rev_thread_[u_out_];
        const int old_succ_num = succ_num_[u_out_];
        const int old_last_succ = last_succ_[u_out_];
        v_out_ = parent_[u_out_];

        if (u_in_ == u_out_) {
            parent_[u_in_] = v_in_;
            pred_[u_in_] = in_arc_;
            pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;

            if (thread_[v_in_] != u_out_) {
                int after = thread_[old_last_succ];
                thread_[old_rev_thread] = after;
                rev_thread_[after] = old_rev_thread;
                after = thread_[v_in_];
                thread_[v_in_] = u_out_;
                rev_thread_[u_out_] = v_in_;
                thread_[old_last_succ] = after;
                rev_thread_[after] = old_last_succ;
            }
        } else {
            const int thread_continue =
                old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

            // Re-hang the stem nodes between u_in and u_out.
            int stem = u_in_;
            int par_stem = v_in_;
            int last = last_succ_[u_in_];
            int after = thread_[last];
            thread_[v_in_] = u_in_;
            dirty_revs_.clear();
            dirty_revs_.push_back(v_in_);
            while (stem != u_out_) {
                const int next_stem = parent_[stem];
                thread_[last] = next_stem;
                dirty_revs_.push_back(last);

                const int before = rev_thread_[stem];
                thread_[before] = after;
                rev_thread_[after] = before;

                parent_[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                                : last_succ_[stem];
                after = thread_[last];
            }
            parent_[u_out_] = par_stem;
            thread_[last] = thread_continue;
            rev_thread_[thread_continue] = last;
            last_succ_[u_out_] = last;

            if (old_rev_thread != v_in_) {
                thread_[old_rev_thread] = after;
                rev_thread_[after] = old_rev_thread;
            }

            for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

            int tmp_sc = 0;
            const int tmp_ls = last_succ_[u_out_];
            for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
                pred_[u] = pred_[p];
                pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
                tmp_sc += succ_num_[u] - succ_num_[p];
                succ_num_[u] = tmp_sc;
                last_succ_[p] = tmp_ls;
            }
            pred_[u_in_] = in_arc_;
            pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
            succ_num_[u_in_] = old_succ_num;
        }

        const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
        const int last_succ_out = last_succ_[u_out_];
        for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u])
            last_succ_[u] = last_succ_out;

        if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
            for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
                 u = parent_[u])
                last_succ_[u] = old_rev_thread;
        } else if (last_succ_out != old_last_succ) {
            for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
                 u = parent_[u])
                last_succ_[u] = last_succ_out;
        }

        for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
        for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
    }

    void update_potential() {
        const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
        const int end = thread_[last_succ_[u_in_]];
        for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
    }

    int n_, m_, node_num_, arc_num_, all_arc_num_, root_;
    double min_cost_ = 0.0;
    double art_cost_ = 0.0;
    int block_size_ = 10;
    int next_arc_ = 0;
    long pivots_ = 0;

    std::vector<int> source_, target_;
    std::vector<double> cost_, flow_;
    std::vector<signed char> state_;

    std::vector<double> supply_, pi_;
    std::vector<int> parent_, pred_, thread_, rev_thread_, succ_num_, last_succ_;
    std::vector<signed char> pred_dir_;
    std::vector<int> dirty_revs_;

    int in_arc_ = -1, join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1, v_out_ = -1;
    double delta_ = 0.0;
};

void check_inputs(const Matrix& cost, const Weights& mu, const Weights& nu) {
    if (mu.size() < 1 || nu.size() < 1) throw InputError("emd: marginals must be non-empty");
    if (cost.rows() != mu.size() || cost.cols() != nu.size())
        throw InputError("emd: cost is " + std::to_string(cost.rows()) + "x" +
                         std::to_string(cost.cols()) + " but marginals have sizes " +
                         std::to_string(mu.size()) + " and " + std::to_string(nu.size()));
    if (!cost.allFinite()) throw InputError("emd: non-finite cost entries");
    if (!mu.vector.allFinite() || !nu.vector.allFinite())
        throw InputError("emd: non-finite marginal entries");
    if ((mu.vector.array() <= 0.0).any() || (nu.vector.array() <= 0.0).any())
        throw InputError("emd: marginal entries must be strictly positive");
    const double diff = std::fabs(mu.vector.sum() - nu.vector.sum());
    if (diff > 1e-9)
        throw InputError("emd: marginal totals differ by " + std::to_string(diff));
    const double arcs = static_cast<double>(cost.rows()) * static_cast<double>(cost.cols());
    if (arcs > static_cast<double>(std::numeric_limits<int>::max() / 2))
        throw InputError("emd: problem too large");
}

}  // namespace

Matrix SparsePlan::to_dense() const {
    Matrix m = Matrix::Zero(rows, cols);
    for (const auto& e : entries) m(e.row, e.col) += e.mass;
    return m;
}

SparseEmdResult solve_emd_sparse(const Matrix& cost, const Weights& mu, const Weights& nu) {
    check_inputs(cost, mu, nu);
    TransportSimplex simplex(cost, mu.vector, nu.vector);
    simplex.run();

    SparseEmdResult out;
    simplex.collect(out.plan);
    out.pivots = simplex.pivots();
    const double total = std::min(mu.vector.sum(), nu.vector.sum());
    if (simplex.artificial_mass() > 1e-9 * std::max(1.0, total))
        throw NumericalError("emd: solver terminated with infeasible residual mass");
    double obj = 0.0;
    for (const auto& e : out.plan.entries) obj += cost(e.row, e.col) * e.mass;
    out.objective = obj;
    return out;
}

EmdResult solve_emd(const Matrix& cost, const Weights& mu, const Weights& nu) {
    SparseEmdResult sparse = solve_emd_sparse(cost, mu, nu);
    EmdResult out;
    out.coupling.matrix = sparse.plan.to_dense();
    out.coupling.row_marginal = mu;
    out.coupling.col_marginal = nu;
    out.objective = sparse.objective;
    return out;
}

double wasserstein_distance(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw InputError("wasserstein: feature dimensions differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
    if (a.rows() != b.rows())
        throw InputError("wasserstein: sample counts differ (" + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()) + ")");
    const Vector sa = a.rowwise().squaredNorm();
    const Vector sb = b.rowwise().squaredNorm();
    Matrix cost = -2.0 * a * b.transpose();
    cost.colwise() += sa;
    cost.rowwise() += sb.transpose();
    cost = cost.cwiseMax(0.0);
    const auto res = solve_emd_sparse(cost, uniform_weights(a.rows()), uniform_weights(b.rows()));
    return std::sqrt(std::max(0.0, res.objective));
}

double wasserstein_layer_distance(const LayerActivations& a, const LayerActivations& b) {
    try {
        return wasserstein_distance(a.data, b.data);
    } catch (const InputError& e) {
        throw InputError("layers '" + a.name + "' and '" + b.name + "': " + e.what());
    }
}

}  // namespace netscope

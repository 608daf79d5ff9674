#include "netscope/gw.hpp"

#include "netscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace netscope {

namespace {

// Beyond this many non-zeros the O(nnz^2) exact evaluation is too slow.
constexpr Eigen::Index kExactEvalMaxNnz = 4096;

struct Problem {
    const Matrix& d1;
    const Matrix& d2;
    const Vector& mu;
    const Vector& nu;
    // sum_ik D1_ik^2 mu_i mu_k + sum_jl D2_jl^2 nu_j nu_l: the part of the
    // objective that is constant over feasible couplings.
    double constant = 0.0;
    Vector c1;  // (D1 o D1) mu
    Vector c2;  // (D2 o D2) nu
};

struct Run {
    Matrix pi;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

double cross_term(const Matrix& g, const Matrix& pi) { return (g.array() * pi.array()).sum(); }

// G = D1 * P * D2 for a sparse plan P, in O(nnz m + n^2 m).
Matrix propagate_sparse(const Matrix& d1, const Matrix& d2, const SparsePlan& plan) {
    Matrix t = Matrix::Zero(plan.rows, d2.cols());
    for (const auto& e : plan.entries) t.row(e.row) += e.mass * d2.row(e.col);
    return d1 * t;
}

Run frank_wolfe(const Problem& p, Matrix pi, Matrix g, const GwConfig& cfg) {
    Run run;
    auto objective = [&](const Matrix& gm, const Matrix& pm) {
        return p.constant - 2.0 * cross_term(gm, pm);
    };

    double f = objective(g, pi);
    if (!std::isfinite(f)) throw NumericalError("gw: non-finite objective at initialization");
    run.trace.push_back(f);

    const Weights mu{p.mu};
    const Weights nu{p.nu};
    for (int it = 0; it < cfg.max_iters; ++it) {
        // Linearized objective; row/column-constant terms of the gradient do
        // not change the minimizer over the transport polytope.
        const Matrix lin = -g;
        const SparseEmdResult vertex = solve_emd_sparse(lin, mu, nu);
        const Matrix g_star = propagate_sparse(p.d1, p.d2, vertex.plan);
        const Matrix pi_star = vertex.plan.to_dense();

        const Matrix delta = pi_star - pi;
        const double a = -2.0 * cross_term(g_star - g, delta);
        const double b = p.c1.dot(delta.rowwise().sum()) + p.c2.dot(delta.colwise().sum()) -
                         4.0 * cross_term(g, delta);
        if (!std::isfinite(a) || !std::isfinite(b))
            throw NumericalError("gw: non-finite line-search coefficients");

        double gamma = 0.0;
        if (a > 0.0)
            gamma = std::clamp(-b / (2.0 * a), 0.0, 1.0);
        else
            gamma = (a + b < 0.0) ? 1.0 : 0.0;

        run.iterations = it + 1;
        if (gamma <= 0.0) {
            run.converged = true;
            break;
        }

        Matrix pi_next = pi + gamma * delta;
        Matrix g_next = g + gamma * (g_star - g);
        const double f_next = objective(g_next, pi_next);
        if (!std::isfinite(f_next)) throw NumericalError("gw: non-finite objective");
        if (f_next > f) {
            // Round-off made the exact step look uphill; the current point is
            // stationary to working precision.
            run.converged = true;
            break;
        }
        const double decrease = f - f_next;
        pi = std::move(pi_next);
        g = std::move(g_next);
        f = f_next;
        run.trace.push_back(f);

        const double scale = std::max(std::fabs(f), std::numeric_limits<double>::min());
        if (decrease / scale < cfg.rel_tol || f <= 0.0) {
            run.converged = true;
            break;
        }
    }
    run.pi = std::move(pi);
    run.objective = f;
    return run;
}

// Positive random matrix scaled onto the marginals by iterative proportional
// fitting.
Matrix random_coupling(const Vector& mu, const Vector& nu, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix pi(mu.size(), nu.size());
    for (Eigen::Index j = 0; j < pi.cols(); ++j)
        for (Eigen::Index i = 0; i < pi.rows(); ++i) pi(i, j) = 1.0 - unit(rng);

    for (int sweep = 0; sweep < 10000; ++sweep) {
        pi.array().colwise() *= (mu.array() / pi.rowwise().sum().array());
        pi.array().rowwise() *= (nu.array() / pi.colwise().sum().transpose().array()).transpose();
        const double err = (pi.rowwise().sum() - mu).cwiseAbs().maxCoeff();
        if (err < 1e-15) break;
    }
    return pi;
}

bool all_zero(const Matrix& m) { return (m.array() == 0.0).all(); }

}  // namespace

void GwConfig::validate() const {
    if (max_iters < 1) throw InputError("gw: max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw InputError("gw: rel_tol must be > 0");
    if (restarts < 0) throw InputError("gw: restarts must be >= 0");
}

double gw_objective(const Matrix& d1, const Matrix& d2, const Matrix& coupling) {
    std::vector<PlanEntry> nz;
    for (Eigen::Index j = 0; j < coupling.cols(); ++j)
        for (Eigen::Index i = 0; i < coupling.rows(); ++i)
            if (coupling(i, j) != 0.0) nz.push_back({i, j, coupling(i, j)});

    if (static_cast<Eigen::Index>(nz.size()) <= kExactEvalMaxNnz) {
        double total = 0.0;
        for (const auto& x : nz) {
            double row = 0.0;
            for (const auto& y : nz) {
                const double diff = d1(x.row, y.row) - d2(x.col, y.col);
                row += diff * diff * y.mass;
            }
            total += row * x.mass;
        }
        return total;
    }
    const Vector r = coupling.rowwise().sum();
    const Vector c = coupling.colwise().sum().transpose();
    const double t1 = r.dot(d1.cwiseProduct(d1) * r);
    const double t2 = c.dot(d2.cwiseProduct(d2) * c);
    const double cross = cross_term(d1 * coupling * d2, coupling);
    return std::max(0.0, t1 + t2 - 2.0 * cross);
}

GwResult gw_distance(const IntraDistances& dist1, const IntraDistances& dist2, const Weights& mu,
                     const Weights& nu, const GwConfig& cfg) {
    cfg.validate();
    const Matrix& d1 = dist1.matrix;
    const Matrix& d2 = dist2.matrix;
    if (d1.rows() != d1.cols() || d2.rows() != d2.cols())
        throw InputError("gw: distance matrices must be square");
    if (d1.rows() != mu.size() || d2.rows() != nu.size())
        throw InputError("gw: weights do not match distance matrix sizes (" +
                         std::to_string(d1.rows()) + "/" + std::to_string(mu.size()) + ", " +
                         std::to_string(d2.rows()) + "/" + std::to_string(nu.size()) + ")");
    if (!d1.allFinite() || !d2.allFinite()) throw InputError("gw: non-finite distances");
    if (std::fabs(mu.vector.sum() - nu.vector.sum()) > 1e-9)
        throw InputError("gw: marginal totals differ");

    Problem p{d1, d2, mu.vector, nu.vector, 0.0, Vector{}, Vector{}};
    p.c1 = d1.cwiseProduct(d1) * mu.vector;
    p.c2 = d2.cwiseProduct(d2) * nu.vector;
    p.constant = mu.vector.dot(p.c1) + nu.vector.dot(p.c2);

    GwResult result;
    result.coupling.row_marginal = mu;
    result.coupling.col_marginal = nu;

    const Matrix product = mu.vector * nu.vector.transpose();
    if (all_zero(d1) || all_zero(d2)) {
        // One space collapses to a point: every coupling has the same cost.
        result.coupling.matrix = product;
        result.distance_sq = gw_objective(d1, d2, product);
        result.objective_trace = {result.distance_sq};
        result.iterations = 0;
        result.converged = true;
        return result;
    }

    const Matrix g0 = (d1 * mu.vector) * (d2 * nu.vector).transpose();
    Run best = frank_wolfe(p, product, g0, cfg);
    double best_value = gw_objective(d1, d2, best.pi);

    for (int r = 0; r < cfg.restarts; ++r) {
        Matrix pi0 = random_coupling(mu.vector, nu.vector, derive_seed(cfg.seed, 0x6777u, r));
        Matrix g = d1 * pi0 * d2;
        Run run = frank_wolfe(p, std::move(pi0), std::move(g), cfg);
        const double value = gw_objective(d1, d2, run.pi);
        if (value < best_value) {
            best = std::move(run);
            best_value = value;
        }
    }

    // Layers share their samples, so the identity coupling is always feasible
    // for equal weights. If it beats every local optimum found, descend from it.
    if (d1.rows() == d2.rows() && mu.vector == nu.vector) {
        Matrix ident = Matrix(mu.vector.asDiagonal());
        if (gw_objective(d1, d2, ident) < best_value) {
            Matrix g = d1 * ident * d2;
            Run run = frank_wolfe(p, std::move(ident), std::move(g), cfg);
            const double value = gw_objective(d1, d2, run.pi);
            if (value < best_value) {
                best = std::move(run);
                best_value = value;
            }
        }
    }

    result.coupling.matrix = std::move(best.pi);
    result.distance_sq = best_value;
    result.iterations = best.iterations;
    result.converged = best.converged;
    result.objective_trace = std::move(best.trace);
    if (!std::isfinite(result.distance_sq)) throw NumericalError("gw: non-finite result");
    return result;
}

double gw_layer_distance(const Matrix& a, const Matrix& b, const GwConfig& cfg) {
    if (a.rows() != b.rows())
        throw InputError("gw: layers have different sample counts (" + std::to_string(a.rows()) +
                         " vs " + std::to_string(b.rows()) + ")");
    const auto da = pairwise_distances(a);
    const auto db = pairwise_distances(b);
    const auto w = uniform_weights(a.rows());
    const GwResult r = gw_distance(da, db, w, w, cfg);
    return std::sqrt(std::max(0.0, r.distance_sq));
}

double gw_layer_distance(const LayerActivations& a, const LayerActivations& b,
                         const GwConfig& cfg) {
    try {
        return gw_layer_distance(a.data, b.data, cfg);
    } catch (const InputError& e) {
        throw InputError("layers '" + a.name + "' and '" + b.name + "': " + e.what());
    }
}

}  // namespace netscope

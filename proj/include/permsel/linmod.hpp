#pragma once

// Linear models used to compare variable subsets.
//
// Conventions (kept fixed so lambda values are comparable between runs):
//   Lasso:  (1 / (2n)) ||y - X b||^2 + lambda ||b||_1
//   Ridge:  ||y - X b||^2 + lambda ||b||^2
// Both operate on standardized predictors and centered responses; the
// intercept is the training mean of the response.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "permsel/detail/rng.hpp"
#include "permsel/error.hpp"
#include "permsel/multiplicity.hpp"

namespace permsel {

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;            // 1 for zero-variance columns
    std::vector<bool> zero_variance;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        if (x.cols() != means.size()) throw DataError("standardizer column count mismatch");
        Eigen::MatrixXd z = (x.rowwise() - means.transpose()).array().rowwise() /
                            stds.transpose().array();
        for (Eigen::Index c = 0; c < z.cols(); ++c)
            if (zero_variance[static_cast<std::size_t>(c)]) z.col(c).setZero();
        return z;
    }
};

// Column means and population standard deviations.
inline Standardizer fit_standardizer(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw DataError("standardizer needs at least 2 rows");
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    s.means = x.colwise().mean().transpose();
    s.stds.resize(x.cols());
    s.zero_variance.assign(static_cast<std::size_t>(x.cols()), false);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double var = (x.col(c).array() - s.means(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(s.means(c))))) {
            s.stds(c) = 1.0;
            s.zero_variance[static_cast<std::size_t>(c)] = true;
        } else {
            s.stds(c) = sd;
        }
    }
    return s;
}

inline Eigen::MatrixXd apply_standardizer(const Standardizer& s, const Eigen::MatrixXd& x) {
    return s.apply(x);
}

// ---------------------------------------------------------------------------
// Fitted model
// ---------------------------------------------------------------------------

enum class FitKind { ridge, lasso };

struct ModelFit {
    FitKind kind = FitKind::ridge;
    Eigen::MatrixXd coefficients;  // [variables_used][response], standardized scale
    Eigen::VectorXd intercepts;    // [response]
    std::vector<double> lambdas;   // [response]
    std::vector<std::size_t> variables_used;
    Standardizer standardizer;     // over variables_used
};

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x,
                                      std::span<const std::size_t> cols) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (static_cast<Eigen::Index>(cols[c]) >= x.cols())
            throw DataError("column " + std::to_string(cols[c]) + " not available");
        out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(cols[c]));
    }
    return out;
}

// Predictions for raw (unstandardized) rows carrying all original variables.
inline Eigen::MatrixXd predict(const ModelFit& fit, const Eigen::MatrixXd& x_new) {
    const auto n_resp = fit.intercepts.size();
    Eigen::MatrixXd pred(x_new.rows(), n_resp);
    pred.rowwise() = fit.intercepts.transpose();
    if (fit.variables_used.empty()) return pred;
    for (auto v : fit.variables_used)
        if (static_cast<Eigen::Index>(v) >= x_new.cols())
            throw DataError("dimension mismatch: input lacks variable " + std::to_string(v));
    const Eigen::MatrixXd z = fit.standardizer.apply(select_columns(x_new, fit.variables_used));
    pred += z * fit.coefficients;
    return pred;
}

// Mean over all entries of |pred - truth|.
inline double mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw DataError("mae: shape mismatch");
    if (pred.size() == 0) throw DataError("mae: empty input");
    return (pred - truth).cwiseAbs().mean();
}

// ---------------------------------------------------------------------------
// Ridge
// ---------------------------------------------------------------------------

// Solves (X'X + lambda I) B = X'Y by Cholesky. No centering.
inline Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be >= 0");
    if (x.rows() != y.rows()) throw DataError("ridge: X and Y row counts differ");
    Eigen::MatrixXd a = x.transpose() * x;
    a.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = x.transpose() * y;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success || (lambda == 0.0 && llt.rcond() < 1e-13))
        throw NumericError("singular system in ridge solve (lambda = " + std::to_string(lambda) +
                           ")");
    return llt.solve(rhs);
}

// Ridge on standardized X with one lambda per response (a single value is
// broadcast). Zero-variance columns get zero coefficients.
inline ModelFit ridge_fit(const Eigen::MatrixXd& x_std, const Eigen::MatrixXd& y,
                          std::vector<double> lambdas) {
    if (x_std.rows() != y.rows()) throw DataError("ridge: X and Y row counts differ");
    const auto n_resp = y.cols();
    if (lambdas.size() == 1) lambdas.assign(static_cast<std::size_t>(n_resp), lambdas.front());
    if (lambdas.size() != static_cast<std::size_t>(n_resp))
        throw ArgumentError("one ridge lambda per response required");

    ModelFit fit;
    fit.kind = FitKind::ridge;
    fit.lambdas = lambdas;
    fit.intercepts = y.colwise().mean().transpose();
    const Eigen::MatrixXd yc = y.rowwise() - fit.intercepts.transpose();
    fit.coefficients = Eigen::MatrixXd::Zero(x_std.cols(), n_resp);
    if (x_std.cols() == 0) return fit;
    for (Eigen::Index r = 0; r < n_resp; ++r)
        fit.coefficients.col(r) =
            ridge_solve(x_std, yc.col(r), lambdas[static_cast<std::size_t>(r)]);
    return fit;
}

// ---------------------------------------------------------------------------
// Lasso by cyclic coordinate descent with covariance updates
// ---------------------------------------------------------------------------

inline double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

struct LassoOptions {
    double tol = 1e-7;              // max coefficient change per sweep
    std::size_t max_iter = 100000;  // sweeps
    // Called after every full sweep with the sweep index and coefficients.
    std::function<void(std::size_t, const Eigen::VectorXd&)> on_sweep;
};

struct LassoFit {
    Eigen::VectorXd beta;
    std::size_t sweeps = 0;
};

// Gram form of one Lasso problem: G = X'X / n, c = X'y / n.
class LassoProblem {
public:
    LassoProblem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
        : n_(static_cast<double>(x.rows())) {
        if (x.rows() != y.size()) throw DataError("lasso: X and y row counts differ");
        if (x.rows() == 0) throw DataError("lasso: no rows");
        gram_ = x.transpose() * x / n_;
        corr_ = x.transpose() * y / n_;
        yy_ = y.squaredNorm() / n_;
    }

    Eigen::Index n_vars() const noexcept { return gram_.rows(); }
    double lambda_max() const { return n_vars() == 0 ? 0.0 : corr_.cwiseAbs().maxCoeff(); }

    // (1/(2n))||y - Xb||^2 + lambda ||b||_1 evaluated through the Gram form.
    double objective(const Eigen::VectorXd& beta, double lambda) const {
        const double rss = yy_ - 2.0 * corr_.dot(beta) + beta.dot(gram_ * beta);
        return 0.5 * rss + lambda * beta.lpNorm<1>();
    }

    // Gradient of the smooth part: x_j'(y - Xb) / n.
    Eigen::VectorXd residual_correlation(const Eigen::VectorXd& beta) const {
        return corr_ - gram_ * beta;
    }

    LassoFit solve(double lambda, Eigen::VectorXd beta, const LassoOptions& opt = {}) const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be >= 0");
        const Eigen::Index p = n_vars();
        if (beta.size() != p) beta = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd grad = residual_correlation(beta);

        auto update = [&](Eigen::Index j) {
            const double d = gram_(j, j);
            if (d <= 0.0) return 0.0;  // zero-variance column: never enters
            const double old = beta(j);
            const double fresh = soft_threshold(grad(j) + d * old, lambda) / d;
            const double delta = fresh - old;
            if (delta != 0.0) {
                beta(j) = fresh;
                grad.noalias() -= gram_.col(j) * delta;
            }
            return std::abs(delta);
        };

        std::vector<Eigen::Index> active;
        for (std::size_t sweep = 1; sweep <= opt.max_iter; ++sweep) {
            double max_delta = 0.0;
            for (Eigen::Index j = 0; j < p; ++j) max_delta = std::max(max_delta, update(j));
            if (opt.on_sweep) opt.on_sweep(sweep, beta);
            if (max_delta <= opt.tol) return {std::move(beta), sweep};

            // Iterate on the current support until it settles, then return to
            // full sweeps to let new variables in.
            active.clear();
            for (Eigen::Index j = 0; j < p; ++j)
                if (beta(j) != 0.0) active.push_back(j);
            std::size_t inner_sweeps = 0;
            while (sweep < opt.max_iter) {
                ++sweep;
                ++inner_sweeps;
                double inner = 0.0;
                for (auto j : active) inner = std::max(inner, update(j));
                if (opt.on_sweep) opt.on_sweep(sweep, beta);
                if (inner <= opt.tol) break;
                // Slow progress on an ill-conditioned support: jump to the
                // stationary point for the current signs when it keeps them.
                if (inner_sweeps % kPolishEvery == 0 && polish(active, lambda, beta)) {
                    grad = residual_correlation(beta);
                    if (opt.on_sweep) opt.on_sweep(sweep, beta);
                    break;
                }
            }
        }
        throw NumericError("lasso did not converge within " + std::to_string(opt.max_iter) +
                           " sweeps (lambda = " + std::to_string(lambda) + ")");
    }

private:
    static constexpr std::size_t kPolishEvery = 50;

    // Active-set step for a fixed sign pattern: move towards the solution of
    // G_AA b = c_A - lambda * sign(beta_A), stopping at the first coefficient
    // that would change sign, dropping it, and repeating. Every step stays in
    // one orthant, where the objective is a convex quadratic, so it never
    // increases. Returns false if nothing moved.
    bool polish(std::vector<Eigen::Index> active, double lambda, Eigen::VectorXd& beta) const {
        bool moved = false;
        while (!active.empty()) {
            const auto k = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd g(k, k);
            Eigen::VectorXd rhs(k), cur(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                const auto ja = active[static_cast<std::size_t>(a)];
                cur(a) = beta(ja);
                rhs(a) = corr_(ja) - lambda * (cur(a) > 0.0 ? 1.0 : -1.0);
                for (Eigen::Index b = 0; b < k; ++b)
                    g(a, b) = gram_(ja, active[static_cast<std::size_t>(b)]);
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
            if (ldlt.info() != Eigen::Success) break;
            const Eigen::VectorXd sol = ldlt.solve(rhs);
            if (!sol.allFinite()) break;
            double t = 1.0;
            Eigen::Index hit = -1;
            for (Eigen::Index a = 0; a < k; ++a) {
                if ((sol(a) > 0.0) == (cur(a) > 0.0) && sol(a) != 0.0) continue;
                const double ta = cur(a) / (cur(a) - sol(a));
                if (ta < t) {
                    t = ta;
                    hit = a;
                }
            }
            Eigen::VectorXd candidate = beta;
            for (Eigen::Index a = 0; a < k; ++a)
                candidate(active[static_cast<std::size_t>(a)]) = cur(a) + t * (sol(a) - cur(a));
            if (hit >= 0) candidate(active[static_cast<std::size_t>(hit)]) = 0.0;
            if (objective(candidate, lambda) > objective(beta, lambda)) break;
            beta = std::move(candidate);
            moved = true;
            if (hit < 0) break;
            active.erase(active.begin() + hit);
        }
        return moved;
    }

    double n_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd corr_;
    double yy_ = 0.0;
};

inline LassoFit lasso_fit(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered,
                          double lambda, const LassoOptions& opt = {}) {
    return LassoProblem(x_std, y_centered).solve(lambda, {}, opt);
}

// n_lambda log-spaced values from lambda_max down to min_ratio * lambda_max.
inline std::vector<double> log_grid(double hi, double min_ratio, std::size_t n) {
    if (n == 0) throw ArgumentError("grid needs at least one value");
    if (!(hi > 0.0) || !(min_ratio > 0.0 && min_ratio <= 1.0))
        throw ArgumentError("grid needs hi > 0 and min_ratio in (0, 1]");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = hi;
        return g;
    }
    const double step = std::log(min_ratio) / static_cast<double>(n - 1);
    for (std::size_t t = 0; t < n; ++t) g[t] = hi * std::exp(step * static_cast<double>(t));
    return g;
}

inline std::vector<double> lasso_lambda_grid(const Eigen::MatrixXd& x_std,
                                             const Eigen::VectorXd& y_centered,
                                             std::size_t n_lambda = 100,
                                             double min_ratio = 1e-4) {
    const double hi = LassoProblem(x_std, y_centered).lambda_max();
    if (!(hi > 0.0)) return std::vector<double>(1, 0.0);
    return log_grid(hi, min_ratio, n_lambda);
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

// Seeded fold labels: a shuffled 0..n-1 with position t in fold t % k.
inline std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k_folds,
                                                std::uint64_t seed) {
    if (k_folds < 2) throw ArgumentError("k_folds must be >= 2");
    if (n < k_folds) throw ArgumentError("fewer rows than folds");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto rng = detail::make_stream(seed, {0xf01d});
    detail::shuffle(idx, rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t t = 0; t < n; ++t) fold[idx[t]] = t % k_folds;
    return fold;
}

namespace detail {

struct FoldData {
    Eigen::MatrixXd x_train, x_test;
    Eigen::MatrixXd y_train, y_test;
};

inline FoldData split_fold(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           std::span<const std::size_t> fold, std::size_t f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < fold.size(); ++i)
        (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    FoldData d;
    d.x_train = x(tr, Eigen::all);
    d.x_test = x(te, Eigen::all);
    d.y_train = y(tr, Eigen::all);
    d.y_test = y(te, Eigen::all);
    return d;
}

// Index of the smallest score; ties go to the earliest entry.
inline std::size_t argmin_first(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < scores.size(); ++t)
        if (scores[t] < scores[best]) best = t;
    return best;
}

inline std::vector<double> sorted_descending(std::vector<double> grid) {
    if (grid.empty()) throw ArgumentError("lambda grid is empty");
    for (double g : grid)
        if (!(g >= 0.0) || !std::isfinite(g)) throw ArgumentError("lambda grid values must be >= 0");
    std::sort(grid.begin(), grid.end(), std::greater<>());
    return grid;
}

}  // namespace detail

// Mean held-out MAE of the Lasso path over k folds; returns the grid value
// with the smallest error, ties going to the larger lambda. Within a fold the
// predictors and response are centered on the fold's training rows.
inline double cv_select_lambda(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y,
                               std::vector<double> grid, std::size_t k_folds,
                               std::uint64_t seed, const LassoOptions& opt = {}) {
    grid = detail::sorted_descending(std::move(grid));
    const auto fold = fold_assignment(static_cast<std::size_t>(x_std.rows()), k_folds, seed);
    if (grid.size() == 1) return grid.front();
    std::vector<double> score(grid.size(), 0.0);
    for (std::size_t f = 0; f < k_folds; ++f) {
        const auto d = detail::split_fold(x_std, y, fold, f);
        const Eigen::RowVectorXd xm = d.x_train.colwise().mean();
        const double ym = d.y_train.mean();
        const Eigen::MatrixXd xc = d.x_train.rowwise() - xm;
        const Eigen::MatrixXd xt = d.x_test.rowwise() - xm;
        const Eigen::VectorXd yc = d.y_train.col(0).array() - ym;
        const LassoProblem prob(xc, yc);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(x_std.cols());
        for (std::size_t g = 0; g < grid.size(); ++g) {
            beta = prob.solve(grid[g], std::move(beta), opt).beta;
            const Eigen::VectorXd pred = (xt * beta).array() + ym;
            score[g] += (pred - d.y_test.col(0)).cwiseAbs().mean() / static_cast<double>(k_folds);
        }
    }
    return grid[detail::argmin_first(score)];
}

// Per-response CV-selected ridge lambdas (ties toward larger lambda). Each
// fold's Gram matrix is diagonalized once, so the whole grid is cheap.
inline std::vector<double> cv_select_ridge_lambdas(const Eigen::MatrixXd& x_std,
                                                   const Eigen::MatrixXd& y,
                                                   std::vector<double> grid,
                                                   std::size_t k_folds, std::uint64_t seed) {
    grid = detail::sorted_descending(std::move(grid));
    const auto n_resp = static_cast<std::size_t>(y.cols());
    const auto fold = fold_assignment(static_cast<std::size_t>(x_std.rows()), k_folds, seed);
    if (grid.size() == 1 || x_std.cols() == 0) return std::vector<double>(n_resp, grid.front());
    std::vector<std::vector<double>> score(n_resp, std::vector<double>(grid.size(), 0.0));
    for (std::size_t f = 0; f < k_folds; ++f) {
        const auto d = detail::split_fold(x_std, y, fold, f);
        const Eigen::RowVectorXd xm = d.x_train.colwise().mean();
        const Eigen::RowVectorXd ym = d.y_train.colwise().mean();
        const Eigen::MatrixXd xc = d.x_train.rowwise() - xm;
        const Eigen::MatrixXd xt = d.x_test.rowwise() - xm;
        const Eigen::MatrixXd yc = d.y_train.rowwise() - ym;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xc.transpose() * xc);
        const Eigen::MatrixXd& v = eig.eigenvectors();
        const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
        const Eigen::MatrixXd vt_xty = v.transpose() * (xc.transpose() * yc);
        const Eigen::MatrixXd xt_v = xt * v;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const Eigen::VectorXd shrink = (ev.array() + grid[g]).inverse();
            if (!shrink.allFinite()) continue;  // lambda = 0 on a singular fold
            const Eigen::MatrixXd pred =
                (xt_v * (shrink.asDiagonal() * vt_xty)).rowwise() + ym;
            for (std::size_t r = 0; r < n_resp; ++r)
                score[r][g] += (pred.col(static_cast<Eigen::Index>(r)) -
                                d.y_test.col(static_cast<Eigen::Index>(r)))
                                   .cwiseAbs()
                                   .mean() /
                               static_cast<double>(k_folds);
        }
    }
    std::vector<double> out(n_resp);
    for (std::size_t r = 0; r < n_resp; ++r) out[r] = grid[detail::argmin_first(score[r])];
    return out;
}

// ---------------------------------------------------------------------------
// Multivariate Lasso selection and the Ridge model used for evaluation
// ---------------------------------------------------------------------------

struct LassoSelectOptions {
    std::size_t n_lambda = 100;
    double min_ratio = 1e-4;
    std::vector<double> grid;  // overrides the per-response log grid when non-empty
    std::size_t k_folds = 5;
    std::uint64_t seed = 0;
    double support_threshold = 1e-10;
    LassoOptions solver;
};

// Per response: CV-selected lambda, Lasso refit on all rows, support
// {j : |b_j| > threshold}. The selection is the union of supports.
inline SelectionResult multivariate_lasso_select(const Eigen::MatrixXd& x_std,
                                                 const Eigen::MatrixXd& y,
                                                 const LassoSelectOptions& opt = {}) {
    if (y.cols() < 1) throw ArgumentError("multivariate Lasso needs at least one response");
    if (x_std.rows() != y.rows()) throw DataError("lasso: X and Y row counts differ");
    SelectionResult sel;
    sel.method.kind = SelectionMethod::Kind::lasso;
    sel.n_vars_total = static_cast<std::size_t>(x_std.cols());
    std::vector<bool> chosen(sel.n_vars_total, false);
    for (Eigen::Index r = 0; r < y.cols(); ++r) {
        const Eigen::VectorXd yc = y.col(r).array() - y.col(r).mean();
        auto grid = opt.grid.empty() ? lasso_lambda_grid(x_std, yc, opt.n_lambda, opt.min_ratio)
                                     : opt.grid;
        const double lambda = cv_select_lambda(x_std, y.col(r), grid, opt.k_folds, opt.seed,
                                               opt.solver);
        // Refit along the grid down to the chosen value for a warm start.
        const LassoProblem prob(x_std, yc);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(x_std.cols());
        std::sort(grid.begin(), grid.end(), std::greater<>());
        for (double g : grid) {
            if (g < lambda) break;
            beta = prob.solve(g, std::move(beta), opt.solver).beta;
        }
        sel.method.lambdas.push_back(lambda);
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            if (std::abs(beta(j)) > opt.support_threshold) chosen[static_cast<std::size_t>(j)] = true;
    }
    for (std::size_t j = 0; j < chosen.size(); ++j)
        if (chosen[j]) sel.selected.push_back(j);
    return sel;
}

struct RidgeOptions {
    std::size_t n_lambda = 50;
    double max_scale = 1e3;  // grid top = max_scale * n_rows
    double min_ratio = 1e-10;
    std::size_t k_folds = 5;
    std::uint64_t seed = 0;
};

inline std::vector<double> ridge_lambda_grid(std::size_t n_rows, const RidgeOptions& opt) {
    return log_grid(opt.max_scale * static_cast<double>(n_rows), opt.min_ratio, opt.n_lambda);
}

// Ridge on the raw training columns in `variables`: standardizer fitted on
// these rows, per-response lambda chosen by CV on these rows. An empty
// variable set yields the intercept-only model.
inline ModelFit fit_ridge_model(const Eigen::MatrixXd& x_raw, const Eigen::MatrixXd& y,
                                std::vector<std::size_t> variables,
                                const RidgeOptions& opt = {}) {
    std::sort(variables.begin(), variables.end());
    variables.erase(std::unique(variables.begin(), variables.end()), variables.end());
    const Eigen::MatrixXd sub = select_columns(x_raw, variables);
    auto stdz = fit_standardizer(sub);

    // Zero-variance columns are dropped from the penalized fit.
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < variables.size(); ++c)
        if (!stdz.zero_variance[c]) keep.push_back(c);
    const Eigen::MatrixXd z = select_columns(stdz.apply(sub), keep);

    const auto grid = ridge_lambda_grid(static_cast<std::size_t>(x_raw.rows()), opt);
    const auto lambdas = keep.empty()
                             ? std::vector<double>(static_cast<std::size_t>(y.cols()), grid.front())
                             : cv_select_ridge_lambdas(z, y, grid, opt.k_folds, opt.seed);
    auto inner = ridge_fit(z, y, lambdas);

    ModelFit fit = std::move(inner);
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(variables.size()),
                                                 y.cols());
    for (std::size_t c = 0; c < keep.size(); ++c)
        coef.row(static_cast<Eigen::Index>(keep[c])) =
            fit.coefficients.row(static_cast<Eigen::Index>(c));
    fit.coefficients = std::move(coef);
    fit.variables_used = std::move(variables);
    fit.standardizer = std::move(stdz);
    return fit;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ModelFit& fit) {
    nlohmann::ordered_json j;
    j["kind"] = fit.kind == FitKind::ridge ? "ridge" : "lasso";
    j["objective"] = fit.kind == FitKind::ridge ? "||y - Xb||^2 + lambda ||b||^2"
                                                : "(1/(2n)) ||y - Xb||^2 + lambda ||b||_1";
    j["variables_used"] = fit.variables_used;
    j["lambdas"] = fit.lambdas;
    j["intercepts"] = detail::to_std(fit.intercepts);
    auto coef = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < fit.coefficients.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(fit.coefficients.cols()));
        for (Eigen::Index c = 0; c < fit.coefficients.cols(); ++c)
            row[static_cast<std::size_t>(c)] = fit.coefficients(r, c);
        coef.push_back(row);
    }
    j["coefficients"] = std::move(coef);
    j["standardizer"] = {{"means", detail::to_std(fit.standardizer.means)},
                         {"stds", detail::to_std(fit.standardizer.stds)},
                         {"zero_variance", fit.standardizer.zero_variance}};
    return j;
}

inline ModelFit model_from_json(const nlohmann::json& j) {
    try {
        ModelFit fit;
        fit.kind = j.at("kind").get<std::string>() == "lasso" ? FitKind::lasso : FitKind::ridge;
        fit.variables_used = j.at("variables_used").get<std::vector<std::size_t>>();
        fit.lambdas = j.at("lambdas").get<std::vector<double>>();
        fit.intercepts = detail::to_eigen(j.at("intercepts").get<std::vector<double>>());
        const auto rows = j.at("coefficients").get<std::vector<std::vector<double>>>();
        const auto n_resp = fit.intercepts.size();
        if (rows.size() != fit.variables_used.size())
            throw DataError("model JSON: coefficient rows do not match variables_used");
        fit.coefficients.resize(static_cast<Eigen::Index>(rows.size()), n_resp);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != static_cast<std::size_t>(n_resp))
                throw DataError("model JSON: coefficient row has wrong length");
            for (Eigen::Index c = 0; c < n_resp; ++c)
                fit.coefficients(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        }
        const auto& s = j.at("standardizer");
        fit.standardizer.means = detail::to_eigen(s.at("means").get<std::vector<double>>());
        fit.standardizer.stds = detail::to_eigen(s.at("stds").get<std::vector<double>>());
        fit.standardizer.zero_variance = s.at("zero_variance").get<std::vector<bool>>();
        if (fit.standardizer.means.size() != static_cast<Eigen::Index>(rows.size()) ||
            fit.standardizer.stds.size() != fit.standardizer.means.size() ||
            fit.standardizer.zero_variance.size() != rows.size())
            throw DataError("model JSON: standardizer size mismatch");
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model JSON: ") + e.what());
    }
}

}  // namespace permsel

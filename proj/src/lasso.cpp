#include "medtest/lasso.hpp"

#include "medtest/data.hpp"
#include "medtest/error.hpp"
#include "medtest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace medtest {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kIrlsClip = 1e-5;

// Weighted centring/scaling of the features. Unusable columns (zero variance)
// are kept at a zero coefficient.
struct Standardization {
    Eigen::VectorXd center;
    Eigen::VectorXd scale;
    std::vector<bool> usable;
};

Eigen::VectorXd normalized_weights(Eigen::Index n, const std::optional<Eigen::VectorXd>& weights) {
    if (!weights) return Eigen::VectorXd::Ones(n);
    if (weights->size() != n) throw ArgumentError("weight vector length does not match the target");
    if (!weights->allFinite() || (weights->array() < 0.0).any())
        throw ArgumentError("weights must be finite and non-negative");
    const double total = weights->sum();
    if (!(total > 0.0)) throw ArgumentError("weights sum to zero");
    return *weights * (static_cast<double>(n) / total);
}

Standardization standardize_features(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& w,
                                     bool standardize) {
    const double n = static_cast<double>(x.rows());
    Standardization s;
    s.center = (x.transpose() * w) / n;
    s.scale = Eigen::VectorXd::Ones(x.cols());
    s.usable.assign(static_cast<std::size_t>(x.cols()), true);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (w.array() * (x.col(j).array() - s.center(j)).square()).sum() / n;
        if (var <= kVarianceFloor) {
            s.usable[static_cast<std::size_t>(j)] = false;
        } else if (standardize) {
            s.scale(j) = std::sqrt(var);
        }
    }
    return s;
}

Eigen::MatrixXd apply_standardization(const Eigen::Ref<const Eigen::MatrixXd>& x, const Standardization& s) {
    Eigen::MatrixXd out = (x.rowwise() - s.center.transpose()).array().rowwise() / s.scale.transpose().array();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (!s.usable[static_cast<std::size_t>(j)]) out.col(j).setZero();
    return out;
}

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double logit(double p) {
    return std::log(p / (1.0 - p));
}

double clip_probability(double p) {
    return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
}

std::vector<double> auto_grid(double lmax, int count, double min_ratio) {
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lmax;
        return grid;
    }
    const double log_hi = std::log(lmax);
    const double log_lo = std::log(lmax * min_ratio);
    for (int k = 0; k < count; ++k)
        grid[static_cast<std::size_t>(k)] = std::exp(log_hi + (log_lo - log_hi) * k / (count - 1));
    return grid;
}

// Standardised-scale gradient of the smooth loss part, which is the quantity
// the optimality conditions constrain.
Eigen::VectorXd smooth_gradient(LossFamily family, const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, double intercept, const Eigen::VectorXd& beta) {
    const double n = static_cast<double>(xs.rows());
    Eigen::VectorXd eta = (xs * beta).array() + intercept;
    Eigen::VectorXd resid(y.size());
    if (family == LossFamily::squared) {
        resid = y - eta;
    } else {
        for (Eigen::Index i = 0; i < y.size(); ++i) resid(i) = y(i) - sigmoid(eta(i));
    }
    return xs.transpose() * (w.cwiseProduct(resid)) / n;
}

// ---------------------------------------------------------------- squared loss

// Covariance-update coordinate descent on 0.5 b'Gb - c'b + lambda |b|_1.
// grad holds c - G b and stays exact after every update.
struct QuadraticSolver {
    const Eigen::MatrixXd& gram;
    const std::vector<bool>& usable;
    double tol;
    int max_iter;

    double update(Eigen::Index j, double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& grad) const {
        const double gjj = gram(j, j);
        const double z = grad(j) + gjj * beta(j);
        const double updated = soft_threshold(z, lambda) / gjj;
        const double delta = updated - beta(j);
        if (delta != 0.0) {
            grad.noalias() -= gram.col(j) * delta;
            beta(j) = updated;
        }
        return std::abs(delta) * std::sqrt(gjj);
    }

    double violation(double lambda, const Eigen::VectorXd& beta, const Eigen::VectorXd& grad) const {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < beta.size(); ++j) {
            if (!usable[static_cast<std::size_t>(j)]) continue;
            const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                             : std::max(0.0, std::abs(grad(j)) - lambda);
            worst = std::max(worst, v);
        }
        return worst;
    }

    void solve(double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& grad) const {
        const Eigen::Index p = beta.size();
        std::vector<Eigen::Index> active;
        int sweeps = 0;
        while (sweeps < max_iter) {
            double change = 0.0;
            for (Eigen::Index j = 0; j < p; ++j)
                if (usable[static_cast<std::size_t>(j)]) change = std::max(change, update(j, lambda, beta, grad));
            ++sweeps;
            if (change < tol && violation(lambda, beta, grad) < tol) return;
            active.clear();
            for (Eigen::Index j = 0; j < p; ++j)
                if (beta(j) != 0.0) active.push_back(j);
            while (sweeps < max_iter) {
                double inner = 0.0;
                for (Eigen::Index j : active) inner = std::max(inner, update(j, lambda, beta, grad));
                ++sweeps;
                if (inner < tol) break;
            }
        }
    }
};

struct StandardizedProblem {
    Standardization st;
    Eigen::VectorXd w;
    double y_center = 0.0;
};

LassoPath squared_path(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<double>& grid,
                       const Eigen::VectorXd& w) {
    const double n = static_cast<double>(x.rows());
    const Eigen::Index p = x.cols();
    const Standardization st = standardize_features(x, w, spec.standardize);
    const Eigen::MatrixXd xs = apply_standardization(x, st);
    const double ybar = w.dot(y) / n;

    Eigen::MatrixXd weighted = xs.array().colwise() * w.array().sqrt();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), 1.0 / n);
    gram = gram.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd c = xs.transpose() * (w.cwiseProduct(y.array().matrix() - Eigen::VectorXd::Constant(y.size(), ybar))) / n;

    QuadraticSolver solver{gram, st.usable, spec.tol, spec.max_iter};
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad = c;

    LassoPath path;
    path.lambdas = grid;
    path.intercepts.resize(static_cast<Eigen::Index>(grid.size()));
    path.coefficients.resize(p, static_cast<Eigen::Index>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        solver.solve(grid[k], beta, grad);
        const Eigen::VectorXd raw = beta.cwiseQuotient(st.scale);
        path.coefficients.col(static_cast<Eigen::Index>(k)) = raw;
        path.intercepts(static_cast<Eigen::Index>(k)) = ybar - st.center.dot(raw);
    }
    return path;
}

// ---------------------------------------------------------------- logistic loss

// IRLS outer loop with naive-update coordinate descent on the weighted
// least-squares approximation (glmnet-style), warm-started along the grid.
// Sequential strong rules restrict the work to a candidate set; excluded
// features are re-admitted when they violate the optimality conditions.
struct LogisticSolver {
    const Eigen::MatrixXd& xs;
    const Eigen::VectorXd& y;
    const Eigen::VectorXd& w;
    const std::vector<bool>& usable;
    double tol;  // changed between path points
    int max_iter;

    Eigen::VectorXd linear_predictor(double b0, const Eigen::VectorXd& beta) const {
        Eigen::VectorXd eta = Eigen::VectorXd::Constant(xs.rows(), b0);
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            if (beta(j) != 0.0) eta.noalias() += xs.col(j) * beta(j);
        return eta;
    }

    double deviance(double b0, const Eigen::VectorXd& beta) const {
        double dev = 0.0;
        const Eigen::VectorXd eta = linear_predictor(b0, beta);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double pr = clip_probability(sigmoid(eta(i)));
            dev -= 2.0 * w(i) * (y(i) * std::log(pr) + (1.0 - y(i)) * std::log(1.0 - pr));
        }
        return dev;
    }

    // (1/n) X's W (y - p) at the current fit; also returns the deviance when asked.
    Eigen::VectorXd gradient(double b0, const Eigen::VectorXd& beta, double* dev = nullptr) const {
        const Eigen::VectorXd eta = linear_predictor(b0, beta);
        Eigen::VectorXd r(eta.size());
        double total = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double pr = sigmoid(eta(i));
            r(i) = w(i) * (y(i) - pr);
            if (dev) {
                const double pc = clip_probability(pr);
                total -= 2.0 * w(i) * (y(i) * std::log(pc) + (1.0 - y(i)) * std::log(1.0 - pc));
            }
        }
        if (dev) *dev = total;
        return xs.transpose() * r / static_cast<double>(xs.rows());
    }

    void solve_on(const std::vector<Eigen::Index>& cols, double lambda, double& b0, Eigen::VectorXd& beta) const {
        const Eigen::Index n = xs.rows();
        const auto q = static_cast<Eigen::Index>(cols.size());
        const double nd = static_cast<double>(n);
        Eigen::VectorXd irls_w(n), resid(n), xwx(q);
        Eigen::MatrixXd wx(n, q);
        std::vector<Eigen::Index> active;

        for (int outer = 0; outer < 100; ++outer) {
            const Eigen::VectorXd eta = linear_predictor(b0, beta);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double pr = std::clamp(sigmoid(eta(i)), kIrlsClip, 1.0 - kIrlsClip);
                irls_w(i) = w(i) * pr * (1.0 - pr);
                resid(i) = w(i) * (y(i) - pr);
            }
            for (Eigen::Index c = 0; c < q; ++c) {
                wx.col(c) = xs.col(cols[static_cast<std::size_t>(c)]).cwiseProduct(irls_w);
                xwx(c) = wx.col(c).dot(xs.col(cols[static_cast<std::size_t>(c)])) / nd;
            }
            const double wsum = irls_w.sum();

            Eigen::VectorXd beta_start(q);
            for (Eigen::Index c = 0; c < q; ++c) beta_start(c) = beta(cols[static_cast<std::size_t>(c)]);
            const double b0_start = b0;

            auto update = [&](Eigen::Index c) {
                const double curvature = xwx(c);
                if (curvature <= 0.0) return 0.0;
                const Eigen::Index j = cols[static_cast<std::size_t>(c)];
                const double z = xs.col(j).dot(resid) / nd + curvature * beta(j);
                const double updated = soft_threshold(z, lambda) / curvature;
                const double delta = updated - beta(j);
                if (delta != 0.0) {
                    resid.noalias() -= wx.col(c) * delta;
                    beta(j) = updated;
                }
                // Change in the coordinate's gradient, i.e. its KKT residual.
                return curvature * std::abs(delta);
            };
            auto update_intercept = [&]() {
                const double delta = resid.sum() / wsum;
                resid.noalias() -= irls_w * delta;
                b0 += delta;
                return (wsum / nd) * std::abs(delta);
            };

            int sweeps = 0;
            while (sweeps < max_iter) {
                double change = update_intercept();
                for (Eigen::Index c = 0; c < q; ++c) change = std::max(change, update(c));
                ++sweeps;
                if (change < tol) break;
                active.clear();
                for (Eigen::Index c = 0; c < q; ++c)
                    if (beta(cols[static_cast<std::size_t>(c)]) != 0.0) active.push_back(c);
                while (sweeps < max_iter) {
                    double inner = update_intercept();
                    for (Eigen::Index c : active) inner = std::max(inner, update(c));
                    ++sweeps;
                    if (inner < tol) break;
                }
            }

            double moved = (wsum / nd) * std::abs(b0 - b0_start);
            for (Eigen::Index c = 0; c < q; ++c) {
                const double delta = beta(cols[static_cast<std::size_t>(c)]) - beta_start(c);
                moved = std::max(moved, xwx(c) * std::abs(delta));
            }
            if (moved < tol) break;
        }
    }

    // grad enters as the gradient at the previous solution (lambda_prev) and
    // leaves as the gradient at the new one.
    void solve(double lambda, double lambda_prev, double& b0, Eigen::VectorXd& beta, Eigen::VectorXd& grad,
               double* dev = nullptr) const {
        const Eigen::Index p = beta.size();
        std::vector<bool> in_set(static_cast<std::size_t>(p), false);
        std::vector<Eigen::Index> cols;
        const double cutoff = 2.0 * lambda - lambda_prev;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!usable[static_cast<std::size_t>(j)]) continue;
            if (beta(j) != 0.0 || std::abs(grad(j)) >= cutoff) {
                in_set[static_cast<std::size_t>(j)] = true;
                cols.push_back(j);
            }
        }
        for (;;) {
            solve_on(cols, lambda, b0, beta);
            grad = gradient(b0, beta, dev);
            bool added = false;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (!usable[static_cast<std::size_t>(j)] || in_set[static_cast<std::size_t>(j)]) continue;
                if (std::abs(grad(j)) > lambda) {
                    in_set[static_cast<std::size_t>(j)] = true;
                    cols.push_back(j);
                    added = true;
                }
            }
            if (!added) return;
        }
    }
};

// Which path points are solved to spec.tol; the rest use sqrt(spec.tol),
// enough for warm starts and for ranking penalties by held-out loss.
enum class PathAccuracy { all, last, none };

LassoPath logistic_path(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<double>& grid,
                        const Eigen::VectorXd& w, bool early_stop, PathAccuracy accuracy) {
    const double n = static_cast<double>(x.rows());
    const Eigen::Index p = x.cols();
    const Standardization st = standardize_features(x, w, spec.standardize);
    const Eigen::MatrixXd xs = apply_standardization(x, st);
    const Eigen::VectorXd yv = y;
    const double ybar = std::clamp(w.dot(yv) / n, kProbabilityClip, 1.0 - kProbabilityClip);

    LogisticSolver solver{xs, yv, w, st.usable, spec.tol, spec.max_iter};
    double b0 = logit(ybar);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad = solver.gradient(b0, beta);
    const double null_dev = solver.deviance(b0, beta);
    double lambda_prev = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;

    LassoPath path;
    path.lambdas = grid;
    path.intercepts.resize(static_cast<Eigen::Index>(grid.size()));
    path.coefficients.resize(p, static_cast<Eigen::Index>(grid.size()));
    double prev_ratio = 0.0;
    bool frozen = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!frozen) {
            double dev = 0.0;
            const bool strict =
                accuracy == PathAccuracy::all || (accuracy == PathAccuracy::last && k + 1 == grid.size());
            solver.tol = strict ? spec.tol : std::sqrt(spec.tol);
            solver.solve(grid[k], std::max(lambda_prev, grid[k]), b0, beta, grad, early_stop ? &dev : nullptr);
            lambda_prev = grid[k];
            if (early_stop && null_dev > 0.0) {
                const double ratio = 1.0 - dev / null_dev;
                if (k > 0 && (ratio - prev_ratio < 1e-5 * ratio || ratio > 0.999)) frozen = true;
                prev_ratio = ratio;
            }
        }
        const Eigen::VectorXd raw = beta.cwiseQuotient(st.scale);
        path.coefficients.col(static_cast<Eigen::Index>(k)) = raw;
        path.intercepts(static_cast<Eigen::Index>(k)) = b0 - st.center.dot(raw);
    }
    return path;
}

LassoPath run_path(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<double>& grid,
                   const Eigen::VectorXd& w, bool early_stop, PathAccuracy accuracy) {
    if (spec.family == LossFamily::squared) return squared_path(spec, x, y, grid, w);
    return logistic_path(spec, x, y, grid, w, early_stop, accuracy);
}

double holdout_loss(LossFamily family, const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (family == LossFamily::squared) {
            loss += w(i) * (y(i) - eta(i)) * (y(i) - eta(i));
        } else {
            const double pr = clip_probability(sigmoid(eta(i)));
            loss -= 2.0 * w(i) * (y(i) * std::log(pr) + (1.0 - y(i)) * std::log(1.0 - pr));
        }
    }
    return loss;
}

void check_inputs(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.rows() != y.size()) throw ArgumentError("feature rows and target length differ");
    if (y.size() < 2) throw ArgumentError("at least 2 observations are needed to fit");
    if (!x.allFinite() || !y.allFinite()) throw ArgumentError("non-finite value in learner input");
    if (spec.family == LossFamily::logistic && ((y.array() != 0.0) && (y.array() != 1.0)).any())
        throw ArgumentError("logistic target must be 0/1");
}

SparseModel constant_model(const LearnerSpec& spec, const Standardization& st, double mean_target,
                           bool degenerate) {
    SparseModel model;
    model.family = spec.family;
    model.coefficients = Eigen::VectorXd::Zero(st.center.size());
    model.center = st.center;
    model.scale = st.scale;
    model.degenerate = degenerate;
    model.intercept = spec.family == LossFamily::squared ? mean_target : logit(clip_probability(mean_target));
    return model;
}

}  // namespace

std::string to_string(LossFamily family) {
    return family == LossFamily::squared ? "squared" : "logistic";
}

LossFamily parse_family(const std::string& name) {
    if (name == "squared" || name == "squared-loss" || name == "gaussian") return LossFamily::squared;
    if (name == "logistic" || name == "binomial") return LossFamily::logistic;
    throw ArgumentError("unknown learner family '" + name + "'");
}

void LearnerSpec::validate() const {
    if (cv_folds < 2) throw ArgumentError("learner.cv_folds must be at least 2");
    if (max_iter < 1) throw ArgumentError("learner.max_iter must be positive");
    if (!(tol > 0.0)) throw ArgumentError("learner.tol must be positive");
    if (n_lambda < 1) throw ArgumentError("learner n_lambda must be positive");
    if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
        throw ArgumentError("lambda_min_ratio must lie in (0,1)");
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        if (!(lambda_grid[k] > 0.0) || !std::isfinite(lambda_grid[k]))
            throw ArgumentError("lambda grid values must be positive");
        if (k > 0 && !(lambda_grid[k] < lambda_grid[k - 1]))
            throw ArgumentError("lambda grid must be strictly decreasing");
    }
}

Eigen::Index SparseModel::nonzero() const {
    return (coefficients.array() != 0.0).count();
}

double lambda_max(LossFamily family, bool standardize, const Eigen::Ref<const Eigen::MatrixXd>& features,
                  const Eigen::Ref<const Eigen::VectorXd>& target, const std::optional<Eigen::VectorXd>& weights) {
    const Eigen::VectorXd w = normalized_weights(target.size(), weights);
    const Standardization st = standardize_features(features, w, standardize);
    if (features.cols() == 0) return 0.0;
    const Eigen::MatrixXd xs = apply_standardization(features, st);
    const double n = static_cast<double>(target.size());
    const double ybar = w.dot(target) / n;
    // Both families share the same null-model gradient: X's W (y - ybar) / n.
    (void)family;
    const Eigen::VectorXd centred = target.array() - ybar;
    return (xs.transpose() * w.cwiseProduct(centred) / n).cwiseAbs().maxCoeff();
}

LassoPath fit_path(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& features,
                   const Eigen::Ref<const Eigen::VectorXd>& target, const std::vector<double>& grid,
                   const std::optional<Eigen::VectorXd>& weights) {
    spec.validate();
    check_inputs(spec, features, target);
    const Eigen::VectorXd w = normalized_weights(target.size(), weights);
    return run_path(spec, features, target, grid, w, false, PathAccuracy::all);
}

SparseModel fit(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& features,
                const Eigen::Ref<const Eigen::VectorXd>& target, const std::optional<Eigen::VectorXd>& weights) {
    spec.validate();
    check_inputs(spec, features, target);
    const Eigen::Index n = target.size();
    const Eigen::VectorXd w = normalized_weights(n, weights);
    const Standardization st = standardize_features(features, w, spec.standardize);
    const double mean_target = w.dot(target) / static_cast<double>(n);

    if (spec.family == LossFamily::logistic && (mean_target <= 0.0 || mean_target >= 1.0))
        return constant_model(spec, st, mean_target, true);

    const double lmax = lambda_max(spec.family, spec.standardize, features, target, w);
    if (!(lmax > 0.0)) {
        SparseModel model = constant_model(spec, st, mean_target, false);
        model.lambda_selected = spec.lambda_grid.empty() ? 0.0 : spec.lambda_grid.front();
        return model;
    }

    std::vector<double> grid =
        spec.lambda_grid.empty() ? auto_grid(lmax, spec.n_lambda, spec.lambda_min_ratio) : spec.lambda_grid;

    std::vector<double> cv_loss;
    std::size_t best = 0;
    if (grid.size() > 1) {
        const int folds = std::min<int>(spec.cv_folds, static_cast<int>(n));
        const FoldPlan plan = make_folds(n, folds, spec.seed);
        cv_loss.assign(grid.size(), 0.0);
        for (int k = 0; k < folds; ++k) {
            const auto train = plan.train_rows(k);
            const auto test = plan.test_rows(k);
            const auto ntr = static_cast<Eigen::Index>(train.size());
            const auto nte = static_cast<Eigen::Index>(test.size());
            Eigen::MatrixXd xtr(ntr, features.cols()), xte(nte, features.cols());
            Eigen::VectorXd ytr(ntr), wtr(ntr), yte(nte), wte(nte);
            for (Eigen::Index r = 0; r < ntr; ++r) {
                const Eigen::Index i = train[static_cast<std::size_t>(r)];
                xtr.row(r) = features.row(i);
                ytr(r) = target(i);
                wtr(r) = w(i);
            }
            for (Eigen::Index r = 0; r < nte; ++r) {
                const Eigen::Index i = test[static_cast<std::size_t>(r)];
                xte.row(r) = features.row(i);
                yte(r) = target(i);
                wte(r) = w(i);
            }
            const double ytr_mean = wtr.sum() > 0 ? wtr.dot(ytr) / wtr.sum() : 0.0;
            Eigen::MatrixXd eta;
            if (spec.family == LossFamily::logistic && (ytr_mean <= 0.0 || ytr_mean >= 1.0)) {
                eta = Eigen::MatrixXd::Constant(nte, static_cast<Eigen::Index>(grid.size()),
                                                logit(clip_probability(ytr_mean)));
            } else {
                const LassoPath path = run_path(spec, xtr, ytr, grid, wtr, true, PathAccuracy::none);
                eta = (xte * path.coefficients).rowwise() + path.intercepts.transpose();
            }
            for (std::size_t g = 0; g < grid.size(); ++g)
                cv_loss[g] += holdout_loss(spec.family, eta.col(static_cast<Eigen::Index>(g)), yte, wte);
        }
        for (auto& loss : cv_loss) loss /= static_cast<double>(n);
        best = static_cast<std::size_t>(std::min_element(cv_loss.begin(), cv_loss.end()) - cv_loss.begin());
    }

    const std::vector<double> final_grid(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(best) + 1);
    const LassoPath path = run_path(spec, features, target, final_grid, w, false, PathAccuracy::last);

    SparseModel model;
    model.family = spec.family;
    model.coefficients = path.coefficients.col(static_cast<Eigen::Index>(best));
    model.intercept = path.intercepts(static_cast<Eigen::Index>(best));
    model.lambda_selected = grid[best];
    model.center = st.center;
    model.scale = st.scale;
    model.lambda_path = std::move(grid);
    model.cv_loss = std::move(cv_loss);
    return model;
}

Eigen::VectorXd predict(const SparseModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
    if (features.cols() != model.features())
        throw ArgumentError("feature count " + std::to_string(features.cols()) + " does not match model (" +
                            std::to_string(model.features()) + ")");
    Eigen::VectorXd eta = (features * model.coefficients).array() + model.intercept;
    if (model.family == LossFamily::logistic) {
        for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = clip_probability(sigmoid(eta(i)));
    }
    return eta;
}

double kkt_violation(const SparseModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::VectorXd>& target, const std::optional<Eigen::VectorXd>& weights) {
    const Eigen::VectorXd w = normalized_weights(target.size(), weights);
    Standardization st;
    st.center = model.center;
    st.scale = model.scale;
    st.usable.assign(static_cast<std::size_t>(features.cols()), true);
    const Standardization fresh = standardize_features(features, w, true);
    for (Eigen::Index j = 0; j < features.cols(); ++j) st.usable[static_cast<std::size_t>(j)] = fresh.usable[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd xs = apply_standardization(features, st);
    const Eigen::VectorXd beta = model.coefficients.cwiseProduct(model.scale);
    const double b0 = model.intercept + model.center.dot(model.coefficients);
    const Eigen::VectorXd grad = smooth_gradient(model.family, xs, target, w, b0, beta);
    const double lambda = model.lambda_selected;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (!st.usable[static_cast<std::size_t>(j)]) continue;
        const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                         : std::max(0.0, std::abs(grad(j)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

std::unique_ptr<FittedModel> LassoLearner::fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                               const Eigen::Ref<const Eigen::VectorXd>& target,
                                               std::uint64_t seed) const {
    LearnerSpec spec = spec_;
    spec.seed = derive_seed(spec_.seed, seed);
    return std::make_unique<LassoModel>(medtest::fit(spec, features, target));
}

LearnerPair LearnerPair::lasso(const LearnerSpec& spec) {
    LearnerSpec regression = spec;
    regression.family = LossFamily::squared;
    LearnerSpec classifier = spec;
    classifier.family = LossFamily::logistic;
    return {std::make_shared<LassoLearner>(regression), std::make_shared<LassoLearner>(classifier)};
}

}  // namespace medtest

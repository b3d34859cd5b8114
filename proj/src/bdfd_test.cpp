#include "medtest/bdfd_test.hpp"

#include "medtest/error.hpp"
#include "medtest/stats.hpp"

#include <algorithm>
#include <map>

namespace medtest {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = source.row(rows[r]);
    return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& source, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = source(rows[r]);
    return out;
}

// Class probabilities for codes 0..classes-1 on xtest: one logistic fit for
// two classes, one-vs-rest otherwise, renormalised to sum to one.
Eigen::MatrixXd fit_classes(const Learner& classifier, const Eigen::MatrixXd& xtrain, const Eigen::VectorXi& codes,
                            int classes, const Eigen::MatrixXd& xtest, std::uint64_t seed, const char* role,
                            int fold, const FitObserver& observer) {
    Eigen::MatrixXd prob(xtest.rows(), classes);
    const int fitted = classes == 2 ? 1 : classes;
    for (int c = 0; c < fitted; ++c) {
        const int cls = classes == 2 ? 1 : c;
        const Eigen::VectorXd target = (codes.array() == cls).cast<double>();
        const auto model = classifier.fit(xtrain, target, derive_seed(seed, static_cast<std::uint64_t>(cls)));
        if (observer) observer({role, fold, cls, *model, xtrain, target});
        prob.col(cls) = model->predict(xtest);
        if (classes == 2) prob.col(0) = 1.0 - prob.col(1).array();
    }
    for (Eigen::Index i = 0; i < prob.rows(); ++i) prob.row(i) /= prob.row(i).sum();
    return prob;
}

}  // namespace

MediatorCoding encode_mediators(const Eigen::MatrixXd& m) {
    std::map<std::vector<double>, int> seen;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(m(i, j));
        seen.emplace(rows[static_cast<std::size_t>(i)], 0);
    }
    MediatorCoding coding;
    coding.levels.resize(static_cast<Eigen::Index>(seen.size()), m.cols());
    int next = 0;
    for (auto& [row, code] : seen) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) coding.levels(next, j) = row[static_cast<std::size_t>(j)];
        code = next++;
    }
    coding.code.resize(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) coding.code(i) = seen[rows[static_cast<std::size_t>(i)]];
    return coding;
}

double nested_mean(const BdFdNuisances& b, Eigen::Index i, int m) {
    double total = 0.0;
    for (int d = 0; d < b.treatment_levels(); ++d) total += b.mu[static_cast<std::size_t>(d)](i, m) * b.fd(i, d);
    return total;
}

double zeta(const BdFdNuisances& b, Eigen::Index i, int d, int d_obs) {
    return b.mu[static_cast<std::size_t>(d_obs)].row(i).dot(b.fm[static_cast<std::size_t>(d)].row(i));
}

double zeta_fd(const BdFdNuisances& b, Eigen::Index i, int d) {
    double total = 0.0;
    for (int m = 0; m < b.mediator_levels(); ++m) total += b.fm[static_cast<std::size_t>(d)](i, m) * nested_mean(b, i, m);
    return total;
}

double r_term(double y, int d_obs, const BdFdNuisances& b, Eigen::Index i, int d) {
    if (d_obs != d) return 0.0;
    return (y - b.q(i, d)) / b.fd(i, d);
}

double s_term(double y, int d_obs, int m_obs, const BdFdNuisances& b, Eigen::Index i, int d) {
    const auto& mu_obs = b.mu[static_cast<std::size_t>(d_obs)];
    const auto& fm_obs = b.fm[static_cast<std::size_t>(d_obs)];
    double out = (y - mu_obs(i, m_obs)) * b.fm[static_cast<std::size_t>(d)](i, m_obs) / fm_obs(i, m_obs);
    if (d_obs == d) {
        double inner = 0.0;
        for (int dp = 0; dp < b.treatment_levels(); ++dp)
            for (int m = 0; m < b.mediator_levels(); ++m)
                inner += b.mu[static_cast<std::size_t>(dp)](i, m) * fm_obs(i, m) * b.fd(i, dp);
        out += (nested_mean(b, i, m_obs) - inner) / b.fd(i, d);
    }
    return out;
}

double t_term(const BdFdNuisances& b, Eigen::Index i, int d, int d_obs) {
    return zeta(b, i, d, d_obs) - zeta_fd(b, i, d);
}

double score_bdfd(double y, int d_obs, int m_obs, const BdFdNuisances& b, Eigen::Index i, double theta) {
    double total = 0.0;
    for (int d = 0; d < b.treatment_levels(); ++d) {
        const double g = b.q(i, d) - zeta_fd(b, i, d);
        const double c = r_term(y, d_obs, b, i, d) - s_term(y, d_obs, m_obs, b, i, d) - t_term(b, i, d, d_obs);
        total += g * g + 2.0 * g * c + g + c;
    }
    return total - theta;
}

BdFdNuisances crossfit_bdfd(const Dataset& data, const FoldPlan& folds, const LearnerPair& learners,
                            const FitObserver& observer) {
    if (folds.n() != data.n()) throw ArgumentError("fold plan does not cover the dataset");
    if (data.m().cols() == 0) throw ArgumentError("the BD/FD test needs at least one mediator column");
    const MediatorCoding coding = encode_mediators(data.m());
    const int levels = data.levels();
    const int mlevels = coding.size();
    if (mlevels < 2) throw InfeasibleError("mediator takes a single value; the front-door contrast is undefined");
    const Eigen::Index n = data.n();
    const auto& d = data.d();

    BdFdNuisances b;
    b.q.setZero(n, levels);
    b.fd.setZero(n, levels);
    b.mu.assign(static_cast<std::size_t>(levels), Eigen::MatrixXd::Zero(n, mlevels));
    b.fm.assign(static_cast<std::size_t>(levels), Eigen::MatrixXd::Zero(n, mlevels));
    b.fold_of = folds.assignment();

    for (int k = 0; k < folds.folds(); ++k) {
        const auto train = folds.train_rows(k);
        const auto test = folds.test_rows(k);
        const Eigen::MatrixXd xtest = gather_rows(data.x(), test);
        const std::uint64_t seed = derive_seed(folds.seed(), static_cast<std::uint64_t>(k));
        auto scatter = [&](Eigen::MatrixXd& target, Eigen::Index col, const Eigen::VectorXd& pred) {
            for (std::size_t r = 0; r < test.size(); ++r) target(test[r], col) = pred(static_cast<Eigen::Index>(r));
        };

        std::vector<std::vector<Eigen::Index>> by_level(static_cast<std::size_t>(levels));
        std::vector<std::vector<Eigen::Index>> by_cell(static_cast<std::size_t>(levels * mlevels));
        for (Eigen::Index i : train) {
            by_level[static_cast<std::size_t>(d(i))].push_back(i);
            by_cell[static_cast<std::size_t>(d(i) * mlevels + coding.code(i))].push_back(i);
        }

        for (int l = 0; l < levels; ++l) {
            const auto& rows = by_level[static_cast<std::size_t>(l)];
            if (rows.size() < 2)
                throw FoldDegeneracyError(k, l, "treatment level has " + std::to_string(rows.size()) +
                                                    " training observation(s)");
            const Eigen::MatrixXd xl = gather_rows(data.x(), rows);
            const Eigen::VectorXd yl = gather(data.y(), rows);
            const auto q_fit = learners.regression->fit(xl, yl, derive_seed(seed, 0, static_cast<std::uint64_t>(l)));
            if (observer) observer({"q", k, l, *q_fit, xl, yl});
            scatter(b.q, l, q_fit->predict(xtest));

            for (int m = 0; m < mlevels; ++m) {
                const auto& cell = by_cell[static_cast<std::size_t>(l * mlevels + m)];
                if (cell.size() < 2)
                    throw FoldDegeneracyError(k, l * mlevels + m,
                                              "(treatment " + std::to_string(l) + ", mediator " + std::to_string(m) +
                                                  ") cell has " + std::to_string(cell.size()) +
                                                  " training observation(s)");
                const Eigen::MatrixXd xc = gather_rows(data.x(), cell);
                const Eigen::VectorXd yc = gather(data.y(), cell);
                const auto mu_fit = learners.regression->fit(
                    xc, yc, derive_seed(seed, 1, static_cast<std::uint64_t>(l * mlevels + m)));
                if (observer) observer({"mu", k, l * mlevels + m, *mu_fit, xc, yc});
                scatter(b.mu[static_cast<std::size_t>(l)], m, mu_fit->predict(xtest));
            }

            Eigen::VectorXi mcodes(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t r = 0; r < rows.size(); ++r) mcodes(static_cast<Eigen::Index>(r)) = coding.code(rows[r]);
            const Eigen::MatrixXd fm = fit_classes(*learners.classifier, xl, mcodes, mlevels, xtest,
                                                   derive_seed(seed, 2, static_cast<std::uint64_t>(l)), "f_m", k,
                                                   observer);
            for (int m = 0; m < mlevels; ++m) scatter(b.fm[static_cast<std::size_t>(l)], m, fm.col(m));
        }

        const Eigen::MatrixXd xtrain = gather_rows(data.x(), train);
        Eigen::VectorXi dcodes(static_cast<Eigen::Index>(train.size()));
        for (std::size_t r = 0; r < train.size(); ++r) dcodes(static_cast<Eigen::Index>(r)) = d(train[r]);
        const Eigen::MatrixXd fd = fit_classes(*learners.classifier, xtrain, dcodes, levels, xtest,
                                               derive_seed(seed, 3), "f_d", k, observer);
        for (int l = 0; l < levels; ++l) scatter(b.fd, l, fd.col(l));
    }
    return b;
}

BdFdResult estimate_bdfd_from_bundle(const Dataset& data, const BdFdNuisances& bundle, const TrimRule& trim,
                                     Sidedness sidedness) {
    trim.validate();
    const MediatorCoding coding = encode_mediators(data.m());
    if (bundle.n() != data.n() || bundle.treatment_levels() != data.levels() ||
        bundle.mediator_levels() != coding.size())
        throw ArgumentError("BD/FD nuisances do not match the data");
    const int levels = data.levels();
    const auto& d = data.d();

    BdFdResult out;
    out.q_mean.assign(static_cast<std::size_t>(levels), 0.0);
    out.zeta_mean.assign(static_cast<std::size_t>(levels), 0.0);
    out.zeta_fd_mean.assign(static_cast<std::size_t>(levels), 0.0);
    std::vector<double> scores;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const int m_obs = coding.code(i);
        bool keep = bundle.fm[static_cast<std::size_t>(d(i))](i, m_obs) >= trim.lower &&
                    bundle.fm[static_cast<std::size_t>(d(i))](i, m_obs) <= trim.upper;
        for (int l = 0; l < levels && keep; ++l) keep = bundle.fd(i, l) >= trim.lower && bundle.fd(i, l) <= trim.upper;
        if (!keep) continue;
        scores.push_back(score_bdfd(data.y()(i), d(i), m_obs, bundle, i, 0.0));
        for (int l = 0; l < levels; ++l) {
            out.q_mean[static_cast<std::size_t>(l)] += bundle.q(i, l);
            out.zeta_mean[static_cast<std::size_t>(l)] += zeta(bundle, i, l, d(i));
            out.zeta_fd_mean[static_cast<std::size_t>(l)] += zeta_fd(bundle, i, l);
        }
    }
    out.result = summarize_scores(scores, data.n(), sidedness);
    const double kept = static_cast<double>(scores.size());
    for (int l = 0; l < levels; ++l) {
        out.q_mean[static_cast<std::size_t>(l)] /= kept;
        out.zeta_mean[static_cast<std::size_t>(l)] /= kept;
        out.zeta_fd_mean[static_cast<std::size_t>(l)] /= kept;
    }
    return out;
}

BdFdResult estimate_bdfd(const Dataset& data, const FoldPlan& folds, const LearnerPair& learners,
                         const TrimRule& trim, Sidedness sidedness, const FitObserver& observer) {
    trim.validate();
    return estimate_bdfd_from_bundle(data, crossfit_bdfd(data, folds, learners, observer), trim, sidedness);
}

BdFdResult test_bdfd(const Dataset& data, const LearnerPair& learners, const CrossfitOptions& options,
                     const FitObserver& observer) {
    if (options.splits < 1) throw ArgumentError("number of splits must be at least 1");
    std::vector<TestResult> results;
    BdFdResult out;
    for (int s = 0; s < options.splits; ++s) {
        const FoldPlan plan(data.n(), options.folds, derive_seed(options.seed, static_cast<std::uint64_t>(s)));
        BdFdResult split = estimate_bdfd(data, plan, learners, options.trim, options.sidedness, observer);
        results.push_back(split.result);
        if (s == 0) {
            out = split;
        } else {
            for (std::size_t l = 0; l < out.q_mean.size(); ++l) {
                out.q_mean[l] += split.q_mean[l];
                out.zeta_mean[l] += split.zeta_mean[l];
                out.zeta_fd_mean[l] += split.zeta_fd_mean[l];
            }
        }
    }
    for (std::size_t l = 0; l < out.q_mean.size(); ++l) {
        out.q_mean[l] /= options.splits;
        out.zeta_mean[l] /= options.splits;
        out.zeta_fd_mean[l] /= options.splits;
    }
    out.result = aggregate_splits(results);
    return out;
}

}  // namespace medtest

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace medtest {

struct ColumnNames {
    std::string outcome = "y";
    std::string treatment = "d";
    std::vector<std::string> mediators;
    std::vector<std::string> covariates;
};

// Observed (Y, D, M, X). Treatment values are re-coded to 0..L-1 in ascending
// label order; labels() keeps the original values for reporting.
class Dataset {
public:
    Dataset(Eigen::VectorXd y, const Eigen::VectorXd& treatment, Eigen::MatrixXd m,
            Eigen::MatrixXd x, ColumnNames names = {});

    Eigen::Index n() const { return y_.size(); }
    int levels() const { return static_cast<int>(labels_.size()); }
    bool is_binary() const;

    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::VectorXi& d() const { return d_; }
    const Eigen::MatrixXd& m() const { return m_; }
    const Eigen::MatrixXd& x() const { return x_; }
    const std::vector<double>& labels() const { return labels_; }
    const ColumnNames& names() const { return names_; }

    // [M X] as one feature matrix.
    Eigen::MatrixXd mediators_and_covariates() const;

    // Row subset in the given order; the treatment coding is recomputed.
    Dataset rows(std::span<const Eigen::Index> index) const;

private:
    Eigen::VectorXd y_;
    Eigen::VectorXi d_;
    Eigen::MatrixXd m_;
    Eigen::MatrixXd x_;
    std::vector<double> labels_;
    ColumnNames names_;
};

struct CsvSchema {
    std::string outcome;
    std::string treatment;
    std::vector<std::string> mediators;
    std::vector<std::string> covariates;
    // Every column not otherwise assigned becomes a covariate.
    bool covariates_all_remaining = false;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Balanced random partition of 0..n-1 into K folds.
class FoldPlan {
public:
    FoldPlan(Eigen::Index n, int folds, std::uint64_t seed);

    Eigen::Index n() const { return static_cast<Eigen::Index>(assignment_.size()); }
    int folds() const { return folds_; }
    std::uint64_t seed() const { return seed_; }
    int fold_of(Eigen::Index i) const { return assignment_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& assignment() const { return assignment_; }

    std::vector<Eigen::Index> test_rows(int k) const;
    std::vector<Eigen::Index> train_rows(int k) const;

    // Plan with an explicit assignment (used to carry folds through a row permutation).
    static FoldPlan from_assignment(std::vector<int> assignment, int folds, std::uint64_t seed);

private:
    FoldPlan() = default;
    std::vector<int> assignment_;
    int folds_ = 0;
    std::uint64_t seed_ = 0;
};

FoldPlan make_folds(Eigen::Index n, int folds, std::uint64_t seed);

struct TrimRule {
    double lower = 0.05;
    double upper = 0.95;
    void validate() const;
};

struct TrimResult {
    std::vector<Eigen::Index> kept;
    Eigen::Index n_kept = 0;
    Eigen::Index n_discarded = 0;
};

TrimResult apply_trim(std::span<const double> p_hat, const TrimRule& rule);

// Row-wise rule over several probability columns: a row is kept only if
// every entry lies in [lower, upper].
TrimResult apply_trim(const Eigen::MatrixXd& p_hat, const TrimRule& rule);

}  // namespace medtest

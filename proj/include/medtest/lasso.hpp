#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace medtest {

enum class LossFamily { squared, logistic };

std::string to_string(LossFamily family);
LossFamily parse_family(const std::string& name);

// Configuration of an L1-penalised learner. An empty lambda_grid means the
// automatic grid: n_lambda log-spaced values from lambda_max down to
// lambda_min_ratio * lambda_max. A single-value grid skips cross-validation.
struct LearnerSpec {
    LossFamily family = LossFamily::squared;
    std::vector<double> lambda_grid;
    int cv_folds = 10;
    int max_iter = 100000;
    double tol = 1e-7;
    bool standardize = true;
    std::uint64_t seed = 20240601;
    int n_lambda = 100;
    double lambda_min_ratio = 1e-3;

    void validate() const;
};

// Fitted sparse GLM. coefficients and intercept are on the original feature
// scale; center/scale record the internal standardisation.
struct SparseModel {
    LossFamily family = LossFamily::squared;
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    double lambda_selected = 0.0;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;
    // Constant target (logistic) or no usable signal; the model predicts a constant.
    bool degenerate = false;
    std::vector<double> lambda_path;
    std::vector<double> cv_loss;

    Eigen::Index features() const { return coefficients.size(); }
    Eigen::Index nonzero() const;
};

inline constexpr double kProbabilityClip = 1e-6;

SparseModel fit(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& features,
                const Eigen::Ref<const Eigen::VectorXd>& target,
                const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// Linear predictor for squared loss, clipped inverse-logit for logistic.
Eigen::VectorXd predict(const SparseModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

// Largest violation of the subgradient optimality conditions at
// model.lambda_selected, measured on the standardised scale the penalty acts on.
double kkt_violation(const SparseModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::VectorXd>& target,
                     const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// Smallest lambda at which every penalised coefficient is zero.
double lambda_max(LossFamily family, bool standardize, const Eigen::Ref<const Eigen::MatrixXd>& features,
                  const Eigen::Ref<const Eigen::VectorXd>& target,
                  const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// Coefficient path on a fixed decreasing grid (no cross-validation). Column k
// of the returned matrix holds the original-scale coefficients at grid[k].
struct LassoPath {
    std::vector<double> lambdas;
    Eigen::VectorXd intercepts;
    Eigen::MatrixXd coefficients;
};
LassoPath fit_path(const LearnerSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& features,
                   const Eigen::Ref<const Eigen::VectorXd>& target, const std::vector<double>& grid,
                   const std::optional<Eigen::VectorXd>& weights = std::nullopt);

// Open learner interface: any fit/predict pair honouring the SparseModel
// contract (real-valued predictions for regression, probabilities in
// [1e-6, 1 - 1e-6] for classification) can stand in for the lasso.
class FittedModel {
public:
    virtual ~FittedModel() = default;
    virtual Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& features) const = 0;
    virtual bool degenerate() const = 0;
};

class Learner {
public:
    virtual ~Learner() = default;
    virtual std::unique_ptr<FittedModel> fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                             const Eigen::Ref<const Eigen::VectorXd>& target,
                                             std::uint64_t seed) const = 0;
    virtual std::string name() const = 0;
};

class LassoModel final : public FittedModel {
public:
    explicit LassoModel(SparseModel model) : model_(std::move(model)) {}
    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& features) const override {
        return medtest::predict(model_, features);
    }
    bool degenerate() const override { return model_.degenerate; }
    const SparseModel& model() const { return model_; }

private:
    SparseModel model_;
};

class LassoLearner final : public Learner {
public:
    explicit LassoLearner(LearnerSpec spec) : spec_(std::move(spec)) { spec_.validate(); }
    std::unique_ptr<FittedModel> fit(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                     const Eigen::Ref<const Eigen::VectorXd>& target,
                                     std::uint64_t seed) const override;
    std::string name() const override { return "lasso-" + to_string(spec_.family); }
    const LearnerSpec& spec() const { return spec_; }

private:
    LearnerSpec spec_;
};

// Outcome regression and binary classifier used by the estimators.
struct LearnerPair {
    std::shared_ptr<const Learner> regression;
    std::shared_ptr<const Learner> classifier;

    // Both members built from one spec; the family field is overridden.
    static LearnerPair lasso(const LearnerSpec& spec);
};

// Called after every nuisance fit with the training data it saw. Estimators
// may invoke it from several threads at once.
struct FitEvent {
    const char* role;
    int fold;
    int cell;
    const FittedModel& model;
    const Eigen::MatrixXd& features;
    const Eigen::VectorXd& target;
};
using FitObserver = std::function<void(const FitEvent&)>;

}  // namespace medtest

#include "medtest/ci_test.hpp"
#include "medtest/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace medtest;

namespace {

Dataset with_treatment(const std::vector<double>& d) {
    const auto n = static_cast<Eigen::Index>(d.size());
    return Dataset(Eigen::VectorXd::Zero(n), Eigen::Map<const Eigen::VectorXd>(d.data(), n),
                   Eigen::MatrixXd::Zero(n, 1), Eigen::MatrixXd::Zero(n, 0));
}

// Remembers its training rows: predicts 0.75 on any of them, 0.25 elsewhere.
class MemoModel final : public FittedModel {
public:
    explicit MemoModel(Eigen::MatrixXd seen) : seen_(std::move(seen)) {}
    Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
        Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), 0.25);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index k = 0; k < seen_.rows(); ++k)
                if (x.row(i) == seen_.row(k)) out(i) = 0.75;
        return out;
    }
    bool degenerate() const override { return false; }

private:
    Eigen::MatrixXd seen_;
};

class MemoLearner final : public Learner {
public:
    std::unique_ptr<FittedModel> fit(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>&,
                                     std::uint64_t) const override {
        return std::make_unique<MemoModel>(x);
    }
    std::string name() const override { return "memo"; }
};

Dataset noisy_binary(Eigen::Index n, std::uint64_t seed, bool pure_noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(n), d(n);
    Eigen::MatrixXd m(n, 1), x(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = normal(rng);
        d(i) = x(i, 0) + normal(rng) > 0 ? 1.0 : 0.0;
        m(i, 0) = 0.5 * d(i) + x(i, 1) + normal(rng);
        y(i) = pure_noise ? normal(rng) : m(i, 0) + x(i, 2) + normal(rng);
    }
    return Dataset(y, d, m, x);
}

}  // namespace

TEST_SUITE("ci_test") {

TEST_CASE("partitions") {
    SUBCASE("binary treatment keeps both levels") {
        const Dataset data = with_treatment({0, 1, 1, 0, 1, 0, 0, 1});
        const TreatmentPartition part = partition_treatment(data, {PartitionMethod::discrete, 0.3, 2});
        CHECK(part.cells == std::vector<std::vector<int>>{{0}, {1}});
        CHECK(part.binary());
    }
    SUBCASE("quantile median split of four uniform levels") {
        std::vector<double> d;
        for (int r = 0; r < 25; ++r)
            for (int l = 0; l < 4; ++l) d.push_back(l);
        const TreatmentPartition part = partition_treatment(with_treatment(d), {PartitionMethod::quantile, 0.0, 2});
        CHECK(part.cells == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    }
    SUBCASE("rare levels merge into the only frequent one") {
        std::vector<double> d(94, 0.0);
        d.insert(d.end(), 3, 1.0);
        d.insert(d.end(), 3, 2.0);
        CHECK_THROWS_AS((void)partition_treatment(with_treatment(d), {PartitionMethod::discrete, 0.05, 2}),
                        PartitionError);
    }
    SUBCASE("merge goes to the nearest retained label") {
        // Labels 0, 1, 5, 6 with 1 and 5 rare: 1 joins 0, 5 joins 6.
        std::vector<double> d(40, 0.0);
        d.insert(d.end(), 40, 6.0);
        d.insert(d.end(), 2, 1.0);
        d.insert(d.end(), 2, 5.0);
        const TreatmentPartition part = partition_treatment(with_treatment(d), {PartitionMethod::discrete, 0.1, 2});
        CHECK(part.cells == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    }
}

TEST_CASE("binary score hand values") {
    // Perfect fit with no effect.
    CHECK(score_binary(2.0, 1, 2.0, 2.0, 0.4, 0.0) == 0.0);
    CHECK(score_binary(2.0, 0, 2.0, 2.0, 0.4, 0.0) == 0.0);
    // Constant contrast c, zero residuals.
    const double c = 0.7;
    CHECK(score_binary(1.0 + c, 1, 1.0 + c, 1.0, 0.3, c * c + c) == doctest::Approx(0.0).scale(1.0));
    CHECK(score_binary(1.0, 0, 1.0 + c, 1.0, 0.3, c * c + c) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("two-cell multivalued score is the mirrored binary score") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2), pr(0.1, 0.9);
    for (int trial = 0; trial < 50; ++trial) {
        const double y = u(rng), mu1 = u(rng), mu0 = u(rng), p = pr(rng), theta = u(rng);
        const int d = trial % 2;
        // Direct expansion: both cells contribute Delta^2 + 2 Delta R + Delta + R with Delta, R flipped.
        const double delta = mu1 - mu0;
        const double r = d == 1 ? (y - mu1) / p : -(y - mu0) / (1 - p);
        const double expected = (delta * delta + 2 * delta * r + delta + r) +
                                (delta * delta + 2 * delta * r - delta - r) - theta;
        Eigen::Vector2d in(mu0, mu1), out(mu1, mu0), prob(1 - p, p);
        CHECK(score_multivalued(y, d, in, out, prob, theta) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(score_multivalued(y, d, in, out, prob, theta) ==
              doctest::Approx(score_binary(y, d, mu1, mu0, p, 0.0) + score_binary(y, 1 - d, mu0, mu1, 1 - p, 0.0) -
                              theta)
                  .epsilon(1e-12));
    }
    // Equal nuisances, zero residuals.
    Eigen::Vector3d same = Eigen::Vector3d::Constant(1.0), prob(0.2, 0.3, 0.5);
    CHECK(score_multivalued(1.0, 2, same, same, prob, 0.0) == 0.0);
}

TEST_CASE("score summary") {
    const std::vector<double> scores{1, 2, 3, 6};
    const TestResult r = summarize_scores(scores, 4, Sidedness::two_sided);
    CHECK(r.theta_hat == doctest::Approx(3.0));
    CHECK(r.se == doctest::Approx(std::sqrt(14.0) / 4.0));
    const double t = 3.0 / (std::sqrt(14.0) / 4.0);
    CHECK(r.t_stat == doctest::Approx(t));
    CHECK(r.p_value == doctest::Approx(std::erfc(t / std::sqrt(2.0))));
    const TestResult upper = summarize_scores(scores, 4, Sidedness::upper);
    CHECK(upper.p_value == doctest::Approx(0.5 * std::erfc(t / std::sqrt(2.0))));
    const std::vector<double> negative{-1, -2, -3, -6};
    CHECK(summarize_scores(negative, 4, Sidedness::upper).p_value > 0.99);

    const std::vector<double> one{1.0};
    CHECK_THROWS_AS((void)summarize_scores(one, 5, Sidedness::two_sided), InfeasibleError);
    CHECK_THROWS_AS((void)summarize_scores({}, 5, Sidedness::two_sided), InfeasibleError);
}

TEST_CASE("split aggregation") {
    std::vector<TestResult> splits(3);
    for (int s = 0; s < 3; ++s) {
        splits[s].theta_hat = s + 1.0;
        splits[s].se = 1.0;
        splits[s].n = 100;
        splits[s].n_effective = 90 + s;
    }
    const TestResult agg = aggregate_splits(splits);
    CHECK(agg.theta_hat == 2.0);
    CHECK(agg.se == doctest::Approx(std::sqrt(2.0)));
    CHECK(agg.aggregation == Aggregation::median_of_splits);
    CHECK(agg.per_split.size() == 3);

    const TestResult single = aggregate_splits(std::span<const TestResult>(splits.data(), 1));
    CHECK(single.theta_hat == splits[0].theta_hat);
    CHECK(single.se == splits[0].se);

    std::vector<TestResult> same(4, splits[1]);
    CHECK(aggregate_splits(same).theta_hat == splits[1].theta_hat);
    CHECK(aggregate_splits(same).se == doctest::Approx(splits[1].se));

    splits[2].sidedness = Sidedness::upper;
    CHECK_THROWS_AS((void)aggregate_splits(splits), ArgumentError);
}

TEST_CASE("cross-fitted predictions are out of fold") {
    const Dataset data = noisy_binary(100, 1, false);
    const TreatmentPartition part = partition_treatment(data, {});
    const auto memo = std::make_shared<MemoLearner>();
    const NuisanceBundle b = crossfit_nuisances(data, part, make_folds(100, 5, 3), LearnerPair{memo, memo});
    REQUIRE(b.mu_in.rows() == 100);
    CHECK(b.mu_in.cols() == 2);
    CHECK(b.p.cols() == 2);
    CHECK(b.mu_in.col(1).cwiseEqual(0.25).all());
    CHECK(b.mu_out.col(1).cwiseEqual(0.25).all());
    CHECK(b.p.col(1).cwiseEqual(0.25).all());
}

TEST_CASE("noise-free linear outcome is reproduced") {
    const Eigen::Index n = 2000;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(n), d(n);
    Eigen::MatrixXd m(n, 1), x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        d(i) = normal(rng) > 0 ? 1 : 0;
        m(i, 0) = normal(rng);
        y(i) = 1.0 + 2.0 * m(i, 0) - x(i, 0);
    }
    const Dataset data(y, d, m, x);
    const NuisanceBundle b = crossfit_nuisances(data, partition_treatment(data, {}), make_folds(n, 5, 1), LearnerSpec{});
    CHECK((b.mu_in.col(1) - y).cwiseAbs().maxCoeff() < 0.05);
    CHECK((b.mu_out.col(1) - y).cwiseAbs().maxCoeff() < 0.05);
    CHECK((b.p.col(1).array() - 0.5).abs().maxCoeff() < 0.15);
}

TEST_CASE("three-level partition gives three nuisance columns") {
    const Eigen::Index n = 300;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(n), d(n);
    Eigen::MatrixXd m(n, 1), x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        d(i) = static_cast<double>(i % 3);
        m(i, 0) = d(i) + normal(rng);
        y(i) = m(i, 0) + normal(rng);
    }
    const Dataset data(y, d, m, x);
    const TreatmentPartition part = partition_treatment(data, {});
    REQUIRE(part.size() == 3);
    const NuisanceBundle b = crossfit_nuisances(data, part, make_folds(n, 5, 1), LearnerSpec{});
    CHECK(b.mu_in.cols() == 3);
    CHECK(b.mu_out.cols() == 3);
    CHECK(b.p.cols() == 3);
    const TestResult r = estimate_from_bundle(data, part, b, TrimRule{});
    CHECK(std::isfinite(r.theta_hat));
}

TEST_CASE("degenerate training cell is reported") {
    const Eigen::Index n = 50;
    std::vector<double> d(n, 0.0);
    d[7] = 1.0;
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, 0, 1);
    const Dataset data(y, Eigen::Map<Eigen::VectorXd>(d.data(), n), Eigen::MatrixXd::Random(n, 1),
                       Eigen::MatrixXd::Random(n, 1));
    const TreatmentPartition part = level_partition(2);
    CHECK_THROWS_AS((void)crossfit_nuisances(data, part, make_folds(n, 5, 1), LearnerSpec{}), FoldDegeneracyError);
}

TEST_CASE("pure-noise outcome: estimate within 3 se in at least 99% of seeds") {
    int inside = 0;
    const int runs = 100;
    for (int s = 0; s < runs; ++s) {
        const Dataset data = noisy_binary(1000, 100 + s, true);
        CrossfitOptions options;
        options.seed = s;
        const TestResult r = test_ci(data, partition_treatment(data, {}), LearnerPair::lasso(LearnerSpec{}), options);
        if (std::abs(r.theta_hat) <= 3 * r.se) ++inside;
    }
    CHECK(inside >= 99);
}

TEST_CASE("repeated splits aggregate and are reproducible") {
    const Dataset data = noisy_binary(300, 4, false);
    CrossfitOptions options;
    options.splits = 3;
    options.seed = 17;
    const auto learners = LearnerPair::lasso(LearnerSpec{});
    const TestResult a = test_ci(data, partition_treatment(data, {}), learners, options);
    const TestResult b = test_ci(data, partition_treatment(data, {}), learners, options);
    CHECK(a.per_split.size() == 3);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.se == b.se);
}

}

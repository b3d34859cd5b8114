#include "medtest/simulation.hpp"

#include "medtest/bdfd_test.hpp"
#include "medtest/error.hpp"
#include "medtest/stats.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

namespace medtest {

void DgpConfig::validate() const {
    if (n < 10) throw ArgumentError("simulation n must be at least 10");
    if (p < 1) throw ArgumentError("simulation p must be at least 1");
    if (!std::isfinite(delta) || !std::isfinite(gamma) || !std::isfinite(lambda))
        throw ArgumentError("simulation coefficients must be finite");
}

Eigen::MatrixXd covariate_covariance(Eigen::Index p) {
    Eigen::MatrixXd sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) sigma(i, j) = std::pow(0.5, static_cast<double>(std::abs(i - j)));
    return sigma;
}

Eigen::MatrixXd gen_covariates(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw ArgumentError("gen_covariates needs n, p >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    const Eigen::LLT<Eigen::MatrixXd> chol(covariate_covariance(p));
    return z * chol.matrixL().transpose();
}

Eigen::VectorXd beta_schedule(Eigen::Index p) {
    Eigen::VectorXd beta(p);
    for (Eigen::Index i = 0; i < p; ++i) beta(i) = 0.5 / static_cast<double>((i + 1) * (i + 1));
    return beta;
}

Dataset simulate(const DgpConfig& config) {
    config.validate();
    const Eigen::MatrixXd x = gen_covariates(config.n, config.p, derive_seed(config.seed, 0));
    const Eigen::VectorXd index = x * beta_schedule(config.p);
    std::mt19937_64 rng(derive_seed(config.seed, 1));
    std::normal_distribution<double> normal;
    Eigen::VectorXd y(config.n), d(config.n);
    Eigen::MatrixXd m(config.n, 1);
    for (Eigen::Index i = 0; i < config.n; ++i) {
        const double u1 = normal(rng);
        const double u2 = normal(rng);
        const double u3 = normal(rng);
        d(i) = index(i) + config.lambda * u2 + u1 > 0.0 ? 1.0 : 0.0;
        m(i, 0) = 0.5 * d(i) + index(i) + config.delta * u1 + u2;
        y(i) = m(i, 0) + index(i) + config.gamma * d(i) + config.delta * u1 + u3;
    }
    ColumnNames names;
    names.mediators = {"m"};
    for (Eigen::Index j = 0; j < config.p; ++j) names.covariates.push_back("x" + std::to_string(j + 1));
    return Dataset(std::move(y), d, std::move(m), x, std::move(names));
}

McReport run_monte_carlo(Eigen::Index reps, double alpha, std::uint64_t seed, int threads,
                         const Replication& replication) {
    if (reps < 1) throw ArgumentError("reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0,1)");
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<Eigen::Index>(threads, reps));

    std::vector<std::optional<TestResult>> outcomes(static_cast<std::size_t>(reps));
    std::atomic<Eigen::Index> next{0};
    std::exception_ptr fatal;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const Eigen::Index r = next.fetch_add(1);
            if (r >= reps || failed.load()) return;
            try {
                outcomes[static_cast<std::size_t>(r)] = replication(derive_seed(seed, static_cast<std::uint64_t>(r)));
            } catch (const InfeasibleError&) {
                // counted below
            } catch (...) {
                if (!failed.exchange(true)) fatal = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    McReport report;
    std::vector<double> thetas;
    double se_sum = 0.0, n_eff_sum = 0.0;
    Eigen::Index rejections = 0;
    for (auto& outcome : outcomes) {
        if (!outcome) {
            ++report.reps_failed;
            continue;
        }
        thetas.push_back(outcome->theta_hat);
        se_sum += outcome->se;
        n_eff_sum += static_cast<double>(outcome->n_effective);
        if (outcome->p_value < alpha) ++rejections;
        report.results.push_back(std::move(*outcome));
    }
    report.reps_completed = static_cast<Eigen::Index>(thetas.size());
    if (report.reps_completed > 0) {
        const double done = static_cast<double>(report.reps_completed);
        const MeanSd stats = mean_sd(thetas);
        report.mean_theta = stats.mean;
        report.sd_theta = stats.sd;
        report.mean_se = se_sum / done;
        report.mean_n_effective = n_eff_sum / done;
        report.rejection_rate = static_cast<double>(rejections) / done;
    }
    return report;
}

McReport run_monte_carlo(const DgpConfig& config, Eigen::Index reps, double alpha, TestKind test,
                         const EngineParams& engine, const FitObserver& observer) {
    config.validate();
    const LearnerPair learners = LearnerPair::lasso(engine.learner);
    auto replication = [&](std::uint64_t seed) {
        DgpConfig draw = config;
        draw.seed = derive_seed(seed, 0);
        const Dataset data = simulate(draw);
        CrossfitOptions options = engine.crossfit;
        options.seed = derive_seed(seed, 1);
        if (test == TestKind::bdfd) return test_bdfd(data, learners, options, observer).result;
        return test_ci(data, level_partition(data.levels()), learners, options, observer);
    };
    return run_monte_carlo(reps, alpha, config.seed, engine.threads, replication);
}

}  // namespace medtest

#pragma once

#include "medtest/ci_test.hpp"
#include "medtest/data.hpp"
#include "medtest/lasso.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace medtest {

// DGP1 is lambda = 0; DGP2 adds lambda * U2 to the treatment index.
struct DgpConfig {
    Eigen::Index n = 1000;
    Eigen::Index p = 200;
    double delta = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

// Toeplitz covariance 0.5^|i-j|.
Eigen::MatrixXd covariate_covariance(Eigen::Index p);

// n draws from N(0, covariate_covariance(p)) through its Cholesky factor.
Eigen::MatrixXd gen_covariates(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

// beta_i = 0.5 / i^2, i = 1..p.
Eigen::VectorXd beta_schedule(Eigen::Index p);

//   D = 1{X'b + lambda U2 + U1 > 0}
//   M = 0.5 D + X'b + delta U1 + U2
//   Y = M + X'b + gamma D + delta U1 + U3
Dataset simulate(const DgpConfig& config);

struct McReport {
    double mean_theta = 0.0;
    double sd_theta = 0.0;
    double mean_se = 0.0;
    double rejection_rate = 0.0;
    Eigen::Index reps_completed = 0;
    Eigen::Index reps_failed = 0;
    double mean_n_effective = 0.0;
    // Per-replication results of completed runs, in replication order.
    std::vector<TestResult> results;
};

enum class TestKind { ci, bdfd };

struct EngineParams {
    LearnerSpec learner;
    CrossfitOptions crossfit;
    // 0 = hardware concurrency.
    int threads = 0;
};

// One replication: seed -> test result. Estimation failures should surface
// as InfeasibleError; they are counted and excluded.
using Replication = std::function<TestResult(std::uint64_t seed)>;

// Runs reps replications with seeds derive_seed(seed, r). The report does not
// depend on the thread count.
McReport run_monte_carlo(Eigen::Index reps, double alpha, std::uint64_t seed, int threads,
                         const Replication& replication);

McReport run_monte_carlo(const DgpConfig& config, Eigen::Index reps, double alpha, TestKind test,
                         const EngineParams& engine, const FitObserver& observer = {});

}  // namespace medtest

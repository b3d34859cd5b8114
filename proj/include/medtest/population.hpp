#pragma once

#include "medtest/bdfd_test.hpp"
#include "medtest/ci_test.hpp"
#include "medtest/data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace medtest {

// Finite structural model. Every kernel is a row-stochastic matrix whose rows
// enumerate the parent configurations in row-major order:
//   p_x: 1 x |X|               p_u: 1 x |U|
//   p_d: (x,u) x |D|           row x*|U| + u
//   p_m: (d,x,u) x |M|         row (d*|X| + x)*|U| + u
//   p_y: (d,m,x,u) x |Y|       row ((d*|M| + m)*|X| + x)*|U| + u
// Y takes the real values y_values; D, M, X, U are coded 0..size-1.
struct DiscretePopulation {
    Eigen::VectorXd y_values;
    int d_size = 2;
    int m_size = 2;
    int x_size = 1;
    int u_size = 1;
    Eigen::RowVectorXd p_x;
    Eigen::RowVectorXd p_u;
    Eigen::MatrixXd p_d;
    Eigen::MatrixXd p_m;
    Eigen::MatrixXd p_y;

    int y_size() const { return static_cast<int>(y_values.size()); }
    Eigen::Index d_row(int x, int u) const { return static_cast<Eigen::Index>(x) * u_size + u; }
    Eigen::Index m_row(int d, int x, int u) const { return (static_cast<Eigen::Index>(d) * x_size + x) * u_size + u; }
    Eigen::Index y_row(int d, int m, int x, int u) const {
        return ((static_cast<Eigen::Index>(d) * m_size + m) * x_size + x) * u_size + u;
    }

    // Shapes, non-negativity and row sums (within 1e-12); throws ValidationError.
    void validate() const;

    // Uniform kernels of the given sizes; Y takes the values 0..y_size-1.
    static DiscretePopulation uniform(int y_size, int d_size, int m_size, int x_size, int u_size);
};

DiscretePopulation load_population(const std::string& path);
DiscretePopulation population_from_json(const std::string& text);
std::string population_to_json(const DiscretePopulation& pop);

// Observational law P(Y=y, D=d, M=m, X=x).
struct JointTable {
    Eigen::VectorXd y_values;
    int d_size = 0;
    int m_size = 0;
    int x_size = 0;
    Eigen::VectorXd prob;

    int y_size() const { return static_cast<int>(y_values.size()); }
    Eigen::Index index(int y, int d, int m, int x) const {
        return ((static_cast<Eigen::Index>(y) * d_size + d) * m_size + m) * x_size + x;
    }
    double operator()(int y, int d, int m, int x) const { return prob(index(y, d, m, x)); }

    double p_dmx(int d, int m, int x) const;
    double p_dx(int d, int x) const;
    double p_mx(int m, int x) const;
    double p_x(int x) const;
    // E[Y | D=d, M=m, X=x]; requires positive mass.
    double mean_y(int d, int m, int x) const;
};

JointTable marginalize(const DiscretePopulation& pop);

// Same population with D set to d by surgery on its kernel.
DiscretePopulation intervene_treatment(const DiscretePopulation& pop, int d);

// Contrasts of level 1 against level 0, computed from potential-outcome tables.
struct EffectReport {
    double ate = 0.0;
    std::vector<double> cde;  // per m
    std::vector<double> nde;  // per d: E[Y(1,M(d)) - Y(0,M(d))]
    std::vector<double> nie;  // per d: E[Y(d,M(1)) - Y(d,M(0))]
};

// E[Y(d, M(d'))] as a |D| x |D| matrix indexed (d, d').
Eigen::MatrixXd nested_potential_means(const DiscretePopulation& pop);
// E[Y(d, m)] as a |D| x |M| matrix.
Eigen::MatrixXd controlled_potential_means(const DiscretePopulation& pop);
EffectReport effects(const DiscretePopulation& pop);

// Deviation below 1e-9 holds, above 0.01 fails; anything in between throws
// OracleGapError.
struct OracleCheck {
    bool holds = false;
    double deviation = 0.0;
};

inline constexpr double kHoldsBelow = 1e-9;
inline constexpr double kFailsAbove = 0.01;

OracleCheck classify_deviation(double deviation, const char* condition);

// max over (y,m,x) of the spread of P(y | d,m,x) across d with positive mass.
double ti_deviation(const JointTable& joint);
// max over (y,d,x) of |P(y|d,x) - sum_m P(m|d,x) sum_d' P(y|d',m,x) P(d'|x)|.
// Throws ValidationError when a needed conditional is undefined.
double bdfd_deviation(const JointTable& joint);
OracleCheck check_ti(const JointTable& joint);
OracleCheck check_bdfd(const JointTable& joint);

// Largest double-centring residual of the |D| x |M| matrices P(y | ., ., x).
double separability_residual(const JointTable& joint);
bool check_separability(const JointTable& joint, double tol = 1e-9);

// Observational ground truth with exact nuisances.
double true_theta(const JointTable& joint, const TreatmentPartition& partition);
double true_theta_bar(const JointTable& joint);

// n iid draws. D, M and X are stored as their codes; X is one column.
Dataset sample_population(const DiscretePopulation& pop, Eigen::Index n, std::uint64_t seed);

// Exact nuisances at the rows of a sample coded as in sample_population.
NuisanceBundle true_nuisances(const JointTable& joint, const TreatmentPartition& partition, const Dataset& data);
BdFdNuisances true_bdfd_nuisances(const JointTable& joint, const Dataset& data);

// Every (y,d,m,x) cell with positive probability as one row, with that
// probability as its weight.
struct SupportSample {
    Dataset data;
    std::vector<double> weights;
};
SupportSample support_sample(const JointTable& joint);

// Random kernels; shapes follow the sizes given.
struct RandomPopulationSpec {
    int y_size = 2;
    int d_size = 2;
    int m_size = 2;
    int x_size = 1;
    int u_size = 2;
    // Y's kernel ignores d and u, so (TI) holds while U may confound D and M.
    bool ti_structure = false;
    // Y's kernel ignores u and is a mixture w A(y|d,x) + (1-w) B(y|m,x).
    bool separable = false;
    // Kernel entries are kept at least this large (positivity).
    double floor = 0.02;
};
DiscretePopulation random_population(const RandomPopulationSpec& spec, std::mt19937_64& rng);

// Binary Y and D: builds P(Y=1|d,m,x) = a0 + 1{d=1} s v with v in the null
// space of the mediator propensities, so that (BD=FD) holds exactly while
// (TI) fails. With separable_only the contrast v is restricted to
// functions of x alone, which the null-space condition forces to zero.
struct CounterexampleSearch {
    int m_size = 2;
    int x_size = 1;
    long budget = 1000000;
    bool separable_only = false;
};
struct CounterexampleResult {
    std::optional<DiscretePopulation> population;
    long trials = 0;
    double ti_deviation = 0.0;
    double bdfd_deviation = 0.0;
};
CounterexampleResult find_bdfd_not_ti(const CounterexampleSearch& search, std::uint64_t seed);

}  // namespace medtest

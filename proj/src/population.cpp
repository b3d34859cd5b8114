#include "medtest/population.hpp"

#include "medtest/error.hpp"
#include "medtest/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace medtest {

namespace {

using nlohmann::json;

void check_kernel(const Eigen::MatrixXd& k, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (k.rows() != rows || k.cols() != cols)
        throw ValidationError(std::string(name) + " must be " + std::to_string(rows) + " x " + std::to_string(cols) +
                              ", got " + std::to_string(k.rows()) + " x " + std::to_string(k.cols()));
    if (!k.allFinite() || (k.array() < 0.0).any())
        throw ValidationError(std::string(name) + " has a negative or non-finite entry");
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (std::abs(k.row(r).sum() - 1.0) > 1e-12)
            throw ValidationError(std::string(name) + " row " + std::to_string(r) + " sums to " +
                                  std::to_string(k.row(r).sum()));
    }
}

// Row of a stochastic matrix drawn as floor + (1 - k floor) * Dirichlet(1).
Eigen::RowVectorXd random_row(int size, double floor, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    Eigen::RowVectorXd row(size);
    for (int j = 0; j < size; ++j) row(j) = expo(rng);
    row /= row.sum();
    return (floor + (1.0 - size * floor) * row.array()).matrix();
}

Eigen::MatrixXd random_kernel(Eigen::Index rows, int cols, double floor, std::mt19937_64& rng) {
    Eigen::MatrixXd k(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) k.row(r) = random_row(cols, floor, rng);
    return k;
}

int draw(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        acc += row(j);
        if (u < acc) return static_cast<int>(j);
    }
    // Rounding left u above the last partial sum; take the last positive entry.
    for (Eigen::Index j = row.size() - 1; j >= 0; --j)
        if (row(j) > 0.0) return static_cast<int>(j);
    return 0;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name) {
    if (!j.is_array()) throw ParseError(std::string(name) + " must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) throw ValidationError(std::string(name) + " is empty");
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ValidationError(std::string(name) + " row " + std::to_string(r) + " has the wrong length");
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

// Codes of D, M and X at row i of a sample made by sample_population.
struct Codes {
    int d;
    int m;
    int x;
};

Codes codes_of(const JointTable& joint, const Dataset& data, Eigen::Index i) {
    const int d = data.d()(i);
    const double m = data.m()(i, 0);
    const double x = data.x()(i, 0);
    const int mc = static_cast<int>(std::lround(m));
    const int xc = static_cast<int>(std::lround(x));
    if (mc < 0 || mc >= joint.m_size || xc < 0 || xc >= joint.x_size || m != mc || x != xc)
        throw ArgumentError("sample row " + std::to_string(i) + " is not coded for this population");
    return {d, mc, xc};
}

void check_sample_coding(const JointTable& joint, const Dataset& data) {
    if (data.m().cols() != 1 || data.x().cols() != 1)
        throw ArgumentError("population samples carry one mediator and one covariate column");
    if (data.levels() != joint.d_size) throw ArgumentError("sample does not contain every treatment level");
    for (int l = 0; l < data.levels(); ++l)
        if (data.labels()[static_cast<std::size_t>(l)] != l) throw ArgumentError("treatment labels must be 0..|D|-1");
}

double require_positive(double mass, const std::string& what) {
    if (!(mass > 0.0)) throw ValidationError("common support fails: " + what + " has zero probability");
    return mass;
}

}  // namespace

void DiscretePopulation::validate() const {
    if (y_values.size() < 1 || d_size < 1 || m_size < 1 || x_size < 1 || u_size < 1)
        throw ValidationError("population supports must be non-empty");
    if (!y_values.allFinite()) throw ValidationError("Y support values must be finite");
    check_kernel(p_x, 1, x_size, "p_x");
    check_kernel(p_u, 1, u_size, "p_u");
    check_kernel(p_d, static_cast<Eigen::Index>(x_size) * u_size, d_size, "p_d");
    check_kernel(p_m, static_cast<Eigen::Index>(d_size) * x_size * u_size, m_size, "p_m");
    check_kernel(p_y, static_cast<Eigen::Index>(d_size) * m_size * x_size * u_size, y_size(), "p_y");
}

DiscretePopulation DiscretePopulation::uniform(int y_size, int d_size, int m_size, int x_size, int u_size) {
    DiscretePopulation pop;
    pop.y_values = Eigen::VectorXd::LinSpaced(y_size, 0.0, y_size - 1.0);
    pop.d_size = d_size;
    pop.m_size = m_size;
    pop.x_size = x_size;
    pop.u_size = u_size;
    pop.p_x = Eigen::RowVectorXd::Constant(x_size, 1.0 / x_size);
    pop.p_u = Eigen::RowVectorXd::Constant(u_size, 1.0 / u_size);
    pop.p_d = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(x_size) * u_size, d_size, 1.0 / d_size);
    pop.p_m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d_size) * x_size * u_size, m_size, 1.0 / m_size);
    pop.p_y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d_size) * m_size * x_size * u_size, y_size,
                                        1.0 / y_size);
    return pop;
}

DiscretePopulation population_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("population file is not valid JSON: ") + e.what());
    }
    DiscretePopulation pop;
    try {
        const auto ys = doc.at("y_values").get<std::vector<double>>();
        pop.y_values = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
        const json& sizes = doc.at("sizes");
        pop.d_size = sizes.at("d").get<int>();
        pop.m_size = sizes.at("m").get<int>();
        pop.x_size = sizes.at("x").get<int>();
        pop.u_size = sizes.value("u", 1);
        const auto px = doc.at("p_x").get<std::vector<double>>();
        pop.p_x = Eigen::Map<const Eigen::RowVectorXd>(px.data(), static_cast<Eigen::Index>(px.size()));
        if (doc.contains("p_u")) {
            const auto pu = doc.at("p_u").get<std::vector<double>>();
            pop.p_u = Eigen::Map<const Eigen::RowVectorXd>(pu.data(), static_cast<Eigen::Index>(pu.size()));
        } else {
            pop.p_u = Eigen::RowVectorXd::Ones(1);
        }
        pop.p_d = matrix_from_json(doc.at("p_d"), "p_d");
        pop.p_m = matrix_from_json(doc.at("p_m"), "p_m");
        pop.p_y = matrix_from_json(doc.at("p_y"), "p_y");
    } catch (const json::exception& e) {
        throw ParseError(std::string("population file: ") + e.what());
    }
    for (int size : {pop.d_size, pop.m_size, pop.x_size, pop.u_size, pop.y_size()})
        if (size > 4) throw ValidationError("population supports are capped at 4 values per variable");
    pop.validate();
    return pop;
}

DiscretePopulation load_population(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open population file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return population_from_json(text.str());
}

std::string population_to_json(const DiscretePopulation& pop) {
    json doc = json::object();
    doc["y_values"] = std::vector<double>(pop.y_values.data(), pop.y_values.data() + pop.y_values.size());
    doc["sizes"] = {{"d", pop.d_size}, {"m", pop.m_size}, {"x", pop.x_size}, {"u", pop.u_size}};
    doc["p_x"] = std::vector<double>(pop.p_x.data(), pop.p_x.data() + pop.p_x.size());
    doc["p_u"] = std::vector<double>(pop.p_u.data(), pop.p_u.data() + pop.p_u.size());
    doc["p_d"] = matrix_to_json(pop.p_d);
    doc["p_m"] = matrix_to_json(pop.p_m);
    doc["p_y"] = matrix_to_json(pop.p_y);
    return doc.dump(2);
}

double JointTable::p_dmx(int d, int m, int x) const {
    double total = 0.0;
    for (int y = 0; y < y_size(); ++y) total += (*this)(y, d, m, x);
    return total;
}

double JointTable::p_dx(int d, int x) const {
    double total = 0.0;
    for (int m = 0; m < m_size; ++m) total += p_dmx(d, m, x);
    return total;
}

double JointTable::p_mx(int m, int x) const {
    double total = 0.0;
    for (int d = 0; d < d_size; ++d) total += p_dmx(d, m, x);
    return total;
}

double JointTable::p_x(int x) const {
    double total = 0.0;
    for (int d = 0; d < d_size; ++d) total += p_dx(d, x);
    return total;
}

double JointTable::mean_y(int d, int m, int x) const {
    const double mass = require_positive(p_dmx(d, m, x), "(d,m,x)");
    double total = 0.0;
    for (int y = 0; y < y_size(); ++y) total += y_values(y) * (*this)(y, d, m, x);
    return total / mass;
}

JointTable marginalize(const DiscretePopulation& pop) {
    pop.validate();
    JointTable joint;
    joint.y_values = pop.y_values;
    joint.d_size = pop.d_size;
    joint.m_size = pop.m_size;
    joint.x_size = pop.x_size;
    joint.prob = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pop.y_size()) * pop.d_size * pop.m_size * pop.x_size);
    for (int x = 0; x < pop.x_size; ++x)
        for (int u = 0; u < pop.u_size; ++u)
            for (int d = 0; d < pop.d_size; ++d) {
                const double pxud = pop.p_x(x) * pop.p_u(u) * pop.p_d(pop.d_row(x, u), d);
                for (int m = 0; m < pop.m_size; ++m) {
                    const double pm = pxud * pop.p_m(pop.m_row(d, x, u), m);
                    for (int y = 0; y < pop.y_size(); ++y)
                        joint.prob(joint.index(y, d, m, x)) += pm * pop.p_y(pop.y_row(d, m, x, u), y);
                }
            }
    return joint;
}

DiscretePopulation intervene_treatment(const DiscretePopulation& pop, int d) {
    if (d < 0 || d >= pop.d_size) throw ArgumentError("treatment level out of range");
    DiscretePopulation out = pop;
    out.p_d.setZero();
    out.p_d.col(d).setOnes();
    return out;
}

Eigen::MatrixXd nested_potential_means(const DiscretePopulation& pop) {
    pop.validate();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(pop.d_size, pop.d_size);
    for (int x = 0; x < pop.x_size; ++x)
        for (int u = 0; u < pop.u_size; ++u) {
            const double w = pop.p_x(x) * pop.p_u(u);
            for (int d = 0; d < pop.d_size; ++d)
                for (int dm = 0; dm < pop.d_size; ++dm)
                    for (int m = 0; m < pop.m_size; ++m)
                        out(d, dm) += w * pop.p_m(pop.m_row(dm, x, u), m) *
                                      pop.p_y.row(pop.y_row(d, m, x, u)).dot(pop.y_values.transpose());
        }
    return out;
}

Eigen::MatrixXd controlled_potential_means(const DiscretePopulation& pop) {
    pop.validate();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(pop.d_size, pop.m_size);
    for (int x = 0; x < pop.x_size; ++x)
        for (int u = 0; u < pop.u_size; ++u) {
            const double w = pop.p_x(x) * pop.p_u(u);
            for (int d = 0; d < pop.d_size; ++d)
                for (int m = 0; m < pop.m_size; ++m)
                    out(d, m) += w * pop.p_y.row(pop.y_row(d, m, x, u)).dot(pop.y_values.transpose());
        }
    return out;
}

EffectReport effects(const DiscretePopulation& pop) {
    if (pop.d_size < 2) throw ArgumentError("effects need at least two treatment levels");
    const Eigen::MatrixXd nested = nested_potential_means(pop);
    const Eigen::MatrixXd controlled = controlled_potential_means(pop);
    EffectReport report;
    report.ate = nested(1, 1) - nested(0, 0);
    for (int m = 0; m < pop.m_size; ++m) report.cde.push_back(controlled(1, m) - controlled(0, m));
    for (int d = 0; d < 2; ++d) {
        report.nde.push_back(nested(1, d) - nested(0, d));
        report.nie.push_back(nested(d, 1) - nested(d, 0));
    }
    return report;
}

OracleCheck classify_deviation(double deviation, const char* condition) {
    if (deviation < kHoldsBelow) return {true, deviation};
    if (deviation > kFailsAbove) return {false, deviation};
    throw OracleGapError(std::string(condition) + " deviation " + std::to_string(deviation) +
                         " lies between the holds and fails thresholds");
}

double ti_deviation(const JointTable& joint) {
    double worst = 0.0;
    for (int x = 0; x < joint.x_size; ++x)
        for (int m = 0; m < joint.m_size; ++m)
            for (int y = 0; y < joint.y_size(); ++y) {
                double lo = 1.0, hi = 0.0;
                bool any = false;
                for (int d = 0; d < joint.d_size; ++d) {
                    const double mass = joint.p_dmx(d, m, x);
                    if (!(mass > 0.0)) continue;
                    const double cond = joint(y, d, m, x) / mass;
                    lo = std::min(lo, cond);
                    hi = std::max(hi, cond);
                    any = true;
                }
                if (any) worst = std::max(worst, hi - lo);
            }
    return worst;
}

double bdfd_deviation(const JointTable& joint) {
    double worst = 0.0;
    for (int x = 0; x < joint.x_size; ++x) {
        const double px = joint.p_x(x);
        if (!(px > 0.0)) continue;
        for (int d = 0; d < joint.d_size; ++d) {
            const double pdx = joint.p_dx(d, x);
            if (!(pdx > 0.0)) continue;
            for (int y = 0; y < joint.y_size(); ++y) {
                double lhs = 0.0, rhs = 0.0;
                for (int m = 0; m < joint.m_size; ++m) {
                    lhs += joint(y, d, m, x) / pdx;
                    const double pm = joint.p_dmx(d, m, x) / pdx;
                    if (!(pm > 0.0)) continue;
                    double inner = 0.0;
                    for (int dp = 0; dp < joint.d_size; ++dp) {
                        const double pdp = joint.p_dx(dp, x) / px;
                        if (!(pdp > 0.0)) continue;
                        const double mass = require_positive(joint.p_dmx(dp, m, x), "(d',m,x) for the front-door sum");
                        inner += joint(y, dp, m, x) / mass * pdp;
                    }
                    rhs += pm * inner;
                }
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

OracleCheck check_ti(const JointTable& joint) {
    return classify_deviation(ti_deviation(joint), "(TI)");
}

OracleCheck check_bdfd(const JointTable& joint) {
    return classify_deviation(bdfd_deviation(joint), "(BD=FD)");
}

double separability_residual(const JointTable& joint) {
    double worst = 0.0;
    Eigen::MatrixXd a(joint.d_size, joint.m_size);
    for (int x = 0; x < joint.x_size; ++x)
        for (int y = 0; y < joint.y_size(); ++y) {
            for (int d = 0; d < joint.d_size; ++d)
                for (int m = 0; m < joint.m_size; ++m)
                    a(d, m) = joint(y, d, m, x) / require_positive(joint.p_dmx(d, m, x), "(d,m,x)");
            const Eigen::VectorXd row_mean = a.rowwise().mean();
            const Eigen::RowVectorXd col_mean = a.colwise().mean();
            const Eigen::MatrixXd resid =
                (a.colwise() - row_mean).rowwise() - col_mean + Eigen::MatrixXd::Constant(a.rows(), a.cols(), a.mean());
            worst = std::max(worst, resid.cwiseAbs().maxCoeff());
        }
    return worst;
}

bool check_separability(const JointTable& joint, double tol) {
    return separability_residual(joint) <= tol;
}

double true_theta(const JointTable& joint, const TreatmentPartition& partition) {
    if (static_cast<int>(partition.cell_of_level.size()) != joint.d_size)
        throw ArgumentError("partition does not match the population's treatment support");
    const int cells = partition.size();
    double theta = 0.0;
    for (int x = 0; x < joint.x_size; ++x)
        for (int m = 0; m < joint.m_size; ++m) {
            const double pmx = joint.p_mx(m, x);
            if (!(pmx > 0.0)) continue;
            std::vector<double> mass(static_cast<std::size_t>(cells), 0.0), ysum(static_cast<std::size_t>(cells), 0.0);
            for (int d = 0; d < joint.d_size; ++d) {
                const auto l = static_cast<std::size_t>(partition.cell_of_level[static_cast<std::size_t>(d)]);
                mass[l] += joint.p_dmx(d, m, x);
                for (int y = 0; y < joint.y_size(); ++y) ysum[l] += joint.y_values(y) * joint(y, d, m, x);
            }
            double total_mass = 0.0, total_y = 0.0;
            for (int l = 0; l < cells; ++l) {
                total_mass += mass[static_cast<std::size_t>(l)];
                total_y += ysum[static_cast<std::size_t>(l)];
            }
            double term = 0.0;
            for (int l = partition.binary() ? 1 : 0; l < cells; ++l) {
                const auto li = static_cast<std::size_t>(l);
                const double in = ysum[li] / require_positive(mass[li], "a treatment cell given (m,x)");
                const double out =
                    (total_y - ysum[li]) / require_positive(total_mass - mass[li], "a treatment cell complement given (m,x)");
                term += (in - out) * (in - out) + (in - out);
            }
            theta += pmx * term;
        }
    return theta;
}

double true_theta_bar(const JointTable& joint) {
    double theta = 0.0;
    for (int x = 0; x < joint.x_size; ++x) {
        const double px = joint.p_x(x);
        if (!(px > 0.0)) continue;
        std::vector<double> nu(static_cast<std::size_t>(joint.m_size), 0.0);
        for (int m = 0; m < joint.m_size; ++m)
            for (int d = 0; d < joint.d_size; ++d)
                nu[static_cast<std::size_t>(m)] += joint.mean_y(d, m, x) * joint.p_dx(d, x) / px;
        double term = 0.0;
        for (int d = 0; d < joint.d_size; ++d) {
            const double pdx = require_positive(joint.p_dx(d, x), "(d,x)");
            double q = 0.0, zfd = 0.0;
            for (int m = 0; m < joint.m_size; ++m) {
                for (int y = 0; y < joint.y_size(); ++y) q += joint.y_values(y) * joint(y, d, m, x) / pdx;
                zfd += joint.p_dmx(d, m, x) / pdx * nu[static_cast<std::size_t>(m)];
            }
            const double g = q - zfd;
            term += g * g + g;
        }
        theta += px * term;
    }
    return theta;
}

Dataset sample_population(const DiscretePopulation& pop, Eigen::Index n, std::uint64_t seed) {
    pop.validate();
    if (n < 2) throw ArgumentError("sample size must be at least 2");
    std::mt19937_64 rng(seed);
    Eigen::VectorXd y(n), d(n);
    Eigen::MatrixXd m(n, 1), x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int xi = draw(pop.p_x, rng);
        const int ui = draw(pop.p_u, rng);
        const int di = draw(pop.p_d.row(pop.d_row(xi, ui)), rng);
        const int mi = draw(pop.p_m.row(pop.m_row(di, xi, ui)), rng);
        const int yi = draw(pop.p_y.row(pop.y_row(di, mi, xi, ui)), rng);
        y(i) = pop.y_values(yi);
        d(i) = di;
        m(i, 0) = mi;
        x(i, 0) = xi;
    }
    ColumnNames names;
    names.mediators = {"m"};
    names.covariates = {"x"};
    return Dataset(std::move(y), d, std::move(m), std::move(x), std::move(names));
}

NuisanceBundle true_nuisances(const JointTable& joint, const TreatmentPartition& partition, const Dataset& data) {
    check_sample_coding(joint, data);
    if (static_cast<int>(partition.cell_of_level.size()) != joint.d_size)
        throw ArgumentError("partition does not match the population's treatment support");
    const int cells = partition.size();
    NuisanceBundle b;
    b.mu_in.setZero(data.n(), cells);
    b.mu_out.setZero(data.n(), cells);
    b.p.setZero(data.n(), cells);
    b.fold_of.assign(static_cast<std::size_t>(data.n()), 0);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Codes c = codes_of(joint, data, i);
        const double pmx = joint.p_mx(c.m, c.x);
        double total_y = 0.0;
        std::vector<double> mass(static_cast<std::size_t>(cells), 0.0), ysum(static_cast<std::size_t>(cells), 0.0);
        for (int d = 0; d < joint.d_size; ++d) {
            const auto l = static_cast<std::size_t>(partition.cell_of_level[static_cast<std::size_t>(d)]);
            mass[l] += joint.p_dmx(d, c.m, c.x);
            for (int y = 0; y < joint.y_size(); ++y) ysum[l] += joint.y_values(y) * joint(y, d, c.m, c.x);
        }
        for (double v : ysum) total_y += v;
        for (int l = 0; l < cells; ++l) {
            const auto li = static_cast<std::size_t>(l);
            b.mu_in(i, l) = ysum[li] / require_positive(mass[li], "a treatment cell given (m,x)");
            b.mu_out(i, l) = (total_y - ysum[li]) / require_positive(pmx - mass[li], "a cell complement given (m,x)");
            b.p(i, l) = mass[li] / pmx;
        }
    }
    return b;
}

BdFdNuisances true_bdfd_nuisances(const JointTable& joint, const Dataset& data) {
    check_sample_coding(joint, data);
    if (encode_mediators(data.m()).size() != joint.m_size)
        throw ArgumentError("sample does not contain every mediator level");
    const Eigen::Index n = data.n();
    BdFdNuisances b;
    b.q.setZero(n, joint.d_size);
    b.fd.setZero(n, joint.d_size);
    b.mu.assign(static_cast<std::size_t>(joint.d_size), Eigen::MatrixXd::Zero(n, joint.m_size));
    b.fm.assign(static_cast<std::size_t>(joint.d_size), Eigen::MatrixXd::Zero(n, joint.m_size));
    b.fold_of.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Codes c = codes_of(joint, data, i);
        const double px = joint.p_x(c.x);
        for (int d = 0; d < joint.d_size; ++d) {
            const double pdx = require_positive(joint.p_dx(d, c.x), "(d,x)");
            b.fd(i, d) = pdx / px;
            double q = 0.0;
            for (int m = 0; m < joint.m_size; ++m) {
                b.mu[static_cast<std::size_t>(d)](i, m) = joint.mean_y(d, m, c.x);
                b.fm[static_cast<std::size_t>(d)](i, m) = joint.p_dmx(d, m, c.x) / pdx;
                for (int y = 0; y < joint.y_size(); ++y) q += joint.y_values(y) * joint(y, d, m, c.x) / pdx;
            }
            b.q(i, d) = q;
        }
    }
    return b;
}

SupportSample support_sample(const JointTable& joint) {
    std::vector<double> ys, ds, ms, xs, ws;
    for (int y = 0; y < joint.y_size(); ++y)
        for (int d = 0; d < joint.d_size; ++d)
            for (int m = 0; m < joint.m_size; ++m)
                for (int x = 0; x < joint.x_size; ++x) {
                    const double p = joint(y, d, m, x);
                    if (!(p > 0.0)) continue;
                    ys.push_back(joint.y_values(y));
                    ds.push_back(d);
                    ms.push_back(m);
                    xs.push_back(x);
                    ws.push_back(p);
                }
    const auto n = static_cast<Eigen::Index>(ys.size());
    ColumnNames names;
    names.mediators = {"m"};
    names.covariates = {"x"};
    Dataset data(Eigen::Map<Eigen::VectorXd>(ys.data(), n), Eigen::Map<Eigen::VectorXd>(ds.data(), n),
                 Eigen::Map<Eigen::MatrixXd>(ms.data(), n, 1), Eigen::Map<Eigen::MatrixXd>(xs.data(), n, 1),
                 std::move(names));
    return {std::move(data), std::move(ws)};
}

DiscretePopulation random_population(const RandomPopulationSpec& spec, std::mt19937_64& rng) {
    for (int size : {spec.y_size, spec.d_size, spec.m_size, spec.x_size, spec.u_size})
        if (size < 1 || size > 4) throw ArgumentError("population supports must have 1 to 4 values");
    if (spec.ti_structure && spec.separable) throw ArgumentError("choose at most one structural restriction");
    DiscretePopulation pop =
        DiscretePopulation::uniform(spec.y_size, spec.d_size, spec.m_size, spec.x_size, spec.u_size);
    const double f = spec.floor;
    pop.p_x = random_row(spec.x_size, f, rng);
    pop.p_u = random_row(spec.u_size, f, rng);
    pop.p_d = random_kernel(pop.p_d.rows(), spec.d_size, f, rng);
    pop.p_m = random_kernel(pop.p_m.rows(), spec.m_size, f, rng);
    if (spec.ti_structure) {
        const Eigen::MatrixXd base = random_kernel(static_cast<Eigen::Index>(spec.m_size) * spec.x_size, spec.y_size, f, rng);
        for (int d = 0; d < spec.d_size; ++d)
            for (int m = 0; m < spec.m_size; ++m)
                for (int x = 0; x < spec.x_size; ++x)
                    for (int u = 0; u < spec.u_size; ++u) pop.p_y.row(pop.y_row(d, m, x, u)) = base.row(m * spec.x_size + x);
    } else if (spec.separable) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int x = 0; x < spec.x_size; ++x) {
            const double w = unif(rng);
            const Eigen::MatrixXd a = random_kernel(spec.d_size, spec.y_size, f, rng);
            const Eigen::MatrixXd b = random_kernel(spec.m_size, spec.y_size, f, rng);
            for (int d = 0; d < spec.d_size; ++d)
                for (int m = 0; m < spec.m_size; ++m)
                    for (int u = 0; u < spec.u_size; ++u)
                        pop.p_y.row(pop.y_row(d, m, x, u)) = w * a.row(d) + (1.0 - w) * b.row(m);
        }
    } else {
        pop.p_y = random_kernel(pop.p_y.rows(), spec.y_size, f, rng);
    }
    return pop;
}

CounterexampleResult find_bdfd_not_ti(const CounterexampleSearch& search, std::uint64_t seed) {
    if (search.m_size < 2 || search.m_size > 4 || search.x_size < 1 || search.x_size > 4)
        throw ArgumentError("counterexample search needs 2-4 mediator values and 1-4 covariate values");
    if (search.budget < 1) throw ArgumentError("search budget must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int mm = search.m_size;
    CounterexampleResult result;

    for (long trial = 1; trial <= search.budget; ++trial) {
        result.trials = trial;
        DiscretePopulation pop = DiscretePopulation::uniform(2, 2, mm, search.x_size, 1);
        pop.p_x = random_row(search.x_size, 0.05, rng);
        pop.p_d = random_kernel(search.x_size, 2, 0.1, rng);
        bool usable = true;
        for (int x = 0; x < search.x_size && usable; ++x) {
            Eigen::MatrixXd g(2, mm);
            g.row(0) = random_row(mm, 0.05, rng);
            // With two mediator values the null space is non-trivial only when
            // the mediator law does not move with d.
            g.row(1) = (mm == 2 && unif(rng) < 0.5) ? Eigen::RowVectorXd(g.row(0)) : random_row(mm, 0.05, rng);
            pop.p_m.row(pop.m_row(0, x, 0)) = g.row(0);
            pop.p_m.row(pop.m_row(1, x, 0)) = g.row(1);

            Eigen::MatrixXd constraints = g;
            if (search.separable_only) {
                // Separable contrasts a(1,x) - a(0,x) do not depend on m.
                constraints.conservativeResize(2 + mm - 1, Eigen::NoChange);
                for (int j = 1; j < mm; ++j) {
                    constraints.row(1 + j).setZero();
                    constraints(1 + j, 0) = 1.0;
                    constraints(1 + j, j) = -1.0;
                }
            }
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(constraints);
            const Eigen::MatrixXd kernel = lu.kernel();
            Eigen::VectorXd v = Eigen::VectorXd::Zero(mm);
            if (lu.rank() < mm) {
                for (Eigen::Index c = 0; c < kernel.cols(); ++c) v += (2.0 * unif(rng) - 1.0) * kernel.col(c);
            }
            Eigen::VectorXd a0(mm);
            for (int m = 0; m < mm; ++m) a0(m) = 0.1 + 0.8 * unif(rng);
            // Largest s keeping a0 + s v inside [0.05, 0.95].
            double s_max = v.cwiseAbs().maxCoeff() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            for (int m = 0; m < mm; ++m) {
                if (v(m) > 0.0) s_max = std::min(s_max, (0.95 - a0(m)) / v(m));
                if (v(m) < 0.0) s_max = std::min(s_max, (0.05 - a0(m)) / v(m));
            }
            const double s = s_max * (0.5 + 0.5 * unif(rng));
            for (int m = 0; m < mm; ++m) {
                const double p0 = a0(m);
                const double p1 = a0(m) + s * v(m);
                pop.p_y.row(pop.y_row(0, m, x, 0)) << 1.0 - p0, p0;
                pop.p_y.row(pop.y_row(1, m, x, 0)) << 1.0 - p1, p1;
            }
            usable = std::isfinite(s);
        }
        if (!usable) continue;
        const JointTable joint = marginalize(pop);
        const double bdfd = bdfd_deviation(joint);
        const double ti = ti_deviation(joint);
        if (bdfd < kHoldsBelow && ti > kFailsAbove) {
            result.population = std::move(pop);
            result.ti_deviation = ti;
            result.bdfd_deviation = bdfd;
            return result;
        }
    }
    return result;
}

}  // namespace medtest

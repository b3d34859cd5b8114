#include "medtest/data.hpp"

#include "medtest/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace medtest {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, const char* what) {
    if (!values.allFinite()) throw ValidationError(std::string("non-finite value in ") + what);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    out.push_back(trim(cell));
    return out;
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, const Eigen::VectorXd& treatment, Eigen::MatrixXd m,
                 Eigen::MatrixXd x, ColumnNames names)
    : y_(std::move(y)), m_(std::move(m)), x_(std::move(x)), names_(std::move(names)) {
    const Eigen::Index n = y_.size();
    if (n < 2) throw ValidationError("dataset needs at least 2 observations");
    if (treatment.size() != n || m_.rows() != n || x_.rows() != n)
        throw ValidationError("outcome, treatment, mediator and covariate columns differ in length");
    require_finite(y_, "outcome");
    require_finite(treatment, "treatment");
    require_finite(m_, "mediators");
    require_finite(x_, "covariates");

    labels_.assign(treatment.data(), treatment.data() + n);
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    if (labels_.size() < 2) throw ValidationError("treatment takes fewer than 2 distinct values");

    d_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto it = std::lower_bound(labels_.begin(), labels_.end(), treatment(i));
        d_(i) = static_cast<int>(it - labels_.begin());
    }

    if (names_.mediators.size() != static_cast<std::size_t>(m_.cols())) {
        names_.mediators.clear();
        for (Eigen::Index j = 0; j < m_.cols(); ++j) names_.mediators.push_back("m" + std::to_string(j + 1));
    }
    if (names_.covariates.size() != static_cast<std::size_t>(x_.cols())) {
        names_.covariates.clear();
        for (Eigen::Index j = 0; j < x_.cols(); ++j) names_.covariates.push_back("x" + std::to_string(j + 1));
    }
}

bool Dataset::is_binary() const {
    return labels_.size() == 2;
}

Eigen::MatrixXd Dataset::mediators_and_covariates() const {
    Eigen::MatrixXd out(n(), m_.cols() + x_.cols());
    out << m_, x_;
    return out;
}

Dataset Dataset::rows(std::span<const Eigen::Index> index) const {
    const auto k = static_cast<Eigen::Index>(index.size());
    Eigen::VectorXd y(k), t(k);
    Eigen::MatrixXd m(k, m_.cols()), x(k, x_.cols());
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index i = index[static_cast<std::size_t>(r)];
        y(r) = y_(i);
        t(r) = labels_[static_cast<std::size_t>(d_(i))];
        m.row(r) = m_.row(i);
        x.row(r) = x_.row(i);
    }
    return Dataset(std::move(y), t, std::move(m), std::move(x), names_);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_csv_line(line);

    std::map<std::string, std::size_t> column;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (!column.emplace(header[j], j).second) throw SchemaError("duplicate column '" + header[j] + "'");
    }
    auto locate = [&](const std::string& name, const char* role) {
        const auto it = column.find(name);
        if (it == column.end())
            throw SchemaError(std::string(role) + " column '" + name + "' not found in " + path);
        return it->second;
    };
    if (schema.outcome.empty()) throw SchemaError("no outcome column given");
    if (schema.treatment.empty()) throw SchemaError("no treatment column given");

    const std::size_t y_col = locate(schema.outcome, "outcome");
    const std::size_t d_col = locate(schema.treatment, "treatment");
    std::vector<std::size_t> m_cols, x_cols;
    for (const auto& name : schema.mediators) m_cols.push_back(locate(name, "mediator"));
    std::vector<std::string> covariates = schema.covariates;
    if (schema.covariates_all_remaining) {
        covariates.clear();
        for (const auto& name : header) {
            const bool used = name == schema.outcome || name == schema.treatment ||
                              std::find(schema.mediators.begin(), schema.mediators.end(), name) !=
                                  schema.mediators.end();
            if (!used) covariates.push_back(name);
        }
    }
    for (const auto& name : covariates) x_cols.push_back(locate(name, "covariate"));

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        std::vector<double> row(cells.size(), 0.0);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string& cell = cells[j];
            if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") {
                throw ValidationError(path + ": missing value at row " + std::to_string(line_no) + ", column '" +
                                      header[j] + "'");
            }
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                // Unused columns may hold text.
                const bool needed = j == y_col || j == d_col ||
                                    std::find(m_cols.begin(), m_cols.end(), j) != m_cols.end() ||
                                    std::find(x_cols.begin(), x_cols.end(), j) != x_cols.end();
                if (needed)
                    throw ParseError(path + ": non-numeric value '" + cell + "' at row " + std::to_string(line_no) +
                                     ", column '" + header[j] + "'");
            }
            row[j] = value;
        }
        rows.push_back(std::move(row));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd y(n), d(n);
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(m_cols.size()));
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(x_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        y(i) = row[y_col];
        d(i) = row[d_col];
        for (std::size_t j = 0; j < m_cols.size(); ++j) m(i, static_cast<Eigen::Index>(j)) = row[m_cols[j]];
        for (std::size_t j = 0; j < x_cols.size(); ++j) x(i, static_cast<Eigen::Index>(j)) = row[x_cols[j]];
    }
    ColumnNames names{schema.outcome, schema.treatment, schema.mediators, covariates};
    return Dataset(std::move(y), d, std::move(m), std::move(x), std::move(names));
}

FoldPlan::FoldPlan(Eigen::Index n, int folds, std::uint64_t seed) : folds_(folds), seed_(seed) {
    if (folds < 2) throw ArgumentError("fold count must be at least 2");
    if (static_cast<Eigen::Index>(folds) > n) throw ArgumentError("fold count exceeds the number of observations");
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the result does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    assignment_.assign(order.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        assignment_[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
}

FoldPlan FoldPlan::from_assignment(std::vector<int> assignment, int folds, std::uint64_t seed) {
    for (int a : assignment)
        if (a < 0 || a >= folds) throw ArgumentError("fold index out of range");
    FoldPlan plan;
    plan.assignment_ = std::move(assignment);
    plan.folds_ = folds;
    plan.seed_ = seed;
    return plan;
}

std::vector<Eigen::Index> FoldPlan::test_rows(int k) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignment_.size(); ++i)
        if (assignment_[i] == k) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

std::vector<Eigen::Index> FoldPlan::train_rows(int k) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignment_.size(); ++i)
        if (assignment_[i] != k) out.push_back(static_cast<Eigen::Index>(i));
    return out;
}

FoldPlan make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
    return FoldPlan(n, folds, seed);
}

void TrimRule::validate() const {
    if (!(lower > 0.0 && lower < 0.5)) throw ArgumentError("trim lower bound must lie in (0, 0.5)");
    if (!(upper > 0.5 && upper < 1.0)) throw ArgumentError("trim upper bound must lie in (0.5, 1)");
}

TrimResult apply_trim(std::span<const double> p_hat, const TrimRule& rule) {
    TrimResult out;
    for (std::size_t i = 0; i < p_hat.size(); ++i) {
        if (p_hat[i] >= rule.lower && p_hat[i] <= rule.upper) out.kept.push_back(static_cast<Eigen::Index>(i));
    }
    out.n_kept = static_cast<Eigen::Index>(out.kept.size());
    out.n_discarded = static_cast<Eigen::Index>(p_hat.size()) - out.n_kept;
    return out;
}

TrimResult apply_trim(const Eigen::MatrixXd& p_hat, const TrimRule& rule) {
    TrimResult out;
    for (Eigen::Index i = 0; i < p_hat.rows(); ++i) {
        const bool keep = (p_hat.row(i).array() >= rule.lower).all() && (p_hat.row(i).array() <= rule.upper).all();
        if (keep) out.kept.push_back(i);
    }
    out.n_kept = static_cast<Eigen::Index>(out.kept.size());
    out.n_discarded = p_hat.rows() - out.n_kept;
    return out;
}

}  // namespace medtest

#include "medtest/stats.hpp"

#include "medtest/error.hpp"

#include <algorithm>
#include <numeric>

namespace medtest {

double median(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw ArgumentError("quantile of an empty set");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("quantile probability outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

MeanSd mean_sd(std::span<const double> values) {
    MeanSd out;
    if (values.empty()) return out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

Eigen::VectorXd polyfit(std::span<const double> x, std::span<const double> y, int degree) {
    if (x.size() != y.size() || static_cast<int>(x.size()) <= degree)
        throw ArgumentError("polyfit needs more points than the degree");
    Eigen::MatrixXd design(x.size(), degree + 1);
    Eigen::VectorXd rhs(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double power = 1.0;
        for (int k = 0; k <= degree; ++k) {
            design(i, k) = power;
            power *= x[i];
        }
        rhs(i) = y[i];
    }
    return design.colPivHouseholderQr().solve(rhs);
}

}  // namespace medtest

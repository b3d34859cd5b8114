#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace medtest {

template <typename Scalar>
Scalar normal_cdf(Scalar z) {
    return Scalar(0.5) * std::erfc(-z / std::sqrt(Scalar(2)));
}

// Two-sided standard-normal tail probability of z.
template <typename Scalar>
Scalar two_sided_p(Scalar z) {
    return std::erfc(std::abs(z) / std::sqrt(Scalar(2)));
}

// Upper tail, for the one-sided alternative theta > 0.
template <typename Scalar>
Scalar upper_p(Scalar z) {
    return Scalar(0.5) * std::erfc(z / std::sqrt(Scalar(2)));
}

template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return Scalar(0);
}

// splitmix64 finaliser; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

double median(std::vector<double> values);

// Type-7 (linear interpolation) empirical quantile of unsorted values.
double quantile(std::vector<double> values, double prob);

// Sample mean and (n-1)-denominator standard deviation.
struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};
MeanSd mean_sd(std::span<const double> values);

// Least-squares coefficients of a polynomial of the given degree in x,
// lowest order first.
Eigen::VectorXd polyfit(std::span<const double> x, std::span<const double> y, int degree);

}  // namespace medtest

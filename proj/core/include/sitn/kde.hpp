#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sitn {

/// One-dimensional Gaussian kernel density estimate.
struct KdeModel {
    std::vector<double> centers;
    double bandwidth = 0.0;
};

/// Fits a Gaussian KDE with Scott's rule bandwidth b = sd * n^(-1/5) (population
/// sd). When the sample exceeds `max_centers` a seeded uniform subsample of that
/// size is kept. Throws errc::insufficient_data for n < 2, errc::invalid_input
/// for non-finite values, and errc::degenerate_kde when the sample variance is
/// zero (no usable bandwidth).
KdeModel fit_kde(std::span<const double> values, std::uint64_t seed,
                 std::size_t max_centers = 10000);

/// Log density of the KDE at x, evaluated in log space (log-sum-exp), so deep
/// tails return large negative values instead of -inf until the quadratic
/// exponent itself overflows.
double kde_log_density(const KdeModel& model, double x);

}  // namespace sitn

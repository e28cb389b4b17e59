#include "sitn/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sitn/errors.hpp"
#include "sitn/rng.hpp"

namespace sitn {

KdeModel fit_kde(std::span<const double> values, std::uint64_t seed,
                 std::size_t max_centers) {
    const std::size_t n = values.size();
    require(n >= 2, errc::insufficient_data,
            "kde: need at least 2 samples, got " + std::to_string(n));
    require(max_centers >= 1, errc::configuration,
            "kde: max_centers must be positive");
    double mean = 0.0;
    for (double v : values) {
        require(std::isfinite(v), errc::invalid_input,
                "kde: non-finite sample value");
        mean += v;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    require(sd > 0.0, errc::degenerate_kde,
            "kde: zero-variance sample has no usable bandwidth");

    KdeModel model;
    // Scott's rule from the full sample, even when the centers are subsampled:
    // the bandwidth describes the data, not the storage budget.
    model.bandwidth = sd * std::pow(static_cast<double>(n), -0.2);
    if (n <= max_centers) {
        model.centers.assign(values.begin(), values.end());
    } else {
        // Seeded partial Fisher-Yates: the first max_centers entries of a
        // uniform random permutation of the indices.
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        Rng rng(seed);
        for (std::size_t i = 0; i < max_centers; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(
                        rng.below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[i], idx[j]);
        }
        model.centers.resize(max_centers);
        for (std::size_t i = 0; i < max_centers; ++i) {
            model.centers[i] = values[idx[i]];
        }
    }
    return model;
}

double kde_log_density(const KdeModel& model, double x) {
    require(!model.centers.empty() && model.bandwidth > 0.0, errc::configuration,
            "kde: model is not fitted");
    require(!std::isnan(x), errc::invalid_input, "kde: NaN query point");
    const double n = static_cast<double>(model.centers.size());
    const double b = model.bandwidth;
    // log-sum-exp over the quadratic exponents.
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> ex(model.centers.size());
    for (std::size_t i = 0; i < model.centers.size(); ++i) {
        const double d = (x - model.centers[i]) / b;
        ex[i] = -0.5 * d * d;
        mx = std::max(mx, ex[i]);
    }
    if (!std::isfinite(mx)) {
        // Every kernel underflowed (x at +-infinity): zero density.
        return -std::numeric_limits<double>::infinity();
    }
    double sum = 0.0;
    for (double e : ex) sum += std::exp(e - mx);
    return mx + std::log(sum) -
           std::log(n * b * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace sitn

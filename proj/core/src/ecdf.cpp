#include "sitn/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sitn/errors.hpp"

namespace sitn {

Ecdf Ecdf::fit(std::vector<double> values) {
    require(!values.empty(), errc::insufficient_data,
            "ecdf: empty sample");
    for (double v : values) {
        require(std::isfinite(v), errc::invalid_input,
                "ecdf: non-finite sample value");
    }
    std::sort(values.begin(), values.end());
    Ecdf e;
    e.sorted_ = std::move(values);
    return e;
}

Ecdf Ecdf::from_sorted(std::vector<double> sorted_values) {
    require(!sorted_values.empty(), errc::corrupt_data,
            "ecdf: empty stored sample");
    for (double v : sorted_values) {
        require(std::isfinite(v), errc::corrupt_data,
                "ecdf: non-finite stored sample value");
    }
    require(std::is_sorted(sorted_values.begin(), sorted_values.end()),
            errc::corrupt_data, "ecdf: stored sample is not sorted");
    Ecdf e;
    e.sorted_ = std::move(sorted_values);
    return e;
}

double Ecdf::operator()(double x) const noexcept {
    if (sorted_.empty() || std::isnan(x)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto ub = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(ub - sorted_.begin()) /
           static_cast<double>(sorted_.size());
}

double Ecdf::quantile(double p) const {
    require(!sorted_.empty(), errc::insufficient_data,
            "ecdf: quantile of an empty sample");
    require(!std::isnan(p), errc::invalid_input, "ecdf: quantile of NaN");
    p = std::clamp(p, 0.0, 1.0);
    const double n = static_cast<double>(sorted_.size());
    // Smallest 1-based order-statistic index k with k/n >= p.
    auto k = static_cast<std::size_t>(std::ceil(p * n));
    if (k < 1) k = 1;
    if (k > sorted_.size()) k = sorted_.size();
    return sorted_[k - 1];
}

}  // namespace sitn

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sitn {

/// Empirical CDF over a finite sample, F(x) = #{v <= x} / n (right-continuous,
/// ties allowed). The fitted sample is stored sorted ascending.
class Ecdf {
public:
    Ecdf() = default;

    /// Fits an ECDF. Throws errc::insufficient_data on an empty sample and
    /// errc::invalid_input on non-finite values.
    static Ecdf fit(std::vector<double> values);

    /// Reconstructs an ECDF from an already-sorted sample (used by loaders).
    /// Throws errc::corrupt_data if the values are not sorted ascending.
    static Ecdf from_sorted(std::vector<double> sorted_values);

    /// F(x): fraction of fitted values <= x. Returns 0 below the minimum and
    /// 1 at or above the maximum. +infinity maps to 1, -infinity to 0.
    double operator()(double x) const noexcept;

    /// Empirical quantile: the smallest order statistic v with F(v) >= p.
    /// p is clamped to [0, 1]; p = 0 returns the minimum.
    double quantile(double p) const;

    std::size_t size() const noexcept { return sorted_.size(); }
    bool empty() const noexcept { return sorted_.empty(); }
    std::span<const double> sorted() const noexcept { return sorted_; }

private:
    std::vector<double> sorted_;
};

}  // namespace sitn

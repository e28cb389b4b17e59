#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sitn {

/// Dense row-major collection of equal-length vectors (latents or data).
struct LatentMatrix {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> data;  // count * dim, row-major

    LatentMatrix() = default;
    LatentMatrix(std::size_t count_, std::size_t dim_)
        : count(count_), dim(dim_), data(count_ * dim_, 0.0) {}

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * dim, dim};
    }
};

/// Rows of named scalar statistics, one row per sample. `names` fixes the
/// column order.
struct StatTable {
    std::vector<std::string> names;
    std::vector<double> values;  // rows() * names.size(), row-major

    std::size_t cols() const noexcept { return names.size(); }
    std::size_t rows() const noexcept {
        return names.empty() ? 0 : values.size() / names.size();
    }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * names.size(), names.size()};
    }
};

}  // namespace sitn

#include "sitn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "sitn/errors.hpp"
#include "sitn/gof.hpp"
#include "sitn/rng.hpp"

namespace sitn {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double split_fraction, std::uint64_t seed) {
    require(std::isfinite(split_fraction) && split_fraction > 0.0 &&
                split_fraction < 1.0,
            errc::configuration, "split fraction must lie in (0, 1)");
    require(n >= 2, errc::insufficient_data,
            "split: need at least 2 rows, got " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    shuffle_indices(idx, rng);
    auto n1 = static_cast<std::size_t>(
        std::llround(split_fraction * static_cast<double>(n)));
    n1 = std::clamp<std::size_t>(n1, 1, n - 1);
    std::vector<std::size_t> first(idx.begin(), idx.begin() + n1);
    std::vector<std::size_t> second(idx.begin() + n1, idx.end());
    return {std::move(first), std::move(second)};
}

CalibrationModel CalibrationModel::fit(const StatTable& calib, double alpha,
                                       double split_fraction,
                                       std::uint64_t seed) {
    require(!calib.names.empty(), errc::invalid_input,
            "calibration: table has no statistic columns");
    require(calib.values.size() == calib.rows() * calib.cols(),
            errc::invalid_input, "calibration: ragged statistic table");
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0,
            errc::configuration, "alpha must lie in (0, 1]");
    const std::size_t n = calib.rows();
    for (double v : calib.values) {
        require(std::isfinite(v), errc::invalid_input,
                "calibration: non-finite statistic value");
    }

    auto [c1, c2] = split_indices(n, split_fraction, seed);
    require(c2.size() >= 10, errc::insufficient_data,
            "calibration: outer half has " + std::to_string(c2.size()) +
                " rows, need at least 10");

    CalibrationModel model;
    model.names_ = calib.names;
    model.alpha_ = alpha;
    model.split_fraction_ = split_fraction;
    model.seed_ = seed;

    const std::size_t k = calib.cols();
    model.inner_.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> col;
        col.reserve(c1.size());
        for (std::size_t i : c1) col.push_back(calib.row(i)[j]);
        model.inner_.push_back(Ecdf::fit(std::move(col)));
    }

    std::vector<double> outer_scores;
    outer_scores.reserve(c2.size());
    for (std::size_t i : c2) {
        outer_scores.push_back(model.combine(calib.row(i)).m_hat);
    }
    model.outer_ = Ecdf::fit(std::move(outer_scores));
    return model;
}

CalibrationModel CalibrationModel::from_parts(std::vector<std::string> names,
                                              std::vector<Ecdf> inner,
                                              Ecdf outer, double alpha,
                                              double split_fraction,
                                              std::uint64_t seed) {
    require(!names.empty(), errc::corrupt_data,
            "calibration: stored model has no statistics");
    require(names.size() == inner.size(), errc::corrupt_data,
            "calibration: stored model arity mismatch");
    for (const Ecdf& e : inner) {
        require(!e.empty(), errc::corrupt_data,
                "calibration: stored model has an empty transform");
    }
    require(!outer.empty(), errc::corrupt_data,
            "calibration: stored model has an empty score distribution");
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0,
            errc::corrupt_data, "calibration: stored alpha out of range");
    CalibrationModel model;
    model.names_ = std::move(names);
    model.inner_ = std::move(inner);
    model.outer_ = std::move(outer);
    model.alpha_ = alpha;
    model.split_fraction_ = split_fraction;
    model.seed_ = seed;
    return model;
}

CombinedScore CalibrationModel::combine(
    std::span<const double> stat_values) const {
    require(!names_.empty(), errc::configuration,
            "calibration: model is not fitted");
    require(stat_values.size() == names_.size(), errc::configuration,
            "calibration: expected " + std::to_string(names_.size()) +
                " statistics, got " + std::to_string(stat_values.size()));
    CombinedScore out;
    out.stat_values.assign(stat_values.begin(), stat_values.end());
    out.quantiles.resize(names_.size());
    out.m_hat = 0.0;
    for (std::size_t j = 0; j < names_.size(); ++j) {
        require(!std::isnan(stat_values[j]), errc::invalid_input,
                "calibration: NaN statistic value");
        out.quantiles[j] = inner_[j](stat_values[j]);
        out.m_hat = std::max(out.m_hat, out.quantiles[j]);
    }
    return out;
}

bool CalibrationModel::classify(double m_hat, double alpha_override) const {
    double a = alpha_;
    if (alpha_override >= 0.0) {
        require(alpha_override > 0.0 && alpha_override <= 1.0,
                errc::configuration, "alpha must lie in (0, 1]");
        a = alpha_override;
    }
    return outer_(m_hat) >= 1.0 - a;
}

double CalibrationModel::tippett_quantile(double m_hat) const {
    require(!names_.empty(), errc::configuration,
            "calibration: model is not fitted");
    const double m = std::clamp(m_hat, 0.0, 1.0);
    return std::pow(m, static_cast<double>(names_.size()));
}

KdeAggregator KdeAggregator::fit(const StatTable& c1, std::uint64_t seed) {
    require(!c1.names.empty(), errc::invalid_input,
            "kde aggregator: table has no statistic columns");
    require(c1.rows() >= 2, errc::insufficient_data,
            "kde aggregator: need at least 2 rows");
    KdeAggregator agg;
    agg.names_ = c1.names;
    agg.kdes_.reserve(c1.cols());
    for (std::size_t j = 0; j < c1.cols(); ++j) {
        std::vector<double> col;
        col.reserve(c1.rows());
        for (std::size_t i = 0; i < c1.rows(); ++i) col.push_back(c1.row(i)[j]);
        agg.kdes_.push_back(fit_kde(col, derive_seed(seed, j)));
    }
    return agg;
}

double KdeAggregator::score(std::span<const double> stat_values) const {
    require(!kdes_.empty(), errc::configuration,
            "kde aggregator: model is not fitted");
    require(stat_values.size() == kdes_.size(), errc::configuration,
            "kde aggregator: expected " + std::to_string(kdes_.size()) +
                " statistics, got " + std::to_string(stat_values.size()));
    double total = 0.0;
    for (std::size_t j = 0; j < kdes_.size(); ++j) {
        total += kde_log_density(kdes_[j], stat_values[j]);
    }
    return -total;
}

StatTable compute_statistics(const LatentMatrix& latents,
                             std::span<const std::string> names,
                             bool parallel) {
    require(!names.empty(), errc::configuration,
            "statistics: no statistic names given");
    require(latents.count >= 1, errc::invalid_input,
            "statistics: empty latent matrix");
    require(latents.data.size() == latents.count * latents.dim,
            errc::invalid_input, "statistics: ragged latent matrix");
    std::vector<gof::StatisticFn> fns;
    fns.reserve(names.size());
    for (const std::string& name : names) {
        fns.push_back(gof::statistic_by_name(name));
    }

    StatTable table;
    table.names.assign(names.begin(), names.end());
    table.values.resize(latents.count * names.size());

    auto score_row = [&](std::size_t i) {
        const std::span<const double> row = latents.row(i);
        for (std::size_t j = 0; j < fns.size(); ++j) {
            double v;
            try {
                v = fns[j](row);
            } catch (const Error& e) {
                // A row whose spectrum carries no usable mass is maximally
                // anomalous: +infinity sits at quantile 1 under any transform.
                if (e.code() != errc::degenerate_spectrum) throw;
                v = std::numeric_limits<double>::infinity();
            }
            table.values[i * fns.size() + j] = v;
        }
    };
    detail::parallel_for(latents.count, score_row,
                         parallel ? 0 : 1);
    return table;
}

}  // namespace sitn

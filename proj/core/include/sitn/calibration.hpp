#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sitn/ecdf.hpp"
#include "sitn/kde.hpp"
#include "sitn/types.hpp"

namespace sitn {

/// Deterministic disjoint split of row indices [0, n): a seeded shuffle cut at
/// round(split_fraction * n). First part feeds the per-statistic transforms,
/// second part the combined-score distribution. Exposed so ablations can fit
/// on exactly the same first half.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double split_fraction, std::uint64_t seed);

/// Per-sample result of the quantile-combination scoring rule.
struct CombinedScore {
    std::vector<double> stat_values;  // raw statistics, model column order
    std::vector<double> quantiles;    // inner-ECDF quantile per statistic
    double m_hat = 0.0;               // max of the quantiles (combined score)
};

/// Split-calibrated combination of scalar test statistics.
///
/// Fitting splits the calibration rows into two disjoint halves by a seeded
/// shuffle: C1 fits one ECDF per statistic (the quantile transforms), C2 fits
/// the outer ECDF of the combined score m_hat = max_k F1_k(s_k) on held-out
/// data. A fresh sample is flagged out-of-distribution when
/// F_outer(m_hat) >= 1 - alpha; because both transforms are estimated on
/// calibration data this holds the false positive rate near alpha without any
/// distributional assumption on the statistics.
class CalibrationModel {
public:
    CalibrationModel() = default;

    /// Fits the split calibration. Requirements:
    ///  - `calib` has at least one named column, all values finite;
    ///  - alpha in (0, 1] (1.0 is the degenerate flag-everything threshold);
    ///  - split_fraction in (0, 1);
    ///  - both halves non-empty and the outer half at least 10 rows,
    ///    otherwise errc::insufficient_data.
    /// Deterministic given (calib, alpha, split_fraction, seed).
    static CalibrationModel fit(const StatTable& calib, double alpha,
                                double split_fraction, std::uint64_t seed);

    /// Builds a model directly from its parts (used by the loader).
    static CalibrationModel from_parts(std::vector<std::string> names,
                                       std::vector<Ecdf> inner, Ecdf outer,
                                       double alpha, double split_fraction,
                                       std::uint64_t seed);

    /// Quantile-transforms one row of raw statistics (model column order) and
    /// combines them. Throws errc::configuration on arity mismatch.
    CombinedScore combine(std::span<const double> stat_values) const;

    /// Outer-ECDF quantile of a combined score.
    double outer_quantile(double m_hat) const { return outer_(m_hat); }

    /// Classification rule: out-of-distribution iff
    /// F_outer(m_hat) >= 1 - alpha (inclusive). `alpha_override` < 0 means
    /// use the fitted alpha.
    bool classify(double m_hat, double alpha_override = -1.0) const;

    /// Independence-assuming alternative to the outer ECDF: the CDF of the max
    /// of k independent uniforms, m_hat^k. Too conservative when the
    /// statistics are dependent.
    double tippett_quantile(double m_hat) const;

    /// Decision threshold gamma = smallest outer-sample value with
    /// F_outer >= 1 - alpha.
    double gamma() const { return outer_.quantile(1.0 - alpha_); }

    double alpha() const noexcept { return alpha_; }
    double split_fraction() const noexcept { return split_fraction_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t k() const noexcept { return names_.size(); }
    const std::vector<std::string>& stat_names() const noexcept { return names_; }
    const Ecdf& inner(std::size_t i) const { return inner_.at(i); }
    const Ecdf& outer() const noexcept { return outer_; }

private:
    std::vector<std::string> names_;
    std::vector<Ecdf> inner_;
    Ecdf outer_;
    double alpha_ = 0.0;
    double split_fraction_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Density-aggregation ablation of the combination rule: one Gaussian KDE per
/// statistic fitted on the same calibration half that feeds the inner ECDFs,
/// scored as -sum_k log f_k(s_k) (higher = more anomalous). Returns +infinity
/// when every KDE underflows to zero density (maximally anomalous sentinel).
class KdeAggregator {
public:
    KdeAggregator() = default;

    static KdeAggregator fit(const StatTable& c1, std::uint64_t seed);

    double score(std::span<const double> stat_values) const;

    const std::vector<std::string>& stat_names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
    std::vector<KdeModel> kdes_;
};

/// Computes the named statistics for every row of `latents`.
/// A degenerate spectrum in a row maps the "cv" entry to +infinity (the
/// documented maximally-OOD sentinel: its quantile is 1 under any ECDF).
/// Other statistic errors propagate.
StatTable compute_statistics(const LatentMatrix& latents,
                             std::span<const std::string> names,
                             bool parallel = true);

}  // namespace sitn

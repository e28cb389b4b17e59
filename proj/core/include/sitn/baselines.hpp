#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sitn/kde.hpp"

namespace sitn {

/// The three per-sample summaries every likelihood-based detector consumes.
struct StatVector {
    double log_likelihood = 0.0;
    double latent_log_prob = 0.0;
    double divergence_integral = 0.0;
};

/// Negative log-likelihood: the classic density-threshold detector.
/// Higher = more anomalous.
inline double score_loglik(double log_likelihood) { return -log_likelihood; }

/// Mean negative log-likelihood of an in-distribution fit set.
/// Throws errc::insufficient_data on an empty set.
double fit_mean_nll(std::span<const double> log_likelihoods);

/// Typicality: distance of the sample's NLL from the in-distribution mean
/// NLL. Flags both too-unlikely and too-likely samples.
inline double score_typicality(double log_likelihood, double mean_nll) {
    double nll = -log_likelihood;
    return nll < mean_nll ? mean_nll - nll : nll - mean_nll;
}

/// Density-of-states detector: one univariate Gaussian KDE per summary
/// statistic, fitted on in-distribution samples; the score is the negative
/// sum of log densities. All three KDEs underflowing gives +infinity
/// (maximally anomalous).
class DoseModel {
public:
    DoseModel() = default;

    /// Throws errc::insufficient_data for fewer than 2 fit samples and
    /// errc::degenerate_kde when a statistic is constant across the fit set.
    static DoseModel fit(std::span<const StatVector> fit_set,
                         std::uint64_t seed);

    double score(const StatVector& sv) const;

private:
    KdeModel ll_;
    KdeModel latent_;
    KdeModel div_;
};

/// Fitted input-quantisation range for the complexity correction.
struct ComplexityModel {
    double qmin = 0.0;
    double qmax = 0.0;
};

/// Global min-max over a fit set of raw inputs (row-major, n rows of dim).
/// Throws errc::insufficient_data on empty input, errc::degenerate_kde when
/// max == min (nothing to quantise against).
ComplexityModel fit_complexity(std::span<const double> rows, std::size_t n,
                               std::size_t dim);

/// Complexity estimate in bits per dimension: the input is quantised to
/// 8 bits over [qmin, qmax] and deflate-compressed (zlib, best compression);
/// the estimate is 8 * compressed_bytes / dim.
double complexity_bits_per_dim(std::span<const double> x,
                               const ComplexityModel& model);

/// Complexity-adjusted score: -(bits-per-dim likelihood) - complexity, i.e.
/// S = -L_bpd - c with L_bpd = log_likelihood / (dim * ln 2). Higher = more
/// anomalous relative to how compressible the raw input already is.
double score_complexity(double log_likelihood, std::size_t dim,
                        double complexity_bpd);

/// Ensemble disagreement score: -(mean - population variance) of the
/// per-member log-likelihoods. Requires at least 2 members
/// (errc::insufficient_data).
double score_waic(std::span<const double> member_log_likelihoods);

}  // namespace sitn

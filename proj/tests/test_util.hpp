#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written the slow, obvious way (direct
// definitions, extended precision, quadratic algorithms) so that agreement
// with the optimised library code is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline long double normal_cdf_l(long double z) {
    return 0.5L * erfcl(-z / sqrtl(2.0L));
}

/// Direct transcription of the ordered-statistic form of the normality score,
/// in extended precision, with the CDF clamped to [1e-300, 1 - 1e-300].
inline double anderson_darling(std::span<const double> z) {
    std::vector<long double> s(z.begin(), z.end());
    std::sort(s.begin(), s.end());
    const std::size_t d = s.size();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < d; ++i) {
        long double lo = normal_cdf_l(s[i]);
        long double hi = 1.0L - normal_cdf_l(s[d - 1 - i]);
        lo = std::min(std::max(lo, 1e-300L), 1.0L - 1e-300L);
        hi = std::min(std::max(hi, 1e-300L), 1.0L - 1e-300L);
        acc += (2.0L * static_cast<long double>(i + 1) - 1.0L) *
               (logl(lo) + logl(hi));
    }
    const auto dd = static_cast<long double>(d);
    return static_cast<double>(-dd - acc / dd);
}

inline double kolmogorov_smirnov(std::span<const double> z) {
    std::vector<long double> s(z.begin(), z.end());
    std::sort(s.begin(), s.end());
    const std::size_t d = s.size();
    const auto dd = static_cast<long double>(d);
    long double sup = 0.0L;
    for (std::size_t i = 0; i < d; ++i) {
        const long double p = normal_cdf_l(s[i]);
        sup = std::max(sup, static_cast<long double>(i + 1) / dd - p);
        sup = std::max(sup, p - static_cast<long double>(i) / dd);
    }
    return static_cast<double>(sup);
}

/// Naive O(D^2) discrete Fourier transform periodogram (one-sided, DC
/// excluded, Nyquist included for even D), then the population
/// coefficient of variation.
inline std::vector<double> periodogram(std::span<const double> z) {
    const std::size_t n = z.size();
    const std::size_t m = n / 2;
    std::vector<double> power(m);
    for (std::size_t k = 1; k <= m; ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t j = 0; j < n; ++j) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> *
                                    static_cast<long double>(j) *
                                    static_cast<long double>(k) /
                                    static_cast<long double>(n);
            re += static_cast<long double>(z[j]) * cosl(ang);
            im += static_cast<long double>(z[j]) * sinl(ang);
        }
        power[k - 1] = static_cast<double>(re * re + im * im);
    }
    return power;
}

inline double spectral_cv(std::span<const double> z) {
    const std::vector<double> power = periodogram(z);
    long double mean = 0.0L;
    for (double v : power) mean += v;
    mean /= static_cast<long double>(power.size());
    long double ss = 0.0L;
    for (double v : power) {
        const long double d = v - mean;
        ss += d * d;
    }
    return static_cast<double>(
        sqrtl(ss / static_cast<long double>(power.size())) / mean);
}

/// Direct-sum Gaussian kernel density (no log-space tricks).
inline double kde_log_density(std::span<const double> centers, double bandwidth,
                              double x) {
    long double acc = 0.0L;
    for (double c : centers) {
        const long double d = (x - c) / bandwidth;
        acc += expl(-0.5L * d * d);
    }
    const long double norm = static_cast<long double>(centers.size()) *
                             bandwidth *
                             sqrtl(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(logl(acc / norm));
}

/// All-pairs rank probability: P(pos > neg) + 0.5 P(pos == neg).
inline double auroc(std::span<const double> scores,
                    std::span<const int> labels) {
    long double wins = 0.0L;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0L;
            } else if (scores[i] == scores[j]) {
                wins += 0.5L;
            }
        }
    }
    return static_cast<double>(wins / static_cast<long double>(pairs));
}

}  // namespace oracle

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sitn::gof {

/// Standard normal CDF, Phi(x) = erfc(-x/sqrt(2))/2. Full double precision in
/// both tails (no catastrophic cancellation near 1).
double standard_normal_cdf(double x) noexcept;

/// Inverse standard normal CDF (Wichura's AS 241 rational approximations,
/// ~1e-15 relative accuracy). p must lie in (0, 1).
double standard_normal_quantile(double p);

/// Throws errc::invalid_input unless every entry is finite and the length is
/// at least `min_dim`.
void validate_vector(std::span<const double> z, std::size_t min_dim,
                     const char* what);

/// Single-sample Anderson-Darling statistic of z against N(0, 1):
///
///   S = -D - (1/D) * sum_i (2i-1) * [ln Phi(z_(i)) + ln(1 - Phi(z_(D+1-i)))]
///
/// with the CDF values clamped to [1e-300, 1 - 1e-300] before the logarithms,
/// so the statistic is finite for arbitrarily extreme inputs. The upper-tail
/// log term is evaluated as ln Phi(-z), which equals ln(1 - Phi(z)) exactly
/// and keeps full precision where 1 - Phi underflows. Requires D >= 1.
double anderson_darling(std::span<const double> z);

/// Kolmogorov-Smirnov statistic of z against N(0, 1):
/// sup_i max(i/D - Phi(z_(i)), Phi(z_(i)) - (i-1)/D). Requires D >= 1.
double kolmogorov_smirnov(std::span<const double> z);

/// One-sided periodogram of z with the DC bin excluded. power[k-1] is the
/// squared magnitude of the unnormalised DFT at frequency k for
/// k = 1 .. floor(D/2); the Nyquist bin is included when D is even. Works for
/// any D >= 4 (not just powers of two); treats the vector in its stored
/// (row-major flattened) order.
struct Periodogram {
    std::vector<double> power;

    std::size_t bins() const noexcept { return power.size(); }
};

Periodogram periodogram(std::span<const double> z);

/// Spectral coefficient of variation: population std / mean over the retained
/// periodogram bins. Scale-invariant; approaches 1 for Gaussian white noise.
/// Throws errc::degenerate_spectrum when the retained bins carry no spectral
/// mass (constant or all-zero input).
double spectral_cv(const Periodogram& p);
double spectral_cv(std::span<const double> z);

/// Registry of named scalar test statistics usable in calibration sets:
/// "ad" (Anderson-Darling), "cv" (spectral CV), "ks" (Kolmogorov-Smirnov).
/// Unknown names throw errc::configuration.
using StatisticFn = double (*)(std::span<const double>);
StatisticFn statistic_by_name(std::string_view name);

/// True if `name` names a registered statistic.
bool is_statistic_name(std::string_view name) noexcept;

}  // namespace sitn::gof

#include "sitn/gof.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sitn/errors.hpp"

namespace sitn::gof {

double standard_normal_cdf(double x) noexcept {
    // erfc keeps full relative precision in the lower tail, where
    // 0.5 * (1 + erf) would cancel catastrophically.
    return 0.5 * std::erfc(-x * 0.7071067811865475244);  // 1/sqrt(2)
}

namespace {

// Wichura's rational approximations for the normal quantile (double
// precision, ~1e-15 relative error).
double quantile_core(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

// ln of the clamped CDF value: logarithms stay finite for arbitrarily extreme
// arguments.
double log_clamped_cdf(double z) {
    const double p = standard_normal_cdf(z);
    if (p < 1e-300) return std::log(1e-300);
    return std::log(p);
}

}  // namespace

double standard_normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, errc::invalid_input,
            "normal quantile requires p in (0, 1), got " + std::to_string(p));
    return quantile_core(p);
}

void validate_vector(std::span<const double> z, std::size_t min_dim,
                     const char* what) {
    require(z.size() >= min_dim, errc::invalid_input,
            std::string(what) + ": need at least " + std::to_string(min_dim) +
                " entries, got " + std::to_string(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i) {
        require(std::isfinite(z[i]), errc::invalid_input,
                std::string(what) + ": non-finite entry at index " +
                    std::to_string(i));
    }
}

double anderson_darling(std::span<const double> z) {
    validate_vector(z, 1, "anderson_darling");
    std::vector<double> s(z.begin(), z.end());
    std::sort(s.begin(), s.end());
    const std::size_t d = s.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double lo = log_clamped_cdf(s[i]);           // ln F(z_(i+1))
        const double hi = log_clamped_cdf(-s[d - 1 - i]);  // ln(1 - F(z_(d-i)))
        acc += (2.0 * static_cast<double>(i + 1) - 1.0) * (lo + hi);
    }
    const double dd = static_cast<double>(d);
    return -dd - acc / dd;
}

double kolmogorov_smirnov(std::span<const double> z) {
    validate_vector(z, 1, "kolmogorov_smirnov");
    std::vector<double> s(z.begin(), z.end());
    std::sort(s.begin(), s.end());
    const std::size_t d = s.size();
    const double dd = static_cast<double>(d);
    double sup = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double p = standard_normal_cdf(s[i]);
        const double above = static_cast<double>(i + 1) / dd - p;
        const double below = p - static_cast<double>(i) / dd;
        sup = std::max(sup, std::max(above, below));
    }
    return sup;
}

namespace {

// FFTW planning is not thread-safe; new-array execution is. Plans are created
// once per transform size under a lock (FFTW_UNALIGNED so they accept any
// input/output buffers) and reused for the life of the process.
fftw_plan plan_for_size(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, fftw_plan>* plans =
        new std::unordered_map<std::size_t, fftw_plan>();  // intentionally leaked
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans->find(n);
    if (it != plans->end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    require(in != nullptr && out != nullptr, errc::io_failure,
            "periodogram: transform buffer allocation failed");
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    require(p != nullptr, errc::configuration,
            "periodogram: transform planning failed for size " +
                std::to_string(n));
    plans->emplace(n, p);
    return p;
}

}  // namespace

Periodogram periodogram(std::span<const double> z) {
    validate_vector(z, 4, "periodogram");
    require(z.size() <= static_cast<std::size_t>(std::numeric_limits<int>::max()),
            errc::invalid_input, "periodogram: vector too long");
    const std::size_t n = z.size();
    const std::size_t m = n / 2;  // retained bins: k = 1 .. floor(n/2)
    fftw_plan plan = plan_for_size(n);

    std::vector<double> in(z.begin(), z.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_execute_dft_r2c(plan, in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));

    Periodogram p;
    p.power.resize(m);
    for (std::size_t k = 1; k <= m; ++k) p.power[k - 1] = std::norm(out[k]);
    return p;
}

double spectral_cv(const Periodogram& p) {
    const std::size_t m = p.bins();
    require(m >= 2, errc::invalid_input,
            "spectral_cv: need at least 2 spectral bins");
    double total = 0.0;
    for (double v : p.power) total += v;
    require(total > 0.0, errc::degenerate_spectrum,
            "spectral_cv: no spectral mass in the retained bins");
    const double mean = total / static_cast<double>(m);
    double ss = 0.0;
    for (double v : p.power) {
        const double d = v - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(m)) / mean;
}

double spectral_cv(std::span<const double> z) {
    Periodogram p = periodogram(z);
    // Scale-aware degeneracy guard: a constant vector concentrates all mass in
    // the excluded DC bin, leaving only floating-point crumbs in the retained
    // bins. Treat retained mass below 1e-20 of the Parseval total as absent so
    // the statistic is never computed from rounding noise.
    double total = 0.0;
    for (double v : p.power) total += v;
    double energy = 0.0;
    for (double v : z) energy += v * v;
    const double floor = 1e-20 * static_cast<double>(z.size()) * energy;
    require(total > floor, errc::degenerate_spectrum,
            "spectral_cv: no spectral mass in the retained bins");
    return spectral_cv(p);
}

StatisticFn statistic_by_name(std::string_view name) {
    if (name == "ad") return &anderson_darling;
    if (name == "cv") {
        return static_cast<StatisticFn>(&spectral_cv);
    }
    if (name == "ks") return &kolmogorov_smirnov;
    raise(errc::configuration,
          "unknown statistic '" + std::string(name) + "' (known: ad, cv, ks)");
}

bool is_statistic_name(std::string_view name) noexcept {
    return name == "ad" || name == "cv" || name == "ks";
}

}  // namespace sitn::gof

#include "sitn/baselines.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sitn/errors.hpp"
#include "sitn/rng.hpp"

namespace sitn {

double fit_mean_nll(std::span<const double> log_likelihoods) {
    require(!log_likelihoods.empty(), errc::insufficient_data,
            "typicality: empty fit set");
    double acc = 0.0;
    for (double ll : log_likelihoods) {
        require(std::isfinite(ll), errc::invalid_input,
                "typicality: non-finite log-likelihood in fit set");
        acc += -ll;
    }
    return acc / static_cast<double>(log_likelihoods.size());
}

DoseModel DoseModel::fit(std::span<const StatVector> fit_set,
                         std::uint64_t seed) {
    require(fit_set.size() >= 2, errc::insufficient_data,
            "density-of-states: need at least 2 fit samples, got " +
                std::to_string(fit_set.size()));
    std::vector<double> ll, latent, div;
    ll.reserve(fit_set.size());
    latent.reserve(fit_set.size());
    div.reserve(fit_set.size());
    for (const StatVector& sv : fit_set) {
        ll.push_back(sv.log_likelihood);
        latent.push_back(sv.latent_log_prob);
        div.push_back(sv.divergence_integral);
    }
    DoseModel m;
    m.ll_ = fit_kde(ll, derive_seed(seed, 0));
    m.latent_ = fit_kde(latent, derive_seed(seed, 1));
    m.div_ = fit_kde(div, derive_seed(seed, 2));
    return m;
}

double DoseModel::score(const StatVector& sv) const {
    require(!ll_.centers.empty(), errc::configuration,
            "density-of-states: model is not fitted");
    return -(kde_log_density(ll_, sv.log_likelihood) +
             kde_log_density(latent_, sv.latent_log_prob) +
             kde_log_density(div_, sv.divergence_integral));
}

ComplexityModel fit_complexity(std::span<const double> rows, std::size_t n,
                               std::size_t dim) {
    require(n >= 1 && dim >= 1, errc::insufficient_data,
            "complexity: empty fit set");
    require(rows.size() == n * dim, errc::invalid_input,
            "complexity: fit set size does not match n * dim");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : rows) {
        require(std::isfinite(v), errc::invalid_input,
                "complexity: non-finite fit value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    require(hi > lo, errc::degenerate_kde,
            "complexity: constant fit set has no quantisation range");
    return ComplexityModel{lo, hi};
}

double complexity_bits_per_dim(std::span<const double> x,
                               const ComplexityModel& model) {
    require(!x.empty(), errc::invalid_input, "complexity: empty input");
    require(model.qmax > model.qmin, errc::configuration,
            "complexity: model is not fitted");
    // 8-bit quantisation over the fitted global range; out-of-range values
    // saturate at the byte boundaries.
    std::vector<unsigned char> bytes(x.size());
    const double scale = 255.0 / (model.qmax - model.qmin);
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(!std::isnan(x[i]), errc::invalid_input,
                "complexity: NaN input value");
        const double q = std::round((x[i] - model.qmin) * scale);
        bytes[i] = static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
    }
    uLongf cap = compressBound(static_cast<uLong>(bytes.size()));
    std::vector<unsigned char> out(cap);
    const int rc = compress2(out.data(), &cap, bytes.data(),
                             static_cast<uLong>(bytes.size()),
                             Z_BEST_COMPRESSION);
    require(rc == Z_OK, errc::io_failure, "complexity: compression failed");
    return 8.0 * static_cast<double>(cap) / static_cast<double>(x.size());
}

double score_complexity(double log_likelihood, std::size_t dim,
                        double complexity_bpd) {
    require(dim >= 1, errc::invalid_input,
            "complexity: dimension must be positive");
    const double l_bpd =
        log_likelihood / (static_cast<double>(dim) * std::numbers::ln2);
    return -l_bpd - complexity_bpd;
}

double score_waic(std::span<const double> member_log_likelihoods) {
    const std::size_t e = member_log_likelihoods.size();
    require(e >= 2, errc::insufficient_data,
            "ensemble score: need at least 2 members, got " +
                std::to_string(e));
    double mean = 0.0;
    for (double ll : member_log_likelihoods) {
        require(std::isfinite(ll), errc::invalid_input,
                "ensemble score: non-finite member log-likelihood");
        mean += ll;
    }
    mean /= static_cast<double>(e);
    double var = 0.0;
    for (double ll : member_log_likelihoods) {
        const double d = ll - mean;
        var += d * d;
    }
    var /= static_cast<double>(e);
    return -(mean - var);
}

}  // namespace sitn

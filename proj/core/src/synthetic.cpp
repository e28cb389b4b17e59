#include "sitn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sitn/errors.hpp"

namespace sitn {

void MixtureSpec::validate() const {
    require(dim >= 1, errc::configuration,
            "mixture: dimension must be positive");
    require(mean.size() == dim, errc::configuration,
            "mixture: mean length does not match dim");
    require(sigma.size() == dim, errc::configuration,
            "mixture: sigma length does not match dim");
    for (double v : mean) {
        require(std::isfinite(v), errc::configuration,
                "mixture: non-finite mean entry");
    }
    for (double v : sigma) {
        require(std::isfinite(v) && v > 0.0, errc::configuration,
                "mixture: sigma entries must be positive");
    }
}

MixtureSpec MixtureSpec::planar_default() {
    MixtureSpec s;
    s.dim = 2;
    s.mean = {1.0, 0.0};
    s.sigma = {0.6, 0.6};
    return s;
}

MixtureSpec MixtureSpec::anisotropic32() {
    MixtureSpec s;
    s.dim = 32;
    s.mean.assign(32, 0.0);
    s.mean[0] = 1.5;
    s.sigma.assign(32, 1.0);
    s.sigma[0] = 0.5;
    return s;
}

LatentMatrix sample_white_noise(std::size_t n, std::size_t dim, Rng& rng) {
    require(n >= 1 && dim >= 1, errc::invalid_input,
            "sampling: n and dim must be positive");
    LatentMatrix m(n, dim);
    rng.fill_normal(m.data.data(), m.data.size());
    return m;
}

LatentMatrix sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    require(n >= 1, errc::invalid_input, "sampling: n must be positive");
    LatentMatrix m(n, spec.dim);
    // Draw order per row: component choice, then the row's normals.
    for (std::size_t i = 0; i < n; ++i) {
        const double sign = rng.below(2) == 0 ? 1.0 : -1.0;
        std::span<double> row = m.row(i);
        rng.fill_normal(row.data(), row.size());
        for (std::size_t j = 0; j < spec.dim; ++j) {
            row[j] = row[j] * spec.sigma[j] + sign * spec.mean[j];
        }
    }
    return m;
}

PerturbKind perturb_kind_from_name(std::string_view name) {
    if (name == "mean_shift") return PerturbKind::mean_shift;
    if (name == "variance_scale") return PerturbKind::variance_scale;
    if (name == "moving_average") return PerturbKind::moving_average;
    if (name == "constant_patch") return PerturbKind::constant_patch;
    raise(errc::configuration,
          "unknown perturbation '" + std::string(name) +
              "' (known: mean_shift, variance_scale, moving_average, "
              "constant_patch)");
}

std::string_view perturb_kind_name(PerturbKind kind) {
    switch (kind) {
        case PerturbKind::mean_shift: return "mean_shift";
        case PerturbKind::variance_scale: return "variance_scale";
        case PerturbKind::moving_average: return "moving_average";
        case PerturbKind::constant_patch: return "constant_patch";
    }
    return "unknown";
}

void perturb(LatentMatrix& latents, PerturbKind kind, double strength) {
    require(std::isfinite(strength), errc::invalid_input,
            "perturb: strength must be finite");
    require(latents.count >= 1 && latents.dim >= 1, errc::invalid_input,
            "perturb: empty matrix");
    const std::size_t d = latents.dim;
    switch (kind) {
        case PerturbKind::mean_shift: {
            if (strength == 0.0) return;
            for (double& v : latents.data) v += strength;
            return;
        }
        case PerturbKind::variance_scale: {
            if (strength == 0.0) return;
            const double factor = 1.0 + strength;
            for (double& v : latents.data) v *= factor;
            return;
        }
        case PerturbKind::moving_average: {
            const auto w = static_cast<long long>(std::llround(strength));
            require(w >= 0, errc::invalid_input,
                    "perturb: moving-average window must be non-negative");
            if (w <= 1) return;  // a 0- or 1-wide window changes nothing
            require(static_cast<std::size_t>(w) <= d, errc::invalid_input,
                    "perturb: moving-average window exceeds the dimension");
            const auto ws = static_cast<std::size_t>(w);
            // Circular window sum divided by sqrt(w): correlates neighbours
            // while keeping the marginal variance at 1.
            const double norm = 1.0 / std::sqrt(static_cast<double>(ws));
            std::vector<double> buf(d);
            for (std::size_t i = 0; i < latents.count; ++i) {
                std::span<double> row = latents.row(i);
                for (std::size_t j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < ws; ++k) {
                        acc += row[(j + k) % d];
                    }
                    buf[j] = acc * norm;
                }
                std::copy(buf.begin(), buf.end(), row.begin());
            }
            return;
        }
        case PerturbKind::constant_patch: {
            require(strength >= 0.0 && strength <= 1.0, errc::invalid_input,
                    "perturb: patch fraction must lie in [0, 1]");
            const auto width = static_cast<std::size_t>(
                std::llround(strength * static_cast<double>(d)));
            if (width == 0) return;
            for (std::size_t i = 0; i < latents.count; ++i) {
                std::span<double> row = latents.row(i);
                std::fill(row.begin(), row.begin() + width, 0.0);
            }
            return;
        }
    }
    raise(errc::configuration, "perturb: unknown perturbation kind");
}

LatentMatrix sample_variance_scaled_ood(const FlowModel& flow, double a,
                                        std::size_t n, Rng& rng,
                                        const SolverConfig& config) {
    require(std::isfinite(a) && a > 0.0, errc::invalid_input,
            "variance-scaled sampling: scale must be positive");
    require(n >= 1, errc::invalid_input, "sampling: n must be positive");
    const std::size_t d = flow.dim();
    require(d >= 1, errc::configuration, "flow: model is not initialised");
    LatentMatrix z(n, d);
    rng.fill_normal(z.data.data(), z.data.size());
    for (double& v : z.data) v *= a;
    LatentMatrix out(n, d);
    out.data = transport_batch(flow, z.data, n, /*forward=*/true, config);
    return out;
}

}  // namespace sitn

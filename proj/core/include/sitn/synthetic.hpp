#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sitn/flow.hpp"
#include "sitn/rng.hpp"
#include "sitn/types.hpp"

namespace sitn {

/// Symmetric two-component Gaussian mixture 0.5 N(+mean, diag(sigma^2)) +
/// 0.5 N(-mean, diag(sigma^2)). `mean` and `sigma` must have length dim
/// (sigma entries positive).
struct MixtureSpec {
    std::size_t dim = 0;
    std::vector<double> mean;
    std::vector<double> sigma;

    void validate() const;

    /// +-1.0 on the first coordinate, common scale 0.6: a well-separated
    /// planar target that a small flow transports cleanly.
    static MixtureSpec planar_default();

    /// +-1.5 on the first coordinate, sigma (0.5, 1, ..., 1) in 32
    /// dimensions: the anisotropic benchmark target.
    static MixtureSpec anisotropic32();
};

/// n rows of dim standard-normal draws.
LatentMatrix sample_white_noise(std::size_t n, std::size_t dim, Rng& rng);

/// n rows from the mixture.
LatentMatrix sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng);

enum class PerturbKind {
    mean_shift,      // add `strength` to every coordinate
    variance_scale,  // multiply every coordinate by (1 + strength)
    moving_average,  // circular mean over round(strength) neighbours, then
                     // rescale by sqrt(window) to restore the variance
    constant_patch,  // zero out the first round(strength * dim) coordinates
};

PerturbKind perturb_kind_from_name(std::string_view name);
std::string_view perturb_kind_name(PerturbKind kind);

/// Applies the perturbation in place to every row. strength == 0 is exactly
/// the identity for every kind.
void perturb(LatentMatrix& latents, PerturbKind kind, double strength);

/// Constructive out-of-distribution sampler: draws z ~ N(0, a^2 I) and pushes
/// it forward through the flow (t 0 -> 1). a != 1 yields samples off the
/// learned data manifold with known latent geometry.
LatentMatrix sample_variance_scaled_ood(const FlowModel& flow, double a,
                                        std::size_t n, Rng& rng,
                                        const SolverConfig& config);

}  // namespace sitn

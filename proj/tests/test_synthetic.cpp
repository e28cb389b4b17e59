// Synthetic data generators and structured perturbations.

#include <doctest.h>

#include <sitn/errors.hpp>
#include <sitn/flow.hpp>
#include <sitn/gof.hpp>
#include <sitn/rng.hpp>
#include <sitn/synthetic.hpp>

#include <cmath>
#include <numeric>
#include <vector>

using namespace sitn;

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double var_of(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("white noise: moments and determinism") {
    Rng rng(5);
    const LatentMatrix m = sample_white_noise(2000, 16, rng);
    CHECK(m.count == 2000);
    CHECK(m.dim == 16);
    CHECK(std::abs(mean_of(m.data)) < 0.02);
    CHECK(var_of(m.data) == doctest::Approx(1.0).epsilon(0.02));

    Rng rng2(5);
    const LatentMatrix m2 = sample_white_noise(2000, 16, rng2);
    CHECK(m.data == m2.data);
}

TEST_CASE("mixture: two symmetric components with the requested geometry") {
    MixtureSpec spec = MixtureSpec::planar_default();
    CHECK(spec.dim == 2);
    CHECK(spec.mean == std::vector<double>{1.0, 0.0});
    CHECK(spec.sigma == std::vector<double>{0.6, 0.6});

    Rng rng(6);
    const LatentMatrix m = sample_mixture(spec, 4000, rng);

    // Component signs balance, and conditional on the sign the first
    // coordinate is N(+-1, 0.6^2).
    std::vector<double> plus, minus, second;
    for (std::size_t i = 0; i < m.count; ++i) {
        (m.row(i)[0] > 0 ? plus : minus).push_back(m.row(i)[0]);
        second.push_back(m.row(i)[1]);
    }
    CHECK(static_cast<double>(plus.size()) / 4000.0 ==
          doctest::Approx(0.5).epsilon(0.06));
    CHECK(mean_of(plus) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(mean_of(minus) == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(var_of(second) == doctest::Approx(0.36).epsilon(0.08));
    // Unconditional first-coordinate variance: sigma^2 + mean^2 = 1.36.
    std::vector<double> first(plus);
    first.insert(first.end(), minus.begin(), minus.end());
    CHECK(var_of(first) == doctest::Approx(1.36).epsilon(0.08));

    const MixtureSpec aniso = MixtureSpec::anisotropic32();
    CHECK(aniso.dim == 32);
    CHECK(aniso.mean[0] == 1.5);
    CHECK(aniso.sigma[0] == 0.5);
    CHECK(aniso.sigma[1] == 1.0);
    CHECK(aniso.sigma[31] == 1.0);

    MixtureSpec bad = spec;
    bad.sigma[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = spec;
    bad.mean.pop_back();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = spec;
    bad.dim = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("perturbations: zero strength is the exact identity") {
    Rng rng(7);
    const LatentMatrix original = sample_white_noise(50, 24, rng);
    for (PerturbKind kind :
         {PerturbKind::mean_shift, PerturbKind::variance_scale,
          PerturbKind::moving_average, PerturbKind::constant_patch}) {
        LatentMatrix copy = original;
        perturb(copy, kind, 0.0);
        CHECK(copy.data == original.data);
    }
}

TEST_CASE("perturbations: effect of each kind") {
    Rng rng(8);
    const LatentMatrix original = sample_white_noise(400, 64, rng);

    LatentMatrix shifted = original;
    perturb(shifted, PerturbKind::mean_shift, 0.3);
    for (std::size_t i = 0; i < original.data.size(); ++i)
        CHECK(shifted.data[i] == original.data[i] + 0.3);

    LatentMatrix scaled = original;
    perturb(scaled, PerturbKind::variance_scale, 0.5);
    for (std::size_t i = 0; i < original.data.size(); ++i)
        CHECK(scaled.data[i] == original.data[i] * 1.5);

    LatentMatrix patched = original;
    perturb(patched, PerturbKind::constant_patch, 0.25);
    for (std::size_t j = 0; j < 64; ++j) {
        if (j < 16) {
            CHECK(patched.row(0)[j] == 0.0);  // round(0.25 * 64) = 16 zeroed
        } else {
            CHECK(patched.row(0)[j] == original.row(0)[j]);
        }
    }
    CHECK_THROWS_AS([&] {
        LatentMatrix c = original;
        perturb(c, PerturbKind::constant_patch, 1.5);
    }(), Error);
}

TEST_CASE("moving average: circular window, variance preserved") {
    Rng rng(9);
    const std::size_t n = 200, d = 128;
    const LatentMatrix original = sample_white_noise(n, d, rng);
    LatentMatrix ma = original;
    perturb(ma, PerturbKind::moving_average, 4.0);

    // Hand-computed circular forward window with 1/sqrt(w) normalisation.
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += original.row(0)[(j + k) % d];
        CHECK(ma.row(0)[j] == doctest::Approx(s / 2.0).epsilon(1e-12));
    }

    // The 1/sqrt(w) scaling keeps the per-entry variance at 1, so the
    // corruption is invisible to marginal tests but glaring to spectral ones.
    CHECK(var_of(ma.data) == doctest::Approx(1.0).epsilon(0.05));
    double cv_sum = 0.0, ad_like = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cv_sum += gof::spectral_cv(ma.row(i));
        ad_like += gof::anderson_darling(ma.row(i));
    }
    CHECK(cv_sum / static_cast<double>(n) > 1.5);  // far off the white-noise 1
    CHECK(ad_like / static_cast<double>(n) < 4.0);  // marginals barely move

    // Window 1 (or rounding to it) is the identity; wider than the dimension
    // is rejected.
    LatentMatrix same = original;
    perturb(same, PerturbKind::moving_average, 1.4);  // rounds to 1
    CHECK(same.data == original.data);
    CHECK_THROWS_AS([&] {
        LatentMatrix c = original;
        perturb(c, PerturbKind::moving_average, 1e9);
    }(), Error);
}

TEST_CASE("perturbation names round-trip") {
    for (PerturbKind kind :
         {PerturbKind::mean_shift, PerturbKind::variance_scale,
          PerturbKind::moving_average, PerturbKind::constant_patch}) {
        CHECK(perturb_kind_from_name(perturb_kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(perturb_kind_from_name("gaussian_blur"), Error);
}

TEST_CASE("variance-scaled sampler: known latent geometry through a flow") {
    // Through the zero flow (identity transport) the samples are exactly
    // a * z, so the pooled variance is a^2.
    const FlowModel identity = FlowModel::zero(16);
    Rng rng(10);
    const LatentMatrix ood =
        sample_variance_scaled_ood(identity, 2.0, 500, rng, SolverConfig{});
    CHECK(ood.count == 500);
    CHECK(ood.dim == 16);
    CHECK(var_of(ood.data) == doctest::Approx(4.0).epsilon(0.05));
    CHECK(std::abs(mean_of(ood.data)) < 0.08);

    // a = 1 through the identity is plain white noise with the same draws.
    Rng rng2(10);
    const LatentMatrix null =
        sample_variance_scaled_ood(identity, 1.0, 500, rng2, SolverConfig{});
    for (std::size_t i = 0; i < null.data.size(); ++i)
        CHECK(null.data[i] == doctest::Approx(ood.data[i] / 2.0).epsilon(1e-12));

    // Through a nonzero field the push-forward actually moves points.
    const FlowModel moved = FlowModel::init(16, 3);
    Rng rng3(10);
    const LatentMatrix pushed =
        sample_variance_scaled_ood(moved, 2.0, 50, rng3, SolverConfig{});
    bool differs = false;
    for (std::size_t i = 0; i < pushed.data.size(); ++i)
        differs = differs || pushed.data[i] != 2.0 * ood.data[i] / 2.0;
    CHECK(pushed.count == 50);
}

TEST_CASE("samplers validate their inputs") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_white_noise(0, 4, rng), Error);
    CHECK_THROWS_AS(sample_white_noise(4, 0, rng), Error);
    const MixtureSpec spec = MixtureSpec::planar_default();
    CHECK_THROWS_AS(sample_mixture(spec, 0, rng), Error);
    const FlowModel identity = FlowModel::zero(4);
    CHECK_THROWS_AS(
        sample_variance_scaled_ood(identity, 0.0, 5, rng, SolverConfig{}),
        Error);
    CHECK_THROWS_AS(
        sample_variance_scaled_ood(identity, -1.0, 5, rng, SolverConfig{}),
        Error);
}

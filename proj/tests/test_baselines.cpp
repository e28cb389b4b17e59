// Likelihood-based detector scores: thresholds, typicality, density-of-states,
// complexity correction, and ensemble disagreement.

#include <doctest.h>

#include <sitn/baselines.hpp>
#include <sitn/errors.hpp>
#include <sitn/kde.hpp>
#include <sitn/rng.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "test_util.hpp"

using namespace sitn;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("loglik and typicality scores") {
    CHECK(score_loglik(-3.5) == 3.5);
    CHECK(score_loglik(2.0) == -2.0);

    const std::vector<double> lls{-1.0, -2.0, -3.0};
    const double mean_nll = fit_mean_nll(lls);
    CHECK(mean_nll == doctest::Approx(2.0));

    // Symmetric around the fitted mean: both unusually unlikely and unusually
    // likely samples score high.
    CHECK(score_typicality(-2.0, mean_nll) == 0.0);
    CHECK(score_typicality(-4.5, mean_nll) == doctest::Approx(2.5));
    CHECK(score_typicality(0.5, mean_nll) == doctest::Approx(2.5));
    CHECK(score_typicality(-4.5, mean_nll) == score_typicality(0.5, mean_nll));

    CHECK_THROWS_AS(fit_mean_nll({}), Error);
}

TEST_CASE("dose: negative sum of per-statistic kde log densities") {
    Rng rng(3);
    std::vector<StatVector> fit_set(200);
    for (auto& sv : fit_set) {
        sv.log_likelihood = -5.0 + rng.normal();
        sv.latent_log_prob = -4.0 + 0.5 * rng.normal();
        sv.divergence_integral = 0.3 * rng.normal();
    }
    const std::uint64_t seed = 21;
    const DoseModel model = DoseModel::fit(fit_set, seed);

    // Refit the three KDEs independently with the documented seed layout and
    // evaluate with the direct-sum oracle.
    std::vector<double> c0, c1, c2;
    for (const auto& sv : fit_set) {
        c0.push_back(sv.log_likelihood);
        c1.push_back(sv.latent_log_prob);
        c2.push_back(sv.divergence_integral);
    }
    const KdeModel k0 = fit_kde(c0, derive_seed(seed, 0));
    const KdeModel k1 = fit_kde(c1, derive_seed(seed, 1));
    const KdeModel k2 = fit_kde(c2, derive_seed(seed, 2));

    StatVector probe;
    probe.log_likelihood = -5.6;
    probe.latent_log_prob = -3.7;
    probe.divergence_integral = 0.2;
    const double expected =
        -(oracle::kde_log_density(k0.centers, k0.bandwidth, probe.log_likelihood) +
          oracle::kde_log_density(k1.centers, k1.bandwidth, probe.latent_log_prob) +
          oracle::kde_log_density(k2.centers, k2.bandwidth, probe.divergence_integral));
    CHECK(model.score(probe) == doctest::Approx(expected).epsilon(1e-12));

    // In-distribution probes score lower than far-out probes.
    StatVector far = probe;
    far.log_likelihood = -40.0;
    CHECK(model.score(far) > model.score(probe));

    // Zero density in every statistic is the +inf sentinel.
    StatVector impossible;
    impossible.log_likelihood = kInf;
    impossible.latent_log_prob = kInf;
    impossible.divergence_integral = kInf;
    CHECK(model.score(impossible) == kInf);

    CHECK_THROWS_AS(DoseModel::fit(std::vector<StatVector>(1), 0), Error);
    // A constant column has no bandwidth.
    std::vector<StatVector> flat(50);
    for (auto& sv : flat) {
        sv.log_likelihood = -5.0;
        sv.latent_log_prob = rng.normal();
        sv.divergence_integral = rng.normal();
    }
    try {
        DoseModel::fit(flat, 0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_kde);
    }
}

TEST_CASE("complexity: quantised compressibility in bits per dimension") {
    Rng rng(11);
    const std::size_t n = 50, dim = 256;
    std::vector<double> rows(n * dim);
    rng.fill_normal(rows);
    const ComplexityModel model = fit_complexity(rows, n, dim);
    CHECK(model.qmin < model.qmax);
    CHECK(model.qmin == *std::min_element(rows.begin(), rows.end()));
    CHECK(model.qmax == *std::max_element(rows.begin(), rows.end()));

    // A constant vector deflates to almost nothing; noise is incompressible
    // (8-bit codes cost ~8 bits each before deflate overhead).
    const std::vector<double> flat(dim, 0.25);
    std::vector<double> noise(dim);
    rng.fill_normal(noise);
    const double c_flat = complexity_bits_per_dim(flat, model);
    const double c_noise = complexity_bits_per_dim(noise, model);
    CHECK(c_flat < 1.0);
    CHECK(c_noise > 6.0);
    CHECK(c_flat < c_noise);

    // Deterministic.
    CHECK(complexity_bits_per_dim(noise, model) == c_noise);

    // Out-of-range values clamp into the quantisation grid rather than throw;
    // non-finite input is rejected.
    std::vector<double> wild(dim, 1e9);
    CHECK(std::isfinite(complexity_bits_per_dim(wild, model)));
    std::vector<double> bad(dim, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(complexity_bits_per_dim(bad, model), Error);

    try {
        fit_complexity(std::vector<double>(dim, 0.5), 1, dim);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_kde);
    }
    CHECK_THROWS_AS(fit_complexity({}, 0, dim), Error);

    // The adjusted score penalises high likelihood on simple inputs: for equal
    // likelihood, the less compressible input scores higher ... and for equal
    // complexity, the higher likelihood scores lower.
    const double s1 = score_complexity(-300.0, dim, c_flat);
    const double s2 = score_complexity(-300.0, dim, c_noise);
    CHECK(s1 > s2);
    CHECK(score_complexity(-100.0, dim, c_flat) < s1);
    // Exact formula: -ll/(dim ln 2) - c.
    CHECK(s1 == doctest::Approx(300.0 / (dim * std::log(2.0)) - c_flat)
                    .epsilon(1e-12));
}

TEST_CASE("waic: mean minus variance of member likelihoods, negated") {
    const std::vector<double> agree{-5.0, -5.0, -5.0};
    CHECK(score_waic(agree) == doctest::Approx(5.0));

    const std::vector<double> spread{-4.0, -6.0};  // mean -5, pop var 1
    CHECK(score_waic(spread) == doctest::Approx(5.0 + 1.0));

    // Disagreement can only raise the score.
    CHECK(score_waic(spread) > score_waic(agree));

    const std::vector<double> one{-5.0};
    try {
        score_waic(one);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::insufficient_data);
    }
}
